// Copyright 2026 The singkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "singkit/core/errors.hpp"
#include "singkit/dsp/frames.hpp"
#include "singkit/dsp/pitch_units.hpp"
#include "singkit/midi/stream.hpp"

// Residual log-F0: the bias the pitch model predicts instead of absolute
// pitch. Kept in double so the round trip through apply_residual is exact to
// well under 1e-9 relative; float32 is only used when the residual is
// persisted or fed to training.

namespace singkit::midi {

struct ResidualTrack {
  std::vector<double> residual;   // ln(f0_i) - ln(midi_to_hz(m_i)) on in-mask frames, else 0
  std::vector<std::uint8_t> mask; // 1 where both f0 and midi are sounding
  int voiced_f0_rest_midi = 0;    // excluded: pitch present but MIDI says rest
  int voiced_midi_rest_f0 = 0;    // excluded: MIDI present but pitch says rest

  int frames() const { return int(residual.size()); }

  // Fraction of pitched frames the mask had to exclude.
  double masked_fraction() const {
    int voiced = 0;
    for (std::uint8_t m : mask) voiced += m;
    const int pitched = voiced + voiced_f0_rest_midi;
    return pitched == 0 ? 0.0 : double(voiced_f0_rest_midi) / double(pitched);
  }

  dsp::FrameSeries to_frame_series(int hop, int sample_rate) const {
    dsp::FrameSeries s;
    s.hop = hop;
    s.sample_rate = sample_rate;
    s.kind = dsp::SeriesKind::residual_logf0;
    s.values.resize(residual.size());
    for (std::size_t i = 0; i < residual.size(); ++i) s.values[i] = float(residual[i]);
    return s;
  }
};

inline ResidualTrack residual_logf0(const dsp::FrameSeries& f0, const MidiStream& m) {
  dsp::check_same_frames(f0.frames(), m.frames(), "residual_logf0");
  ResidualTrack r;
  r.residual.assign(f0.values.size(), 0.0);
  r.mask.assign(f0.values.size(), 0);
  for (std::size_t i = 0; i < f0.values.size(); ++i) {
    const bool pitch_on = f0.values[i] > 0.0f;
    const bool midi_on = m.notes[i] != 0.0;
    if (pitch_on && midi_on) {
      r.mask[i] = 1;
      r.residual[i] =
          std::log(double(f0.values[i])) - std::log(dsp::midi_to_hz(m.notes[i]));
    } else if (pitch_on) {
      ++r.voiced_f0_rest_midi;
    } else if (midi_on) {
      ++r.voiced_midi_rest_f0;
    }
  }
  return r;
}

// Inverse of residual_logf0 on sounding MIDI frames: f0 = midi_to_hz(m)·e^r.
inline std::vector<double> apply_residual(const MidiStream& m,
                                          const std::vector<double>& residual) {
  if (int(residual.size()) != m.frames())
    throw ShapeError("apply_residual: " + std::to_string(residual.size()) + " residual frames vs " +
                     std::to_string(m.frames()) + " midi frames");
  std::vector<double> f0(residual.size(), 0.0);
  for (std::size_t i = 0; i < residual.size(); ++i)
    if (m.notes[i] != 0.0)
      f0[i] = dsp::midi_to_hz(m.notes[i]) * std::exp(residual[i]);
  return f0;
}

} // namespace singkit::midi
