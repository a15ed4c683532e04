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
#include <string>

#include "singkit/core/errors.hpp"
#include "singkit/dsp/frames.hpp"
#include "singkit/midi/stream.hpp"

namespace singkit::midi {

// Eq. 1 fusion of two candidate MIDI streams against the semitone pitch
// track h (0 = unvoiced):
//
//   m_i = q_i  if |h_i - p_i| >= |h_i - q_i|
//         p_i  otherwise
//
// The >= puts ties on the q branch. Unvoiced frames emit a rest.
inline MidiStream flatten_midi(const dsp::FrameSeries& h, const MidiStream& p,
                               const MidiStream& q) {
  if (h.frames() != p.frames() || h.frames() != q.frames())
    throw ShapeError("flatten_midi: length mismatch h=" + std::to_string(h.frames()) +
                     " p=" + std::to_string(p.frames()) + " q=" + std::to_string(q.frames()));
  MidiStream m;
  m.source_tag = SourceTag::flattened;
  m.notes.resize(h.values.size());
  for (std::size_t i = 0; i < h.values.size(); ++i) {
    const double hi = double(h.values[i]);
    if (hi == 0.0) {
      m.notes[i] = 0.0;
      continue;
    }
    const double dp = std::abs(hi - p.notes[i]);
    const double dq = std::abs(hi - q.notes[i]);
    m.notes[i] = dp >= dq ? q.notes[i] : p.notes[i];
  }
  return m;
}

} // namespace singkit::midi
