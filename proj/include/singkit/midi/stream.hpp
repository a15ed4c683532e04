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

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "singkit/core/errors.hpp"
#include "singkit/dsp/frames.hpp"
#include "singkit/dsp/pitch_units.hpp"

namespace singkit::midi {

enum class SourceTag { phoneme_based, polyphonic, flattened, quantizer, file };

inline const char* source_tag_name(SourceTag t) {
  switch (t) {
    case SourceTag::phoneme_based: return "phoneme_based";
    case SourceTag::polyphonic: return "polyphonic";
    case SourceTag::flattened: return "flattened";
    case SourceTag::quantizer: return "quantizer";
    case SourceTag::file: return "file";
  }
  return "?";
}

// Per-frame note-number track on the shared frame clock. 0 means rest;
// sounding notes live in [12, 120] and may be fractional.
struct MidiStream {
  std::vector<double> notes; // double: mean/variance key shifts are contracted to 1e-6
  SourceTag source_tag = SourceTag::file;

  int frames() const { return int(notes.size()); }

  void validate() const {
    for (std::size_t i = 0; i < notes.size(); ++i) {
      const double n = notes[i];
      if (n == 0.0) continue;
      if (!(n >= 12.0 && n <= 120.0))
        throw ValueError("MidiStream: note " + std::to_string(n) + " at frame " +
                         std::to_string(i) + " outside {0} ∪ [12, 120]");
    }
  }
};

// Converts a pitch track to the semitone domain of Eq. 1's h_i: voiced
// frames through hz_to_midi, unvoiced frames to 0.
inline dsp::FrameSeries f0_to_semitones(const dsp::FrameSeries& f0, const dsp::FrameSeries& vuv) {
  dsp::check_same_frames(f0.frames(), vuv.frames(), "f0_to_semitones");
  dsp::FrameSeries h = f0;
  h.kind = dsp::SeriesKind::logf0; // semitone track rides the logf0 kind
  for (std::size_t i = 0; i < h.values.size(); ++i)
    h.values[i] = vuv.values[i] > 0.0f && f0.values[i] > 0.0f
                      ? float(dsp::hz_to_midi(double(f0.values[i])))
                      : 0.0f;
  return h;
}

// TSV interchange: `frame_index \t note`, one row per frame, 0 for rest.

inline void write_midi_tsv(const std::string& path, const MidiStream& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (std::size_t i = 0; i < m.notes.size(); ++i) {
    char line[64];
    std::snprintf(line, sizeof(line), "%zu\t%.12g\n", i, m.notes[i]);
    out << line;
  }
  if (!out) throw IoError("write failed: " + path);
}

inline MidiStream read_midi_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  MidiStream m;
  m.source_tag = SourceTag::file;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    long long frame = -1;
    double note = 0.0;
    char tab = 0;
    if (!(ss >> frame) || !ss.get(tab) || tab != '\t' || !(ss >> note))
      throw FormatError(path + ":" + std::to_string(lineno) + ": expected `frame\\tnote`");
    if (frame != (long long)(m.notes.size()))
      throw FormatError(path + ":" + std::to_string(lineno) + ": frame index " +
                        std::to_string(frame) + " out of order (expected " +
                        std::to_string(m.notes.size()) + ")");
    m.notes.push_back(note);
  }
  m.validate();
  return m;
}

} // namespace singkit::midi
