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
#include "singkit/midi/stream.hpp"

// Mean-variance key shifting: maps a MIDI stream into a target singer's
// pitch register before synthesis.

namespace singkit::midi {

struct KeyStats {
  double mean = 0.0; // semitones over voiced frames
  double std = 0.0;  // population standard deviation
};

inline KeyStats compute_key_stats(const MidiStream& m) {
  double sum = 0.0;
  int n = 0;
  for (double v : m.notes)
    if (v != 0.0) {
      sum += v;
      ++n;
    }
  if (n == 0) throw ValueError("compute_key_stats: stream has no voiced frames");
  KeyStats s;
  s.mean = sum / n;
  double sq = 0.0;
  for (double v : m.notes)
    if (v != 0.0) {
      const double d = v - s.mean;
      sq += d * d;
    }
  s.std = std::sqrt(sq / n);
  return s;
}

// Non-integer mode: voiced notes map affinely so the re-measured voiced
// mean/std equal the target (σ ratio treated as 1 when the source is flat).
// Integer mode: a plain transposition by round(μ_tgt - μ_src). Rests stay 0.
inline MidiStream key_shift_mv(const MidiStream& m, const KeyStats& target,
                               bool integer_shift = false) {
  const KeyStats src = compute_key_stats(m);
  if (src.std > 0.0 && !(target.std > 0.0))
    throw ValueError("key_shift_mv: target std must be > 0 when source std is " +
                     std::to_string(src.std));
  MidiStream out = m;
  if (integer_shift) {
    const double shift = std::round(target.mean - src.mean);
    for (auto& v : out.notes)
      if (v != 0.0) v += shift;
    return out;
  }
  const double ratio = src.std == 0.0 ? 1.0 : target.std / src.std;
  for (auto& v : out.notes)
    if (v != 0.0) v = (v - src.mean) * ratio + target.mean;
  return out;
}

} // namespace singkit::midi
