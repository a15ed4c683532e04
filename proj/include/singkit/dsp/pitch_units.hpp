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

namespace singkit::dsp {

// note = 69 + 12*log2(f/440)
inline double hz_to_midi(double f_hz) {
  if (!(f_hz > 0.0))
    throw ValueError("hz_to_midi: frequency must be > 0, got " + std::to_string(f_hz));
  return 69.0 + 12.0 * std::log2(f_hz / 440.0);
}

inline double midi_to_hz(double note) { return 440.0 * std::exp2((note - 69.0) / 12.0); }

// Signed interval from `from_hz` up to `to_hz`, in cents.
inline double cents_between(double from_hz, double to_hz) {
  return 1200.0 * std::log2(to_hz / from_hz);
}

} // namespace singkit::dsp
