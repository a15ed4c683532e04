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

#include <algorithm>
#include <cmath>
#include <string>

#include "singkit/core/binio.hpp"
#include "singkit/dsp/frames.hpp"

// 16-bit PCM mono WAV. Stereo and compressed formats are rejected.

namespace singkit::dsp {

inline void write_wav(const std::string& path, const Waveform& w) {
  w.validate();
  ByteWriter out;
  const std::uint32_t n = std::uint32_t(w.samples.size());
  const std::uint32_t data_bytes = n * 2;
  out.str("RIFF");
  out.u32(36 + data_bytes);
  out.str("WAVE");
  out.str("fmt ");
  out.u32(16);
  out.u16(1); // PCM
  out.u16(1); // mono
  out.u32(std::uint32_t(w.sample_rate));
  out.u32(std::uint32_t(w.sample_rate) * 2);
  out.u16(2);
  out.u16(16);
  out.str("data");
  out.u32(data_bytes);
  for (float s : w.samples) {
    const float c = std::clamp(s, -1.0f, 1.0f);
    out.i16(std::int16_t(std::lround(c * 32767.0f)));
  }
  out.save(path);
}

inline Waveform read_wav(const std::string& path) {
  ByteReader in = ByteReader::from_file(path);
  if (in.str(4) != "RIFF") throw FormatError("not a RIFF file: " + path);
  in.u32();
  if (in.str(4) != "WAVE") throw FormatError("not a WAVE file: " + path);

  Waveform w;
  bool have_fmt = false, have_data = false;
  std::uint16_t channels = 0, bits = 0, format = 0;
  while (in.remaining() >= 8 && !(have_fmt && have_data)) {
    const std::string id = in.str(4);
    const std::uint32_t len = in.u32();
    if (id == "fmt ") {
      if (len < 16) throw FormatError("bad fmt chunk in " + path);
      format = in.u16();
      channels = in.u16();
      w.sample_rate = int(in.u32());
      in.u32();
      in.u16();
      bits = in.u16();
      if (len > 16) in.skip(len - 16);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw FormatError("data chunk before fmt in " + path);
      if (format != 1 || bits != 16)
        throw FormatError("only 16-bit PCM supported: " + path);
      if (channels != 1) throw FormatError("only mono supported: " + path);
      const std::uint32_t n = len / 2;
      w.samples.resize(n);
      for (std::uint32_t i = 0; i < n; ++i)
        w.samples[i] = float(std::int16_t(in.u16())) / 32767.0f;
      have_data = true;
    } else {
      in.skip(len + (len & 1));
    }
  }
  if (!have_data) throw FormatError("no data chunk in " + path);
  return w;
}

// Linear resampler; quality beyond this is out of scope.
inline Waveform resample_linear(const Waveform& w, int target_rate) {
  if (target_rate == w.sample_rate) return w;
  if (target_rate <= 0) throw ConfigError("resample: bad target rate");
  Waveform out;
  out.sample_rate = target_rate;
  const double ratio = double(w.sample_rate) / double(target_rate);
  const std::int64_t n_out = std::int64_t(std::floor(double(w.samples.size() - 1) / ratio)) + 1;
  out.samples.resize(std::size_t(std::max<std::int64_t>(1, n_out)));
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    const double pos = double(i) * ratio;
    const std::size_t i0 = std::size_t(pos);
    const double frac = pos - double(i0);
    const float a = w.samples[std::min(i0, w.samples.size() - 1)];
    const float b = w.samples[std::min(i0 + 1, w.samples.size() - 1)];
    out.samples[i] = float(a + (b - a) * frac);
  }
  return out;
}

} // namespace singkit::dsp
