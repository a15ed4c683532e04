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

#include <string>

#include "singkit/core/binio.hpp"
#include "singkit/core/errors.hpp"
#include "singkit/dsp/frames.hpp"

// FTR1: the on-disk feature container used for every persisted intermediate.
//   "FTR1" | u32 version | u32 dtype (0 = f32) | u64 rows | u64 cols
//   | u32 hop | u32 sample_rate | rows*cols little-endian f32
// Round trips are bit-exact.

namespace singkit::corpus {

inline constexpr std::uint32_t kFtr1Version = 1;
inline constexpr std::uint32_t kFtr1DtypeF32 = 0;

inline void write_ftr1(const std::string& path, const Mat<float>& m, int hop, int sample_rate) {
  if (!m.all_finite()) throw ValueError("write_ftr1: non-finite values for " + path);
  ByteWriter w;
  w.bytes("FTR1", 4);
  w.u32(kFtr1Version);
  w.u32(kFtr1DtypeF32);
  w.u64(std::uint64_t(m.rows));
  w.u64(std::uint64_t(m.cols));
  w.u32(std::uint32_t(hop));
  w.u32(std::uint32_t(sample_rate));
  for (float v : m.data) w.f32(v);
  w.save(path);
}

inline dsp::FeatureMatrix read_ftr1(const std::string& path) {
  ByteReader r = ByteReader::from_file(path);
  if (r.str(4) != "FTR1") throw FormatError("not an FTR1 file (bad magic): " + path);
  const std::uint32_t version = r.u32();
  if (version != kFtr1Version)
    throw FormatError("unsupported FTR1 version " + std::to_string(version) + " in " + path);
  const std::uint32_t dtype = r.u32();
  if (dtype != kFtr1DtypeF32)
    throw FormatError("unsupported FTR1 dtype code " + std::to_string(dtype) + " in " + path);
  const std::uint64_t rows = r.u64();
  const std::uint64_t cols = r.u64();
  dsp::FeatureMatrix out;
  out.hop = int(r.u32());
  out.sample_rate = int(r.u32());
  if (rows > (1ull << 31) || cols > (1ull << 31))
    throw CorruptionError("FTR1 shape implausible in " + path + ": " + std::to_string(rows) +
                          "x" + std::to_string(cols));
  out.data = Mat<float>(int(rows), int(cols));
  for (auto& v : out.data.data) v = r.f32();
  return out;
}

// FrameSeries ride through FTR1 as T×1 matrices.
inline void write_series_ftr1(const std::string& path, const dsp::FrameSeries& s) {
  Mat<float> m(s.frames(), 1);
  for (int t = 0; t < s.frames(); ++t) m(t, 0) = s.values[std::size_t(t)];
  write_ftr1(path, m, s.hop, s.sample_rate);
}

inline dsp::FrameSeries read_series_ftr1(const std::string& path, dsp::SeriesKind kind) {
  const dsp::FeatureMatrix m = read_ftr1(path);
  if (m.data.cols != 1)
    throw ShapeError("read_series_ftr1: " + path + " has " + std::to_string(m.data.cols) +
                     " columns, expected 1");
  dsp::FrameSeries s;
  s.hop = m.hop;
  s.sample_rate = m.sample_rate;
  s.kind = kind;
  s.values.resize(std::size_t(m.data.rows));
  for (int t = 0; t < m.data.rows; ++t) s.values[std::size_t(t)] = m.data(t, 0);
  return s;
}

} // namespace singkit::corpus
