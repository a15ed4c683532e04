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
#include "singkit/nn/params.hpp"

// Checkpoint container: little-endian, float32 tensors, name-ordered
// sections. Saving the same ParamSet twice produces identical bytes.
//
//   "SKCP" | u32 version
//   u64 rng_seed | i64 adam_steps
//   u32 n_params   { u32 name_len, name, u32 rows, u32 cols,
//                    f32 value[r*c], f32 m[r*c], f32 v[r*c] }
//   u32 n_buffers  { name, rows, cols, f32 data[r*c] }
//   u32 n_metadata { key, value }

namespace singkit::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void write_str(ByteWriter& w, const std::string& s) {
  w.u32(std::uint32_t(s.size()));
  w.bytes(s.data(), s.size());
}

inline std::string read_str(ByteReader& r) { return r.str(r.u32()); }

inline void write_f32_mat(ByteWriter& w, const Mat<float>& m) {
  w.u32(std::uint32_t(m.rows));
  w.u32(std::uint32_t(m.cols));
  for (float v : m.data) w.f32(v);
}

inline Mat<float> read_f32_mat(ByteReader& r) {
  const int rows = int(r.u32());
  const int cols = int(r.u32());
  Mat<float> m(rows, cols);
  for (auto& v : m.data) v = r.f32();
  return m;
}

} // namespace detail

inline void save_checkpoint(const ParamSet<float>& ps, const std::string& path) {
  ByteWriter w;
  w.bytes("SKCP", 4);
  w.u32(kCheckpointVersion);
  w.u64(ps.rng_seed);
  w.u64(std::uint64_t(ps.adam_steps));
  w.u32(std::uint32_t(ps.items().size()));
  for (const auto& [name, p] : ps.items()) {
    detail::write_str(w, name);
    detail::write_f32_mat(w, p.value);
    for (float v : p.m.data) w.f32(v);
    for (float v : p.v.data) w.f32(v);
  }
  w.u32(std::uint32_t(ps.buffers.size()));
  for (const auto& [name, b] : ps.buffers) {
    detail::write_str(w, name);
    detail::write_f32_mat(w, b);
  }
  w.u32(std::uint32_t(ps.metadata.size()));
  for (const auto& [key, value] : ps.metadata) {
    detail::write_str(w, key);
    detail::write_str(w, value);
  }
  w.save(path);
}

inline ParamSet<float> load_checkpoint(const std::string& path) {
  ByteReader r = ByteReader::from_file(path);
  if (r.str(4) != "SKCP")
    throw FormatError("not a checkpoint file (bad magic): " + path);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw FormatError("unsupported checkpoint version " + std::to_string(version) + " in " + path);
  ParamSet<float> ps(r.u64());
  ps.adam_steps = std::int64_t(r.u64());
  const std::uint32_t n_params = r.u32();
  for (std::uint32_t i = 0; i < n_params; ++i) {
    const std::string name = detail::read_str(r);
    Param<float> p;
    p.value = detail::read_f32_mat(r);
    p.grad = Mat<float>(p.value.rows, p.value.cols);
    p.m = Mat<float>(p.value.rows, p.value.cols);
    p.v = Mat<float>(p.value.rows, p.value.cols);
    for (auto& v : p.m.data) v = r.f32();
    for (auto& v : p.v.data) v = r.f32();
    ps.items().emplace(name, std::move(p));
  }
  const std::uint32_t n_buffers = r.u32();
  for (std::uint32_t i = 0; i < n_buffers; ++i) {
    const std::string name = detail::read_str(r);
    ps.buffers.emplace(name, detail::read_f32_mat(r));
  }
  const std::uint32_t n_meta = r.u32();
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    const std::string key = detail::read_str(r);
    ps.metadata.emplace(key, detail::read_str(r));
  }
  return ps;
}

} // namespace singkit::nn
