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
#include <vector>

#include "singkit/core/errors.hpp"
#include "singkit/core/mat.hpp"

namespace singkit::dsp {

// Orthonormal DCT-II of one row: c_k = s_k * sum_n x_n cos(pi*(n+0.5)*k/N),
// with s_0 = sqrt(1/N) and s_k = sqrt(2/N) otherwise.
inline std::vector<double> dct2_orthonormal(const double* x, int n, int n_out) {
  if (n_out < 1 || n_out > n) throw ShapeError("dct2: n_out out of range");
  std::vector<double> c(std::size_t(n_out), 0.0);
  for (int k = 0; k < n_out; ++k) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += x[i] * std::cos(3.14159265358979323846 * (i + 0.5) * k / n);
    c[std::size_t(k)] = acc * std::sqrt((k == 0 ? 1.0 : 2.0) / n);
  }
  return c;
}

// First n_ceps mel-cepstral coefficients per frame of a log-mel matrix
// (coefficient 0 is energy-like and is kept; metric code drops it itself).
inline Mat<double> mel_cepstra(const Mat<float>& log_mel, int n_ceps) {
  Mat<double> out(log_mel.rows, n_ceps);
  std::vector<double> row(std::size_t(log_mel.cols), 0.0);
  for (int t = 0; t < log_mel.rows; ++t) {
    for (int j = 0; j < log_mel.cols; ++j) row[std::size_t(j)] = double(log_mel(t, j));
    const std::vector<double> c = dct2_orthonormal(row.data(), log_mel.cols, n_ceps);
    for (int k = 0; k < n_ceps; ++k) out(t, k) = c[std::size_t(k)];
  }
  return out;
}

} // namespace singkit::dsp
