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
#include <cstddef>
#include <string>
#include <vector>

#include "singkit/core/errors.hpp"
#include "singkit/core/rng.hpp"

namespace singkit {

// Dense row-major matrix. Row/col counts are ints; desk-scale shapes only.
template <class Real>
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<Real> data;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), data(std::size_t(r) * std::size_t(c), Real(0)) {
    if (r < 0 || c < 0) throw ShapeError("Mat: negative shape " + shape_str(r, c));
  }
  Mat(int r, int c, std::vector<Real> d) : rows(r), cols(c), data(std::move(d)) {
    if (data.size() != std::size_t(r) * std::size_t(c))
      throw ShapeError("Mat: data length " + std::to_string(data.size()) +
                       " does not match shape " + shape_str(r, c));
  }

  static std::string shape_str(int r, int c) {
    return std::to_string(r) + "x" + std::to_string(c);
  }
  std::string shape_str() const { return shape_str(rows, cols); }

  Real& operator()(int r, int c) { return data[std::size_t(r) * cols + c]; }
  const Real& operator()(int r, int c) const { return data[std::size_t(r) * cols + c]; }

  Real* row_ptr(int r) { return data.data() + std::size_t(r) * cols; }
  const Real* row_ptr(int r) const { return data.data() + std::size_t(r) * cols; }

  std::size_t size() const { return data.size(); }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

  bool all_finite() const {
    for (Real v : data)
      if (!std::isfinite(double(v))) return false;
    return true;
  }

  void fill(Real v) { std::fill(data.begin(), data.end(), v); }

  // Copy of rows [r0, r1).
  Mat slice_rows(int r0, int r1) const {
    if (r0 < 0 || r1 > rows || r0 >= r1)
      throw ShapeError("slice_rows: [" + std::to_string(r0) + ", " + std::to_string(r1) +
                       ") out of " + std::to_string(rows) + " rows");
    Mat out(r1 - r0, cols);
    std::copy(data.begin() + std::size_t(r0) * cols, data.begin() + std::size_t(r1) * cols,
              out.data.begin());
    return out;
  }

  template <class Other>
  Mat<Other> cast() const {
    Mat<Other> out(rows, cols);
    for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = Other(data[i]);
    return out;
  }
};

template <class Real>
Mat<Real> mat_random_uniform(int r, int c, Real lo, Real hi, std::uint64_t seed) {
  Mat<Real> m(r, c);
  Rng rng(seed);
  for (auto& v : m.data) v = Real(rng.uniform(double(lo), double(hi)));
  return m;
}

template <class Real>
Mat<Real> mat_random_gaussian(int r, int c, std::uint64_t seed) {
  Mat<Real> m(r, c);
  Rng rng(seed);
  for (auto& v : m.data) v = Real(rng.gaussian());
  return m;
}

// Seeded random matrix with orthonormal rows (rows <= cols) or orthonormal
// columns (rows > cols): Gaussian draw, then modified Gram-Schmidt over the
// smaller dimension.
inline Mat<double> mat_random_orthogonal(int rows, int cols, std::uint64_t seed) {
  if (rows < 1 || cols < 1)
    throw ShapeError("mat_random_orthogonal: bad shape " + Mat<double>::shape_str(rows, cols));
  const int big = rows > cols ? rows : cols;
  const int small = rows > cols ? cols : rows;
  Mat<double> g = mat_random_gaussian<double>(big, small, seed);
  for (int c = 0; c < small; ++c) {
    for (int prev = 0; prev < c; ++prev) {
      double dot = 0.0;
      for (int r = 0; r < big; ++r) dot += g(r, c) * g(r, prev);
      for (int r = 0; r < big; ++r) g(r, c) -= dot * g(r, prev);
    }
    double norm = 0.0;
    for (int r = 0; r < big; ++r) norm += g(r, c) * g(r, c);
    norm = std::sqrt(norm);
    for (int r = 0; r < big; ++r) g(r, c) /= norm;
  }
  if (rows > cols) return g;
  Mat<double> p(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) p(r, c) = g(c, r);
  return p;
}

// C += A * B, plain ikj loop; the j loop vectorizes.
template <class Real>
void matmul_accum(const Mat<Real>& a, const Mat<Real>& b, Mat<Real>& c) {
  if (a.cols != b.rows || c.rows != a.rows || c.cols != b.cols)
    throw ShapeError("matmul: " + a.shape_str() + " * " + b.shape_str() + " -> " + c.shape_str());
  const int m = a.rows, k = a.cols, n = b.cols;
  for (int i = 0; i < m; ++i) {
    Real* ci = c.row_ptr(i);
    const Real* ai = a.row_ptr(i);
    for (int p = 0; p < k; ++p) {
      const Real aip = ai[p];
      if (aip == Real(0)) continue;
      const Real* bp = b.row_ptr(p);
      for (int j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

template <class Real>
Mat<Real> matmul(const Mat<Real>& a, const Mat<Real>& b) {
  Mat<Real> c(a.rows, b.cols);
  matmul_accum(a, b, c);
  return c;
}

// C += A^T * B
template <class Real>
void matmul_at_b_accum(const Mat<Real>& a, const Mat<Real>& b, Mat<Real>& c) {
  if (a.rows != b.rows || c.rows != a.cols || c.cols != b.cols)
    throw ShapeError("matmul_at_b: " + a.shape_str() + "^T * " + b.shape_str());
  const int m = a.cols, k = a.rows, n = b.cols;
  (void)m;
  for (int p = 0; p < k; ++p) {
    const Real* ap = a.row_ptr(p);
    const Real* bp = b.row_ptr(p);
    for (int i = 0; i < a.cols; ++i) {
      const Real aip = ap[i];
      if (aip == Real(0)) continue;
      Real* ci = c.row_ptr(i);
      for (int j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

// C += A * B^T
template <class Real>
void matmul_a_bt_accum(const Mat<Real>& a, const Mat<Real>& b, Mat<Real>& c) {
  if (a.cols != b.cols || c.rows != a.rows || c.cols != b.rows)
    throw ShapeError("matmul_a_bt: " + a.shape_str() + " * " + b.shape_str() + "^T");
  const int m = a.rows, k = a.cols, n = b.rows;
  for (int i = 0; i < m; ++i) {
    const Real* ai = a.row_ptr(i);
    Real* ci = c.row_ptr(i);
    for (int j = 0; j < n; ++j) {
      const Real* bj = b.row_ptr(j);
      Real acc = Real(0);
      for (int p = 0; p < k; ++p) acc += ai[p] * bj[p];
      ci[j] += acc;
    }
  }
}

template <class Real>
Mat<Real> transpose(const Mat<Real>& a) {
  Mat<Real> t(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
  return t;
}

} // namespace singkit
