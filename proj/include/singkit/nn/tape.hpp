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
#include <functional>
#include <utility>
#include <vector>

#include "singkit/core/mat.hpp"

// Reverse-mode autodiff over a flat tape. Ops append nodes; node ids are a
// topological order, so backward is a single reverse sweep. The scalar type
// is a template parameter: models train in float, gradient checking
// evaluates the same graph in double.

namespace singkit::nn {

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

template <class Real>
class Tape {
public:
  using value_type = Real;

  struct Node {
    Mat<Real> value;
    Mat<Real> grad; // allocated on first contribution
    std::function<void(Tape&, const Mat<Real>&)> backward;
    bool requires_grad = false;
  };

  bool grad_enabled = true;

  const Mat<Real>& val(Var v) const { return nodes_[std::size_t(v.id)].value; }
  bool requires_grad(Var v) const { return nodes_[std::size_t(v.id)].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  Mat<Real>& grad_buffer(Var v) {
    Node& n = nodes_[std::size_t(v.id)];
    if (n.grad.rows == 0) n.grad = Mat<Real>(n.value.rows, n.value.cols);
    return n.grad;
  }

  Var constant(Mat<Real> m) { return push(std::move(m), false, nullptr); }

  Var leaf(Mat<Real> m) { return push(std::move(m), grad_enabled, nullptr); }

  // ---- elementwise ----

  Var add(Var a, Var b) {
    const Mat<Real>&A = val(a), &B = val(b);
    if (!A.same_shape(B)) throw ShapeError("add: " + A.shape_str() + " vs " + B.shape_str());
    Mat<Real> out = A;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += B.data[i];
    return unary_binary(std::move(out), a, b, [](Tape& t, const Mat<Real>& g, Var a, Var b) {
      t.accum(a, g, [](Real gi, std::size_t) { return gi; });
      t.accum(b, g, [](Real gi, std::size_t) { return gi; });
    });
  }

  Var sub(Var a, Var b) {
    const Mat<Real>&A = val(a), &B = val(b);
    if (!A.same_shape(B)) throw ShapeError("sub: " + A.shape_str() + " vs " + B.shape_str());
    Mat<Real> out = A;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= B.data[i];
    return unary_binary(std::move(out), a, b, [](Tape& t, const Mat<Real>& g, Var a, Var b) {
      t.accum(a, g, [](Real gi, std::size_t) { return gi; });
      t.accum(b, g, [](Real gi, std::size_t) { return -gi; });
    });
  }

  Var mul(Var a, Var b) {
    const Mat<Real>&A = val(a), &B = val(b);
    if (!A.same_shape(B)) throw ShapeError("mul: " + A.shape_str() + " vs " + B.shape_str());
    Mat<Real> out = A;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= B.data[i];
    Var o = push(std::move(out), needs(a) || needs(b), nullptr);
    if (node(o).requires_grad)
      node(o).backward = [a, b, o](Tape& t, const Mat<Real>& g) {
        const Mat<Real>&A = t.val(a), &B = t.val(b);
        if (t.needs(a)) {
          Mat<Real>& ga = t.grad_buffer(a);
          for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i] * B.data[i];
        }
        if (t.needs(b)) {
          Mat<Real>& gb = t.grad_buffer(b);
          for (std::size_t i = 0; i < g.data.size(); ++i) gb.data[i] += g.data[i] * A.data[i];
        }
      };
    return o;
  }

  Var scale(Var a, double c) {
    Mat<Real> out = val(a);
    for (auto& v : out.data) v = Real(double(v) * c);
    Var o = push(std::move(out), needs(a), nullptr);
    if (node(o).requires_grad)
      node(o).backward = [a, c](Tape& t, const Mat<Real>& g) {
        Mat<Real>& ga = t.grad_buffer(a);
        for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += Real(double(g.data[i]) * c);
      };
    return o;
  }

  Var add_scalar(Var a, double c) {
    Mat<Real> out = val(a);
    for (auto& v : out.data) v = Real(double(v) + c);
    Var o = push(std::move(out), needs(a), nullptr);
    if (node(o).requires_grad)
      node(o).backward = [a](Tape& t, const Mat<Real>& g) {
        Mat<Real>& ga = t.grad_buffer(a);
        for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i];
      };
    return o;
  }

  // T×D + 1×D broadcast
  Var add_row(Var a, Var row) {
    const Mat<Real>&A = val(a), &R = val(row);
    if (R.rows != 1 || R.cols != A.cols)
      throw ShapeError("add_row: " + A.shape_str() + " + " + R.shape_str());
    Mat<Real> out = A;
    for (int t = 0; t < out.rows; ++t) {
      Real* o = out.row_ptr(t);
      for (int j = 0; j < out.cols; ++j) o[j] += R.data[std::size_t(j)];
    }
    Var o = push(std::move(out), needs(a) || needs(row), nullptr);
    if (node(o).requires_grad)
      node(o).backward = [a, row](Tape& t, const Mat<Real>& g) {
        if (t.needs(a)) {
          Mat<Real>& ga = t.grad_buffer(a);
          for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i];
        }
        if (t.needs(row)) {
          Mat<Real>& gr = t.grad_buffer(row);
          for (int r = 0; r < g.rows; ++r) {
            const Real* gi = g.row_ptr(r);
            for (int j = 0; j < g.cols; ++j) gr.data[std::size_t(j)] += gi[j];
          }
        }
      };
    return o;
  }

  Var relu(Var a) {
    Mat<Real> out = val(a);
    for (auto& v : out.data)
      if (v < Real(0)) v = Real(0);
    Var o = push(std::move(out), needs(a), nullptr);
    if (node(o).requires_grad)
      node(o).backward = [a, o](Tape& t, const Mat<Real>& g) {
        const Mat<Real>& y = t.val(o);
        Mat<Real>& ga = t.grad_buffer(a);
        for (std::size_t i = 0; i < g.data.size(); ++i)
          if (y.data[i] > Real(0)) ga.data[i] += g.data[i];
      };
    return o;
  }

  Var tanh_op(Var a) {
    Mat<Real> out = val(a);
    for (auto& v : out.data) v = Real(std::tanh(double(v)));
    Var o = push(std::move(out), needs(a), nullptr);
    if (node(o).requires_grad)
      node(o).backward = [a, o](Tape& t, const Mat<Real>& g) {
        const Mat<Real>& y = t.val(o);
        Mat<Real>& ga = t.grad_buffer(a);
        for (std::size_t i = 0; i < g.data.size(); ++i)
          ga.data[i] += g.data[i] * (Real(1) - y.data[i] * y.data[i]);
      };
    return o;
  }

  Var sigmoid_op(Var a) {
    Mat<Real> out = val(a);
    for (auto& v : out.data) v = Real(1.0 / (1.0 + std::exp(-double(v))));
    Var o = push(std::move(out), needs(a), nullptr);
    if (node(o).requires_grad)
      node(o).backward = [a, o](Tape& t, const Mat<Real>& g) {
        const Mat<Real>& y = t.val(o);
        Mat<Real>& ga = t.grad_buffer(a);
        for (std::size_t i = 0; i < g.data.size(); ++i)
          ga.data[i] += g.data[i] * y.data[i] * (Real(1) - y.data[i]);
      };
    return o;
  }

  // ---- linear algebra ----

  Var matmul(Var a, Var b) {
    const Mat<Real>&A = val(a), &B = val(b);
    if (A.cols != B.rows)
      throw ShapeError("matmul: " + A.shape_str() + " * " + B.shape_str());
    Mat<Real> out(A.rows, B.cols);
    matmul_accum(A, B, out);
    Var o = push(std::move(out), needs(a) || needs(b), nullptr);
    if (node(o).requires_grad)
      node(o).backward = [a, b](Tape& t, const Mat<Real>& g) {
        if (t.needs(a)) matmul_a_bt_accum(g, t.val(b), t.grad_buffer(a));
        if (t.needs(b)) matmul_at_b_accum(t.val(a), g, t.grad_buffer(b));
      };
    return o;
  }

  Var transpose_op(Var a) {
    Var o = push(transpose(val(a)), needs(a), nullptr);
    if (node(o).requires_grad)
      node(o).backward = [a](Tape& t, const Mat<Real>& g) {
        Mat<Real>& ga = t.grad_buffer(a);
        for (int i = 0; i < g.rows; ++i)
          for (int j = 0; j < g.cols; ++j) ga(j, i) += g(i, j);
      };
    return o;
  }

  Var softmax_rows(Var a) {
    Mat<Real> out = val(a);
    for (int r = 0; r < out.rows; ++r) {
      Real* p = out.row_ptr(r);
      Real mx = p[0];
      for (int j = 1; j < out.cols; ++j) mx = std::max(mx, p[j]);
      double sum = 0.0;
      for (int j = 0; j < out.cols; ++j) {
        p[j] = Real(std::exp(double(p[j] - mx)));
        sum += double(p[j]);
      }
      for (int j = 0; j < out.cols; ++j) p[j] = Real(double(p[j]) / sum);
    }
    Var o = push(std::move(out), needs(a), nullptr);
    if (node(o).requires_grad)
      node(o).backward = [a, o](Tape& t, const Mat<Real>& g) {
        const Mat<Real>& y = t.val(o);
        Mat<Real>& ga = t.grad_buffer(a);
        for (int r = 0; r < g.rows; ++r) {
          const Real* yr = y.row_ptr(r);
          const Real* gr = g.row_ptr(r);
          double dot = 0.0;
          for (int j = 0; j < g.cols; ++j) dot += double(gr[j]) * double(yr[j]);
          Real* gar = ga.row_ptr(r);
          for (int j = 0; j < g.cols; ++j)
            gar[j] += Real((double(gr[j]) - dot) * double(yr[j]));
        }
      };
    return o;
  }

  // Per-row layer norm with learned gain/bias (1×D each).
  Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5) {
    const Mat<Real>& X = val(x);
    const Mat<Real>&G = val(gain), &B = val(bias);
    if (G.rows != 1 || G.cols != X.cols || B.rows != 1 || B.cols != X.cols)
      throw ShapeError("layer_norm: gain/bias must be 1x" + std::to_string(X.cols));
    Mat<Real> xhat(X.rows, X.cols);
    Mat<Real> inv_std(X.rows, 1);
    Mat<Real> out(X.rows, X.cols);
    for (int r = 0; r < X.rows; ++r) {
      const Real* xr = X.row_ptr(r);
      double mean = 0.0;
      for (int j = 0; j < X.cols; ++j) mean += double(xr[j]);
      mean /= X.cols;
      double var = 0.0;
      for (int j = 0; j < X.cols; ++j) {
        const double d = double(xr[j]) - mean;
        var += d * d;
      }
      var /= X.cols;
      const double is = 1.0 / std::sqrt(var + eps);
      inv_std(r, 0) = Real(is);
      Real* hr = xhat.row_ptr(r);
      Real* orow = out.row_ptr(r);
      for (int j = 0; j < X.cols; ++j) {
        hr[j] = Real((double(xr[j]) - mean) * is);
        orow[j] = hr[j] * G.data[std::size_t(j)] + B.data[std::size_t(j)];
      }
    }
    Var hx = constant(std::move(xhat));
    Var hs = constant(std::move(inv_std));
    Var o = push(std::move(out), needs(x) || needs(gain) || needs(bias), nullptr);
    if (node(o).requires_grad)
      node(o).backward = [x, gain, bias, hx, hs](Tape& t, const Mat<Real>& g) {
        const Mat<Real>& H = t.val(hx);
        const Mat<Real>& IS = t.val(hs);
        const Mat<Real>& G = t.val(gain);
        const int D = g.cols;
        if (t.needs(gain)) {
          Mat<Real>& gg = t.grad_buffer(gain);
          for (int r = 0; r < g.rows; ++r)
            for (int j = 0; j < D; ++j) gg.data[std::size_t(j)] += g(r, j) * H(r, j);
        }
        if (t.needs(bias)) {
          Mat<Real>& gb = t.grad_buffer(bias);
          for (int r = 0; r < g.rows; ++r)
            for (int j = 0; j < D; ++j) gb.data[std::size_t(j)] += g(r, j);
        }
        if (t.needs(x)) {
          Mat<Real>& gx = t.grad_buffer(x);
          for (int r = 0; r < g.rows; ++r) {
            double sum_dh = 0.0, sum_dh_h = 0.0;
            for (int j = 0; j < D; ++j) {
              const double dh = double(g(r, j)) * double(G.data[std::size_t(j)]);
              sum_dh += dh;
              sum_dh_h += dh * double(H(r, j));
            }
            const double is = double(IS(r, 0));
            for (int j = 0; j < D; ++j) {
              const double dh = double(g(r, j)) * double(G.data[std::size_t(j)]);
              gx(r, j) += Real(is * (dh - sum_dh / D - double(H(r, j)) * sum_dh_h / D));
            }
          }
        }
      };
    return o;
  }

  // ---- shape ops ----

  Var slice_cols(Var a, int c0, int c1) {
    const Mat<Real>& A = val(a);
    if (!(0 <= c0 && c0 < c1 && c1 <= A.cols))
      throw ShapeError("slice_cols: [" + std::to_string(c0) + "," + std::to_string(c1) +
                       ") of " + A.shape_str());
    Mat<Real> out(A.rows, c1 - c0);
    for (int r = 0; r < A.rows; ++r)
      for (int j = c0; j < c1; ++j) out(r, j - c0) = A(r, j);
    Var o = push(std::move(out), needs(a), nullptr);
    if (node(o).requires_grad)
      node(o).backward = [a, c0](Tape& t, const Mat<Real>& g) {
        Mat<Real>& ga = t.grad_buffer(a);
        for (int r = 0; r < g.rows; ++r)
          for (int j = 0; j < g.cols; ++j) ga(r, c0 + j) += g(r, j);
      };
    return o;
  }

  Var slice_rows(Var a, int r0, int r1) {
    const Mat<Real>& A = val(a);
    if (!(0 <= r0 && r0 < r1 && r1 <= A.rows))
      throw ShapeError("slice_rows: [" + std::to_string(r0) + "," + std::to_string(r1) +
                       ") of " + A.shape_str());
    Mat<Real> out(r1 - r0, A.cols);
    for (int r = r0; r < r1; ++r)
      for (int j = 0; j < A.cols; ++j) out(r - r0, j) = A(r, j);
    Var o = push(std::move(out), needs(a), nullptr);
    if (node(o).requires_grad)
      node(o).backward = [a, r0](Tape& t, const Mat<Real>& g) {
        Mat<Real>& ga = t.grad_buffer(a);
        for (int r = 0; r < g.rows; ++r)
          for (int j = 0; j < g.cols; ++j) ga(r0 + r, j) += g(r, j);
      };
    return o;
  }

  Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw ShapeError("concat_cols: no parts");
    int rows = val(parts[0]).rows, cols = 0;
    bool rg = false;
    for (Var p : parts) {
      if (val(p).rows != rows) throw ShapeError("concat_cols: row mismatch");
      cols += val(p).cols;
      rg = rg || needs(p);
    }
    Mat<Real> out(rows, cols);
    int off = 0;
    for (Var p : parts) {
      const Mat<Real>& P = val(p);
      for (int r = 0; r < rows; ++r)
        for (int j = 0; j < P.cols; ++j) out(r, off + j) = P(r, j);
      off += P.cols;
    }
    Var o = push(std::move(out), rg, nullptr);
    if (node(o).requires_grad) {
      std::vector<Var> ps = parts;
      node(o).backward = [ps](Tape& t, const Mat<Real>& g) {
        int off = 0;
        for (Var p : ps) {
          const int pc = t.val(p).cols;
          if (t.needs(p)) {
            Mat<Real>& gp = t.grad_buffer(p);
            for (int r = 0; r < g.rows; ++r)
              for (int j = 0; j < pc; ++j) gp(r, j) += g(r, off + j);
          }
          off += pc;
        }
      };
    }
    return o;
  }

  Var vstack(const std::vector<Var>& parts) {
    if (parts.empty()) throw ShapeError("vstack: no parts");
    int cols = val(parts[0]).cols, rows = 0;
    bool rg = false;
    for (Var p : parts) {
      if (val(p).cols != cols) throw ShapeError("vstack: col mismatch");
      rows += val(p).rows;
      rg = rg || needs(p);
    }
    Mat<Real> out(rows, cols);
    int off = 0;
    for (Var p : parts) {
      const Mat<Real>& P = val(p);
      for (int r = 0; r < P.rows; ++r)
        for (int j = 0; j < cols; ++j) out(off + r, j) = P(r, j);
      off += P.rows;
    }
    Var o = push(std::move(out), rg, nullptr);
    if (node(o).requires_grad) {
      std::vector<Var> ps = parts;
      node(o).backward = [ps](Tape& t, const Mat<Real>& g) {
        int off = 0;
        for (Var p : ps) {
          const int pr = t.val(p).rows;
          if (t.needs(p)) {
            Mat<Real>& gp = t.grad_buffer(p);
            for (int r = 0; r < pr; ++r)
              for (int j = 0; j < g.cols; ++j) gp(r, j) += g(off + r, j);
          }
          off += pr;
        }
      };
    }
    return o;
  }

  Var embedding(Var table, const std::vector<int>& ids) {
    const Mat<Real>& T = val(table);
    for (int id : ids)
      if (id < 0 || id >= T.rows)
        throw ValueError("embedding: id " + std::to_string(id) + " out of vocabulary (size " +
                         std::to_string(T.rows) + ")");
    Mat<Real> out(int(ids.size()), T.cols);
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (int j = 0; j < T.cols; ++j) out(int(i), j) = T(ids[i], j);
    Var o = push(std::move(out), needs(table), nullptr);
    if (node(o).requires_grad) {
      std::vector<int> idv = ids;
      node(o).backward = [table, idv](Tape& t, const Mat<Real>& g) {
        Mat<Real>& gt = t.grad_buffer(table);
        for (std::size_t i = 0; i < idv.size(); ++i)
          for (int j = 0; j < g.cols; ++j) gt(idv[i], j) += g(int(i), j);
      };
    }
    return o;
  }

  // Repeat row n of x durations[n] times; differentiable length regulator.
  Var length_regulate(Var x, const std::vector<int>& durations) {
    const Mat<Real>& X = val(x);
    if (int(durations.size()) != X.rows)
      throw ShapeError("length_regulate: " + std::to_string(durations.size()) +
                       " durations for " + std::to_string(X.rows) + " rows");
    int total = 0;
    for (std::size_t n = 0; n < durations.size(); ++n) {
      if (durations[n] <= 0)
        throw ValueError("length_regulate: duration at index " + std::to_string(n) +
                         " must be >= 1, got " + std::to_string(durations[n]));
      total += durations[n];
    }
    Mat<Real> out(total, X.cols);
    int t = 0;
    for (std::size_t n = 0; n < durations.size(); ++n)
      for (int k = 0; k < durations[n]; ++k, ++t)
        for (int j = 0; j < X.cols; ++j) out(t, j) = X(int(n), j);
    Var o = push(std::move(out), needs(x), nullptr);
    if (node(o).requires_grad) {
      std::vector<int> dur = durations;
      node(o).backward = [x, dur](Tape& t, const Mat<Real>& g) {
        Mat<Real>& gx = t.grad_buffer(x);
        int row = 0;
        for (std::size_t n = 0; n < dur.size(); ++n)
          for (int k = 0; k < dur[n]; ++k, ++row)
            for (int j = 0; j < g.cols; ++j) gx(int(n), j) += g(row, j);
      };
    }
    return o;
  }

  // Non-causal 1-D convolution over time. x: T×Cin, w: (k·Cin)×Cout
  // (tap-major), b: 1×Cout. Zero padding outside [0, T).
  Var conv1d(Var x, Var w, Var b, int kernel, int dilation = 1) {
    const Mat<Real>& X = val(x);
    const Mat<Real>& W = val(w);
    const Mat<Real>& B = val(b);
    const int cin = X.cols;
    if (W.rows != kernel * cin)
      throw ShapeError("conv1d: weight rows " + std::to_string(W.rows) + " != kernel*cin " +
                       std::to_string(kernel * cin));
    if (B.rows != 1 || B.cols != W.cols) throw ShapeError("conv1d: bad bias shape");
    if (kernel % 2 == 0) throw ConfigError("conv1d: kernel must be odd");
    const int half = kernel / 2;
    Mat<Real> out(X.rows, W.cols);
    for (int t = 0; t < out.rows; ++t) {
      Real* orow = out.row_ptr(t);
      for (int j = 0; j < out.cols; ++j) orow[j] = B.data[std::size_t(j)];
    }
    for (int s = 0; s < kernel; ++s) {
      const int off = (s - half) * dilation;
      // out[t] += x[t+off] * W_s
      for (int t = 0; t < X.rows; ++t) {
        const int src = t + off;
        if (src < 0 || src >= X.rows) continue;
        const Real* xr = X.row_ptr(src);
        Real* orow = out.row_ptr(t);
        for (int ci = 0; ci < cin; ++ci) {
          const Real xv = xr[ci];
          if (xv == Real(0)) continue;
          const Real* wrow = W.row_ptr(s * cin + ci);
          for (int j = 0; j < out.cols; ++j) orow[j] += xv * wrow[j];
        }
      }
    }
    Var o = push(std::move(out), needs(x) || needs(w) || needs(b), nullptr);
    if (node(o).requires_grad)
      node(o).backward = [x, w, b, kernel, dilation](Tape& t, const Mat<Real>& g) {
        const Mat<Real>& X = t.val(x);
        const Mat<Real>& W = t.val(w);
        const int cin = X.cols;
        const int half = kernel / 2;
        if (t.needs(b)) {
          Mat<Real>& gb = t.grad_buffer(b);
          for (int r = 0; r < g.rows; ++r)
            for (int j = 0; j < g.cols; ++j) gb.data[std::size_t(j)] += g(r, j);
        }
        for (int s = 0; s < kernel; ++s) {
          const int off = (s - half) * dilation;
          if (t.needs(w)) {
            Mat<Real>& gw = t.grad_buffer(w);
            for (int r = 0; r < g.rows; ++r) {
              const int src = r + off;
              if (src < 0 || src >= X.rows) continue;
              const Real* xr = X.row_ptr(src);
              const Real* gr = g.row_ptr(r);
              for (int ci = 0; ci < cin; ++ci) {
                const Real xv = xr[ci];
                if (xv == Real(0)) continue;
                Real* gwr = gw.row_ptr(s * cin + ci);
                for (int j = 0; j < g.cols; ++j) gwr[j] += xv * gr[j];
              }
            }
          }
          if (t.needs(x)) {
            Mat<Real>& gx = t.grad_buffer(x);
            for (int r = 0; r < g.rows; ++r) {
              const int src = r + off;
              if (src < 0 || src >= X.rows) continue;
              const Real* gr = g.row_ptr(r);
              Real* gxr = gx.row_ptr(src);
              for (int ci = 0; ci < cin; ++ci) {
                const Real* wrow = W.row_ptr(s * cin + ci);
                double acc = 0.0;
                for (int j = 0; j < g.cols; ++j) acc += double(wrow[j]) * double(gr[j]);
                gxr[ci] += Real(acc);
              }
            }
          }
        }
      };
    return o;
  }

  // ---- reductions / losses (double accumulators) ----

  Var sum_all(Var a) {
    double acc = 0.0;
    for (Real v : val(a).data) acc += double(v);
    Mat<Real> out(1, 1);
    out(0, 0) = Real(acc);
    Var o = push(std::move(out), needs(a), nullptr);
    if (node(o).requires_grad)
      node(o).backward = [a](Tape& t, const Mat<Real>& g) {
        Mat<Real>& ga = t.grad_buffer(a);
        for (auto& v : ga.data) v += g(0, 0);
      };
    return o;
  }

  Var mean_all(Var a) { return scale(sum_all(a), 1.0 / double(val(a).size())); }

  Var mse(Var a, Var b) {
    const Mat<Real>&A = val(a), &B = val(b);
    if (!A.same_shape(B)) throw ShapeError("mse: " + A.shape_str() + " vs " + B.shape_str());
    double acc = 0.0;
    for (std::size_t i = 0; i < A.data.size(); ++i) {
      const double d = double(A.data[i]) - double(B.data[i]);
      acc += d * d;
    }
    const double n = double(A.data.size());
    Mat<Real> out(1, 1);
    out(0, 0) = Real(acc / n);
    Var o = push(std::move(out), needs(a) || needs(b), nullptr);
    if (node(o).requires_grad)
      node(o).backward = [a, b, n](Tape& t, const Mat<Real>& g) {
        const Mat<Real>&A = t.val(a), &B = t.val(b);
        const double s = 2.0 * double(g(0, 0)) / n;
        if (t.needs(a)) {
          Mat<Real>& ga = t.grad_buffer(a);
          for (std::size_t i = 0; i < A.data.size(); ++i)
            ga.data[i] += Real(s * (double(A.data[i]) - double(B.data[i])));
        }
        if (t.needs(b)) {
          Mat<Real>& gb = t.grad_buffer(b);
          for (std::size_t i = 0; i < A.data.size(); ++i)
            gb.data[i] -= Real(s * (double(A.data[i]) - double(B.data[i])));
        }
      };
    return o;
  }

  Var l1(Var a, Var b) {
    const Mat<Real>&A = val(a), &B = val(b);
    if (!A.same_shape(B)) throw ShapeError("l1: " + A.shape_str() + " vs " + B.shape_str());
    double acc = 0.0;
    for (std::size_t i = 0; i < A.data.size(); ++i)
      acc += std::abs(double(A.data[i]) - double(B.data[i]));
    const double n = double(A.data.size());
    Mat<Real> out(1, 1);
    out(0, 0) = Real(acc / n);
    Var o = push(std::move(out), needs(a) || needs(b), nullptr);
    if (node(o).requires_grad)
      node(o).backward = [a, b, n](Tape& t, const Mat<Real>& g) {
        const Mat<Real>&A = t.val(a), &B = t.val(b);
        const double s = double(g(0, 0)) / n;
        for (std::size_t i = 0; i < A.data.size(); ++i) {
          const double d = double(A.data[i]) - double(B.data[i]);
          const double sg = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
          if (t.needs(a)) t.grad_buffer(a).data[i] += Real(s * sg);
          if (t.needs(b)) t.grad_buffer(b).data[i] -= Real(s * sg);
        }
      };
    return o;
  }

  // sum(mask * (a-b)^2) / max(1, sum(mask)); mask is a plain matrix.
  Var masked_mse(Var a, Var b, const Mat<Real>& mask) {
    const Mat<Real>&A = val(a), &B = val(b);
    if (!A.same_shape(B) || !A.same_shape(mask))
      throw ShapeError("masked_mse: shape mismatch " + A.shape_str());
    double acc = 0.0, count = 0.0;
    for (std::size_t i = 0; i < A.data.size(); ++i) {
      const double m = double(mask.data[i]);
      const double d = double(A.data[i]) - double(B.data[i]);
      acc += m * d * d;
      count += m;
    }
    const double denom = std::max(1.0, count);
    Mat<Real> out(1, 1);
    out(0, 0) = Real(acc / denom);
    Var o = push(std::move(out), needs(a) || needs(b), nullptr);
    if (node(o).requires_grad) {
      Mat<Real> mcopy = mask;
      node(o).backward = [a, b, mcopy, denom](Tape& t, const Mat<Real>& g) {
        const Mat<Real>&A = t.val(a), &B = t.val(b);
        const double s = 2.0 * double(g(0, 0)) / denom;
        for (std::size_t i = 0; i < A.data.size(); ++i) {
          const double v = s * double(mcopy.data[i]) * (double(A.data[i]) - double(B.data[i]));
          if (t.needs(a)) t.grad_buffer(a).data[i] += Real(v);
          if (t.needs(b)) t.grad_buffer(b).data[i] -= Real(v);
        }
      };
    }
    return o;
  }

  // Mean binary cross-entropy on logits; optional {0,1} mask.
  Var bce_logits(Var logits, const Mat<Real>& targets, const Mat<Real>* mask = nullptr) {
    const Mat<Real>& Z = val(logits);
    if (!Z.same_shape(targets)) throw ShapeError("bce_logits: shape mismatch");
    double acc = 0.0, count = 0.0;
    for (std::size_t i = 0; i < Z.data.size(); ++i) {
      const double m = mask ? double(mask->data[i]) : 1.0;
      if (m == 0.0) continue;
      const double z = double(Z.data[i]);
      const double y = double(targets.data[i]);
      acc += m * (std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z))));
      count += m;
    }
    const double denom = std::max(1.0, count);
    Mat<Real> out(1, 1);
    out(0, 0) = Real(acc / denom);
    Var o = push(std::move(out), needs(logits), nullptr);
    if (node(o).requires_grad) {
      Mat<Real> tcopy = targets;
      Mat<Real> mcopy = mask ? *mask : Mat<Real>();
      node(o).backward = [logits, tcopy, mcopy, denom](Tape& t, const Mat<Real>& g) {
        const Mat<Real>& Z = t.val(logits);
        Mat<Real>& gz = t.grad_buffer(logits);
        const double s = double(g(0, 0)) / denom;
        for (std::size_t i = 0; i < Z.data.size(); ++i) {
          const double m = mcopy.data.empty() ? 1.0 : double(mcopy.data[i]);
          if (m == 0.0) continue;
          const double sig = 1.0 / (1.0 + std::exp(-double(Z.data[i])));
          gz.data[i] += Real(s * m * (sig - double(tcopy.data[i])));
        }
      };
    }
    return o;
  }

  // ---- backward sweep ----

  void backward(Var loss) {
    const Mat<Real>& L = val(loss);
    if (L.rows != 1 || L.cols != 1)
      throw ShapeError("backward: loss must be 1x1, got " + L.shape_str());
    Mat<Real>& g = grad_buffer(loss);
    g(0, 0) = Real(1);
    for (int id = loss.id; id >= 0; --id) {
      Node& n = nodes_[std::size_t(id)];
      if (!n.requires_grad || !n.backward || n.grad.rows == 0) continue;
      n.backward(*this, n.grad);
    }
  }

  bool needs(Var v) const { return nodes_[std::size_t(v.id)].requires_grad; }

private:
  Node& node(Var v) { return nodes_[std::size_t(v.id)]; }

  Var push(Mat<Real> value, bool requires_grad,
           std::function<void(Tape&, const Mat<Real>&)> back) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad && grad_enabled;
    n.backward = std::move(back);
    nodes_.push_back(std::move(n));
    return Var{int(nodes_.size()) - 1};
  }

  template <class Fn>
  Var unary_binary(Mat<Real> out, Var a, Var b, Fn&& fn) {
    Var o = push(std::move(out), needs(a) || needs(b), nullptr);
    if (node(o).requires_grad)
      node(o).backward = [a, b, fn](Tape& t, const Mat<Real>& g) { fn(t, g, a, b); };
    return o;
  }

  // Elementwise accumulate helper used by add/sub.
  template <class Fn>
  void accum(Var p, const Mat<Real>& g, Fn&& f) {
    if (!needs(p)) return;
    Mat<Real>& gp = grad_buffer(p);
    for (std::size_t i = 0; i < g.data.size(); ++i) gp.data[i] += f(g.data[i], i);
  }

  std::vector<Node> nodes_;
};

} // namespace singkit::nn
