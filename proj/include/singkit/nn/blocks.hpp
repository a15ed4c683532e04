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
#include <vector>

#include "singkit/nn/params.hpp"
#include "singkit/nn/tape.hpp"

// Graph builders shared by the three models. Each helper takes the tape and
// binder plus a name prefix, so parameter names form a stable hierarchy like
// "enc.block0.attn.wq".

namespace singkit::nn {

template <class Real>
Var linear(Tape<Real>& t, Binder<Real>& P, const std::string& prefix, Var x, int d_out) {
  const int d_in = t.val(x).cols;
  Var w = P(prefix + ".w", d_in, d_out);
  Var b = P(prefix + ".b", 1, d_out, Init::zeros);
  return t.add_row(t.matmul(x, w), b);
}

// Two-layer position-wise feed-forward with ReLU.
template <class Real>
Var ffn(Tape<Real>& t, Binder<Real>& P, const std::string& prefix, Var x, int d_hidden) {
  const int d = t.val(x).cols;
  Var h = t.relu(linear(t, P, prefix + ".fc1", x, d_hidden));
  return linear(t, P, prefix + ".fc2", h, d);
}

// Multi-head self-attention over a T×d sequence. Q/K projections carry no
// bias: a key bias shifts every score in a row equally, which softmax
// cancels exactly, leaving a dead parameter.
template <class Real>
Var self_attention(Tape<Real>& t, Binder<Real>& P, const std::string& prefix, Var x,
                   int num_heads) {
  const int d = t.val(x).cols;
  if (num_heads < 1 || d % num_heads != 0)
    throw ConfigError("self_attention: d_model " + std::to_string(d) +
                      " not divisible by heads " + std::to_string(num_heads));
  const int dh = d / num_heads;
  Var q = t.matmul(x, P(prefix + ".q.w", d, d));
  Var k = t.matmul(x, P(prefix + ".k.w", d, d));
  Var v = linear(t, P, prefix + ".v", x, d);
  std::vector<Var> heads;
  heads.reserve(std::size_t(num_heads));
  for (int h = 0; h < num_heads; ++h) {
    Var qh = t.slice_cols(q, h * dh, (h + 1) * dh);
    Var kh = t.slice_cols(k, h * dh, (h + 1) * dh);
    Var vh = t.slice_cols(v, h * dh, (h + 1) * dh);
    Var scores = t.scale(t.matmul(qh, t.transpose_op(kh)), 1.0 / std::sqrt(double(dh)));
    heads.push_back(t.matmul(t.softmax_rows(scores), vh));
  }
  return linear(t, P, prefix + ".out", t.concat_cols(heads), d);
}

// Post-norm transformer block: LN(x + attn(x)), then LN(y + ffn(y)).
template <class Real>
Var transformer_block(Tape<Real>& t, Binder<Real>& P, const std::string& prefix, Var x,
                      int num_heads, int d_ff) {
  const int d = t.val(x).cols;
  Var a = self_attention(t, P, prefix + ".attn", x, num_heads);
  Var y = t.layer_norm(t.add(x, a), P(prefix + ".ln1.g", 1, d, Init::ones),
                       P(prefix + ".ln1.b", 1, d, Init::zeros));
  Var f = ffn(t, P, prefix + ".ffn", y, d_ff);
  return t.layer_norm(t.add(y, f), P(prefix + ".ln2.g", 1, d, Init::ones),
                      P(prefix + ".ln2.b", 1, d, Init::zeros));
}

// Classic sinusoidal positional encoding table (length×d, constant).
template <class Real>
Mat<Real> positional_encoding(int length, int d) {
  Mat<Real> pe(length, d);
  for (int pos = 0; pos < length; ++pos)
    for (int j = 0; j < d; ++j) {
      const double rate = std::pow(10000.0, -2.0 * double(j / 2) / double(d));
      const double angle = double(pos) * rate;
      pe(pos, j) = Real(j % 2 == 0 ? std::sin(angle) : std::cos(angle));
    }
  return pe;
}

// Sinusoidal embedding of a diffusion step index (1-based), as a 1×d row.
template <class Real>
Mat<Real> timestep_embedding(int step, int d) {
  Mat<Real> e(1, d);
  for (int j = 0; j < d; ++j) {
    const double rate = std::pow(10000.0, -2.0 * double(j / 2) / double(d));
    const double angle = double(step) * rate;
    e(0, j) = Real(j % 2 == 0 ? std::sin(angle) : std::cos(angle));
  }
  return e;
}

// Single GRU step. x: 1×d_in, h: 1×d_hidden. Returns the new hidden state:
//   z = sigmoid(x Wz + h Uz + bz)
//   r = sigmoid(x Wr + h Ur + br)
//   n = tanh(x Wn + (r*h) Un + bn)
//   h' = (1 - z)*n + z*h
template <class Real>
Var gru_cell(Tape<Real>& t, Binder<Real>& P, const std::string& prefix, Var x, Var h,
             int d_hidden) {
  const int d_in = t.val(x).cols;
  auto gate = [&](const std::string& g, Var hh) {
    Var wx = P(prefix + ".w" + g, d_in, d_hidden);
    Var uh = P(prefix + ".u" + g, d_hidden, d_hidden);
    Var b = P(prefix + ".b" + g, 1, d_hidden, Init::zeros);
    return t.add(t.add(t.matmul(x, wx), t.matmul(hh, uh)), b);
  };
  Var z = t.sigmoid_op(gate("z", h));
  Var r = t.sigmoid_op(gate("r", h));
  Var n = t.tanh_op(gate("n", t.mul(r, h)));
  Mat<Real> ones_row(1, d_hidden);
  ones_row.fill(Real(1));
  Var one = t.constant(std::move(ones_row));
  return t.add(t.mul(t.sub(one, z), n), t.mul(z, h));
}

} // namespace singkit::nn
