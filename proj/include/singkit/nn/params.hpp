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
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "singkit/core/errors.hpp"
#include "singkit/core/mat.hpp"
#include "singkit/core/rng.hpp"
#include "singkit/nn/tape.hpp"

// Named parameter store with Adam state. Parameters live in a std::map so
// every walk over them is in name order, independent of creation order.
// Initialization is seeded per name, so adding or removing a parameter does
// not disturb the values of the others.

namespace singkit::nn {

enum class Init { xavier_uniform, zeros, ones };

template <class Real>
struct Param {
  Mat<Real> value;
  Mat<Real> grad;
  Mat<Real> m; // Adam first moment
  Mat<Real> v; // Adam second moment
};

template <class Real>
class ParamSet {
public:
  std::uint64_t rng_seed = 0;
  std::int64_t adam_steps = 0;
  std::map<std::string, Mat<float>> buffers; // non-trained tensors (stats etc.)
  std::map<std::string, std::string> metadata;

  explicit ParamSet(std::uint64_t seed = 0) : rng_seed(seed) {}

  // Returns the parameter, creating it on first use. Shape mismatches on
  // reuse are programming errors and throw.
  Param<Real>& get(const std::string& name, int rows, int cols,
                   Init init = Init::xavier_uniform) {
    auto it = params_.find(name);
    if (it != params_.end()) {
      if (it->second.value.rows != rows || it->second.value.cols != cols)
        throw ShapeError("param '" + name + "' is " + it->second.value.shape_str() +
                         ", requested " + std::to_string(rows) + "x" + std::to_string(cols));
      return it->second;
    }
    Param<Real> p;
    p.value = init_matrix(name, rows, cols, init);
    p.grad = Mat<Real>(rows, cols);
    p.m = Mat<Real>(rows, cols);
    p.v = Mat<Real>(rows, cols);
    return params_.emplace(name, std::move(p)).first->second;
  }

  bool has(const std::string& name) const { return params_.count(name) != 0; }

  Param<Real>& at(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw ValueError("unknown parameter '" + name + "'");
    return it->second;
  }
  const Param<Real>& at(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw ValueError("unknown parameter '" + name + "'");
    return it->second;
  }

  std::map<std::string, Param<Real>>& items() { return params_; }
  const std::map<std::string, Param<Real>>& items() const { return params_; }

  std::size_t num_scalars() const {
    std::size_t n = 0;
    for (const auto& [name, p] : params_) n += p.value.size();
    return n;
  }

  void zero_grads() {
    for (auto& [name, p] : params_) p.grad.fill(Real(0));
  }

  // Deep precision conversion; Adam state and buffers come along.
  template <class Other>
  ParamSet<Other> cast() const {
    ParamSet<Other> out(rng_seed);
    out.adam_steps = adam_steps;
    out.buffers = buffers;
    out.metadata = metadata;
    for (const auto& [name, p] : params_) {
      Param<Other> q;
      q.value = p.value.template cast<Other>();
      q.grad = p.grad.template cast<Other>();
      q.m = p.m.template cast<Other>();
      q.v = p.v.template cast<Other>();
      out.items().emplace(name, std::move(q));
    }
    return out;
  }

private:
  Mat<Real> init_matrix(const std::string& name, int rows, int cols, Init init) {
    Mat<Real> m(rows, cols);
    switch (init) {
      case Init::zeros:
        break;
      case Init::ones:
        m.fill(Real(1));
        break;
      case Init::xavier_uniform: {
        Rng rng(mix_seed(rng_seed, fnv1a64(name), 0x9e3779b97f4a7c15ull));
        const double limit = std::sqrt(6.0 / (double(rows) + double(cols)));
        for (auto& v : m.data) v = Real(rng.uniform(-limit, limit));
        break;
      }
    }
    return m;
  }

  std::map<std::string, Param<Real>> params_;
};

// Bridges a ParamSet into a Tape: each parameter becomes a leaf Var exactly
// once per graph, and export_grads() copies tape gradients back.
template <class Real>
class Binder {
public:
  Binder(Tape<Real>& tape, ParamSet<Real>& ps) : tape_(tape), ps_(ps) {}

  Var operator()(const std::string& name, int rows, int cols,
                 Init init = Init::xavier_uniform) {
    auto it = bound_.find(name);
    if (it != bound_.end()) return it->second;
    Param<Real>& p = ps_.get(name, rows, cols, init);
    Var v = tape_.leaf(p.value);
    bound_.emplace(name, v);
    return v;
  }

  void export_grads() {
    for (const auto& [name, var] : bound_) {
      Param<Real>& p = ps_.at(name);
      Mat<Real>& g = tape_.grad_buffer(var);
      for (std::size_t i = 0; i < g.data.size(); ++i) p.grad.data[i] += g.data[i];
    }
  }

private:
  Tape<Real>& tape_;
  ParamSet<Real>& ps_;
  std::map<std::string, Var> bound_;
};

// Builds the graph, runs backward, accumulates gradients into the ParamSet,
// and returns the scalar loss. graph_fn: (Tape&, Binder&) -> Var.
template <class Real, class Fn>
double forward_backward(Fn&& graph_fn, ParamSet<Real>& ps, bool zero_grads = true) {
  Tape<Real> tape;
  Binder<Real> binder(tape, ps);
  Var loss = graph_fn(tape, binder);
  const Mat<Real>& L = tape.val(loss);
  if (L.rows != 1 || L.cols != 1)
    throw ShapeError("forward_backward: loss must be 1x1, got " + L.shape_str());
  const double value = double(L(0, 0));
  if (!std::isfinite(value)) throw DivergedError("non-finite loss");
  if (zero_grads) ps.zero_grads();
  tape.backward(loss);
  binder.export_grads();
  return value;
}

// Forward only, with gradient tracking disabled.
template <class Real, class Fn>
double evaluate_loss(Fn&& graph_fn, ParamSet<Real>& ps) {
  Tape<Real> tape;
  tape.grad_enabled = false;
  Binder<Real> binder(tape, ps);
  Var loss = graph_fn(tape, binder);
  const Mat<Real>& L = tape.val(loss);
  if (L.rows != 1 || L.cols != 1)
    throw ShapeError("evaluate_loss: loss must be 1x1, got " + L.shape_str());
  return double(L(0, 0));
}

// Shared knobs for the per-model training loops.
struct TrainConfig {
  int steps = 500;
  double lr = 1e-3;
  double clip_norm = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (steps < 1) throw ConfigError("TrainConfig: steps must be >= 1");
    if (!(lr > 0.0)) throw ConfigError("TrainConfig: lr must be > 0");
    if (!(clip_norm > 0.0)) throw ConfigError("TrainConfig: clip_norm must be > 0");
  }
};

// Global L2 norm over all gradients (computed in double). If it exceeds
// max_norm the gradients are scaled down in place. Returns the pre-clip norm.
template <class Real>
double clip_global_norm(ParamSet<Real>& ps, double max_norm = 1.0) {
  if (max_norm <= 0.0) throw ConfigError("clip_global_norm: max_norm must be > 0");
  double sq = 0.0;
  for (const auto& [name, p] : ps.items())
    for (Real g : p.grad.data) sq += double(g) * double(g);
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (auto& [name, p] : ps.items())
      for (auto& g : p.grad.data) g = Real(double(g) * s);
  }
  return norm;
}

// One Adam update with bias correction. Throws DivergedError on non-finite
// gradients so training failures surface immediately instead of as NaN soup.
template <class Real>
void adam_step(ParamSet<Real>& ps, double lr, double beta1 = 0.9, double beta2 = 0.999,
               double eps = 1e-8) {
  for (const auto& [name, p] : ps.items())
    if (!p.grad.all_finite())
      throw DivergedError("non-finite gradient in parameter '" + name + "'");
  ps.adam_steps += 1;
  const double t = double(ps.adam_steps);
  const double bc1 = 1.0 - std::pow(beta1, t);
  const double bc2 = 1.0 - std::pow(beta2, t);
  for (auto& [name, p] : ps.items()) {
    for (std::size_t i = 0; i < p.value.data.size(); ++i) {
      const double g = double(p.grad.data[i]);
      const double m = beta1 * double(p.m.data[i]) + (1.0 - beta1) * g;
      const double v = beta2 * double(p.v.data[i]) + (1.0 - beta2) * g * g;
      p.m.data[i] = Real(m);
      p.v.data[i] = Real(v);
      const double mhat = m / bc1;
      const double vhat = v / bc2;
      p.value.data[i] = Real(double(p.value.data[i]) - lr * mhat / (std::sqrt(vhat) + eps));
    }
  }
}

} // namespace singkit::nn
