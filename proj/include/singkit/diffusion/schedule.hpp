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

#include "singkit/core/errors.hpp"
#include "singkit/core/mat.hpp"

// DDPM noise schedule and the closed-form forward/reverse step arithmetic.
// Everything here is pure math over matrices; the denoiser network lives in
// model.hpp.

namespace singkit::diffusion {

// Linear beta schedule; timesteps are 1-based (t in [1, N]) as in the DDPM
// formulas, with alpha_bar(0) == 1 for the t = 1 posterior.
struct DiffusionSchedule {
  int n_steps = 0;
  std::vector<double> betas;     // betas[t-1] = beta_t
  std::vector<double> alphas;    // 1 - beta_t
  std::vector<double> alpha_bar; // prod_{s<=t} alpha_s

  static DiffusionSchedule linear(int n = 100, double beta_1 = 1e-4, double beta_n = 0.06) {
    if (n < 1) throw ConfigError("DiffusionSchedule: n_steps must be >= 1, got " + std::to_string(n));
    DiffusionSchedule s;
    s.n_steps = n;
    s.betas.resize(std::size_t(n));
    s.alphas.resize(std::size_t(n));
    s.alpha_bar.resize(std::size_t(n));
    double prod = 1.0;
    for (int t = 1; t <= n; ++t) {
      const double b = n == 1 ? beta_1 : beta_1 + (beta_n - beta_1) * (t - 1) / double(n - 1);
      s.betas[std::size_t(t - 1)] = b;
      s.alphas[std::size_t(t - 1)] = 1.0 - b;
      prod *= 1.0 - b;
      s.alpha_bar[std::size_t(t - 1)] = prod;
    }
    s.validate();
    return s;
  }

  void validate() const {
    if (n_steps < 1 || int(betas.size()) != n_steps || int(alphas.size()) != n_steps ||
        int(alpha_bar.size()) != n_steps)
      throw ConfigError("DiffusionSchedule: inconsistent sizes");
    for (int t = 1; t <= n_steps; ++t) {
      const double b = betas[std::size_t(t - 1)];
      if (!(b > 0.0 && b < 1.0))
        throw ConfigError("DiffusionSchedule: beta_" + std::to_string(t) + " = " +
                          std::to_string(b) + " outside (0, 1)");
      if (t > 1 && !(b > betas[std::size_t(t - 2)]))
        throw ConfigError("DiffusionSchedule: betas must increase strictly at t = " +
                          std::to_string(t));
    }
    if (!(alpha_bar[std::size_t(n_steps - 1)] < alpha_bar[0] && alpha_bar[0] < 1.0) &&
        n_steps > 1)
      throw ConfigError("DiffusionSchedule: need alpha_bar_N < alpha_bar_1 < 1");
  }

  void check_step(int t) const {
    if (t < 1 || t > n_steps)
      throw ValueError("diffusion step " + std::to_string(t) + " outside [1, " +
                       std::to_string(n_steps) + "]");
  }

  double beta(int t) const {
    check_step(t);
    return betas[std::size_t(t - 1)];
  }
  double alpha(int t) const {
    check_step(t);
    return alphas[std::size_t(t - 1)];
  }
  // abar(0) = 1 by convention, so the t = 1 reverse step has zero variance.
  double abar(int t) const {
    if (t == 0) return 1.0;
    check_step(t);
    return alpha_bar[std::size_t(t - 1)];
  }
};

// x_t = sqrt(abar_t) * x0 + sqrt(1 - abar_t) * eps.
inline Mat<float> forward_diffuse(const Mat<float>& x0, int t, const Mat<float>& eps,
                                  const DiffusionSchedule& sched) {
  sched.check_step(t);
  if (eps.rows != x0.rows || eps.cols != x0.cols)
    throw ShapeError("forward_diffuse: eps is " + eps.shape_str() + ", x0 is " + x0.shape_str());
  const double a = std::sqrt(sched.abar(t));
  const double s = std::sqrt(1.0 - sched.abar(t));
  Mat<float> out(x0.rows, x0.cols);
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = float(a * double(x0.data[i]) + s * double(eps.data[i]));
  return out;
}

// One reverse step given a noise estimate:
//   x_{t-1} = (x_t - beta_t / sqrt(1 - abar_t) * eps_hat) / sqrt(alpha_t) + sigma_t * z
// with sigma_t^2 = beta_t * (1 - abar_{t-1}) / (1 - abar_t). z must be null
// at t = 1 (the final step is deterministic).
inline Mat<float> denoise_step_from_eps(const Mat<float>& x_t, int t, const Mat<float>& eps_hat,
                                        const DiffusionSchedule& sched,
                                        const Mat<float>* z = nullptr) {
  sched.check_step(t);
  if (eps_hat.rows != x_t.rows || eps_hat.cols != x_t.cols)
    throw ShapeError("denoise_step: eps_hat is " + eps_hat.shape_str() + ", x_t is " +
                     x_t.shape_str());
  if (z && (z->rows != x_t.rows || z->cols != x_t.cols))
    throw ShapeError("denoise_step: z is " + z->shape_str() + ", x_t is " + x_t.shape_str());
  if (t == 1 && z)
    for (float v : z->data)
      if (v != 0.0f) throw ValueError("denoise_step: z must be zero at t = 1");

  const double beta = sched.beta(t);
  const double coef = beta / std::sqrt(1.0 - sched.abar(t));
  const double inv_sqrt_alpha = 1.0 / std::sqrt(sched.alpha(t));
  const double sigma = std::sqrt(beta * (1.0 - sched.abar(t - 1)) / (1.0 - sched.abar(t)));

  Mat<float> out(x_t.rows, x_t.cols);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    double v = inv_sqrt_alpha * (double(x_t.data[i]) - coef * double(eps_hat.data[i]));
    if (z) v += sigma * double(z->data[i]);
    out.data[i] = float(v);
  }
  return out;
}

// Reverse step across a strided subsequence: jumps from abar_t to abar_prev
// (the next retained step's cumulative product, 1.0 at the end). With
// abar_prev = abar_{t-1} this reduces exactly to denoise_step_from_eps.
inline Mat<float> denoise_step_strided(const Mat<float>& x_t, double abar_t, double abar_prev,
                                       const Mat<float>& eps_hat, const Mat<float>* z = nullptr) {
  if (!(abar_t > 0.0 && abar_t < abar_prev && abar_prev <= 1.0))
    throw ValueError("denoise_step_strided: need 0 < abar_t < abar_prev <= 1");
  const double alpha_eff = abar_t / abar_prev;
  const double beta_eff = 1.0 - alpha_eff;
  const double coef = beta_eff / std::sqrt(1.0 - abar_t);
  const double inv_sqrt_alpha = 1.0 / std::sqrt(alpha_eff);
  const double sigma = std::sqrt(beta_eff * (1.0 - abar_prev) / (1.0 - abar_t));

  Mat<float> out(x_t.rows, x_t.cols);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    double v = inv_sqrt_alpha * (double(x_t.data[i]) - coef * double(eps_hat.data[i]));
    if (z) v += sigma * double(z->data[i]);
    out.data[i] = float(v);
  }
  return out;
}

} // namespace singkit::diffusion
