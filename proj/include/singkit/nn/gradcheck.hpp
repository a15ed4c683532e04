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
#include <utility>
#include <vector>

#include "singkit/core/errors.hpp"
#include "singkit/core/rng.hpp"
#include "singkit/nn/params.hpp"

// Central-difference gradient verification. Analytic gradients come from the
// tape at the precision under test; the finite-difference reference is always
// evaluated in double on a converted copy of the parameters, so the
// comparison measures the correctness of the backward pass rather than the
// rounding noise of float perturbations.

namespace singkit::nn {

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  std::size_t coords_checked = 0;
};

// graph_fn must be callable for both precisions:
//   template <class R> Var operator()(Tape<R>&, Binder<R>&)
template <class Real, class Fn>
GradCheckReport grad_check(Fn&& graph_fn, ParamSet<Real>& ps, double epsilon = 1e-4,
                           std::size_t max_coords = 200, std::uint64_t sample_seed = 42) {
  if (!(epsilon > 1e-6 && epsilon < 1e-2))
    throw ConfigError("grad_check: epsilon must lie in (1e-6, 1e-2), got " +
                      std::to_string(epsilon));

  // Analytic gradients at the precision under test.
  forward_backward<Real>(graph_fn, ps);

  // Double copy for the finite-difference reference.
  ParamSet<double> psd = ps.template cast<double>();

  // Flat coordinate list (name-ordered, hence deterministic).
  std::vector<std::pair<std::string, std::size_t>> coords;
  for (const auto& [name, p] : psd.items())
    for (std::size_t i = 0; i < p.value.data.size(); ++i) coords.emplace_back(name, i);
  if (coords.empty()) throw ValueError("grad_check: parameter set is empty");

  if (coords.size() > max_coords) {
    // Seeded partial Fisher-Yates: the first max_coords entries become a
    // uniform sample without replacement.
    Rng rng(sample_seed);
    for (std::size_t i = 0; i < max_coords; ++i) {
      const std::size_t j = i + std::size_t(rng.uniform_int(0, std::int64_t(coords.size() - i - 1)));
      std::swap(coords[i], coords[j]);
    }
    coords.resize(max_coords);
  }

  GradCheckReport report;
  for (const auto& [name, idx] : coords) {
    double& w = psd.at(name).value.data[idx];
    const double saved = w;
    w = saved + epsilon;
    const double lp = evaluate_loss<double>(graph_fn, psd);
    w = saved - epsilon;
    const double lm = evaluate_loss<double>(graph_fn, psd);
    w = saved;
    const double fd = (lp - lm) / (2.0 * epsilon);
    const double an = double(ps.at(name).grad.data[idx]);
    // The 1e-6 floor keeps near-zero directions from amplifying the
    // cancellation noise of the central difference itself.
    const double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-6});
    if (rel > report.max_rel_err) {
      report.max_rel_err = rel;
      report.worst_param = name;
      report.worst_index = idx;
    }
  }
  report.coords_checked = coords.size();
  return report;
}

} // namespace singkit::nn
