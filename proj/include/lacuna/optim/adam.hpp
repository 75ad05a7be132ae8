// Copyright 2026 The Lacuna Authors. All Rights Reserved.
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
#include <string>

#include "lacuna/encoder/parameters.hpp"
#include "lacuna/types.hpp"

namespace lacuna {

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-6;
};

/// First/second moments mirroring a parameter set, with per-parameter step
/// counts so groups unfrozen late start their bias correction at 1.
template <typename Scalar>
struct AdamState {
  AdamSettings settings;
  ParameterSet<Scalar> first;
  ParameterSet<Scalar> second;
  ParameterSet<Scalar> steps;  // 1x1 per parameter

  static AdamState like(const ParameterSet<Scalar>& params, AdamSettings settings = {}) {
    AdamState s;
    s.settings = settings;
    s.first = params.zeros_like();
    s.second = params.zeros_like();
    for (const auto& e : params.entries()) s.steps.add(e.name, Tensor<Scalar>::Zero(1, 1));
    return s;
  }

  long step_count(const std::string& name) const { return static_cast<long>(steps.at(name)(0, 0)); }
};

/// Global L2 norm over the selected gradients.
template <typename Scalar>
double global_norm(const ParameterSet<Scalar>& grads, const std::function<bool(const std::string&)>& selected) {
  double sq = 0.0;
  for (const auto& e : grads.entries()) {
    if (!selected || selected(e.name)) sq += e.value.template cast<double>().squaredNorm();
  }
  return std::sqrt(sq);
}

/// Bias-corrected Adam update of every parameter accepted by `selected`
/// (all when empty). Gradients are checked first: any non-finite value aborts
/// the whole step with a NumericalError naming the parameter.
template <typename Scalar>
void adam_step(ParameterSet<Scalar>& params, const ParameterSet<Scalar>& grads, AdamState<Scalar>& state, double lr,
               const std::function<bool(const std::string&)>& selected = nullptr) {
  if (lr < 0.0) throw ValidationError("learning rate must be >= 0");
  for (const auto& e : grads.entries()) {
    if (selected && !selected(e.name)) continue;
    if (!e.value.allFinite()) throw NumericalError("non-finite gradient in parameter '" + e.name + "'");
  }
  const auto& st = state.settings;
  for (auto& e : params.entries()) {
    if (selected && !selected(e.name)) continue;
    const auto& g = grads.at(e.name);
    if (g.rows() != e.value.rows() || g.cols() != e.value.cols()) {
      throw ValidationError("gradient shape mismatch for '" + e.name + "'");
    }
    auto& m = state.first.at(e.name);
    auto& v = state.second.at(e.name);
    Scalar& count = state.steps.at(e.name)(0, 0);
    count += Scalar(1);
    const double t = static_cast<double>(count);
    const Scalar b1 = static_cast<Scalar>(st.beta1);
    const Scalar b2 = static_cast<Scalar>(st.beta2);
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v + (Scalar(1) - b2) * g.cwiseProduct(g);
    const Scalar c1 = static_cast<Scalar>(1.0 - std::pow(st.beta1, t));
    const Scalar c2 = static_cast<Scalar>(1.0 - std::pow(st.beta2, t));
    const Scalar step = static_cast<Scalar>(lr);
    const Scalar eps = static_cast<Scalar>(st.eps);
    e.value.array() -= step * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
}

}  // namespace lacuna
