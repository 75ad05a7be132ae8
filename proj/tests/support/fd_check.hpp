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

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "lacuna/encoder/parameters.hpp"
#include "lacuna/random.hpp"

namespace lacuna::testing {

struct FdReport {
  double max_rel = 0.0;
  std::string worst;
  int checked = 0;
};

/// Relative error with a floor on the denominator, so entries whose true
/// gradient is ~0 are judged on absolute error instead.
inline double rel_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Compares `analytic` against central differences of `loss` at `samples`
/// scalars drawn uniformly over all entries of `params`.
inline FdReport fd_check(ParameterSet<double> params, const ParameterSet<double>& analytic,
                         const std::function<double(const ParameterSet<double>&)>& loss, int samples, Rng& rng,
                         double step = 1e-5, double floor = 1e-6) {
  FdReport report;
  const long total = params.scalar_count();
  for (int s = 0; s < samples; ++s) {
    long flat = static_cast<long>(uniform_index(rng, static_cast<std::uint64_t>(total)));
    for (auto& e : params.entries()) {
      if (flat >= e.value.size()) {
        flat -= e.value.size();
        continue;
      }
      double& x = e.value.data()[flat];
      const double saved = x;
      x = saved + step;
      const double up = loss(params);
      x = saved - step;
      const double down = loss(params);
      x = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic.at(e.name).data()[flat];
      const double err = rel_error(a, numeric, floor);
      if (err > report.max_rel) {
        report.max_rel = err;
        report.worst = e.name + "[" + std::to_string(flat) + "] analytic " + std::to_string(a) + " numeric " +
                       std::to_string(numeric);
      }
      ++report.checked;
      break;
    }
  }
  return report;
}

/// Checks the gradient with respect to a plain input matrix.
template <typename Matrix>
FdReport fd_check_input(Matrix x, const Matrix& analytic, const std::function<double(const Matrix&)>& loss,
                        double step = 1e-6, double floor = 1e-6) {
  FdReport report;
  for (long i = 0; i < x.size(); ++i) {
    const double saved = x.data()[i];
    x.data()[i] = saved + step;
    const double up = loss(x);
    x.data()[i] = saved - step;
    const double down = loss(x);
    x.data()[i] = saved;
    const double err = rel_error(analytic.data()[i], (up - down) / (2.0 * step), floor);
    if (err > report.max_rel) {
      report.max_rel = err;
      report.worst = "[" + std::to_string(i) + "]";
    }
    ++report.checked;
  }
  return report;
}

}  // namespace lacuna::testing
