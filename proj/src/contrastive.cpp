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

#include "lacuna/pretrain/contrastive.hpp"

namespace lacuna {

FoilPlan sample_foils(int time_steps, std::span<const int> positions, int n_foils, Rng& rng) {
  if (n_foils < 0) throw ValidationError("n_foils must be >= 0");
  FoilPlan plan;
  plan.positions.assign(positions.begin(), positions.end());
  plan.candidates.reserve(positions.size());
  std::vector<int> pool(static_cast<std::size_t>(std::max(0, time_steps - 1)));
  const int k = std::min(n_foils, time_steps - 1);
  for (int t : positions) {
    if (t < 0 || t >= time_steps) throw ValidationError("masked position outside the line");
    // Steps other than t, then a partial Fisher-Yates for the first k.
    for (int i = 0, j = 0; i < time_steps; ++i) {
      if (i != t) pool[static_cast<std::size_t>(j++)] = i;
    }
    std::vector<int> cand;
    cand.reserve(static_cast<std::size_t>(k) + 1);
    cand.push_back(t);
    for (int i = 0; i < k; ++i) {
      const auto j = static_cast<std::size_t>(i) + uniform_index(rng, pool.size() - static_cast<std::size_t>(i));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
      cand.push_back(pool[static_cast<std::size_t>(i)]);
    }
    plan.candidates.push_back(std::move(cand));
  }
  return plan;
}

double candidate_nll(std::span<const double> scores, double temperature) {
  if (scores.empty()) throw ValidationError("candidate_nll needs at least the true score");
  double zmax = -std::numeric_limits<double>::infinity();
  for (double s : scores) zmax = std::max(zmax, s / temperature);
  double sum = 0.0;
  for (double s : scores) sum += std::exp(s / temperature - zmax);
  return zmax + std::log(sum) - scores[0] / temperature;
}

}  // namespace lacuna
