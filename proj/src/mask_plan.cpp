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

#include "lacuna/masking/mask_plan.hpp"

#include <algorithm>
#include <cmath>

namespace lacuna {

std::vector<int> MaskPlan::masked_steps() const {
  std::vector<int> steps;
  steps.reserve(static_cast<std::size_t>(masked_count()));
  for (const auto& s : spans) {
    for (int i = 0; i < s.length; ++i) steps.push_back(s.start + i);
  }
  return steps;
}

int MaskPlan::masked_count() const {
  int n = 0;
  for (const auto& s : spans) n += s.length;
  return n;
}

MaskPlan sample_plan(int time_steps, const MaskSettings& settings, Rng& rng) {
  if (time_steps < 1) throw ValidationError("sample_plan needs T >= 1");
  if (!(settings.probability > 0.0 && settings.probability <= 1.0)) {
    throw ValidationError("mask probability must be in (0, 1]");
  }
  if (settings.span_length < 1 || settings.min_gap < 0) throw ValidationError("bad mask span geometry");
  MaskPlan plan;
  plan.time_steps = time_steps;
  const int length = settings.span_length;
  if (time_steps < length) return plan;

  const int candidates = time_steps - length + 1;
  std::vector<int> order(static_cast<std::size_t>(candidates));
  for (int i = 0; i < candidates; ++i) order[static_cast<std::size_t>(i)] = i;
  const double target = settings.probability * time_steps;
  // Spans conflict when their starts are closer than length + gap.
  const int spacing = length + settings.min_gap;
  int covered = 0;
  // Lazy Fisher-Yates: draw the next candidate only when needed.
  for (int k = 0; k < candidates && covered < target; ++k) {
    const auto j = static_cast<std::size_t>(k) + uniform_index(rng, static_cast<std::uint64_t>(candidates - k));
    std::swap(order[static_cast<std::size_t>(k)], order[j]);
    const int start = order[static_cast<std::size_t>(k)];
    const auto pos = std::lower_bound(plan.spans.begin(), plan.spans.end(), start,
                                      [](const MaskSpan& s, int v) { return s.start < v; });
    if (pos != plan.spans.end() && pos->start - start < spacing) continue;
    if (pos != plan.spans.begin() && start - std::prev(pos)->start < spacing) continue;
    plan.spans.insert(pos, MaskSpan{start, length});
    covered += length;
  }
  return plan;
}

bool plan_is_valid(const MaskPlan& plan, int span_length, int min_gap) {
  for (std::size_t i = 0; i < plan.spans.size(); ++i) {
    const auto& s = plan.spans[i];
    if (s.length != span_length || s.start < 0 || s.start + s.length > plan.time_steps) return false;
    if (i > 0) {
      const auto& prev = plan.spans[i - 1];
      if (s.start - (prev.start + prev.length) < min_gap) return false;
    }
  }
  return true;
}

}  // namespace lacuna
