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

#include <vector>

#include "lacuna/autodiff/tape.hpp"
#include "lacuna/encoder/layers.hpp"
#include "lacuna/random.hpp"
#include "lacuna/types.hpp"

namespace lacuna {

struct MaskSpan {
  int start = 0;
  int length = 0;
  bool operator==(const MaskSpan&) const = default;
};

/// Non-overlapping fixed-length spans over the T steps of one line.
struct MaskPlan {
  int time_steps = 0;
  std::vector<MaskSpan> spans;  // sorted by start

  bool empty() const { return spans.empty(); }
  /// Sorted indices of every masked step.
  std::vector<int> masked_steps() const;
  int masked_count() const;
};

struct MaskSettings {
  double probability = 0.5;  // target fraction of steps covered
  int span_length = 12;
  int min_gap = 8;
};

/// Greedy span sampler: visits candidate starts in uniformly random order and
/// accepts a span when it fits inside [0, T) and keeps at least `min_gap` free
/// steps to every accepted span; stops once coverage reaches p*T or the
/// candidates run out. Lines shorter than one span get an empty plan.
MaskPlan sample_plan(int time_steps, const MaskSettings& settings, Rng& rng);

/// True when spans are in bounds, full length, sorted, and separated by the gap.
bool plan_is_valid(const MaskPlan& plan, int span_length, int min_gap);

/// Copy of `features` with every masked row replaced by `mask_embedding`.
template <typename Scalar>
Tensor<Scalar> apply_mask(const Tensor<Scalar>& features, const MaskPlan& plan, const Tensor<Scalar>& mask_embedding) {
  if (plan.time_steps != features.rows()) {
    throw ValidationError("mask plan covers " + std::to_string(plan.time_steps) + " steps, features have " +
                          std::to_string(features.rows()));
  }
  if (mask_embedding.rows() != 1 || mask_embedding.cols() != features.cols()) {
    throw ValidationError("mask embedding length does not match feature dimension");
  }
  Tensor<Scalar> out = features;
  for (int t : plan.masked_steps()) out.row(t) = mask_embedding.row(0);
  return out;
}

/// Tape version of apply_mask; gradients flow to unmasked rows and the embedding.
template <typename Scalar>
ad::Var apply_mask(ad::Tape<Scalar>& tape, ad::Var features, const MaskPlan& plan, ad::Var mask_embedding) {
  if (plan.time_steps != tape.value(features).rows()) {
    throw ValidationError("mask plan covers " + std::to_string(plan.time_steps) + " steps, features have " +
                          std::to_string(tape.value(features).rows()));
  }
  return ad::replace_rows(tape, features, plan.masked_steps(), mask_embedding);
}

}  // namespace lacuna
