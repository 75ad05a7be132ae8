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

#include <cstdint>

namespace lacuna {

/// Linear warmup from 0 to the peak, then linear decay to 0 at the last update.
struct PretrainSchedule {
  double peak_lr = 5e-4;
  double warmup_fraction = 0.08;
  std::int64_t total_updates = 0;
};

/// Warmup to the peak, hold, then linear decay to final_factor * peak.
/// Fractions must sum to 1.
struct TriStageSchedule {
  double peak_lr = 5e-4;
  double warmup_fraction = 0.10;
  double hold_fraction = 0.40;
  double decay_fraction = 0.50;
  double final_factor = 0.05;
  std::int64_t total_updates = 0;
};

/// Learning rate at `update` in [0, total]. Throws ValidationError outside it.
double lr_at(const PretrainSchedule& schedule, std::int64_t update);
double lr_at(const TriStageSchedule& schedule, std::int64_t update);

void validate(const PretrainSchedule& schedule);
void validate(const TriStageSchedule& schedule);

}  // namespace lacuna
