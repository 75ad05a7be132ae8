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

#include "lacuna/optim/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lacuna/types.hpp"

namespace lacuna {

namespace {

void check_range(std::int64_t update, std::int64_t total) {
  if (update < 0 || update > total) {
    throw ValidationError("update " + std::to_string(update) + " outside schedule range [0, " + std::to_string(total) + "]");
  }
}

}  // namespace

void validate(const PretrainSchedule& s) {
  if (s.total_updates < 1) throw ValidationError("schedule needs at least one update");
  if (!(s.peak_lr > 0.0)) throw ValidationError("peak learning rate must be > 0");
  if (!(s.warmup_fraction > 0.0 && s.warmup_fraction < 1.0)) throw ValidationError("warmup fraction must be in (0, 1)");
}

void validate(const TriStageSchedule& s) {
  if (s.total_updates < 1) throw ValidationError("schedule needs at least one update");
  if (!(s.peak_lr > 0.0)) throw ValidationError("peak learning rate must be > 0");
  if (s.warmup_fraction <= 0.0 || s.hold_fraction < 0.0 || s.decay_fraction <= 0.0) {
    throw ValidationError("tri-stage fractions must be positive");
  }
  if (std::abs(s.warmup_fraction + s.hold_fraction + s.decay_fraction - 1.0) > 1e-9) {
    throw ValidationError("tri-stage fractions must sum to 1");
  }
  if (s.final_factor < 0.0 || s.final_factor > 1.0) throw ValidationError("final factor must be in [0, 1]");
}

// Breakpoints are rounded to whole updates so the peak is hit exactly.
double lr_at(const PretrainSchedule& s, std::int64_t update) {
  validate(s);
  check_range(update, s.total_updates);
  const std::int64_t warmup = std::max<std::int64_t>(1, std::llround(s.warmup_fraction * s.total_updates));
  if (update == warmup) return s.peak_lr;
  if (update < warmup) return s.peak_lr * (static_cast<double>(update) / static_cast<double>(warmup));
  if (warmup >= s.total_updates) return s.peak_lr;
  return s.peak_lr * (static_cast<double>(s.total_updates - update) / static_cast<double>(s.total_updates - warmup));
}

double lr_at(const TriStageSchedule& s, std::int64_t update) {
  validate(s);
  check_range(update, s.total_updates);
  const std::int64_t warmup = std::max<std::int64_t>(1, std::llround(s.warmup_fraction * s.total_updates));
  const std::int64_t hold_end =
      std::max<std::int64_t>(warmup, std::llround((s.warmup_fraction + s.hold_fraction) * s.total_updates));
  if (update < warmup) return s.peak_lr * (static_cast<double>(update) / static_cast<double>(warmup));
  if (update <= hold_end) return s.peak_lr;
  if (update == s.total_updates) return s.peak_lr * s.final_factor;
  const double progress = static_cast<double>(update - hold_end) / static_cast<double>(s.total_updates - hold_end);
  return s.peak_lr * (1.0 - progress * (1.0 - s.final_factor));
}

}  // namespace lacuna
