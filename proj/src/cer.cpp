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

#include "lacuna/decode_eval/cer.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "lacuna/decode_eval/decode.hpp"
#include "lacuna/types.hpp"

namespace lacuna {

int edit_distance(std::u32string_view hyp, std::u32string_view ref) {
  std::vector<int> prev(ref.size() + 1);
  std::vector<int> cur(ref.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= hyp.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= ref.size(); ++j) {
      const int sub = prev[j - 1] + (hyp[i - 1] == ref[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[ref.size()];
}

double cer(std::u32string_view hyp, std::u32string_view ref) {
  if (ref.empty()) throw ValidationError("CER is undefined for an empty reference");
  return static_cast<double>(edit_distance(hyp, ref)) / static_cast<double>(ref.size());
}

std::vector<int> collapse_path(const std::vector<int>& path, int blank) {
  std::vector<int> out;
  int prev = -1;
  for (int k : path) {
    if (k != prev && k != blank) out.push_back(k);
    prev = k;
  }
  return out;
}

}  // namespace lacuna
