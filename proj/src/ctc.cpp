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

#include "lacuna/finetune/ctc.hpp"

namespace lacuna {

int ctc_min_frames(std::span<const int> label) {
  int frames = static_cast<int>(label.size());
  for (std::size_t i = 1; i < label.size(); ++i) frames += label[i] == label[i - 1] ? 1 : 0;
  return frames;
}

}  // namespace lacuna
