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

#include <string>
#include <string_view>

namespace lacuna {

/// Levenshtein distance with unit costs over codepoints.
int edit_distance(std::u32string_view hypothesis, std::u32string_view reference);

/// edit_distance / |reference|. Throws ValidationError for an empty reference.
double cer(std::u32string_view hypothesis, std::u32string_view reference);

}  // namespace lacuna
