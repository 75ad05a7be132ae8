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

/// Decodes UTF-8; throws ValidationError on malformed input.
std::u32string utf8_to_codepoints(std::string_view utf8);

std::string codepoints_to_utf8(std::u32string_view text);

/// Canonical decomposition (NFD).
std::u32string nfd(std::u32string_view text);

/// UTF-8 in, NFD codepoints out.
std::u32string nfd_from_utf8(std::string_view utf8);

bool is_nfd(std::u32string_view text);

}  // namespace lacuna
