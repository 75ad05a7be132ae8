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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lacuna/corpus/line_image.hpp"

namespace lacuna {

/// Ordered symbol inventory for CTC. Index 0 is the blank, which is never a
/// corpus character; the remaining symbols are single NFD codepoints.
class Vocabulary {
 public:
  static constexpr int kBlank = 0;

  Vocabulary() : symbols_{U""} {}
  /// Symbols excluding the blank, in index order starting at 1.
  explicit Vocabulary(std::vector<char32_t> symbols);

  int size() const { return static_cast<int>(symbols_.size()); }
  const std::u32string& symbol(int index) const { return symbols_.at(static_cast<std::size_t>(index)); }
  std::optional<int> index_of(char32_t c) const;

  /// Maps text to label indices; throws ValidationError naming the first
  /// character that is not in the vocabulary.
  std::vector<int> encode(std::u32string_view text) const;
  std::u32string decode(std::span<const int> indices) const;

  /// One symbol per line as U+XXXX, blank first as "<blank>".
  std::string serialize() const;
  static Vocabulary deserialize(const std::string& text);

  bool operator==(const Vocabulary&) const = default;

 private:
  std::vector<std::u32string> symbols_;
};

/// Sorted distinct codepoints of all texts, blank prepended.
Vocabulary build_vocab(std::span<const std::u32string> texts);
Vocabulary build_vocab(std::span<const TranscribedLine> lines);

}  // namespace lacuna
