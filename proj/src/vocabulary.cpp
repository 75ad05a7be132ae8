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

#include "lacuna/corpus/vocabulary.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "lacuna/corpus/unicode.hpp"
#include "lacuna/types.hpp"

namespace lacuna {

Vocabulary::Vocabulary(std::vector<char32_t> symbols) : symbols_{U""} {
  std::set<char32_t> seen;
  for (char32_t c : symbols) {
    if (!seen.insert(c).second) throw ValidationError("duplicate vocabulary symbol U+" + std::to_string(c));
    symbols_.push_back(std::u32string(1, c));
  }
}

std::optional<int> Vocabulary::index_of(char32_t c) const {
  for (std::size_t i = 1; i < symbols_.size(); ++i) {
    if (symbols_[i].size() == 1 && symbols_[i][0] == c) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::vector<int> Vocabulary::encode(std::u32string_view text) const {
  std::vector<int> out;
  out.reserve(text.size());
  for (char32_t c : text) {
    auto idx = index_of(c);
    if (!idx) {
      char code[16];
      std::snprintf(code, sizeof code, "U+%04X", static_cast<unsigned>(c));
      throw ValidationError("character " + std::string(code) + " ('" + codepoints_to_utf8(std::u32string(1, c)) +
                            "') is not in the vocabulary");
    }
    out.push_back(*idx);
  }
  return out;
}

std::u32string Vocabulary::decode(std::span<const int> indices) const {
  std::u32string out;
  for (int i : indices) {
    if (i != kBlank) out += symbol(i);
  }
  return out;
}

std::string Vocabulary::serialize() const {
  std::ostringstream os;
  os << "<blank>\n";
  for (std::size_t i = 1; i < symbols_.size(); ++i) {
    char code[16];
    std::snprintf(code, sizeof code, "U+%04X", static_cast<unsigned>(symbols_[i][0]));
    os << code << '\n';
  }
  return os.str();
}

Vocabulary Vocabulary::deserialize(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "<blank>") throw ValidationError("vocabulary must start with <blank>");
  std::vector<char32_t> symbols;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.rfind("U+", 0) != 0) throw ValidationError("bad vocabulary entry '" + line + "'");
    symbols.push_back(static_cast<char32_t>(std::stoul(line.substr(2), nullptr, 16)));
  }
  return Vocabulary(std::move(symbols));
}

Vocabulary build_vocab(std::span<const std::u32string> texts) {
  if (texts.empty()) throw ValidationError("cannot build a vocabulary from an empty corpus");
  std::set<char32_t> chars;
  for (const auto& t : texts) chars.insert(t.begin(), t.end());
  if (chars.empty()) throw ValidationError("cannot build a vocabulary from empty transcripts");
  return Vocabulary(std::vector<char32_t>(chars.begin(), chars.end()));
}

Vocabulary build_vocab(std::span<const TranscribedLine> lines) {
  std::vector<std::u32string> texts;
  texts.reserve(lines.size());
  for (const auto& l : lines) texts.push_back(l.text);
  return build_vocab(std::span<const std::u32string>(texts));
}

}  // namespace lacuna
