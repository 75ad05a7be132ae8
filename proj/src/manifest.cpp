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

#include "lacuna/corpus/manifest.hpp"

#include <fstream>
#include <sstream>

#include "lacuna/corpus/unicode.hpp"
#include "lacuna/types.hpp"

namespace lacuna {

namespace fs = std::filesystem;

std::string to_string(Split split) {
  switch (split) {
    case Split::kPretrain:
      return "pretrain";
    case Split::kFinetune:
      return "finetune";
    case Split::kTest:
      return "test";
  }
  return "?";
}

Split parse_split(const std::string& tag) {
  if (tag == "pretrain") return Split::kPretrain;
  if (tag == "finetune") return Split::kFinetune;
  if (tag == "test") return Split::kTest;
  throw ValidationError("unknown split tag '" + tag + "'");
}

Manifest Manifest::filter(Split split) const {
  Manifest out;
  for (const auto& e : entries) {
    if (e.split == split) out.entries.push_back(e);
  }
  return out;
}

Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read manifest '" + path.string() + "'");
  const fs::path base = path.parent_path();
  Manifest m;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("image_path\t", 0) == 0) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    if (line.back() == '\t') cols.emplace_back();
    if (cols.size() != 3) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": expected 3 tab-separated columns, got " +
                            std::to_string(cols.size()));
    }
    ManifestEntry e;
    if (cols[0].empty()) throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": empty image path");
    e.image = base / cols[0];
    if (!cols[1].empty()) e.transcript = base / cols[1];
    e.split = parse_split(cols[2]);
    if (e.split != Split::kPretrain && e.transcript.empty()) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + cols[2] +
                            " entries need a transcript");
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

void write_manifest(const fs::path& path, const Manifest& manifest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest '" + path.string() + "'");
  const fs::path base = path.parent_path();
  auto rel = [&](const fs::path& p) -> std::string {
    if (p.empty()) return {};
    if (base.empty()) return p.generic_string();
    return p.lexically_relative(base).generic_string();
  };
  out << "image_path\ttranscript_path\tsplit_tag\n";
  for (const auto& e : manifest.entries) out << rel(e.image) << '\t' << rel(e.transcript) << '\t' << to_string(e.split) << '\n';
  if (!out) throw IoError("failed writing manifest '" + path.string() + "'");
}

std::u32string read_transcript(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read transcript '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::u32string text = nfd_from_utf8(line);
  if (text.empty()) throw ValidationError("empty transcript '" + path.string() + "'");
  return text;
}

}  // namespace lacuna
