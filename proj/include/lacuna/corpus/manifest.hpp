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

#include <filesystem>
#include <string>
#include <vector>

namespace lacuna {

enum class Split { kPretrain, kFinetune, kTest };

std::string to_string(Split split);
Split parse_split(const std::string& tag);

struct ManifestEntry {
  std::filesystem::path image;
  std::filesystem::path transcript;  // empty when absent
  Split split = Split::kPretrain;
};

/// Line list as read from or written to a TSV manifest
/// (image_path, transcript_path, split_tag; paths relative to the file).
struct Manifest {
  std::vector<ManifestEntry> entries;

  Manifest filter(Split split) const;
  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

/// Throws IoError if unreadable, ValidationError on malformed rows or on
/// finetune/test rows without a transcript.
Manifest read_manifest(const std::filesystem::path& path);

/// Paths are written relative to the manifest's directory when possible.
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// Reads a UTF-8 transcript (first line, trailing CR/LF dropped) and
/// NFD-normalizes it. Empty transcripts are rejected.
std::u32string read_transcript(const std::filesystem::path& path);

}  // namespace lacuna
