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
#include <filesystem>
#include <map>
#include <string>

#include "lacuna/encoder/parameters.hpp"
#include "lacuna/optim/adam.hpp"

namespace lacuna {

/// Named float32 arrays plus text metadata, stored in one binary file:
///
///   magic "LACUNAck" (8 bytes), version u32, record count u32, then records
///   u32 name length, name bytes, u8 kind, and either
///     kind 0 (array): u32 rank, u32 dims[rank], float32 payload, row-major
///     kind 1 (text):  u32 byte length, bytes
///
/// All integers and floats are little-endian. Array names carry a prefix:
/// "param/" for model parameters and "adam.m/", "adam.v/", "adam.t/" for
/// optimizer moments and step counts. Text records use "meta/".
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  ParameterSet<float> params;
  bool has_optimizer = false;
  AdamState<float> adam;
  std::map<std::string, std::string> meta;

  const std::string& meta_at(const std::string& key) const;
  bool operator==(const Checkpoint& other) const;
};

/// Writes to a temporary sibling and renames, so readers never see a partial file.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

/// Throws IoError for unreadable or truncated files, ValidationError for a
/// foreign magic, an unknown version or malformed records.
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint deserialize_checkpoint(const std::string& bytes, const std::string& origin = "<memory>");

}  // namespace lacuna
