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

#include "lacuna/key_value.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lacuna/types.hpp"

namespace lacuna {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text, const std::string& origin) {
  KeyValueFile kv;
  kv.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(origin + ":" + std::to_string(line_no) + ": expected key=value, got '" + t + "'");
    }
    std::string key = trim(t.substr(0, eq));
    // Values keep inner spaces; only the line ends are trimmed.
    std::string value = t.substr(eq + 1);
    const auto vb = value.find_first_not_of(" \t");
    value = vb == std::string::npos ? std::string{} : value.substr(vb);
    if (key.empty()) throw ValidationError(origin + ":" + std::to_string(line_no) + ": empty key");
    if (kv.values_.count(key)) {
      throw ValidationError(origin + ":" + std::to_string(line_no) + ": duplicate config key '" + key + "'");
    }
    kv.values_.emplace(key, value);
    kv.lines_.emplace(key, line_no);
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

const std::string& KeyValueFile::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError(origin_ + ": missing key '" + key + "'");
  return it->second;
}

void KeyValueFile::reject_unknown(const std::set<std::string>& allowed) const {
  for (const auto& [key, value] : values_) {
    if (!allowed.count(key)) {
      throw ValidationError(origin_ + ":" + std::to_string(lines_.at(key)) + ": unknown config key '" + key + "'");
    }
  }
}

int parse_int(const std::string& key, const std::string& value) {
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(value.c_str(), &end, 10);
  if (value.empty() || *end != '\0' || errno != 0 || v < INT32_MIN || v > INT32_MAX) {
    throw ValidationError("config key '" + key + "': expected an integer, got '" + value + "'");
  }
  return static_cast<int>(v);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (value.empty() || value[0] == '-' || *end != '\0' || errno != 0) {
    throw ValidationError("config key '" + key + "': expected a non-negative integer, got '" + value + "'");
  }
  return v;
}

double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || *end != '\0' || errno != 0) {
    throw ValidationError("config key '" + key + "': expected a number, got '" + value + "'");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& value, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

}  // namespace lacuna
