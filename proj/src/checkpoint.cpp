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

#include "lacuna/cli/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace lacuna {

namespace {

constexpr char kMagic[8] = {'L', 'A', 'C', 'U', 'N', 'A', 'c', 'k'};
constexpr std::uint8_t kArray = 0;
constexpr std::uint8_t kText = 1;

constexpr const char* kParam = "param/";
constexpr const char* kFirst = "adam.m/";
constexpr const char* kSecond = "adam.v/";
constexpr const char* kSteps = "adam.t/";
constexpr const char* kMeta = "meta/";

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

void put_name(std::string& out, const std::string& name, std::uint8_t kind) {
  put_u32(out, static_cast<std::uint32_t>(name.size()));
  out += name;
  out.push_back(static_cast<char>(kind));
}

void put_array(std::string& out, const std::string& name, const Tensorf& value) {
  put_name(out, name, kArray);
  put_u32(out, 2);
  put_u32(out, static_cast<std::uint32_t>(value.rows()));
  put_u32(out, static_cast<std::uint32_t>(value.cols()));
  for (long i = 0; i < value.size(); ++i) put_f32(out, value.data()[i]);
}

class Reader {
 public:
  Reader(const std::string& bytes, std::string origin) : bytes_(bytes), origin_(std::move(origin)) {}

  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw IoError("checkpoint '" + origin_ + "' is truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  bool done() const { return pos_ == bytes_.size(); }
  const std::string& origin() const { return origin_; }

 private:
  const std::string& bytes_;
  std::string origin_;
  std::size_t pos_ = 0;
};

bool starts_with(const std::string& s, const char* prefix) { return s.rfind(prefix, 0) == 0; }

bool same_bits(const ParameterSet<float>& a, const ParameterSet<float>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a.entries()[i];
    const auto& y = b.entries()[i];
    if (x.name != y.name || x.value.rows() != y.value.rows() || x.value.cols() != y.value.cols()) return false;
    if (std::memcmp(x.value.data(), y.value.data(), sizeof(float) * static_cast<std::size_t>(x.value.size())) != 0) {
      return false;
    }
  }
  return true;
}

}  // namespace

const std::string& Checkpoint::meta_at(const std::string& key) const {
  auto it = meta.find(key);
  if (it == meta.end()) throw ValidationError("checkpoint lacks metadata '" + key + "'");
  return it->second;
}

bool Checkpoint::operator==(const Checkpoint& other) const {
  if (meta != other.meta || has_optimizer != other.has_optimizer || !same_bits(params, other.params)) return false;
  if (!has_optimizer) return true;
  return same_bits(adam.first, other.adam.first) && same_bits(adam.second, other.adam.second) &&
         same_bits(adam.steps, other.adam.steps);
}

std::string serialize_checkpoint(const Checkpoint& c) {
  std::string out(kMagic, sizeof kMagic);
  put_u32(out, Checkpoint::kVersion);
  std::size_t records = c.params.size() + c.meta.size();
  if (c.has_optimizer) records += c.adam.first.size() + c.adam.second.size() + c.adam.steps.size();
  put_u32(out, static_cast<std::uint32_t>(records));
  for (const auto& e : c.params.entries()) put_array(out, kParam + e.name, e.value);
  if (c.has_optimizer) {
    for (const auto& e : c.adam.first.entries()) put_array(out, kFirst + e.name, e.value);
    for (const auto& e : c.adam.second.entries()) put_array(out, kSecond + e.name, e.value);
    for (const auto& e : c.adam.steps.entries()) put_array(out, kSteps + e.name, e.value);
  }
  for (const auto& [key, text] : c.meta) {
    put_name(out, kMeta + key, kText);
    put_u32(out, static_cast<std::uint32_t>(text.size()));
    out += text;
  }
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes, const std::string& origin) {
  Reader in(bytes, origin);
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw ValidationError("'" + origin + "' is not a checkpoint file");
  }
  in.str(sizeof kMagic);
  const std::uint32_t version = in.u32();
  if (version != Checkpoint::kVersion) {
    throw ValidationError("checkpoint '" + origin + "' has unsupported format version " + std::to_string(version));
  }
  const std::uint32_t records = in.u32();
  Checkpoint c;
  for (std::uint32_t r = 0; r < records; ++r) {
    const std::string name = in.str(in.u32());
    const std::uint8_t kind = in.u8();
    if (kind == kText) {
      if (!starts_with(name, kMeta)) throw ValidationError("checkpoint text record '" + name + "' outside meta/");
      c.meta[name.substr(std::strlen(kMeta))] = in.str(in.u32());
      continue;
    }
    if (kind != kArray) throw ValidationError("checkpoint record '" + name + "' has unknown kind");
    const std::uint32_t rank = in.u32();
    if (rank != 2) throw ValidationError("checkpoint array '" + name + "' has rank " + std::to_string(rank));
    const std::uint32_t rows = in.u32();
    const std::uint32_t cols = in.u32();
    in.need(static_cast<std::size_t>(rows) * cols * 4);
    Tensorf value(rows, cols);
    for (long i = 0; i < value.size(); ++i) value.data()[i] = in.f32();
    if (starts_with(name, kParam)) {
      c.params.add(name.substr(std::strlen(kParam)), std::move(value));
    } else if (starts_with(name, kFirst)) {
      c.adam.first.add(name.substr(std::strlen(kFirst)), std::move(value));
    } else if (starts_with(name, kSecond)) {
      c.adam.second.add(name.substr(std::strlen(kSecond)), std::move(value));
    } else if (starts_with(name, kSteps)) {
      c.adam.steps.add(name.substr(std::strlen(kSteps)), std::move(value));
    } else {
      throw ValidationError("checkpoint array '" + name + "' has an unknown prefix");
    }
  }
  if (!in.done()) throw ValidationError("checkpoint '" + origin + "' has trailing bytes");
  c.has_optimizer = c.adam.first.size() != 0;
  if (c.has_optimizer) {
    for (const auto& e : c.params.entries()) {
      if (!c.adam.first.contains(e.name) || !c.adam.second.contains(e.name) || !c.adam.steps.contains(e.name)) {
        throw ValidationError("checkpoint optimizer state lacks '" + e.name + "'");
      }
    }
  }
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const std::string bytes = serialize_checkpoint(checkpoint);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing checkpoint '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place at '" + path.string() + "': " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str(), path.string());
}

}  // namespace lacuna
