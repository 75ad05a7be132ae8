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

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lacuna/types.hpp"

namespace lacuna {

/// Ordered collection of named parameter matrices.
template <typename Scalar>
class ParameterSet {
 public:
  struct Entry {
    std::string name;
    Tensor<Scalar> value;
  };

  Tensor<Scalar>& add(std::string name, Tensor<Scalar> value) {
    if (index_.count(name) != 0) throw std::invalid_argument("duplicate parameter '" + name + "'");
    index_.emplace(name, entries_.size());
    entries_.push_back({std::move(name), std::move(value)});
    return entries_.back().value;
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  Tensor<Scalar>& at(const std::string& name) { return entries_[lookup(name)].value; }
  const Tensor<Scalar>& at(const std::string& name) const { return entries_[lookup(name)].value; }

  /// Removes every parameter whose name starts with `prefix`.
  void erase_prefix(std::string_view prefix) {
    std::vector<Entry> kept;
    for (auto& e : entries_) {
      if (e.name.rfind(prefix, 0) != 0) kept.push_back(std::move(e));
    }
    entries_ = std::move(kept);
    reindex();
  }

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  long scalar_count() const {
    long n = 0;
    for (const auto& e : entries_) n += e.value.size();
    return n;
  }

  /// Same names and shapes, all zeros.
  ParameterSet zeros_like() const {
    ParameterSet out;
    for (const auto& e : entries_) out.add(e.name, Tensor<Scalar>::Zero(e.value.rows(), e.value.cols()));
    return out;
  }

  /// Same names in the same order with equal shapes and values.
  bool operator==(const ParameterSet& other) const {
    if (entries_.size() != other.entries_.size()) return false;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& a = entries_[i];
      const auto& b = other.entries_[i];
      if (a.name != b.name || a.value.rows() != b.value.rows() || a.value.cols() != b.value.cols()) return false;
      if (!(a.value.array() == b.value.array()).all()) return false;
    }
    return true;
  }

  template <typename To>
  ParameterSet<To> cast() const {
    ParameterSet<To> out;
    for (const auto& e : entries_) out.add(e.name, e.value.template cast<To>());
    return out;
  }

 private:
  std::size_t lookup(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("unknown parameter '" + name + "'");
    return it->second;
  }

  void reindex() {
    index_.clear();
    for (std::size_t i = 0; i < entries_.size(); ++i) index_.emplace(entries_[i].name, i);
  }

  std::vector<Entry> entries_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace lacuna
