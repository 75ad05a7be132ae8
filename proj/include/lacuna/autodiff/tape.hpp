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

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lacuna/types.hpp"

namespace lacuna::ad {

/// Handle to a node on a Tape.
struct Var {
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::size_t id = kNone;
  bool valid() const { return id != kNone; }
};

/// Extent of a multi-channel feature map stored as a (channels, height*width)
/// matrix with row index h*width + w inside each channel row.
struct MapExtent {
  int channels = 0;
  int height = 0;
  int width = 0;
};

/// Reverse-mode tape over whole matrices.
///
/// Every op records its output value and, when any input needs a gradient,
/// a closure that maps the output gradient onto the gradients of its parents.
/// Leaves created with `input` borrow their value, so parameters are never
/// copied per forward pass; the referenced matrices must outlive the tape.
template <typename Scalar>
class Tape {
 public:
  using Matrix = Tensor<Scalar>;
  using Backward = std::function<void(Tape&, const Matrix& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  Var input(const Matrix& value, bool requires_grad = false) {
    Node node;
    node.borrowed = &value;
    node.requires_grad = requires_grad;
    return push(std::move(node));
  }

  Var constant(Matrix value, MapExtent extent = {}) {
    Node node;
    node.owned = std::move(value);
    node.extent = extent;
    return push(std::move(node));
  }

  /// Records an op result. `fn` is kept only if some parent needs a gradient.
  Var record(Matrix value, std::initializer_list<Var> parents, Backward fn, MapExtent extent = {}) {
    Node node;
    node.owned = std::move(value);
    node.extent = extent;
    for (Var p : parents) node.requires_grad = node.requires_grad || requires_grad(p);
    if (node.requires_grad) node.backward = std::move(fn);
    return push(std::move(node));
  }

  const Matrix& value(Var v) const {
    const Node& n = at(v);
    return n.borrowed ? *n.borrowed : n.owned;
  }

  MapExtent extent(Var v) const { return at(v).extent; }
  bool requires_grad(Var v) const { return at(v).requires_grad; }

  /// Gradient of the last `backward` root with respect to `v`; empty if
  /// no gradient reached it.
  const Matrix& grad(Var v) const { return at(v).grad; }

  /// Gradient buffer of `v`, zero-initialized on first use. Ops call this from
  /// their backward closures to accumulate into their parents.
  Matrix& grad_buffer(Var v) {
    Node& n = at(v);
    if (n.grad.size() == 0) {
      const Matrix& val = value(v);
      n.grad = Matrix::Zero(val.rows(), val.cols());
    }
    return n.grad;
  }

  /// Propagates d(root)/d(node) for every node recorded before `root`.
  /// `root` must be a 1x1 value.
  void backward(Var root, Scalar seed = Scalar(1)) {
    const Matrix& rv = value(root);
    if (rv.rows() != 1 || rv.cols() != 1) {
      throw std::invalid_argument("backward root must be a scalar");
    }
    if (!requires_grad(root)) return;
    grad_buffer(root)(0, 0) += seed;
    for (std::size_t i = root.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.backward || n.grad.size() == 0) continue;
      // Closures may grow parents' grads; take the op and grad out first.
      Backward fn = std::move(n.backward);
      n.backward = nullptr;
      fn(*this, n.grad);
    }
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix owned;
    const Matrix* borrowed = nullptr;
    Matrix grad;
    Backward backward;
    MapExtent extent;
    bool requires_grad = false;
  };

  Var push(Node node) {
    nodes_.push_back(std::move(node));
    return Var{nodes_.size() - 1};
  }

  Node& at(Var v) {
    if (v.id >= nodes_.size()) throw std::out_of_range("gradient requested for a node that was never recorded");
    return nodes_[v.id];
  }
  const Node& at(Var v) const {
    if (v.id >= nodes_.size()) throw std::out_of_range("gradient requested for a node that was never recorded");
    return nodes_[v.id];
  }

  std::vector<Node> nodes_;
};

}  // namespace lacuna::ad
