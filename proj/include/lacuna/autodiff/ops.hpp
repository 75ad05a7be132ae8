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

#include <stdexcept>
#include <string>

#include "lacuna/autodiff/tape.hpp"

namespace lacuna::ad {

namespace detail {
inline void require_same_shape(long ar, long ac, long br, long bc, const char* op) {
  if (ar != br || ac != bc) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + std::to_string(ar) + "x" +
                                std::to_string(ac) + " vs " + std::to_string(br) + "x" + std::to_string(bc));
  }
}
}  // namespace detail

template <typename Scalar>
Var add(Tape<Scalar>& tape, Var a, Var b) {
  const auto& av = tape.value(a);
  const auto& bv = tape.value(b);
  detail::require_same_shape(av.rows(), av.cols(), bv.rows(), bv.cols(), "add");
  return tape.record(av + bv, {a, b}, [a, b](Tape<Scalar>& t, const Tensor<Scalar>& g) {
    if (t.requires_grad(a)) t.grad_buffer(a) += g;
    if (t.requires_grad(b)) t.grad_buffer(b) += g;
  });
}

template <typename Scalar>
Var sub(Tape<Scalar>& tape, Var a, Var b) {
  const auto& av = tape.value(a);
  const auto& bv = tape.value(b);
  detail::require_same_shape(av.rows(), av.cols(), bv.rows(), bv.cols(), "sub");
  return tape.record(av - bv, {a, b}, [a, b](Tape<Scalar>& t, const Tensor<Scalar>& g) {
    if (t.requires_grad(a)) t.grad_buffer(a) += g;
    if (t.requires_grad(b)) t.grad_buffer(b) -= g;
  });
}

/// Elementwise product.
template <typename Scalar>
Var mul(Tape<Scalar>& tape, Var a, Var b) {
  const auto& av = tape.value(a);
  const auto& bv = tape.value(b);
  detail::require_same_shape(av.rows(), av.cols(), bv.rows(), bv.cols(), "mul");
  return tape.record(av.cwiseProduct(bv), {a, b}, [a, b](Tape<Scalar>& t, const Tensor<Scalar>& g) {
    if (t.requires_grad(a)) t.grad_buffer(a) += g.cwiseProduct(t.value(b));
    if (t.requires_grad(b)) t.grad_buffer(b) += g.cwiseProduct(t.value(a));
  });
}

template <typename Scalar>
Var square(Tape<Scalar>& tape, Var a) {
  return tape.record(tape.value(a).array().square().matrix(), {a}, [a](Tape<Scalar>& t, const Tensor<Scalar>& g) {
    t.grad_buffer(a) += (Scalar(2) * g.array() * t.value(a).array()).matrix();
  });
}

template <typename Scalar>
Var scale(Tape<Scalar>& tape, Var a, Scalar factor) {
  return tape.record(tape.value(a) * factor, {a}, [a, factor](Tape<Scalar>& t, const Tensor<Scalar>& g) {
    t.grad_buffer(a) += g * factor;
  });
}

/// Sum of all entries, as a 1x1 value.
template <typename Scalar>
Var sum(Tape<Scalar>& tape, Var a) {
  Tensor<Scalar> out(1, 1);
  out(0, 0) = tape.value(a).sum();
  return tape.record(std::move(out), {a}, [a](Tape<Scalar>& t, const Tensor<Scalar>& g) {
    t.grad_buffer(a).array() += g(0, 0);
  });
}

/// Matrix product a * b.
template <typename Scalar>
Var matmul(Tape<Scalar>& tape, Var a, Var b) {
  const auto& av = tape.value(a);
  const auto& bv = tape.value(b);
  if (av.cols() != bv.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
  Tensor<Scalar> out = av * bv;
  return tape.record(std::move(out), {a, b}, [a, b](Tape<Scalar>& t, const Tensor<Scalar>& g) {
    if (t.requires_grad(a)) t.grad_buffer(a).noalias() += g * t.value(b).transpose();
    if (t.requires_grad(b)) t.grad_buffer(b).noalias() += t.value(a).transpose() * g;
  });
}

/// Row-wise affine map: x * weight^T (+ bias). x is N x in, weight is out x in,
/// bias is 1 x out. Pass an invalid Var for no bias.
template <typename Scalar>
Var linear(Tape<Scalar>& tape, Var x, Var weight, Var bias = {}) {
  const auto& xv = tape.value(x);
  const auto& wv = tape.value(weight);
  if (xv.cols() != wv.cols()) {
    throw std::invalid_argument("linear: input has " + std::to_string(xv.cols()) + " features, weight expects " +
                                std::to_string(wv.cols()));
  }
  Tensor<Scalar> out(xv.rows(), wv.rows());
  out.noalias() = xv * wv.transpose();
  if (bias.valid()) {
    const auto& bv = tape.value(bias);
    if (bv.rows() != 1 || bv.cols() != wv.rows()) throw std::invalid_argument("linear: bias shape mismatch");
    out.rowwise() += bv.row(0);
  }
  auto fn = [x, weight, bias](Tape<Scalar>& t, const Tensor<Scalar>& g) {
    if (t.requires_grad(x)) t.grad_buffer(x).noalias() += g * t.value(weight);
    if (t.requires_grad(weight)) t.grad_buffer(weight).noalias() += g.transpose() * t.value(x);
    if (bias.valid() && t.requires_grad(bias)) t.grad_buffer(bias) += g.colwise().sum();
  };
  if (bias.valid()) return tape.record(std::move(out), {x, weight, bias}, std::move(fn));
  return tape.record(std::move(out), {x, weight}, std::move(fn));
}

/// Horizontal concatenation [a | b]; both must have the same row count.
template <typename Scalar>
Var concat_cols(Tape<Scalar>& tape, Var a, Var b) {
  const auto& av = tape.value(a);
  const auto& bv = tape.value(b);
  if (av.rows() != bv.rows()) throw std::invalid_argument("concat_cols: row counts differ");
  Tensor<Scalar> out(av.rows(), av.cols() + bv.cols());
  out.leftCols(av.cols()) = av;
  out.rightCols(bv.cols()) = bv;
  const auto ac = av.cols();
  const auto bc = bv.cols();
  return tape.record(std::move(out), {a, b}, [a, b, ac, bc](Tape<Scalar>& t, const Tensor<Scalar>& g) {
    if (t.requires_grad(a)) t.grad_buffer(a) += g.leftCols(ac);
    if (t.requires_grad(b)) t.grad_buffer(b) += g.rightCols(bc);
  });
}

/// Identity that tags a (channels, height*width) matrix with its map extent.
template <typename Scalar>
Var reshape_map(Tape<Scalar>& tape, Var x, MapExtent extent) {
  const auto& xv = tape.value(x);
  if (xv.rows() != extent.channels || xv.cols() != static_cast<long>(extent.height) * extent.width) {
    throw std::invalid_argument("reshape_map: extent does not match the value shape");
  }
  return tape.record(xv, {x}, [x](Tape<Scalar>& t, const Tensor<Scalar>& g) { t.grad_buffer(x) += g; }, extent);
}

}  // namespace lacuna::ad
