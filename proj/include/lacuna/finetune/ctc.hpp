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

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "lacuna/autodiff/tape.hpp"
#include "lacuna/types.hpp"

namespace lacuna {

/// Fewest frames that can emit `label`: one per symbol plus a separating
/// blank between equal neighbours.
int ctc_min_frames(std::span<const int> label);

namespace detail {

inline double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace detail

template <typename Scalar>
struct CtcResult {
  double loss = 0.0;  // -log p(label | logits); +inf when infeasible
  bool feasible = true;
  Tensor<Scalar> grad;  // d loss / d logits (T x V); empty if not requested or infeasible
};

/// Connectionist temporal classification loss on raw (pre-softmax) logits.
///
/// Log-space forward-backward over the blank-augmented label
/// (blank, l1, blank, l2, ..., blank). Internally computed in double.
template <typename Scalar>
CtcResult<Scalar> ctc(const Tensor<Scalar>& logits, std::span<const int> label, int blank, bool with_grad) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  const long frames = logits.rows();
  const long vocab = logits.cols();
  if (label.empty()) throw ValidationError("CTC label must hold at least one symbol");
  for (int l : label) {
    if (l < 0 || l >= vocab) throw ValidationError("CTC label index outside the vocabulary");
    if (l == blank) throw ValidationError("CTC label must not contain the blank");
  }
  CtcResult<Scalar> out;
  if (frames < ctc_min_frames(label)) {
    out.loss = std::numeric_limits<double>::infinity();
    out.feasible = false;
    return out;
  }

  // Row-wise log-softmax.
  Tensord logp = logits.template cast<double>();
  for (long t = 0; t < frames; ++t) {
    const double m = logp.row(t).maxCoeff();
    const double lse = m + std::log((logp.row(t).array() - m).exp().sum());
    logp.row(t).array() -= lse;
  }

  const long states = 2 * static_cast<long>(label.size()) + 1;
  auto sym = [&](long s) { return (s % 2 == 0) ? blank : label[static_cast<std::size_t>(s / 2)]; };
  // Skipping the blank between s-2 and s is allowed unless both are equal labels.
  auto can_skip = [&](long s) { return s >= 2 && sym(s) != blank && sym(s) != sym(s - 2); };

  Tensord alpha = Tensord::Constant(frames, states, kNegInf);
  alpha(0, 0) = logp(0, blank);
  alpha(0, 1) = logp(0, sym(1));
  for (long t = 1; t < frames; ++t) {
    for (long s = 0; s < states; ++s) {
      double a = alpha(t - 1, s);
      if (s >= 1) a = detail::log_add(a, alpha(t - 1, s - 1));
      if (can_skip(s)) a = detail::log_add(a, alpha(t - 1, s - 2));
      alpha(t, s) = a == kNegInf ? kNegInf : a + logp(t, sym(s));
    }
  }
  const double log_likelihood = detail::log_add(alpha(frames - 1, states - 1), alpha(frames - 1, states - 2));
  out.loss = -log_likelihood;
  if (!with_grad) return out;

  Tensord beta = Tensord::Constant(frames, states, kNegInf);
  beta(frames - 1, states - 1) = logp(frames - 1, blank);
  beta(frames - 1, states - 2) = logp(frames - 1, sym(states - 2));
  for (long t = frames - 1; t-- > 0;) {
    for (long s = 0; s < states; ++s) {
      double b = beta(t + 1, s);
      if (s + 1 < states) b = detail::log_add(b, beta(t + 1, s + 1));
      if (s + 2 < states && can_skip(s + 2)) b = detail::log_add(b, beta(t + 1, s + 2));
      beta(t, s) = b == kNegInf ? kNegInf : b + logp(t, sym(s));
    }
  }

  // Occupancy of symbol k at frame t: sum over states emitting k of
  // alpha*beta / y, normalized by the likelihood. Gradient = softmax - occupancy.
  Tensord occupancy = Tensord::Constant(frames, vocab, kNegInf);
  for (long t = 0; t < frames; ++t) {
    for (long s = 0; s < states; ++s) {
      const double v = alpha(t, s) + beta(t, s) - logp(t, sym(s));
      occupancy(t, sym(s)) = detail::log_add(occupancy(t, sym(s)), v);
    }
  }
  Tensord grad(frames, vocab);
  for (long t = 0; t < frames; ++t) {
    for (long k = 0; k < vocab; ++k) {
      grad(t, k) = std::exp(logp(t, k)) - std::exp(occupancy(t, k) - log_likelihood);
    }
  }
  out.grad = grad.template cast<Scalar>();
  return out;
}

/// Tape op for the CTC loss of one line. Infeasible labels give +inf and no
/// gradient; `feasible` reports which case occurred.
template <typename Scalar>
ad::Var ctc_loss(ad::Tape<Scalar>& tape, ad::Var logits, std::span<const int> label, int blank, bool& feasible) {
  CtcResult<Scalar> r = ctc(tape.value(logits), label, blank, tape.requires_grad(logits));
  feasible = r.feasible;
  Tensor<Scalar> out(1, 1);
  out(0, 0) = static_cast<Scalar>(r.loss);
  if (!r.feasible) return tape.constant(std::move(out));
  auto grad = std::make_shared<Tensor<Scalar>>(std::move(r.grad));
  return tape.record(std::move(out), {logits}, [logits, grad](ad::Tape<Scalar>& t, const Tensor<Scalar>& g) {
    t.grad_buffer(logits) += g(0, 0) * (*grad);
  });
}

}  // namespace lacuna
