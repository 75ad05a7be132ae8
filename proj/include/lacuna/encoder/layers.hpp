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

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "lacuna/autodiff/tape.hpp"

namespace lacuna::ad {

/// Kernel height/width and stride height/width of a conv or pool window.
struct Window {
  int kernel_h = 1;
  int kernel_w = 1;
  int stride_h = 1;
  int stride_w = 1;

  /// Output extent of a valid (unpadded) window sweep; 0 if nothing fits.
  int out_h(int h) const { return h < kernel_h ? 0 : (h - kernel_h) / stride_h + 1; }
  int out_w(int w) const { return w < kernel_w ? 0 : (w - kernel_w) / stride_w + 1; }
};

namespace detail {

template <typename Scalar>
void im2col(const Tensor<Scalar>& x, MapExtent in, const Window& win, int oh, int ow, Tensor<Scalar>& cols) {
  cols.resize(static_cast<long>(in.channels) * win.kernel_h * win.kernel_w, static_cast<long>(oh) * ow);
  for (int c = 0; c < in.channels; ++c) {
    const Scalar* src = x.row(c).data();
    for (int i = 0; i < win.kernel_h; ++i) {
      for (int j = 0; j < win.kernel_w; ++j) {
        Scalar* dst = cols.row((static_cast<long>(c) * win.kernel_h + i) * win.kernel_w + j).data();
        for (int y = 0; y < oh; ++y) {
          const Scalar* line = src + static_cast<long>(y * win.stride_h + i) * in.width + j;
          Scalar* out = dst + static_cast<long>(y) * ow;
          for (int xo = 0; xo < ow; ++xo) out[xo] = line[static_cast<long>(xo) * win.stride_w];
        }
      }
    }
  }
}

template <typename Scalar>
void col2im_add(const Tensor<Scalar>& cols, MapExtent in, const Window& win, int oh, int ow, Tensor<Scalar>& dx) {
  for (int c = 0; c < in.channels; ++c) {
    Scalar* dst = dx.row(c).data();
    for (int i = 0; i < win.kernel_h; ++i) {
      for (int j = 0; j < win.kernel_w; ++j) {
        const Scalar* src = cols.row((static_cast<long>(c) * win.kernel_h + i) * win.kernel_w + j).data();
        for (int y = 0; y < oh; ++y) {
          Scalar* line = dst + static_cast<long>(y * win.stride_h + i) * in.width + j;
          const Scalar* g = src + static_cast<long>(y) * ow;
          for (int xo = 0; xo < ow; ++xo) line[static_cast<long>(xo) * win.stride_w] += g[xo];
        }
      }
    }
  }
}

}  // namespace detail

/// Valid 2-D convolution. `x` holds a feature map (see MapExtent); `weight` is
/// out_channels x (in_channels * kernel_h * kernel_w); `bias` is 1 x out_channels.
template <typename Scalar>
Var conv2d(Tape<Scalar>& tape, Var x, Var weight, Var bias, const Window& win) {
  const MapExtent in = tape.extent(x);
  const auto& wv = tape.value(weight);
  const auto& bv = tape.value(bias);
  const long patch = static_cast<long>(in.channels) * win.kernel_h * win.kernel_w;
  if (wv.cols() != patch) {
    throw std::invalid_argument("conv2d: weight expects " + std::to_string(wv.cols()) + " inputs per window, got " +
                                std::to_string(patch));
  }
  if (bv.rows() != 1 || bv.cols() != wv.rows()) throw std::invalid_argument("conv2d: bias shape mismatch");
  const int oh = win.out_h(in.height);
  const int ow = win.out_w(in.width);
  if (oh < 1 || ow < 1) {
    throw std::invalid_argument("conv2d: input " + std::to_string(in.height) + "x" + std::to_string(in.width) +
                                " smaller than kernel");
  }
  auto cols = std::make_shared<Tensor<Scalar>>();
  detail::im2col(tape.value(x), in, win, oh, ow, *cols);
  Tensor<Scalar> out(wv.rows(), static_cast<long>(oh) * ow);
  out.noalias() = wv * (*cols);
  out.colwise() += bv.row(0).transpose();
  const MapExtent out_extent{static_cast<int>(wv.rows()), oh, ow};
  return tape.record(
      std::move(out), {x, weight, bias},
      [x, weight, bias, cols, in, win, oh, ow](Tape<Scalar>& t, const Tensor<Scalar>& g) {
        if (t.requires_grad(weight)) t.grad_buffer(weight).noalias() += g * cols->transpose();
        if (t.requires_grad(bias)) t.grad_buffer(bias) += g.rowwise().sum().transpose();
        if (t.requires_grad(x)) {
          Tensor<Scalar> dcols = t.value(weight).transpose() * g;
          detail::col2im_add(dcols, in, win, oh, ow, t.grad_buffer(x));
        }
      },
      out_extent);
}

template <typename Scalar>
Var leaky_relu(Tape<Scalar>& tape, Var x, Scalar slope) {
  const auto& xv = tape.value(x);
  Tensor<Scalar> out = xv.unaryExpr([slope](Scalar v) { return v > Scalar(0) ? v : slope * v; });
  return tape.record(
      std::move(out), {x},
      [x, slope](Tape<Scalar>& t, const Tensor<Scalar>& g) {
        const auto& xv = t.value(x);
        t.grad_buffer(x).array() += (xv.array() > Scalar(0)).select(g.array(), g.array() * slope);
      },
      tape.extent(x));
}

/// Group normalization of one sample followed by a per-channel affine map.
/// `gamma` and `beta` are 1 x channels. Statistics are biased (divide by N).
template <typename Scalar>
Var group_norm(Tape<Scalar>& tape, Var x, Var gamma, Var beta, int groups, Scalar eps) {
  const MapExtent ext = tape.extent(x);
  const auto& xv = tape.value(x);
  const long channels = xv.rows();
  if (groups < 1 || channels % groups != 0) throw std::invalid_argument("group_norm: channels not divisible by groups");
  if (tape.value(gamma).cols() != channels || tape.value(beta).cols() != channels) {
    throw std::invalid_argument("group_norm: affine shape mismatch");
  }
  const long per_group = channels / groups;
  auto normalized = std::make_shared<Tensor<Scalar>>(xv.rows(), xv.cols());
  auto inv_std = std::make_shared<std::vector<Scalar>>(groups);
  for (int gi = 0; gi < groups; ++gi) {
    auto block = xv.middleRows(gi * per_group, per_group);
    const Scalar mean = block.mean();
    const Scalar var = (block.array() - mean).square().mean();
    const Scalar is = Scalar(1) / std::sqrt(var + eps);
    (*inv_std)[gi] = is;
    normalized->middleRows(gi * per_group, per_group) = ((block.array() - mean) * is).matrix();
  }
  Tensor<Scalar> out = (normalized->array().colwise() * tape.value(gamma).row(0).transpose().array()).matrix();
  out.colwise() += tape.value(beta).row(0).transpose();
  return tape.record(
      std::move(out), {x, gamma, beta},
      [x, gamma, beta, normalized, inv_std, groups, per_group](Tape<Scalar>& t, const Tensor<Scalar>& g) {
        if (t.requires_grad(gamma)) {
          t.grad_buffer(gamma) += g.cwiseProduct(*normalized).rowwise().sum().transpose();
        }
        if (t.requires_grad(beta)) t.grad_buffer(beta) += g.rowwise().sum().transpose();
        if (!t.requires_grad(x)) return;
        Tensor<Scalar> dnorm = (g.array().colwise() * t.value(gamma).row(0).transpose().array()).matrix();
        auto& dx = t.grad_buffer(x);
        for (int gi = 0; gi < groups; ++gi) {
          auto dn = dnorm.middleRows(gi * per_group, per_group);
          auto nb = normalized->middleRows(gi * per_group, per_group);
          const Scalar n = static_cast<Scalar>(dn.size());
          const Scalar sum_dn = dn.sum();
          const Scalar sum_dn_n = dn.cwiseProduct(nb).sum();
          dx.middleRows(gi * per_group, per_group).array() +=
              ((*inv_std)[gi] / n) * (n * dn.array() - sum_dn - nb.array() * sum_dn_n);
        }
      },
      ext);
}

/// Valid max pooling; ties resolve to the first window element in row-major order.
template <typename Scalar>
Var max_pool(Tape<Scalar>& tape, Var x, const Window& win) {
  const MapExtent in = tape.extent(x);
  const auto& xv = tape.value(x);
  const int oh = win.out_h(in.height);
  const int ow = win.out_w(in.width);
  if (oh < 1 || ow < 1) {
    throw std::invalid_argument("max_pool: input " + std::to_string(in.height) + "x" + std::to_string(in.width) +
                                " smaller than window");
  }
  Tensor<Scalar> out(in.channels, static_cast<long>(oh) * ow);
  auto argmax = std::make_shared<std::vector<long>>(static_cast<std::size_t>(out.size()));
  for (int c = 0; c < in.channels; ++c) {
    const Scalar* src = xv.row(c).data();
    for (int y = 0; y < oh; ++y) {
      for (int xo = 0; xo < ow; ++xo) {
        long best = static_cast<long>(y * win.stride_h) * in.width + xo * win.stride_w;
        Scalar best_v = src[best];
        for (int i = 0; i < win.kernel_h; ++i) {
          for (int j = 0; j < win.kernel_w; ++j) {
            const long idx = static_cast<long>(y * win.stride_h + i) * in.width + xo * win.stride_w + j;
            if (src[idx] > best_v) {
              best_v = src[idx];
              best = idx;
            }
          }
        }
        const long o = static_cast<long>(y) * ow + xo;
        out(c, o) = best_v;
        (*argmax)[static_cast<std::size_t>(c) * oh * ow + o] = best;
      }
    }
  }
  const long out_cols = static_cast<long>(oh) * ow;
  return tape.record(
      std::move(out), {x},
      [x, argmax, out_cols](Tape<Scalar>& t, const Tensor<Scalar>& g) {
        auto& dx = t.grad_buffer(x);
        for (long c = 0; c < g.rows(); ++c) {
          for (long o = 0; o < out_cols; ++o) dx(c, (*argmax)[c * out_cols + o]) += g(c, o);
        }
      },
      MapExtent{in.channels, oh, ow});
}

/// Folds the height of a feature map into the feature axis: width becomes time.
/// Output row w holds features in channel-major order, index c * height + h.
template <typename Scalar>
Var map_to_sequence(Tape<Scalar>& tape, Var x) {
  const MapExtent in = tape.extent(x);
  const auto& xv = tape.value(x);
  Tensor<Scalar> out(in.width, static_cast<long>(in.channels) * in.height);
  for (int c = 0; c < in.channels; ++c) {
    for (int h = 0; h < in.height; ++h) {
      for (int w = 0; w < in.width; ++w) {
        out(w, static_cast<long>(c) * in.height + h) = xv(c, static_cast<long>(h) * in.width + w);
      }
    }
  }
  return tape.record(std::move(out), {x}, [x, in](Tape<Scalar>& t, const Tensor<Scalar>& g) {
    auto& dx = t.grad_buffer(x);
    for (int c = 0; c < in.channels; ++c) {
      for (int h = 0; h < in.height; ++h) {
        for (int w = 0; w < in.width; ++w) {
          dx(c, static_cast<long>(h) * in.width + w) += g(w, static_cast<long>(c) * in.height + h);
        }
      }
    }
  });
}

/// Copy of `x` with the listed rows overwritten by the 1 x D row `fill`.
template <typename Scalar>
Var replace_rows(Tape<Scalar>& tape, Var x, const std::vector<int>& rows, Var fill) {
  const auto& xv = tape.value(x);
  const auto& fv = tape.value(fill);
  if (fv.rows() != 1 || fv.cols() != xv.cols()) {
    throw std::invalid_argument("replace_rows: fill has " + std::to_string(fv.cols()) + " features, sequence has " +
                                std::to_string(xv.cols()));
  }
  Tensor<Scalar> out = xv;
  for (int r : rows) {
    if (r < 0 || r >= xv.rows()) throw std::invalid_argument("replace_rows: row index out of range");
    out.row(r) = fv.row(0);
  }
  return tape.record(std::move(out), {x, fill}, [x, fill, rows](Tape<Scalar>& t, const Tensor<Scalar>& g) {
    if (t.requires_grad(x)) {
      auto& dx = t.grad_buffer(x);
      dx += g;
      for (int r : rows) dx.row(r) -= g.row(r);
    }
    if (t.requires_grad(fill)) {
      auto& df = t.grad_buffer(fill);
      for (int r : rows) df.row(0) += g.row(r);
    }
  });
}

/// One direction of an LSTM layer over a T x D sequence.
/// Gate order in the stacked weights is input, forget, cell, output:
/// w_ih is 4H x D, w_hh is 4H x H, bias is 1 x 4H. Initial state is zero.
/// With `reverse` the sequence is consumed from the last step to the first;
/// output row t is always the state after seeing step t.
template <typename Scalar>
Var lstm(Tape<Scalar>& tape, Var x, Var w_ih, Var w_hh, Var bias, bool reverse) {
  const auto& xv = tape.value(x);
  const auto& wih = tape.value(w_ih);
  const auto& whh = tape.value(w_hh);
  const long hidden = whh.cols();
  const long steps = xv.rows();
  if (wih.rows() != 4 * hidden || whh.rows() != 4 * hidden) throw std::invalid_argument("lstm: gate rows != 4*hidden");
  if (wih.cols() != xv.cols()) {
    throw std::invalid_argument("lstm: input has " + std::to_string(xv.cols()) + " features, weights expect " +
                                std::to_string(wih.cols()));
  }
  if (tape.value(bias).cols() != 4 * hidden) throw std::invalid_argument("lstm: bias shape mismatch");

  // Per-step activations, kept for the backward pass.
  struct Cache {
    Tensor<Scalar> gates;   // T x 4H post-nonlinearity (i, f, g, o)
    Tensor<Scalar> cell;    // T x H
    Tensor<Scalar> tanh_c;  // T x H
    Tensor<Scalar> h_prev;  // T x H, state fed into each step
    Tensor<Scalar> c_prev;  // T x H
  };
  auto cache = std::make_shared<Cache>();
  Tensor<Scalar> pre(steps, 4 * hidden);
  pre.noalias() = xv * wih.transpose();
  pre.rowwise() += tape.value(bias).row(0);
  cache->gates.resize(steps, 4 * hidden);
  cache->cell.resize(steps, hidden);
  cache->tanh_c.resize(steps, hidden);
  cache->h_prev.resize(steps, hidden);
  cache->c_prev.resize(steps, hidden);
  Tensor<Scalar> out(steps, hidden);
  RowVector<Scalar> h = RowVector<Scalar>::Zero(hidden);
  RowVector<Scalar> c = RowVector<Scalar>::Zero(hidden);
  RowVector<Scalar> a(4 * hidden);
  const Tensor<Scalar> whh_t = whh.transpose();
  auto sigmoid = [](Scalar v) { return Scalar(1) / (Scalar(1) + std::exp(-v)); };
  for (long k = 0; k < steps; ++k) {
    const long t = reverse ? steps - 1 - k : k;
    cache->h_prev.row(t) = h;
    cache->c_prev.row(t) = c;
    a.noalias() = h * whh_t;
    a += pre.row(t);
    auto gi = a.segment(0, hidden).unaryExpr(sigmoid);
    auto gf = a.segment(hidden, hidden).unaryExpr(sigmoid);
    auto gg = a.segment(2 * hidden, hidden).array().tanh();
    auto go = a.segment(3 * hidden, hidden).unaryExpr(sigmoid);
    auto row = cache->gates.row(t);
    row.segment(0, hidden) = gi;
    row.segment(hidden, hidden) = gf;
    row.segment(2 * hidden, hidden) = gg.matrix();
    row.segment(3 * hidden, hidden) = go;
    c = row.segment(hidden, hidden).cwiseProduct(c) + row.segment(0, hidden).cwiseProduct(row.segment(2 * hidden, hidden));
    cache->cell.row(t) = c;
    cache->tanh_c.row(t) = c.array().tanh().matrix();
    h = row.segment(3 * hidden, hidden).cwiseProduct(cache->tanh_c.row(t));
    out.row(t) = h;
  }
  return tape.record(
      std::move(out), {x, w_ih, w_hh, bias},
      [x, w_ih, w_hh, bias, cache, reverse, hidden, steps](Tape<Scalar>& t, const Tensor<Scalar>& g) {
        const auto& whh = t.value(w_hh);
        Tensor<Scalar> dpre(steps, 4 * hidden);
        RowVector<Scalar> dh_next = RowVector<Scalar>::Zero(hidden);
        RowVector<Scalar> dc_next = RowVector<Scalar>::Zero(hidden);
        for (long k = steps; k-- > 0;) {
          const long s = reverse ? steps - 1 - k : k;
          auto gates = cache->gates.row(s);
          auto gi = gates.segment(0, hidden).array();
          auto gf = gates.segment(hidden, hidden).array();
          auto gg = gates.segment(2 * hidden, hidden).array();
          auto go = gates.segment(3 * hidden, hidden).array();
          auto tc = cache->tanh_c.row(s).array();
          RowVector<Scalar> dh = g.row(s) + dh_next;
          RowVector<Scalar> dc = (dh.array() * go * (Scalar(1) - tc.square())).matrix() + dc_next;
          auto da = dpre.row(s);
          da.segment(0, hidden) = (dc.array() * gg * gi * (Scalar(1) - gi)).matrix();
          da.segment(hidden, hidden) = (dc.array() * cache->c_prev.row(s).array() * gf * (Scalar(1) - gf)).matrix();
          da.segment(2 * hidden, hidden) = (dc.array() * gi * (Scalar(1) - gg.square())).matrix();
          da.segment(3 * hidden, hidden) = (dh.array() * tc * go * (Scalar(1) - go)).matrix();
          dc_next = (dc.array() * gf).matrix();
          dh_next.noalias() = da * whh;
        }
        if (t.requires_grad(w_ih)) t.grad_buffer(w_ih).noalias() += dpre.transpose() * t.value(x);
        if (t.requires_grad(w_hh)) t.grad_buffer(w_hh).noalias() += dpre.transpose() * cache->h_prev;
        if (t.requires_grad(bias)) t.grad_buffer(bias) += dpre.colwise().sum();
        if (t.requires_grad(x)) t.grad_buffer(x).noalias() += dpre * t.value(w_ih);
      });
}

}  // namespace lacuna::ad
