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

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "lacuna/autodiff/ops.hpp"
#include "lacuna/autodiff/tape.hpp"
#include "lacuna/encoder/layers.hpp"
#include "lacuna/encoder/parameters.hpp"
#include "lacuna/random.hpp"
#include "lacuna/types.hpp"

namespace lacuna {

/// Architecture hyperparameters of the line encoder.
struct ModelConfig {
  int image_height = 96;
  std::array<int, 3> channels{64, 128, 256};
  int lstm_layers = 3;
  int lstm_hidden = 512;
  int score_dim = 256;
  double leaky_slope = 0.01;
  double norm_eps = 1e-5;
  int norm_groups = 1;

  /// Narrow configuration used for finite-difference checks.
  static ModelConfig test_config() {
    ModelConfig c;
    c.channels = {8, 16, 32};
    c.lstm_hidden = 32;
    c.score_dim = 16;
    return c;
  }

  int context_dim() const { return 2 * lstm_hidden; }
  bool operator==(const ModelConfig&) const = default;
};

/// One stage of the convolutional extractor.
struct ConvStage {
  bool is_pool = false;
  ad::Window window;
  int channels = 0;  // output channels of a conv stage; unused for pools
};

/// Layer geometry of the feature extractor and the width -> time-step map.
///
/// conv 4x2/4x2 -> conv 4x2/1x1 -> pool 4x2/1x2 -> conv 3x3/1x1 -> pool 4x2/1x2,
/// all unpadded, then the remaining height is folded into the feature axis.
class ShapePlan {
 public:
  explicit ShapePlan(const ModelConfig& cfg);

  const std::vector<ConvStage>& stages() const { return stages_; }

  /// Time steps produced for a line of the given pixel width (0 if none).
  int time_steps(int width) const;
  /// Height left after the stack; folded into features.
  int output_height() const { return out_height_; }
  /// Features per time step.
  int feature_dim() const { return out_height_ * final_channels_; }
  /// Smallest pixel width that yields at least one time step.
  int min_width() const { return min_width_; }
  /// Pixels advanced per time step.
  int width_stride() const { return width_stride_; }

 private:
  std::vector<ConvStage> stages_;
  int out_height_ = 0;
  int final_channels_ = 0;
  int min_width_ = 0;
  int width_stride_ = 1;
};

namespace param_names {
inline std::string conv_weight(int i) { return "conv" + std::to_string(i + 1) + ".weight"; }
inline std::string conv_bias(int i) { return "conv" + std::to_string(i + 1) + ".bias"; }
inline std::string norm_gamma(int i) { return "norm" + std::to_string(i + 1) + ".gamma"; }
inline std::string norm_beta(int i) { return "norm" + std::to_string(i + 1) + ".beta"; }
inline std::string lstm(int layer, bool backward, const char* what) {
  return "lstm.l" + std::to_string(layer) + (backward ? ".bwd." : ".fwd.") + what;
}
inline constexpr const char* kMaskEmbedding = "mask_embedding";
inline constexpr const char* kScoreContext = "score.context";
inline constexpr const char* kScoreFeature = "score.feature";
inline constexpr const char* kVocabWeight = "vocab.weight";
inline constexpr const char* kVocabBias = "vocab.bias";
}  // namespace param_names

/// Parameter groups, by name.
enum class ParamGroup { kExtractor, kContext, kPretrainHead, kVocabHead };
ParamGroup group_of(const std::string& name);

/// Freshly initialized extractor, mask embedding, BiLSTM and score projections.
ParameterSet<double> init_encoder(const ModelConfig& cfg, Rng& rng);

/// Adds a freshly initialized vocabulary projection (D_c -> vocab_size).
void add_vocab_head(ParameterSet<double>& params, const ModelConfig& cfg, int vocab_size, Rng& rng);

/// Expected (rows, cols) of every extractor, context and pretrain-head parameter.
std::map<std::string, std::pair<long, long>> expected_shapes(const ModelConfig& cfg);

/// Checks parameter shapes against `cfg`; one line per mismatch or missing
/// extractor/context entry. Empty when consistent.
template <typename Scalar>
std::vector<std::string> shape_diff(const ParameterSet<Scalar>& params, const ModelConfig& cfg) {
  std::vector<std::string> diff;
  for (const auto& [name, dims] : expected_shapes(cfg)) {
    const ParamGroup group = group_of(name);
    if (!params.contains(name)) {
      if (group == ParamGroup::kExtractor || group == ParamGroup::kContext) diff.push_back(name + ": missing");
      continue;
    }
    const auto& v = params.at(name);
    if (v.rows() != dims.first || v.cols() != dims.second) {
      diff.push_back(name + ": have " + std::to_string(v.rows()) + "x" + std::to_string(v.cols()) + ", expected " +
                     std::to_string(dims.first) + "x" + std::to_string(dims.second));
    }
  }
  return diff;
}

/// Parameters bound to one tape, with a per-name trainable flag.
template <typename Scalar>
class BoundParameters {
 public:
  using Predicate = std::function<bool(const std::string&)>;

  BoundParameters(ad::Tape<Scalar>& tape, const ParameterSet<Scalar>& params, const Predicate& trainable) {
    for (const auto& e : params.entries()) vars_.emplace(e.name, tape.input(e.value, trainable && trainable(e.name)));
  }

  ad::Var operator[](const std::string& name) const {
    auto it = vars_.find(name);
    if (it == vars_.end()) throw std::out_of_range("parameter '" + name + "' not bound");
    return it->second;
  }

  bool contains(const std::string& name) const { return vars_.count(name) != 0; }
  const std::map<std::string, ad::Var>& vars() const { return vars_; }

  /// Adds every available parameter gradient into `grads` (matching names).
  void accumulate_grads(const ad::Tape<Scalar>& tape, ParameterSet<Scalar>& grads) const {
    for (const auto& [name, var] : vars_) {
      const auto& g = tape.grad(var);
      if (g.size() != 0 && grads.contains(name)) grads.at(name) += g;
    }
  }

 private:
  std::map<std::string, ad::Var> vars_;
};

/// Puts a binary line image on the tape as a 1-channel feature map.
template <typename Scalar>
ad::Var image_input(ad::Tape<Scalar>& tape, const Bitmap& pixels) {
  Tensor<Scalar> flat(1, pixels.size());
  for (long i = 0; i < pixels.size(); ++i) flat(0, i) = static_cast<Scalar>(pixels.data()[i]);
  return tape.constant(std::move(flat), ad::MapExtent{1, static_cast<int>(pixels.rows()), static_cast<int>(pixels.cols())});
}

/// Convolutional feature extractor: image -> T x D_h feature sequence.
template <typename Scalar>
ad::Var conv_forward(ad::Tape<Scalar>& tape, const BoundParameters<Scalar>& p, ad::Var image, const ModelConfig& cfg) {
  const ShapePlan shape(cfg);
  const ad::MapExtent in = tape.extent(image);
  if (in.height != cfg.image_height) {
    throw ValidationError("line image height " + std::to_string(in.height) + " != " + std::to_string(cfg.image_height));
  }
  if (in.width < shape.min_width()) {
    throw ValidationError("line image width " + std::to_string(in.width) + " below minimum admissible width " +
                          std::to_string(shape.min_width()));
  }
  ad::Var x = image;
  int conv_index = 0;
  for (const ConvStage& stage : shape.stages()) {
    if (stage.is_pool) {
      x = ad::max_pool(tape, x, stage.window);
      continue;
    }
    x = ad::conv2d(tape, x, p[param_names::conv_weight(conv_index)], p[param_names::conv_bias(conv_index)], stage.window);
    x = ad::leaky_relu(tape, x, static_cast<Scalar>(cfg.leaky_slope));
    x = ad::group_norm(tape, x, p[param_names::norm_gamma(conv_index)], p[param_names::norm_beta(conv_index)],
                       cfg.norm_groups, static_cast<Scalar>(cfg.norm_eps));
    ++conv_index;
  }
  return ad::map_to_sequence(tape, x);
}

/// Stacked bidirectional LSTM: T x D_h -> T x 2H.
template <typename Scalar>
ad::Var context_forward(ad::Tape<Scalar>& tape, const BoundParameters<Scalar>& p, ad::Var features,
                        const ModelConfig& cfg) {
  if (tape.value(features).rows() < 1) throw ValidationError("context encoder needs at least one time step");
  ad::Var x = features;
  for (int layer = 0; layer < cfg.lstm_layers; ++layer) {
    using param_names::lstm;
    ad::Var fwd = ad::lstm(tape, x, p[lstm(layer, false, "w_ih")], p[lstm(layer, false, "w_hh")],
                           p[lstm(layer, false, "bias")], false);
    ad::Var bwd = ad::lstm(tape, x, p[lstm(layer, true, "w_ih")], p[lstm(layer, true, "w_hh")],
                           p[lstm(layer, true, "bias")], true);
    x = ad::concat_cols(tape, fwd, bwd);
  }
  return x;
}

/// Per-step vocabulary logits (no softmax): T x |V|.
template <typename Scalar>
ad::Var vocab_logits(ad::Tape<Scalar>& tape, const BoundParameters<Scalar>& p, ad::Var context) {
  return ad::linear(tape, context, p[param_names::kVocabWeight], p[param_names::kVocabBias]);
}

/// Cosine similarity with a zero-norm guard: returns 0 when either side is 0.
template <typename Derived1, typename Derived2>
typename Derived1::Scalar cosine(const Eigen::MatrixBase<Derived1>& u, const Eigen::MatrixBase<Derived2>& v) {
  using S = typename Derived1::Scalar;
  const S nu = u.norm();
  const S nv = v.norm();
  if (nu == S(0) || nv == S(0)) return S(0);
  return u.dot(v) / (nu * nv);
}

/// Similarity between a context vector and a feature vector:
/// cos(W_c c, W_h h) in the shared scoring space.
template <typename Scalar>
Scalar score(const RowVector<Scalar>& context, const RowVector<Scalar>& feature, const ParameterSet<Scalar>& params) {
  const RowVector<Scalar> u = context * params.at(param_names::kScoreContext).transpose();
  const RowVector<Scalar> v = feature * params.at(param_names::kScoreFeature).transpose();
  return cosine(u, v);
}

/// Inference-only helpers; they build a gradient-free tape internally.
template <typename Scalar>
Tensor<Scalar> encode_features(const ParameterSet<Scalar>& params, const Bitmap& pixels, const ModelConfig& cfg) {
  ad::Tape<Scalar> tape;
  BoundParameters<Scalar> p(tape, params, nullptr);
  return tape.value(conv_forward(tape, p, image_input(tape, pixels), cfg));
}

template <typename Scalar>
Tensor<Scalar> encode_context(const ParameterSet<Scalar>& params, const Tensor<Scalar>& features, const ModelConfig& cfg) {
  ad::Tape<Scalar> tape;
  BoundParameters<Scalar> p(tape, params, nullptr);
  return tape.value(context_forward(tape, p, tape.input(features), cfg));
}

template <typename Scalar>
Tensor<Scalar> compute_logits(const ParameterSet<Scalar>& params, const Tensor<Scalar>& context) {
  ad::Tape<Scalar> tape;
  BoundParameters<Scalar> p(tape, params, nullptr);
  return tape.value(vocab_logits(tape, p, tape.input(context)));
}

/// Image -> logits in one pass.
template <typename Scalar>
Tensor<Scalar> line_logits(const ParameterSet<Scalar>& params, const Bitmap& pixels, const ModelConfig& cfg) {
  ad::Tape<Scalar> tape;
  BoundParameters<Scalar> p(tape, params, nullptr);
  ad::Var h = conv_forward(tape, p, image_input(tape, pixels), cfg);
  return tape.value(vocab_logits(tape, p, context_forward(tape, p, h, cfg)));
}

}  // namespace lacuna
