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

#include "lacuna/encoder/encoder.hpp"

#include <cmath>

namespace lacuna {

ShapePlan::ShapePlan(const ModelConfig& cfg) {
  const auto& ch = cfg.channels;
  stages_ = {
      {false, {4, 2, 4, 2}, ch[0]},
      {false, {4, 2, 1, 1}, ch[1]},
      {true, {4, 2, 1, 2}, 0},
      {false, {3, 3, 1, 1}, ch[2]},
      {true, {4, 2, 1, 2}, 0},
  };
  final_channels_ = ch[2];
  int h = cfg.image_height;
  width_stride_ = 1;
  for (const auto& s : stages_) {
    h = s.window.out_h(h);
    width_stride_ *= s.window.stride_w;
  }
  out_height_ = h;
  if (out_height_ < 1) throw ValidationError("image height " + std::to_string(cfg.image_height) + " too small for the extractor");
  // Walk back from one output column: each valid window needs (n-1)*s + k inputs.
  int w = 1;
  for (auto it = stages_.rbegin(); it != stages_.rend(); ++it) w = (w - 1) * it->window.stride_w + it->window.kernel_w;
  min_width_ = w;
}

int ShapePlan::time_steps(int width) const {
  int w = width;
  for (const auto& s : stages_) {
    w = s.window.out_w(w);
    if (w < 1) return 0;
  }
  return w;
}

ParamGroup group_of(const std::string& name) {
  auto starts = [&](const char* prefix) { return name.rfind(prefix, 0) == 0; };
  if (starts("conv") || starts("norm")) return ParamGroup::kExtractor;
  if (starts("lstm.")) return ParamGroup::kContext;
  if (starts("vocab.")) return ParamGroup::kVocabHead;
  return ParamGroup::kPretrainHead;
}

namespace {

Tensord uniform(long rows, long cols, double bound, Rng& rng) {
  Tensord m(rows, cols);
  for (long i = 0; i < m.size(); ++i) m.data()[i] = (2.0 * uniform_real(rng) - 1.0) * bound;
  return m;
}

}  // namespace

std::map<std::string, std::pair<long, long>> expected_shapes(const ModelConfig& cfg) {
  namespace pn = param_names;
  const ShapePlan shape(cfg);
  std::map<std::string, std::pair<long, long>> out;
  int in_channels = 1;
  int conv = 0;
  for (const auto& s : shape.stages()) {
    if (s.is_pool) continue;
    out[pn::conv_weight(conv)] = {s.channels, static_cast<long>(in_channels) * s.window.kernel_h * s.window.kernel_w};
    out[pn::conv_bias(conv)] = {1, s.channels};
    out[pn::norm_gamma(conv)] = {1, s.channels};
    out[pn::norm_beta(conv)] = {1, s.channels};
    in_channels = s.channels;
    ++conv;
  }
  const long hidden = cfg.lstm_hidden;
  long in_dim = shape.feature_dim();
  for (int layer = 0; layer < cfg.lstm_layers; ++layer) {
    for (bool bwd : {false, true}) {
      out[pn::lstm(layer, bwd, "w_ih")] = {4 * hidden, in_dim};
      out[pn::lstm(layer, bwd, "w_hh")] = {4 * hidden, hidden};
      out[pn::lstm(layer, bwd, "bias")] = {1, 4 * hidden};
    }
    in_dim = 2 * hidden;
  }
  out[pn::kMaskEmbedding] = {1, shape.feature_dim()};
  out[pn::kScoreContext] = {cfg.score_dim, cfg.context_dim()};
  out[pn::kScoreFeature] = {cfg.score_dim, shape.feature_dim()};
  return out;
}

ParameterSet<double> init_encoder(const ModelConfig& cfg, Rng& rng) {
  namespace pn = param_names;
  const ShapePlan shape(cfg);
  ParameterSet<double> params;
  int in_channels = 1;
  int conv = 0;
  for (const auto& s : shape.stages()) {
    if (s.is_pool) continue;
    const long fan_in = static_cast<long>(in_channels) * s.window.kernel_h * s.window.kernel_w;
    params.add(pn::conv_weight(conv), uniform(s.channels, fan_in, std::sqrt(6.0 / fan_in), rng));
    params.add(pn::conv_bias(conv), Tensord::Zero(1, s.channels));
    params.add(pn::norm_gamma(conv), Tensord::Ones(1, s.channels));
    params.add(pn::norm_beta(conv), Tensord::Zero(1, s.channels));
    in_channels = s.channels;
    ++conv;
  }
  Tensord mask(1, shape.feature_dim());
  for (long i = 0; i < mask.size(); ++i) mask.data()[i] = 0.1 * standard_normal(rng);
  params.add(pn::kMaskEmbedding, std::move(mask));

  const long hidden = cfg.lstm_hidden;
  long in_dim = shape.feature_dim();
  for (int layer = 0; layer < cfg.lstm_layers; ++layer) {
    for (bool bwd : {false, true}) {
      params.add(pn::lstm(layer, bwd, "w_ih"), uniform(4 * hidden, in_dim, 1.0 / std::sqrt(double(in_dim)), rng));
      params.add(pn::lstm(layer, bwd, "w_hh"), uniform(4 * hidden, hidden, 1.0 / std::sqrt(double(hidden)), rng));
      params.add(pn::lstm(layer, bwd, "bias"), Tensord::Zero(1, 4 * hidden));
    }
    in_dim = 2 * hidden;
  }
  const long dc = cfg.context_dim();
  const long dh = shape.feature_dim();
  params.add(pn::kScoreContext, uniform(cfg.score_dim, dc, std::sqrt(3.0 / dc), rng));
  params.add(pn::kScoreFeature, uniform(cfg.score_dim, dh, std::sqrt(3.0 / dh), rng));
  return params;
}

void add_vocab_head(ParameterSet<double>& params, const ModelConfig& cfg, int vocab_size, Rng& rng) {
  if (vocab_size < 2) throw ValidationError("vocabulary must hold the blank and at least one symbol");
  const long dc = cfg.context_dim();
  params.erase_prefix("vocab.");
  params.add(param_names::kVocabWeight, uniform(vocab_size, dc, std::sqrt(3.0 / dc), rng));
  params.add(param_names::kVocabBias, Tensord::Zero(1, vocab_size));
}

}  // namespace lacuna
