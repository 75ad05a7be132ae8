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

#include "doctest.h"
#include "lacuna/encoder/encoder.hpp"

using namespace lacuna;

TEST_CASE("shape plan maps widths to time steps") {
  const ShapePlan shape{ModelConfig{}};
  CHECK(shape.time_steps(256) == 30);
  CHECK(shape.feature_dim() == 3328);
  CHECK(shape.output_height() == 13);
  CHECK(shape.min_width() == 18);
  CHECK(shape.time_steps(17) == 0);
  CHECK(shape.time_steps(18) == 1);
  CHECK(shape.width_stride() == 8);
  // Every extra 8 px adds one step.
  for (int w = 18; w < 400; ++w) CHECK(shape.time_steps(w) == (w - 18) / 8 + 1);
}

TEST_CASE("conv_forward rejects wrong heights and narrow lines") {
  const ModelConfig cfg = ModelConfig::test_config();
  Rng rng(1);
  const ParameterSet<float> params = init_encoder(cfg, rng).cast<float>();
  CHECK_THROWS_AS(encode_features(params, Bitmap::Zero(64, 100), cfg), ValidationError);
  CHECK_THROWS_AS(encode_features(params, Bitmap::Zero(96, 17), cfg), ValidationError);
  CHECK(encode_features(params, Bitmap::Zero(96, 18), cfg).rows() == 1);
}

TEST_CASE("initialization is seeded and matches the expected shapes") {
  const ModelConfig cfg = ModelConfig::test_config();
  Rng a(5), b(5);
  const ParameterSet<double> pa = init_encoder(cfg, a);
  const ParameterSet<double> pb = init_encoder(cfg, b);
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa.entries()[i].value == pb.entries()[i].value);
  CHECK(shape_diff(pa, cfg).empty());
  const ShapePlan shape(cfg);
  CHECK(pa.at(param_names::kMaskEmbedding).cols() == shape.feature_dim());
  CHECK(pa.at(param_names::kScoreContext).rows() == cfg.score_dim);
  CHECK(pa.at(param_names::kScoreContext).cols() == cfg.context_dim());
  CHECK(pa.at(param_names::kScoreFeature).cols() == shape.feature_dim());
  CHECK(pa.at(param_names::lstm(0, false, "w_ih")).rows() == 4 * cfg.lstm_hidden);
  CHECK(pa.at(param_names::lstm(1, true, "w_ih")).cols() == cfg.context_dim());
}

TEST_CASE("shape_diff reports mismatches against another configuration") {
  Rng rng(2);
  const ParameterSet<double> p = init_encoder(ModelConfig::test_config(), rng);
  ModelConfig other = ModelConfig::test_config();
  other.lstm_hidden = 24;
  const auto diff = shape_diff(p, other);
  CHECK(!diff.empty());
  CHECK(diff.front().find("expected") != std::string::npos);
}

TEST_CASE("parameter groups") {
  CHECK(group_of("conv1.weight") == ParamGroup::kExtractor);
  CHECK(group_of("norm3.beta") == ParamGroup::kExtractor);
  CHECK(group_of("lstm.l2.bwd.bias") == ParamGroup::kContext);
  CHECK(group_of("vocab.weight") == ParamGroup::kVocabHead);
  CHECK(group_of("score.context") == ParamGroup::kPretrainHead);
  CHECK(group_of("mask_embedding") == ParamGroup::kPretrainHead);
}

TEST_CASE("cosine score guards zero vectors") {
  RowVector<double> u(3), z = RowVector<double>::Zero(3);
  u << 1, 2, 3;
  CHECK(cosine(u, z) == 0.0);
  CHECK(cosine(u, u) == doctest::Approx(1.0));
  CHECK(cosine(u, -u) == doctest::Approx(-1.0));
}

TEST_CASE("context and logits shapes") {
  const ModelConfig cfg = ModelConfig::test_config();
  Rng rng(3);
  ParameterSet<double> p = init_encoder(cfg, rng);
  add_vocab_head(p, cfg, 7, rng);
  Bitmap img = Bitmap::Zero(96, 120);
  img.block(30, 10, 20, 50).setOnes();
  const Tensord h = encode_features(p, img, cfg);
  const Tensord c = encode_context(p, h, cfg);
  CHECK(c.rows() == h.rows());
  CHECK(c.cols() == cfg.context_dim());
  const Tensord logits = line_logits(p, img, cfg);
  CHECK(logits.rows() == h.rows());
  CHECK(logits.cols() == 7);
  CHECK(logits.isApprox(compute_logits(p, c)));
}

TEST_CASE("extractor geometry shifts one step per 8 px") {
  // Conv and pool stages without normalization: the whole-map group norm
  // statistics would change with the added columns.
  const ModelConfig cfg = ModelConfig::test_config();
  Rng rng(4);
  const ParameterSet<double> p = init_encoder(cfg, rng);
  const ShapePlan plan(cfg);
  const auto features = [&](const Bitmap& img) {
    ad::Tape<double> tape;
    ad::Var x = image_input(tape, img);
    int conv_index = 0;
    for (const auto& stage : plan.stages()) {
      if (stage.is_pool) {
        x = ad::max_pool(tape, x, stage.window);
      } else {
        x = ad::conv2d(tape, x, tape.constant(p.at(param_names::conv_weight(conv_index))),
                       tape.constant(p.at(param_names::conv_bias(conv_index))), stage.window);
        x = ad::leaky_relu(tape, x, cfg.leaky_slope);
        ++conv_index;
      }
    }
    return Tensord(tape.value(ad::map_to_sequence(tape, x)));
  };
  Bitmap img = Bitmap::Zero(96, 200);
  for (long i = 0; i < img.size(); ++i) img.data()[i] = uniform_index(rng, 4) == 0;
  Bitmap shifted = Bitmap::Zero(96, 208);
  shifted.rightCols(200) = img;
  const Tensord a = features(img);
  const Tensord b = features(shifted);
  REQUIRE(b.rows() == a.rows() + 1);
  CHECK((b.bottomRows(a.rows()) - a).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("degenerate inputs and weights") {
  const ModelConfig cfg = ModelConfig::test_config();
  Rng rng(6);
  ParameterSet<double> p = init_encoder(cfg, rng);
  add_vocab_head(p, cfg, 4, rng);

  // Blank image with zero conv biases: the first conv output is all zero.
  ParameterSet<double> zb = p;
  zb.at(param_names::conv_bias(0)).setZero();
  {
    ad::Tape<double> tape;
    const Bitmap blank = Bitmap::Zero(96, 40);
    const ShapePlan plan(cfg);
    const auto& stage = plan.stages().front();
    ad::Var y = ad::conv2d(tape, image_input(tape, blank), tape.constant(zb.at(param_names::conv_weight(0))),
                           tape.constant(zb.at(param_names::conv_bias(0))), stage.window);
    CHECK(tape.value(y).isZero());
  }

  // One time step: both directions see it, output is finite.
  const Tensord one = Tensord::Random(1, ShapePlan(cfg).feature_dim());
  const Tensord c1 = encode_context(p, one, cfg);
  CHECK(c1.rows() == 1);
  CHECK(c1.cols() == cfg.context_dim());
  CHECK(c1.allFinite());

  // All-zero recurrent weights and biases give all-zero context.
  ParameterSet<double> z = p;
  for (auto& e : z.entries())
    if (group_of(e.name) == ParamGroup::kContext) e.value.setZero();
  CHECK(encode_context(z, Tensord(Tensord::Random(5, ShapePlan(cfg).feature_dim())), cfg).isZero());

  // Zero vocabulary weights: every logit row equals the bias.
  ParameterSet<double> v = p;
  v.at("vocab.weight").setZero();
  v.at("vocab.bias") << 0.5, -1.0, 2.0, 3.0;
  const Tensord logits = compute_logits(v, Tensord(Tensord::Random(3, cfg.context_dim())));
  for (long t = 0; t < 3; ++t) CHECK(logits.row(t) == v.at("vocab.bias").row(0));

  // Logits equal a naive matrix product.
  const Tensord ctx = Tensord::Random(2, cfg.context_dim());
  const Tensord l2 = compute_logits(p, ctx);
  const Tensord& w = p.at("vocab.weight");
  for (long t = 0; t < 2; ++t) {
    for (long k = 0; k < 4; ++k) {
      double s = p.at("vocab.bias")(0, k);
      for (long j = 0; j < ctx.cols(); ++j) s += w(k, j) * ctx(t, j);
      CHECK(l2(t, k) == doctest::Approx(s).epsilon(1e-12));
    }
  }
}
