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

#include "lacuna/autodiff/ops.hpp"
#include "lacuna/masking/mask_plan.hpp"
#include "lacuna/random.hpp"

namespace lacuna {

/// Candidate sets for the masked positions of one line: for position i,
/// `candidates[i][0]` is the true step and the rest are foil steps.
struct FoilPlan {
  std::vector<int> positions;
  std::vector<std::vector<int>> candidates;

  int foil_count() const {
    int n = 0;
    for (const auto& c : candidates) n += static_cast<int>(c.size()) - 1;
    return n;
  }
};

/// Draws up to min(n_foils, T-1) distinct foil steps per position, uniformly
/// from every step of the same line except the position itself.
FoilPlan sample_foils(int time_steps, std::span<const int> positions, int n_foils, Rng& rng);

/// -log softmax(scores / temperature)[0].
double candidate_nll(std::span<const double> scores, double temperature = 1.0);

/// Loss statistics over the masked positions of one or more lines.
struct ContrastiveBatchResult {
  double loss = 0.0;  // mean of per_position_losses
  std::vector<double> per_position_losses;
  int n_masked = 0;
  int n_foils_used = 0;
  int n_correct = 0;  // true target strictly above every foil

  double accuracy() const { return n_masked ? static_cast<double>(n_correct) / n_masked : 0.0; }

  void merge(const ContrastiveBatchResult& other) {
    per_position_losses.insert(per_position_losses.end(), other.per_position_losses.begin(),
                               other.per_position_losses.end());
    n_masked += other.n_masked;
    n_foils_used += other.n_foils_used;
    n_correct += other.n_correct;
    double sum = 0.0;
    for (double l : per_position_losses) sum += l;
    loss = n_masked ? sum / n_masked : 0.0;
  }
};

/// Cosine-softmax cross-entropy over projected context rows (T x D_s) and
/// projected target rows (T x D_s). Returns the SUM of per-position losses as
/// a 1x1 node so batches can be normalized by their total position count;
/// statistics go to `result`.
template <typename Scalar>
ad::Var cosine_candidate_loss(ad::Tape<Scalar>& tape, ad::Var projected_context, ad::Var projected_targets,
                              const FoilPlan& foils, double temperature, ContrastiveBatchResult& result) {
  using Matrix = Tensor<Scalar>;
  const Matrix& pc = tape.value(projected_context);
  const Matrix& ph = tape.value(projected_targets);
  if (pc.rows() != ph.rows() || pc.cols() != ph.cols()) throw ValidationError("contrastive: projection shapes differ");

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> pc_norm = pc.rowwise().norm();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> ph_norm = ph.rowwise().norm();

  // softmax(z) - onehot(0), divided by temperature, per position and candidate.
  auto dscores = std::make_shared<std::vector<std::vector<Scalar>>>(foils.positions.size());
  auto cosines = std::make_shared<std::vector<std::vector<Scalar>>>(foils.positions.size());
  Scalar total = Scalar(0);
  result = ContrastiveBatchResult{};
  for (std::size_t i = 0; i < foils.positions.size(); ++i) {
    const int t = foils.positions[i];
    const auto& cand = foils.candidates[i];
    std::vector<Scalar> s(cand.size());
    for (std::size_t k = 0; k < cand.size(); ++k) {
      const Scalar denom = pc_norm(t) * ph_norm(cand[k]);
      s[k] = denom == Scalar(0) ? Scalar(0) : pc.row(t).dot(ph.row(cand[k])) / denom;
    }
    Scalar zmax = -std::numeric_limits<Scalar>::infinity();
    for (Scalar v : s) zmax = std::max(zmax, v / static_cast<Scalar>(temperature));
    Scalar denom = Scalar(0);
    for (Scalar v : s) denom += std::exp(v / static_cast<Scalar>(temperature) - zmax);
    const Scalar lse = zmax + std::log(denom);
    const Scalar loss = lse - s[0] / static_cast<Scalar>(temperature);
    total += loss;
    result.per_position_losses.push_back(static_cast<double>(loss));
    bool correct = true;
    for (std::size_t k = 1; k < s.size(); ++k) correct = correct && s[0] > s[k];
    result.n_correct += correct ? 1 : 0;
    result.n_foils_used += static_cast<int>(cand.size()) - 1;
    auto& ds = (*dscores)[i];
    ds.resize(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
      const Scalar p = std::exp(s[k] / static_cast<Scalar>(temperature) - lse);
      ds[k] = (p - (k == 0 ? Scalar(1) : Scalar(0))) / static_cast<Scalar>(temperature);
    }
    (*cosines)[i] = std::move(s);
  }
  result.n_masked = static_cast<int>(foils.positions.size());
  result.loss = result.n_masked ? static_cast<double>(total) / result.n_masked : 0.0;

  Matrix out(1, 1);
  out(0, 0) = total;
  return tape.record(
      std::move(out), {projected_context, projected_targets},
      [projected_context, projected_targets, foils, dscores, cosines, pc_norm, ph_norm](ad::Tape<Scalar>& tp,
                                                                                       const Matrix& g) {
        const Matrix& pc = tp.value(projected_context);
        const Matrix& ph = tp.value(projected_targets);
        Matrix dpc = Matrix::Zero(pc.rows(), pc.cols());
        Matrix dph = Matrix::Zero(ph.rows(), ph.cols());
        const Scalar upstream = g(0, 0);
        for (std::size_t i = 0; i < foils.positions.size(); ++i) {
          const int t = foils.positions[i];
          const Scalar nu = pc_norm(t);
          if (nu == Scalar(0)) continue;
          const auto& cand = foils.candidates[i];
          for (std::size_t k = 0; k < cand.size(); ++k) {
            const Scalar nv = ph_norm(cand[k]);
            if (nv == Scalar(0)) continue;
            const Scalar d = upstream * (*dscores)[i][k];
            const Scalar s = (*cosines)[i][k];
            dpc.row(t) += d * (ph.row(cand[k]) / (nu * nv) - s * pc.row(t) / (nu * nu));
            dph.row(cand[k]) += d * (pc.row(t) / (nu * nv) - s * ph.row(cand[k]) / (nv * nv));
          }
        }
        if (tp.requires_grad(projected_context)) tp.grad_buffer(projected_context) += dpc;
        if (tp.requires_grad(projected_targets)) tp.grad_buffer(projected_targets) += dph;
      });
}

/// Full contrastive objective for one line: projects context and (unmasked)
/// targets into the scoring space, then scores each masked step against its
/// candidates. Returns the per-line loss sum.
template <typename Scalar>
ad::Var contrastive_loss(ad::Tape<Scalar>& tape, ad::Var context_masked, ad::Var targets, ad::Var score_context,
                         ad::Var score_feature, const FoilPlan& foils, double temperature,
                         ContrastiveBatchResult& result) {
  if (foils.positions.empty()) throw ValidationError("contrastive loss needs a non-empty mask plan");
  if (tape.value(context_masked).rows() != tape.value(targets).rows()) {
    throw ValidationError("context and targets differ in length");
  }
  ad::Var pc = ad::linear(tape, context_masked, score_context);
  ad::Var ph = ad::linear(tape, targets, score_feature);
  return cosine_candidate_loss(tape, pc, ph, foils, temperature, result);
}

}  // namespace lacuna
