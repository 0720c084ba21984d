// Copyright 2026 The posemetric Authors. All Rights Reserved.
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


// Central finite-difference checks shared by the unit and acceptance suites.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "posemetric/encoder.hpp"
#include "posemetric/loss.hpp"
#include "posemetric/train.hpp"

namespace gradcheck {

using namespace posemetric;

inline double rel_err(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
  return std::sqrt(diff) / scale;
}

inline std::vector<double> flat(const RowMatrix& m) { return {m.data(), m.data() + m.size()}; }

inline double hinge_gap(const PairBatch& b, const LossConfig& cfg) {
  double gap = INFINITY;
  for (const auto& p : b.pairs) {
    const double d2 = (b.camera.row(p.cam) - b.render.row(p.ren)).squaredNorm();
    gap = std::min(gap, std::abs(d2 - cfg.margin * p.delta_theta));
  }
  return gap;
}

/// Random labelled pairs over Gaussian embeddings, each pair at least `gap`
/// away from its hinge so finite differences stay on one linear piece.
inline PairBatch random_pair_batch(Rng& rng, int rows, int dim, int n_pairs, const LossConfig& cfg, double gap) {
  std::normal_distribution<double> g(0.0, 0.4);
  std::uniform_int_distribution<int> row(0, rows - 1);
  std::uniform_real_distribution<double> pos(0.0, cfg.pose_threshold), neg(cfg.pose_threshold, kPi);
  PairBatch b{RowMatrix(rows, dim), RowMatrix(rows, dim), {}};
  for (Eigen::Index i = 0; i < b.camera.size(); ++i) b.camera.data()[i] = g(rng);
  for (Eigen::Index i = 0; i < b.render.size(); ++i) b.render.data()[i] = g(rng);
  while (static_cast<int>(b.pairs.size()) < n_pairs) {
    LabeledPair p;
    p.cam = static_cast<std::size_t>(row(rng));
    p.ren = static_cast<std::size_t>(row(rng));
    p.label = (b.pairs.size() % 2) ? PairLabel::Negative : PairLabel::Positive;
    p.delta_theta = p.label == PairLabel::Positive ? pos(rng) : neg(rng);
    const double d2 = (b.camera.row(p.cam) - b.render.row(p.ren)).squaredNorm();
    if (std::abs(d2 - cfg.margin * p.delta_theta) >= gap) b.pairs.push_back(p);
  }
  return b;
}

using LossFn = std::function<double(const PairBatch&, const LossConfig&)>;
using GradFn = std::function<EmbeddingGrads(const PairBatch&, const LossConfig&)>;

/// Relative error between analytic and numeric embedding gradients.
inline double embedding_check(const PairBatch& batch, const LossConfig& cfg, const LossFn& loss,
                              const GradFn& grad, double h = 1e-5) {
  const EmbeddingGrads g = grad(batch, cfg);
  std::vector<double> analytic = flat(g.camera);
  const auto r = flat(g.render);
  analytic.insert(analytic.end(), r.begin(), r.end());
  std::vector<double> numeric;
  PairBatch work = batch;
  for (RowMatrix* m : {&work.camera, &work.render}) {
    for (Eigen::Index i = 0; i < m->size(); ++i) {
      const double keep = m->data()[i];
      m->data()[i] = keep + h;
      const double up = loss(work, cfg);
      m->data()[i] = keep - h;
      const double down = loss(work, cfg);
      m->data()[i] = keep;
      numeric.push_back((up - down) / (2 * h));
    }
  }
  return rel_err(analytic, numeric);
}

inline std::vector<double> flat(const MlpGrads& g) {
  std::vector<double> out;
  for (std::size_t l = 0; l < g.weight.size(); ++l) {
    for (Eigen::Index r = 0; r < g.weight[l].rows(); ++r)
      for (Eigen::Index c = 0; c < g.weight[l].cols(); ++c) out.push_back(g.weight[l](r, c));
    for (Eigen::Index r = 0; r < g.bias[l].size(); ++r) out.push_back(g.bias[l](r));
  }
  return out;
}

struct EndToEnd {
  double rel_err = 0.0;
  std::size_t active = 0;
  double gap = 0.0;
};

/// Objective of the full pipeline: encode both modalities, mine, apply the
/// loss, plus weight_decay / 2 times the squared parameter norm.
inline double pipeline_objective(const EncoderPair& enc, const RowMatrix& xc, const RowMatrix& xr,
                                 const std::vector<EulerPose>& poses, const LossConfig& cfg, double wd) {
  const RowMatrix ec = enc.camera.embed_rows_serial(xc), er = enc.render.embed_rows_serial(xr);
  double reg = 0.0;
  for (const Mlp* m : {&enc.camera, &enc.render})
    for (double v : m->flatten()) reg += v * v;
  return batch_objective(poses, ec, er, cfg).loss + 0.5 * wd * reg;
}

/// Smallest distance of any candidate pair from its hinge at the current
/// parameters.
inline double pipeline_gap(const EncoderPair& enc, const RowMatrix& xc, const RowMatrix& xr,
                           const std::vector<EulerPose>& poses, const LossConfig& cfg) {
  const RowMatrix ec = enc.camera.embed_rows_serial(xc), er = enc.render.embed_rows_serial(xr);
  const MinedPairs cand = candidate_pairs(poses, cfg.pose_threshold);
  double gap = INFINITY;
  for (const auto* v : {&cand.positives, &cand.negatives}) {
    for (const auto& p : *v) {
      const double d2 = (ec.row(p.cam) - er.row(p.ren)).squaredNorm();
      gap = std::min(gap, std::abs(d2 - cfg.margin * p.delta_theta));
    }
  }
  return gap;
}

inline EndToEnd end_to_end_check(EncoderPair enc, const RowMatrix& xc, const RowMatrix& xr,
                                 const std::vector<EulerPose>& poses, const LossConfig& cfg, double wd,
                                 double h = 1e-5) {
  EndToEnd out;
  out.gap = pipeline_gap(enc, xc, xr, poses, cfg);
  Mlp::Cache cc, cr;
  const RowMatrix ec = enc.camera.forward_batch(xc, cc);
  const RowMatrix er = enc.render.forward_batch(xr, cr);
  const BatchObjective obj = batch_objective(poses, ec, er, cfg);
  out.active = obj.active;
  std::vector<double> analytic = flat(enc.camera.backward(cc, obj.grads.camera, wd));
  const auto gr = flat(enc.render.backward(cr, obj.grads.render, wd));
  analytic.insert(analytic.end(), gr.begin(), gr.end());

  std::vector<double> numeric;
  for (Mlp* net : {&enc.camera, &enc.render}) {
    std::vector<double> theta = net->flatten();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double keep = theta[i];
      theta[i] = keep + h;
      net->assign(theta);
      const double up = pipeline_objective(enc, xc, xr, poses, cfg, wd);
      theta[i] = keep - h;
      net->assign(theta);
      const double down = pipeline_objective(enc, xc, xr, poses, cfg, wd);
      theta[i] = keep;
      net->assign(theta);
      numeric.push_back((up - down) / (2 * h));
    }
  }
  out.rel_err = rel_err(analytic, numeric);
  return out;
}

/// Tiny random problem for the end-to-end check: `b` poses in a narrow band
/// (so positives exist) with random inputs of width arch.input_dim.
struct TinyProblem {
  EncoderPair enc;
  RowMatrix xc, xr;
  std::vector<EulerPose> poses;
};

inline TinyProblem tiny_problem(Rng& rng, const Architecture& arch, int b) {
  TinyProblem p{EncoderPair::random(arch, rng), RowMatrix(b, arch.input_dim), RowMatrix(b, arch.input_dim), {}};
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> az(0.0, 20.0), el(-3.0, 3.0);
  for (Eigen::Index i = 0; i < p.xc.size(); ++i) p.xc.data()[i] = g(rng);
  for (Eigen::Index i = 0; i < p.xr.size(); ++i) p.xr.data()[i] = g(rng);
  for (int i = 0; i < b; ++i) p.poses.push_back(EulerPose::from_degrees(az(rng), el(rng), 0.0));
  return p;
}

}  // namespace gradcheck
