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

#include "posemetric/loss.hpp"

#include <algorithm>
#include <stdexcept>

namespace posemetric {

std::string to_string(LossVariant v) {
  switch (v) {
    case LossVariant::ContrastivePose: return "ContrastivePose";
    case LossVariant::FixedContrastive: return "FixedContrastive";
    case LossVariant::TripletDynamic: return "TripletDynamic";
  }
  return "ContrastivePose";
}

LossVariant loss_variant_from_string(const std::string& s) {
  if (s == "ContrastivePose") return LossVariant::ContrastivePose;
  if (s == "FixedContrastive") return LossVariant::FixedContrastive;
  if (s == "TripletDynamic") return LossVariant::TripletDynamic;
  throw std::invalid_argument("unknown loss variant: " + s);
}

void LossConfig::validate() const {
  if (!(margin > 0.0)) throw std::invalid_argument("LossConfig: margin must be positive");
  if (!(pose_threshold > 0.0)) throw std::invalid_argument("LossConfig: pose_threshold must be positive");
}

PairBatch PairBatch::from_mined(RowMatrix camera, RowMatrix render, const MinedPairs& mined) {
  PairBatch b{std::move(camera), std::move(render), {}};
  b.pairs.reserve(mined.size());
  for (const auto& p : mined.positives) b.pairs.push_back({p.cam, p.ren, p.delta_theta, PairLabel::Positive});
  for (const auto& p : mined.negatives) b.pairs.push_back({p.cam, p.ren, p.delta_theta, PairLabel::Negative});
  return b;
}

void PairBatch::validate() const {
  if (pairs.empty()) throw std::invalid_argument("PairBatch: empty batch");
  if (camera.cols() != render.cols()) throw std::invalid_argument("PairBatch: embedding dimension mismatch");
  for (const auto& p : pairs) {
    if (p.cam >= static_cast<std::size_t>(camera.rows()) || p.ren >= static_cast<std::size_t>(render.rows())) {
      throw std::invalid_argument("PairBatch: pair index out of range");
    }
  }
}

namespace {

double sq_dist(const RowMatrix& a, std::size_t i, const RowMatrix& b, std::size_t j) {
  return (a.row(static_cast<Eigen::Index>(i)) - b.row(static_cast<Eigen::Index>(j))).squaredNorm();
}

EmbeddingGrads zero_grads(const RowMatrix& camera, const RowMatrix& render) {
  return {RowMatrix::Zero(camera.rows(), camera.cols()), RowMatrix::Zero(render.rows(), render.cols())};
}

// Adds coef * d(d^2)/d(embeddings) = coef * 2(f_c - f_r) for one pair.
void accumulate(EmbeddingGrads& g, const PairBatch& b, const LabeledPair& p, double coef) {
  const auto ci = static_cast<Eigen::Index>(p.cam), ri = static_cast<Eigen::Index>(p.ren);
  const auto diff = (b.camera.row(ci) - b.render.row(ri)).eval();
  g.camera.row(ci) += 2.0 * coef * diff;
  g.render.row(ri) -= 2.0 * coef * diff;
}

}  // namespace

double contrastive_pose_loss(const PairBatch& batch, const LossConfig& cfg) {
  batch.validate();
  double sum = 0.0;
  for (const auto& p : batch.pairs) {
    const double d2 = sq_dist(batch.camera, p.cam, batch.render, p.ren);
    const double margin = cfg.margin * p.delta_theta;
    sum += p.label == PairLabel::Positive ? std::max(0.0, d2 - margin) : std::max(0.0, margin - d2);
  }
  return sum / (2.0 * static_cast<double>(batch.pairs.size()));
}

EmbeddingGrads contrastive_pose_grad(const PairBatch& batch, const LossConfig& cfg) {
  batch.validate();
  auto g = zero_grads(batch.camera, batch.render);
  const double scale = 1.0 / (2.0 * static_cast<double>(batch.pairs.size()));
  for (const auto& p : batch.pairs) {
    const double d2 = sq_dist(batch.camera, p.cam, batch.render, p.ren);
    const double margin = cfg.margin * p.delta_theta;
    if (p.label == PairLabel::Positive && d2 > margin) accumulate(g, batch, p, scale);
    if (p.label == PairLabel::Negative && d2 < margin) accumulate(g, batch, p, -scale);
  }
  return g;
}

double fixed_contrastive_loss(const PairBatch& batch, const LossConfig& cfg) {
  batch.validate();
  double sum = 0.0;
  for (const auto& p : batch.pairs) {
    const double d2 = sq_dist(batch.camera, p.cam, batch.render, p.ren);
    sum += p.label == PairLabel::Positive ? d2 : std::max(0.0, cfg.margin - d2);
  }
  return sum / (2.0 * static_cast<double>(batch.pairs.size()));
}

EmbeddingGrads fixed_contrastive_grad(const PairBatch& batch, const LossConfig& cfg) {
  batch.validate();
  auto g = zero_grads(batch.camera, batch.render);
  const double scale = 1.0 / (2.0 * static_cast<double>(batch.pairs.size()));
  for (const auto& p : batch.pairs) {
    if (p.label == PairLabel::Positive) {
      accumulate(g, batch, p, scale);
    } else if (sq_dist(batch.camera, p.cam, batch.render, p.ren) < cfg.margin) {
      accumulate(g, batch, p, -scale);
    }
  }
  return g;
}

void TripletBatch::validate() const {
  if (triplets.empty()) throw std::invalid_argument("TripletBatch: empty batch");
  if (camera.cols() != render.cols()) throw std::invalid_argument("TripletBatch: embedding dimension mismatch");
  for (const auto& t : triplets) {
    if (t.anchor >= static_cast<std::size_t>(camera.rows()) || t.positive >= static_cast<std::size_t>(render.rows()) ||
        t.negative >= static_cast<std::size_t>(render.rows())) {
      throw std::invalid_argument("TripletBatch: index out of range");
    }
  }
}

TripletBatch make_triplet_batch(RowMatrix camera, RowMatrix render, const std::vector<std::size_t>& anchors,
                                const std::vector<std::size_t>& positives,
                                const std::vector<std::size_t>& negatives,
                                const std::vector<double>& delta_theta_an) {
  if (anchors.size() != positives.size() || anchors.size() != negatives.size() ||
      anchors.size() != delta_theta_an.size()) {
    throw std::invalid_argument("make_triplet_batch: triplet lists differ in length");
  }
  TripletBatch b{std::move(camera), std::move(render), {}};
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    b.triplets.push_back(Triplet{anchors[k], positives[k], negatives[k], delta_theta_an[k]});
  }
  return b;
}

double triplet_dynamic_loss(const TripletBatch& batch, const LossConfig& cfg) {
  batch.validate();
  double sum = 0.0;
  for (const auto& t : batch.triplets) {
    const double dp = sq_dist(batch.camera, t.anchor, batch.render, t.positive);
    const double dn = sq_dist(batch.camera, t.anchor, batch.render, t.negative);
    sum += std::max(0.0, dp - dn + cfg.margin * t.delta_theta_an);
  }
  return sum / static_cast<double>(batch.triplets.size());
}

EmbeddingGrads triplet_dynamic_grad(const TripletBatch& batch, const LossConfig& cfg) {
  batch.validate();
  auto g = zero_grads(batch.camera, batch.render);
  const double scale = 2.0 / static_cast<double>(batch.triplets.size());
  for (const auto& t : batch.triplets) {
    const auto a = static_cast<Eigen::Index>(t.anchor);
    const auto p = static_cast<Eigen::Index>(t.positive);
    const auto n = static_cast<Eigen::Index>(t.negative);
    const double dp = (batch.camera.row(a) - batch.render.row(p)).squaredNorm();
    const double dn = (batch.camera.row(a) - batch.render.row(n)).squaredNorm();
    if (dp - dn + cfg.margin * t.delta_theta_an <= 0.0) continue;
    g.camera.row(a) += scale * (batch.render.row(n) - batch.render.row(p));
    g.render.row(p) += scale * (batch.render.row(p) - batch.camera.row(a));
    g.render.row(n) += scale * (batch.camera.row(a) - batch.render.row(n));
  }
  return g;
}

}  // namespace posemetric
