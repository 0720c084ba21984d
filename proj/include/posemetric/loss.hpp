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

#pragma once

#include <string>
#include <vector>

#include "posemetric/linalg.hpp"
#include "posemetric/pose_math.hpp"
#include "posemetric/sampling.hpp"

namespace posemetric {

enum class LossVariant { ContrastivePose, FixedContrastive, TripletDynamic };

std::string to_string(LossVariant v);
LossVariant loss_variant_from_string(const std::string& s);

struct LossConfig {
  double margin = 1.0;
  /// Positive/negative pose threshold, radians.
  double pose_threshold = deg2rad(5.0);
  LossVariant variant = LossVariant::ContrastivePose;

  void validate() const;
};

enum class PairLabel { Positive, Negative };

struct LabeledPair {
  std::size_t cam = 0;
  std::size_t ren = 0;
  double delta_theta = 0.0;
  PairLabel label = PairLabel::Positive;
};

/// Pairs over a shared set of embeddings: row `cam` of `camera` against row
/// `ren` of `render`. N is the number of pairs.
struct PairBatch {
  RowMatrix camera;
  RowMatrix render;
  std::vector<LabeledPair> pairs;

  static PairBatch from_mined(RowMatrix camera, RowMatrix render, const MinedPairs& mined);
  void validate() const;
};

struct EmbeddingGrads {
  RowMatrix camera;
  RowMatrix render;
};

/// (1/2N) sum over pairs of max(0, d^2 - m*dtheta) for positives and
/// max(0, m*dtheta - d^2) for negatives, d^2 the squared L2 distance.
/// Throws std::invalid_argument on an empty batch.
double contrastive_pose_loss(const PairBatch& batch, const LossConfig& cfg);

/// Subgradient of contrastive_pose_loss; zero at hinge kinks.
EmbeddingGrads contrastive_pose_grad(const PairBatch& batch, const LossConfig& cfg);

/// Constant-margin contrastive loss: (1/2N) sum of d^2 for positives and
/// max(0, m - d^2) for negatives.
double fixed_contrastive_loss(const PairBatch& batch, const LossConfig& cfg);
EmbeddingGrads fixed_contrastive_grad(const PairBatch& batch, const LossConfig& cfg);

struct Triplet {
  std::size_t anchor = 0;    // camera row
  std::size_t positive = 0;  // render row
  std::size_t negative = 0;  // render row
  /// Pose distance between anchor and negative, radians.
  double delta_theta_an = 0.0;
};

struct TripletBatch {
  RowMatrix camera;
  RowMatrix render;
  std::vector<Triplet> triplets;

  void validate() const;
};

/// Mean over triplets of max(0, d^2(a,p) - d^2(a,n) + m*dtheta(a,n)).
double triplet_dynamic_loss(const TripletBatch& batch, const LossConfig& cfg);
EmbeddingGrads triplet_dynamic_grad(const TripletBatch& batch, const LossConfig& cfg);

/// Builds aligned triplet lists: anchor i, positive j (i, j index into the
/// same embeddings), negative k. Throws std::invalid_argument on length
/// mismatch.
TripletBatch make_triplet_batch(RowMatrix camera, RowMatrix render, const std::vector<std::size_t>& anchors,
                                const std::vector<std::size_t>& positives,
                                const std::vector<std::size_t>& negatives,
                                const std::vector<double>& delta_theta_an);

}  // namespace posemetric
