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

#include <compare>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "posemetric/augmentation.hpp"
#include "posemetric/dataset.hpp"
#include "posemetric/linalg.hpp"

namespace posemetric {

struct SamplerConfig {
  int batch_size = 32;
  /// Pose neighbours appended after each seed.
  int neighbor_count = 1;
  /// Radians.
  double neighbor_threshold = deg2rad(5.0);

  void validate() const;
};

/// Per-sample weight of each subcategory: 1 / count, normalized so the
/// weights of all samples sum to one.
std::map<std::string, double> subcategory_weights(std::span<const Sample> samples);

/// subcategory_weights expanded to one weight per sample.
std::vector<double> sample_weights(std::span<const Sample> samples);

struct Batch {
  std::vector<std::size_t> indices;
  /// Subset of `indices` that were drawn as seeds (the rest are pose
  /// neighbours or padding).
  std::vector<std::size_t> seeds;
};

/// Subcategory-balanced, pose-neighbour-enriched batch sampler. Neighbour
/// lists are computed once at construction.
class BatchSampler {
 public:
  /// Throws std::invalid_argument if the dataset is smaller than a batch.
  BatchSampler(std::span<const Sample> samples, SamplerConfig cfg);

  Batch draw(Rng& rng) const;

  const std::vector<std::size_t>& neighbours(std::size_t i) const { return neighbours_[i]; }
  const SamplerConfig& config() const { return cfg_; }

 private:
  SamplerConfig cfg_;
  std::vector<double> weights_;
  std::vector<std::vector<std::size_t>> neighbours_;
};

Batch draw_batch(std::span<const Sample> samples, const SamplerConfig& cfg, Rng& rng);

/// Cross-modal pair (camera_i, render_j) with its geodesic pose distance.
struct PairIndex {
  std::size_t cam = 0;
  std::size_t ren = 0;
  double delta_theta = 0.0;

  friend bool operator==(const PairIndex& a, const PairIndex& b) { return a.cam == b.cam && a.ren == b.ren; }
  friend auto operator<=>(const PairIndex& a, const PairIndex& b) {
    if (auto c = a.cam <=> b.cam; c != 0) return c;
    return a.ren <=> b.ren;
  }
};

struct MinedPairs {
  std::vector<PairIndex> positives;
  std::vector<PairIndex> negatives;

  std::size_t size() const { return positives.size() + negatives.size(); }
};

/// All ordered cross-modal pairs split by the pose threshold (radians):
/// positive iff delta_theta < threshold. Includes i == j.
MinedPairs candidate_pairs(std::span<const EulerPose> poses, double threshold);

/// Keeps the candidates that violate the dynamic margin: positives with
/// d^2 > m * delta_theta and negatives with d^2 < m * delta_theta. Rows of
/// `emb_c` / `emb_r` are the camera / rendering embeddings of the batch.
MinedPairs mine_pairs(std::span<const EulerPose> poses, const RowMatrix& emb_c, const RowMatrix& emb_r,
                      double threshold, double margin);

}  // namespace posemetric
