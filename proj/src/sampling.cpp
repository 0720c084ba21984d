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

#include "posemetric/sampling.hpp"

#include <algorithm>
#include <stdexcept>

#include "posemetric/kernels.hpp"

namespace posemetric {

void SamplerConfig::validate() const {
  if (batch_size < 2) throw std::invalid_argument("SamplerConfig: batch_size must be >= 2");
  if (neighbor_count < 1 || neighbor_count >= batch_size) {
    throw std::invalid_argument("SamplerConfig: need 1 <= neighbor_count < batch_size");
  }
  if (!(neighbor_threshold > 0.0)) throw std::invalid_argument("SamplerConfig: neighbor_threshold must be positive");
}

std::map<std::string, double> subcategory_weights(std::span<const Sample> samples) {
  if (samples.empty()) throw std::invalid_argument("subcategory_weights: empty sample list");
  std::map<std::string, std::size_t> counts;
  for (const auto& s : samples) ++counts[s.subcategory];
  // Each subcategory carries total mass 1 before normalization.
  const double total = static_cast<double>(counts.size());
  std::map<std::string, double> out;
  for (const auto& [name, c] : counts) out[name] = 1.0 / (static_cast<double>(c) * total);
  return out;
}

std::vector<double> sample_weights(std::span<const Sample> samples) {
  const auto per_sub = subcategory_weights(samples);
  std::vector<double> w;
  w.reserve(samples.size());
  for (const auto& s : samples) w.push_back(per_sub.at(s.subcategory));
  return w;
}

BatchSampler::BatchSampler(std::span<const Sample> samples, SamplerConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  if (samples.size() < static_cast<std::size_t>(cfg_.batch_size)) {
    throw std::invalid_argument("BatchSampler: dataset smaller than batch size");
  }
  weights_ = sample_weights(samples);
  std::vector<Quat> qs;
  qs.reserve(samples.size());
  for (const auto& s : samples) qs.push_back(euler_to_quat(s.pose));
  const auto n = static_cast<std::int64_t>(qs.size());
  neighbours_.assign(qs.size(), {});
#pragma omp parallel for schedule(dynamic, 32)
  for (std::int64_t si = 0; si < n; ++si) {
    const auto i = static_cast<std::size_t>(si);
    for (std::size_t j = 0; j < qs.size(); ++j) {
      if (j != i && geodesic_distance(qs[i], qs[j]) < cfg_.neighbor_threshold) neighbours_[i].push_back(j);
    }
  }
}

Batch BatchSampler::draw(Rng& rng) const {
  const auto b = static_cast<std::size_t>(cfg_.batch_size);
  const auto n_nb = static_cast<std::size_t>(cfg_.neighbor_count);
  std::vector<double> w = weights_;
  std::vector<char> taken(w.size(), 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Batch batch;

  auto take = [&](std::size_t i) {
    taken[i] = 1;
    w[i] = 0.0;
    batch.indices.push_back(i);
  };
  auto weighted_draw = [&]() {
    double total = 0.0;
    for (double v : w) total += v;
    const double u = unit(rng) * total;
    double acc = 0.0;
    std::size_t last = w.size();
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] <= 0.0) continue;
      acc += w[i];
      last = i;
      if (u < acc) return i;
    }
    return last;
  };

  while (batch.indices.size() < b) {
    const std::size_t seed = weighted_draw();
    take(seed);
    // A seed is only drawn while its neighbours still fit; otherwise the
    // remaining slots are weighted padding.
    if (b - batch.indices.size() < n_nb) continue;
    batch.seeds.push_back(seed);
    std::vector<std::size_t> avail;
    for (std::size_t j : neighbours_[seed]) {
      if (!taken[j]) avail.push_back(j);
    }
    for (std::size_t k = 0; k < n_nb && !avail.empty(); ++k) {
      std::uniform_int_distribution<std::size_t> pick(0, avail.size() - 1);
      const std::size_t at = pick(rng);
      take(avail[at]);
      avail[at] = avail.back();
      avail.pop_back();
    }
  }
  return batch;
}

Batch draw_batch(std::span<const Sample> samples, const SamplerConfig& cfg, Rng& rng) {
  return BatchSampler(samples, cfg).draw(rng);
}

MinedPairs candidate_pairs(std::span<const EulerPose> poses, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("candidate_pairs: threshold must be positive");
  std::vector<Quat> qs;
  qs.reserve(poses.size());
  for (const auto& p : poses) qs.push_back(euler_to_quat(p));
  std::vector<double> dtheta(qs.size() * qs.size());
  kernels::omp::pose_distances(qs, dtheta);
  MinedPairs out;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    for (std::size_t j = 0; j < qs.size(); ++j) {
      const double dt = dtheta[i * qs.size() + j];
      (dt < threshold ? out.positives : out.negatives).push_back(PairIndex{i, j, dt});
    }
  }
  return out;
}

MinedPairs mine_pairs(std::span<const EulerPose> poses, const RowMatrix& emb_c, const RowMatrix& emb_r,
                      double threshold, double margin) {
  const auto n = static_cast<Eigen::Index>(poses.size());
  if (emb_c.rows() != n || emb_r.rows() != n) {
    throw std::invalid_argument("mine_pairs: need one camera and one rendering embedding per batch element");
  }
  if (emb_c.cols() != emb_r.cols()) throw std::invalid_argument("mine_pairs: embedding dimension mismatch");
  const auto dim = static_cast<std::size_t>(emb_c.cols());
  std::vector<double> d2(poses.size() * poses.size());
  kernels::omp::pairwise_sq_dists(std::span<const double>(emb_c.data(), emb_c.size()),
                                  std::span<const double>(emb_r.data(), emb_r.size()), dim, d2);
  const MinedPairs cand = candidate_pairs(poses, threshold);
  MinedPairs out;
  for (const auto& p : cand.positives) {
    if (d2[p.cam * poses.size() + p.ren] > margin * p.delta_theta) out.positives.push_back(p);
  }
  for (const auto& p : cand.negatives) {
    if (d2[p.cam * poses.size() + p.ren] < margin * p.delta_theta) out.negatives.push_back(p);
  }
  return out;
}

}  // namespace posemetric
