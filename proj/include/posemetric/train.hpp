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

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "posemetric/augmentation.hpp"
#include "posemetric/dataset.hpp"
#include "posemetric/encoder.hpp"
#include "posemetric/loss.hpp"
#include "posemetric/sampling.hpp"

namespace posemetric {

struct TrainConfig {
  int epochs = 1000;
  double lr_backbone = 1e-4;
  double lr_head = 1e-3;
  double weight_decay = 5e-4;
  std::uint64_t seed = 0;
  LossConfig loss;
  SamplerConfig sampler;
  double beta_train = 0.1;
  double s_occ = 0.5;
  /// Appearance augmentation: additive feature jitter and horizontal flip.
  double jitter_sigma = 0.05;
  double flip_probability = 0.5;
  Architecture arch;
  /// 0 means ceil(n_samples / batch_size).
  int batches_per_epoch = 0;
  std::uint64_t occluder_seed = 7;

  int batch_size() const { return sampler.batch_size; }
  void validate() const;
};

struct TrainResult {
  EncoderPair encoders;
  /// Mean per-batch loss of each epoch, normalized over all candidate pairs
  /// (or triplets) of the batch.
  std::vector<double> loss_history;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Jointly trains E_c and E_r. Deterministic given cfg.seed (and `init`,
/// which replaces the seeded initialization when provided). Throws
/// TrainingDiverged on a non-finite loss.
TrainResult train(std::span<const Sample> data, const TrainConfig& cfg,
                  std::optional<EncoderPair> init = std::nullopt);

/// Loss and embedding gradients of one batch under cfg.loss, as used by the
/// training step. Returns the loss normalized over all candidates; the
/// gradients follow the variant's own normalization. `active` receives the
/// number of pairs/triplets that entered the loss.
struct BatchObjective {
  double loss = 0.0;
  double candidate_loss = 0.0;
  std::size_t active = 0;
  EmbeddingGrads grads;
};
BatchObjective batch_objective(std::span<const EulerPose> poses, const RowMatrix& emb_c, const RowMatrix& emb_r,
                               const LossConfig& cfg);

}  // namespace posemetric
