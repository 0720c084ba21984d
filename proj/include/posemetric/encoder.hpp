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

#include <Eigen/Core>
#include <span>
#include <vector>

#include "posemetric/augmentation.hpp"
#include "posemetric/linalg.hpp"

namespace posemetric {

/// Layers before the projection head train with the backbone learning rate,
/// head layers with the head learning rate.
enum class LayerRole { Backbone, Head };

struct Layer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
  LayerRole role = LayerRole::Backbone;
};

/// input_dim -> hidden... -> backbone_out -> head_hidden... -> head_out.
struct Architecture {
  int input_dim = 16;
  std::vector<int> hidden{64, 64};
  int backbone_out = 32;
  std::vector<int> head_hidden{};
  int head_out = 16;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct MlpGrads {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;
};

/// Feed-forward encoder with tanh on every layer except the last, which is
/// linear. Forward passes over frozen parameters are safe to call
/// concurrently.
class Mlp {
 public:
  Mlp() = default;
  /// Throws std::invalid_argument when consecutive dimensions disagree.
  explicit Mlp(std::vector<Layer> layers);

  /// Xavier-uniform weights, zero biases.
  static Mlp random(const Architecture& arch, Rng& rng);
  static Mlp zeros(const Architecture& arch);

  int input_dim() const;
  int output_dim() const;
  std::size_t parameter_count() const;

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  /// Throws std::invalid_argument on a dimension mismatch.
  Eigen::VectorXd forward(std::span<const double> input) const;

  /// Row-wise forward; each row goes through forward(), so the result does
  /// not depend on how rows are batched or split across threads.
  RowMatrix embed_rows_serial(const RowMatrix& inputs) const;
  RowMatrix embed_rows_omp(const RowMatrix& inputs) const;

  /// Batched pass keeping the activations needed by backward().
  struct Cache {
    std::vector<RowMatrix> activations;  // [0] is the input
  };
  RowMatrix forward_batch(const RowMatrix& inputs, Cache& cache) const;

  /// Parameter gradients for upstream dL/d(output) of the cached pass, plus
  /// weight_decay * parameter.
  MlpGrads backward(const Cache& cache, const RowMatrix& upstream, double weight_decay) const;

  /// Gradient with respect to the inputs of the cached pass (no decay).
  RowMatrix input_gradient(const Cache& cache, const RowMatrix& upstream) const;

  /// Parameters in layer order, each weight row-major followed by its bias.
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);

  bool all_finite() const;

 private:
  std::vector<Layer> layers_;
};

/// E_c embeds camera features, E_r rendering features.
struct EncoderPair {
  Mlp camera;
  Mlp render;

  static EncoderPair random(const Architecture& arch, Rng& rng);
};

struct AdamConfig {
  double lr_backbone = 1e-4;
  double lr_head = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction and one learning rate per layer role.
class Adam {
 public:
  Adam(const Mlp& net, AdamConfig cfg);
  void step(Mlp& net, const MlpGrads& grads);
  long steps() const { return t_; }

 private:
  AdamConfig cfg_;
  long t_ = 0;
  std::vector<Eigen::MatrixXd> m_w_, v_w_;
  std::vector<Eigen::VectorXd> m_b_, v_b_;
};

}  // namespace posemetric
