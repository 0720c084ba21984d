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

#include "posemetric/encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace posemetric {

namespace {

std::vector<std::pair<int, LayerRole>> layer_dims(const Architecture& a) {
  std::vector<std::pair<int, LayerRole>> dims;  // output dim and role of each layer
  for (int h : a.hidden) dims.emplace_back(h, LayerRole::Backbone);
  dims.emplace_back(a.backbone_out, LayerRole::Backbone);
  for (int h : a.head_hidden) dims.emplace_back(h, LayerRole::Head);
  dims.emplace_back(a.head_out, LayerRole::Head);
  return dims;
}

Mlp build(const Architecture& arch, Rng* rng) {
  if (arch.input_dim < 1) throw std::invalid_argument("Architecture: input_dim must be positive");
  std::vector<Layer> layers;
  int in = arch.input_dim;
  for (const auto& [out, role] : layer_dims(arch)) {
    if (out < 1) throw std::invalid_argument("Architecture: layer widths must be positive");
    Layer l{Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out), role};
    if (rng) {
      const double a = std::sqrt(6.0 / (in + out));
      std::uniform_real_distribution<double> u(-a, a);
      for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
        for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = u(*rng);
      }
    }
    layers.push_back(std::move(l));
    in = out;
  }
  return Mlp(std::move(layers));
}

}  // namespace

Mlp::Mlp(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw std::invalid_argument("Mlp: no layers");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].bias.size() != layers_[l].weight.rows()) throw std::invalid_argument("Mlp: bias size mismatch");
    if (l > 0 && layers_[l].weight.cols() != layers_[l - 1].weight.rows()) {
      throw std::invalid_argument("Mlp: consecutive layer dimensions disagree");
    }
  }
}

Mlp Mlp::random(const Architecture& arch, Rng& rng) { return build(arch, &rng); }
Mlp Mlp::zeros(const Architecture& arch) { return build(arch, nullptr); }

int Mlp::input_dim() const { return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols()); }
int Mlp::output_dim() const { return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows()); }

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Eigen::VectorXd Mlp::forward(std::span<const double> input) const {
  if (static_cast<int>(input.size()) != input_dim()) throw std::invalid_argument("Mlp::forward: dimension mismatch");
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(input.data(), static_cast<Eigen::Index>(input.size()));
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::VectorXd z = layers_[l].weight * a + layers_[l].bias;
    a = (l + 1 < layers_.size()) ? Eigen::VectorXd(z.array().tanh()) : z;
  }
  return a;
}

RowMatrix Mlp::embed_rows_serial(const RowMatrix& inputs) const {
  if (inputs.cols() != input_dim()) throw std::invalid_argument("Mlp::embed_rows: dimension mismatch");
  RowMatrix out(inputs.rows(), output_dim());
  for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
    out.row(r) = forward(std::span<const double>(inputs.row(r).data(), static_cast<std::size_t>(inputs.cols())))
                     .transpose();
  }
  return out;
}

RowMatrix Mlp::embed_rows_omp(const RowMatrix& inputs) const {
  if (inputs.cols() != input_dim()) throw std::invalid_argument("Mlp::embed_rows: dimension mismatch");
  RowMatrix out(inputs.rows(), output_dim());
#pragma omp parallel for schedule(static)
  for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
    out.row(r) = forward(std::span<const double>(inputs.row(r).data(), static_cast<std::size_t>(inputs.cols())))
                     .transpose();
  }
  return out;
}

RowMatrix Mlp::forward_batch(const RowMatrix& inputs, Cache& cache) const {
  if (inputs.cols() != input_dim()) throw std::invalid_argument("Mlp::forward_batch: dimension mismatch");
  cache.activations.clear();
  cache.activations.push_back(inputs);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    RowMatrix z = (cache.activations.back() * layers_[l].weight.transpose()).rowwise() +
                  layers_[l].bias.transpose();
    if (l + 1 < layers_.size()) z = z.array().tanh().matrix();
    cache.activations.push_back(std::move(z));
  }
  return cache.activations.back();
}

MlpGrads Mlp::backward(const Cache& cache, const RowMatrix& upstream, double weight_decay) const {
  if (cache.activations.size() != layers_.size() + 1) throw std::invalid_argument("Mlp::backward: no cached pass");
  MlpGrads g;
  g.weight.resize(layers_.size());
  g.bias.resize(layers_.size());
  RowMatrix delta = upstream;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    if (l + 1 < layers_.size()) {
      const auto& a = cache.activations[l + 1];
      delta = (delta.array() * (1.0 - a.array().square())).matrix();
    }
    g.weight[l] = delta.transpose() * cache.activations[l] + weight_decay * layers_[l].weight;
    g.bias[l] = delta.colwise().sum().transpose() + weight_decay * layers_[l].bias;
    if (l > 0) delta = delta * layers_[l].weight;
  }
  return g;
}

RowMatrix Mlp::input_gradient(const Cache& cache, const RowMatrix& upstream) const {
  RowMatrix delta = upstream;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    if (l + 1 < layers_.size()) {
      const auto& a = cache.activations[l + 1];
      delta = (delta.array() * (1.0 - a.array().square())).matrix();
    }
    delta = delta * layers_[l].weight;
  }
  return delta;
}

std::vector<double> Mlp::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) flat.push_back(l.weight(r, c));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) flat.push_back(l.bias(r));
  }
  return flat;
}

void Mlp::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw std::invalid_argument("Mlp::assign: parameter count mismatch");
  std::size_t k = 0;
  for (auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = flat[k++];
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = flat[k++];
  }
}

bool Mlp::all_finite() const {
  for (const auto& l : layers_) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

EncoderPair EncoderPair::random(const Architecture& arch, Rng& rng) {
  Mlp cam = Mlp::random(arch, rng);
  Mlp ren = Mlp::random(arch, rng);
  return EncoderPair{std::move(cam), std::move(ren)};
}

Adam::Adam(const Mlp& net, AdamConfig cfg) : cfg_(cfg) {
  for (const auto& l : net.layers()) {
    m_w_.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
    v_w_.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
    m_b_.push_back(Eigen::VectorXd::Zero(l.bias.size()));
    v_b_.push_back(Eigen::VectorXd::Zero(l.bias.size()));
  }
}

void Adam::step(Mlp& net, const MlpGrads& grads) {
  auto& layers = net.layers();
  if (layers.size() != m_w_.size() || grads.weight.size() != layers.size()) {
    throw std::invalid_argument("Adam::step: parameter layout changed");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  auto update = [&](auto& param, const auto& grad, auto& m, auto& v, double lr) {
    m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * grad;
    v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * grad.cwiseProduct(grad);
    param.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg_.eps);
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const double lr = layers[l].role == LayerRole::Head ? cfg_.lr_head : cfg_.lr_backbone;
    update(layers[l].weight, grads.weight[l], m_w_[l], v_w_[l], lr);
    update(layers[l].bias, grads.bias[l], m_b_[l], v_b_[l], lr);
  }
}

}  // namespace posemetric
