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

#include "posemetric/train.hpp"

#include <cmath>
#include <sstream>

namespace posemetric {

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (!(lr_backbone >= 0.0) || !(lr_head >= 0.0)) throw std::invalid_argument("TrainConfig: negative learning rate");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("TrainConfig: negative weight decay");
  if (!(beta_train >= 0.0 && beta_train <= 1.0)) throw std::invalid_argument("TrainConfig: beta_train outside [0, 1]");
  if (!(s_occ >= 0.0 && s_occ <= 1.0)) throw std::invalid_argument("TrainConfig: s_occ outside [0, 1]");
  if (!(jitter_sigma >= 0.0)) throw std::invalid_argument("TrainConfig: negative jitter");
  if (!(flip_probability >= 0.0 && flip_probability <= 1.0)) {
    throw std::invalid_argument("TrainConfig: flip_probability outside [0, 1]");
  }
  if (batches_per_epoch < 0) throw std::invalid_argument("TrainConfig: negative batches_per_epoch");
  loss.validate();
  sampler.validate();
}

BatchObjective batch_objective(std::span<const EulerPose> poses, const RowMatrix& emb_c, const RowMatrix& emb_r,
                               const LossConfig& cfg) {
  const auto b = static_cast<double>(poses.size());
  BatchObjective out;
  out.grads = {RowMatrix::Zero(emb_c.rows(), emb_c.cols()), RowMatrix::Zero(emb_r.rows(), emb_r.cols())};

  switch (cfg.variant) {
    case LossVariant::ContrastivePose: {
      const MinedPairs mined = mine_pairs(poses, emb_c, emb_r, cfg.pose_threshold, cfg.margin);
      out.active = mined.size();
      if (mined.size() == 0) return out;
      const PairBatch pb = PairBatch::from_mined(emb_c, emb_r, mined);
      out.loss = contrastive_pose_loss(pb, cfg);
      out.grads = contrastive_pose_grad(pb, cfg);
      // Dropped candidates contribute exactly zero to the full-batch loss.
      out.candidate_loss = out.loss * static_cast<double>(mined.size()) / (b * b);
      return out;
    }
    case LossVariant::FixedContrastive: {
      const PairBatch pb = PairBatch::from_mined(emb_c, emb_r, candidate_pairs(poses, cfg.pose_threshold));
      out.active = pb.pairs.size();
      out.loss = fixed_contrastive_loss(pb, cfg);
      out.grads = fixed_contrastive_grad(pb, cfg);
      out.candidate_loss = out.loss;
      return out;
    }
    case LossVariant::TripletDynamic: {
      const MinedPairs cand = candidate_pairs(poses, cfg.pose_threshold);
      std::vector<std::vector<std::size_t>> pos(poses.size());
      std::vector<std::vector<std::pair<std::size_t, double>>> neg(poses.size());
      for (const auto& p : cand.positives) pos[p.cam].push_back(p.ren);
      for (const auto& p : cand.negatives) neg[p.cam].emplace_back(p.ren, p.delta_theta);
      std::vector<std::size_t> a, ps, ns;
      std::vector<double> dt;
      for (std::size_t i = 0; i < poses.size(); ++i) {
        for (std::size_t j : pos[i]) {
          for (const auto& [k, d] : neg[i]) {
            a.push_back(i);
            ps.push_back(j);
            ns.push_back(k);
            dt.push_back(d);
          }
        }
      }
      out.active = a.size();
      if (a.empty()) return out;
      const TripletBatch tb = make_triplet_batch(emb_c, emb_r, a, ps, ns, dt);
      out.loss = triplet_dynamic_loss(tb, cfg);
      out.grads = triplet_dynamic_grad(tb, cfg);
      out.candidate_loss = out.loss;
      return out;
    }
  }
  return out;
}

TrainResult train(std::span<const Sample> data, const TrainConfig& cfg, std::optional<EncoderPair> init) {
  cfg.validate();
  if (data.empty()) throw std::invalid_argument("train: empty dataset");
  for (const auto& s : data) {
    if (static_cast<int>(s.camera_feat.size()) != cfg.arch.input_dim ||
        static_cast<int>(s.render_feat.size()) != cfg.arch.input_dim) {
      throw std::invalid_argument("train: feature dimension does not match the architecture");
    }
  }

  Rng rng(cfg.seed);
  TrainResult res;
  res.encoders = init ? std::move(*init) : EncoderPair::random(cfg.arch, rng);
  const BatchSampler sampler(data, cfg.sampler);
  const auto pool = make_occluder_pool(cfg.occluder_seed);
  const AdamConfig adam_cfg{cfg.lr_backbone, cfg.lr_head};
  Adam adam_c(res.encoders.camera, adam_cfg);
  Adam adam_r(res.encoders.render, adam_cfg);

  AugmentConfig aug;
  aug.beta = cfg.beta_train;
  aug.s_occ = cfg.s_occ;
  aug.jitter_sigma = cfg.jitter_sigma;
  aug.flip_probability = cfg.flip_probability;

  const int bsz = cfg.batch_size();
  const int per_epoch =
      cfg.batches_per_epoch > 0 ? cfg.batches_per_epoch : static_cast<int>((data.size() + bsz - 1) / bsz);
  const auto dim = cfg.arch.input_dim;

  RowMatrix cam_in(bsz, dim), ren_in(bsz, dim);
  std::vector<EulerPose> poses(static_cast<std::size_t>(bsz));
  Mlp::Cache cache_c, cache_r;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (int it = 0; it < per_epoch; ++it) {
      const Batch batch = sampler.draw(rng);
      for (int r = 0; r < bsz; ++r) {
        const AugmentedPair p = augment_pair(data[batch.indices[static_cast<std::size_t>(r)]], aug, pool, rng);
        cam_in.row(r) = Eigen::Map<const Eigen::RowVectorXd>(p.camera_feat.data(), dim);
        ren_in.row(r) = Eigen::Map<const Eigen::RowVectorXd>(p.render_feat.data(), dim);
        poses[static_cast<std::size_t>(r)] = p.pose;
      }
      const RowMatrix emb_c = res.encoders.camera.forward_batch(cam_in, cache_c);
      const RowMatrix emb_r = res.encoders.render.forward_batch(ren_in, cache_r);
      const BatchObjective obj = batch_objective(poses, emb_c, emb_r, cfg.loss);
      if (!std::isfinite(obj.loss)) {
        std::ostringstream msg;
        msg << "train: non-finite loss at epoch " << epoch << ", batch " << it << " (lr_backbone=" << cfg.lr_backbone
            << ", lr_head=" << cfg.lr_head << ")";
        throw TrainingDiverged(msg.str());
      }
      epoch_loss += obj.candidate_loss;
      if (obj.active == 0) continue;
      adam_c.step(res.encoders.camera, res.encoders.camera.backward(cache_c, obj.grads.camera, cfg.weight_decay));
      adam_r.step(res.encoders.render, res.encoders.render.backward(cache_r, obj.grads.render, cfg.weight_decay));
    }
    res.loss_history.push_back(epoch_loss / per_epoch);
  }
  if (!res.encoders.camera.all_finite() || !res.encoders.render.all_finite()) {
    throw TrainingDiverged("train: parameters became non-finite");
  }
  return res;
}

}  // namespace posemetric
