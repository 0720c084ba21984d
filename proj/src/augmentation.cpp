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

#include "posemetric/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace posemetric {

void OcclusionConfig::validate() const {
  if (!(s_occ >= 0.0 && s_occ <= 1.0)) throw std::invalid_argument("OcclusionConfig: s_occ outside [0, 1]");
  if (min_occluders < 1 || min_occluders > max_occluders || max_occluders > 8) {
    throw std::invalid_argument("OcclusionConfig: need 1 <= min_occluders <= max_occluders <= 8");
  }
}

Rect Rect::clipped_to_unit() const {
  return Rect{std::clamp(x0, 0.0, 1.0), std::clamp(y0, 0.0, 1.0), std::clamp(x1, 0.0, 1.0),
              std::clamp(y1, 0.0, 1.0)};
}

Rect Rect::intersect(const Rect& o) const {
  return Rect{std::max(x0, o.x0), std::max(y0, o.y0), std::min(x1, o.x1), std::min(y1, o.y1)};
}

double max_corner_deviation(double w, double h, double beta) {
  if (!(w > 0.0) || !(h > 0.0)) throw std::invalid_argument("max_corner_deviation: w and h must be positive");
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("max_corner_deviation: beta outside [0, 1]");
  // Smaller root of 4n^2 - 2(w+h)n + wh*beta = 0, written without the
  // cancellation of (w+h) - sqrt(...). The discriminant is nonnegative since
  // (w+h)^2 >= 4wh >= 4wh*beta.
  const double s = w + h;
  const double disc = std::max(0.0, s * s - 4.0 * w * h * beta);
  return w * h * beta / (s + std::sqrt(disc));
}

double iou_for_deviation(double w, double h, double n) { return (w - 2.0 * n) * (h - 2.0 * n) / (w * h); }

BBox perturb_bbox(const BBox& b, double beta, Rng& rng) {
  const double n = max_corner_deviation(b.w, b.h, beta);
  if (n == 0.0) return b;
  std::uniform_real_distribution<double> shift(-n, n);
  double x0 = b.x + shift(rng);
  double y0 = b.y + shift(rng);
  double x1 = b.x + b.w + shift(rng);
  double y1 = b.y + b.h + shift(rng);
  // At beta = 1 opposite corners may meet; keep a positive extent.
  const double min_w = 1e-9 * b.w, min_h = 1e-9 * b.h;
  if (x1 - x0 < min_w) {
    const double c = 0.5 * (x0 + x1);
    x0 = c - 0.5 * min_w;
    x1 = c + 0.5 * min_w;
  }
  if (y1 - y0 < min_h) {
    const double c = 0.5 * (y0 + y1);
    y0 = c - 0.5 * min_h;
    y1 = c + 0.5 * min_h;
  }
  return BBox{x0, y0, x1 - x0, y1 - y0};
}

ResizeFactor occluder_resize_factor_at(double s_occ, double x) { return ResizeFactor{s_occ * x, s_occ * x}; }

ResizeFactor occluder_resize_factor(double s_occ, Rng& rng) {
  if (!(s_occ >= 0.0 && s_occ <= 1.0)) throw std::invalid_argument("occluder_resize_factor: s_occ outside [0, 1]");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return occluder_resize_factor_at(s_occ, unit(rng));
}

double union_area(std::span<const Rect> rects) {
  std::vector<Rect> live;
  std::vector<double> xs;
  for (const auto& r : rects) {
    const Rect c = r.clipped_to_unit();
    if (c.area() <= 0.0) continue;
    live.push_back(c);
    xs.push_back(c.x0);
    xs.push_back(c.x1);
  }
  if (live.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  double area = 0.0;
  std::vector<std::pair<double, double>> spans;
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    const double xa = xs[k], xb = xs[k + 1];
    spans.clear();
    for (const auto& r : live) {
      if (r.x0 <= xa && r.x1 >= xb) spans.emplace_back(r.y0, r.y1);
    }
    if (spans.empty()) continue;
    std::sort(spans.begin(), spans.end());
    double covered = 0.0;
    double lo = spans[0].first, hi = spans[0].second;
    for (std::size_t s = 1; s < spans.size(); ++s) {
      if (spans[s].first > hi) {
        covered += hi - lo;
        lo = spans[s].first;
        hi = spans[s].second;
      } else {
        hi = std::max(hi, spans[s].second);
      }
    }
    covered += hi - lo;
    area += covered * (xb - xa);
  }
  return std::clamp(area, 0.0, 1.0);
}

OcclusionLevel level_for_ratio(double ratio) {
  if (ratio < 0.2) return OcclusionLevel::L0;
  if (ratio < 0.4) return OcclusionLevel::L1;
  if (ratio < 0.6) return OcclusionLevel::L2;
  return OcclusionLevel::L3;
}

void blend_occluder(std::vector<double>& camera_feat, const Rect& placed, std::span<const double> fill) {
  const Rect c = placed.clipped_to_unit();
  if (c.area() <= 0.0) return;
  for (std::size_t d = 0; d < camera_feat.size(); ++d) {
    const auto fp = FeatureModel::footprint(static_cast<int>(d % kFeatureDim));
    const Rect cell{fp[0], fp[1], fp[2], fp[3]};
    const double phi = c.intersect(cell).area() / cell.area();
    if (phi > 0.0) camera_feat[d] = (1.0 - phi) * camera_feat[d] + phi * fill[d % fill.size()];
  }
}

namespace {

std::vector<const Occluder*> filter_pool(std::span<const Occluder> pool, const std::string& excluded) {
  std::vector<const Occluder*> out;
  for (const auto& o : pool) {
    if (o.category != excluded) out.push_back(&o);
  }
  if (out.empty()) throw std::invalid_argument("occlusion: occluder pool is empty after excluding '" + excluded + "'");
  return out;
}

OcclusionResult place_occluders(const Sample& s, const std::vector<const Occluder*>& pool, int min_k, int max_k,
                                double s_occ, Rng& rng) {
  std::uniform_int_distribution<int> count(min_k, max_k);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  OcclusionResult res;
  res.sample = s;
  const int k = count(rng);
  for (int i = 0; i < k; ++i) {
    const Occluder& o = *pool[pick(rng)];
    const ResizeFactor f = occluder_resize_factor(s_occ, rng);
    const double w = (o.mask.x1 - o.mask.x0) * f.fx;
    const double h = (o.mask.y1 - o.mask.y0) * f.fy;
    const double cx = unit(rng), cy = unit(rng);
    const Rect r{cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2};
    blend_occluder(res.sample.camera_feat, r, o.fill);
    res.placed.push_back(r);
    res.occluder_categories.push_back(o.category);
  }
  res.occlusion_ratio = union_area(res.placed);
  res.sample.occlusion_ratio = res.occlusion_ratio;
  res.sample.occlusion_level = level_for_ratio(res.occlusion_ratio);
  return res;
}

}  // namespace

OcclusionResult apply_occlusions(const Sample& s, const OcclusionConfig& cfg, std::span<const Occluder> pool,
                                 Rng& rng) {
  cfg.validate();
  const auto usable = filter_pool(pool, cfg.excluded_category);
  return place_occluders(s, usable, cfg.min_occluders, cfg.max_occluders, cfg.s_occ, rng);
}

OcclusionResult occlude_to_level(const Sample& s, OcclusionLevel level, std::span<const Occluder> pool,
                                 const std::string& excluded_category, Rng& rng, int max_attempts) {
  if (level == OcclusionLevel::L0) {
    OcclusionResult res;
    res.sample = s;
    return res;
  }
  const auto usable = filter_pool(pool, excluded_category);
  const double lo = 0.2 * static_cast<int>(level);
  const double hi = lo + 0.2;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    auto res = place_occluders(s, usable, 1, 8, 1.0, rng);
    if (res.occlusion_ratio >= lo && res.occlusion_ratio < hi) return res;
  }
  throw std::runtime_error("occlude_to_level: could not reach level " + to_string(level));
}

const std::vector<std::string>& voc_categories() {
  static const std::vector<std::string> names = {
      "aeroplane", "bicycle", "bird",  "boat",        "bottle", "bus",         "car",
      "cat",       "chair",   "cow",   "diningtable", "dog",    "horse",       "motorbike",
      "person",    "pottedplant", "sheep", "sofa",    "train",  "tvmonitor"};
  return names;
}

std::vector<Occluder> make_occluder_pool(std::uint64_t seed, int per_category) {
  Rng rng(seed);
  std::uniform_real_distribution<double> extent(0.3, 1.0);
  std::uniform_real_distribution<double> value(-1.5, 1.5);
  std::vector<Occluder> pool;
  for (const auto& cat : voc_categories()) {
    for (int k = 0; k < per_category; ++k) {
      Occluder o;
      o.category = cat;
      o.mask = Rect{0.0, 0.0, extent(rng), extent(rng)};
      o.fill.resize(kFeatureDim);
      for (double& v : o.fill) v = value(rng);
      pool.push_back(std::move(o));
    }
  }
  return pool;
}

Sample apply_bbox_noise(const Sample& s, double beta, Rng& rng) {
  Sample out = s;
  out.bbox = perturb_bbox(s.bbox, beta, rng);
  const auto delta = FeatureModel::bbox_response(s.bbox, out.bbox);
  for (std::size_t d = 0; d < out.camera_feat.size(); ++d) out.camera_feat[d] += delta[d % delta.size()];
  return out;
}

AugmentedPair augment_pair(const Sample& s, const AugmentConfig& cfg, std::span<const Occluder> pool, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Sample cur = s;
  if (cfg.flip_probability > 0.0 && unit(rng) < cfg.flip_probability) {
    const auto& signs = FeatureModel::mirror_signs();
    for (std::size_t d = 0; d < cur.camera_feat.size(); ++d) cur.camera_feat[d] *= signs[d % signs.size()];
    for (std::size_t d = 0; d < cur.render_feat.size(); ++d) cur.render_feat[d] *= signs[d % signs.size()];
    cur.pose = FeatureModel::mirror_pose(cur.pose);
  }
  if (cfg.beta > 0.0) cur = apply_bbox_noise(cur, cfg.beta, rng);
  if (cfg.s_occ > 0.0) {
    OcclusionConfig occ{cfg.s_occ, cfg.min_occluders, cfg.max_occluders, s.category};
    cur = apply_occlusions(cur, occ, pool, rng).sample;
  }
  if (cfg.jitter_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg.jitter_sigma);
    for (double& v : cur.camera_feat) v += noise(rng);
  }
  return AugmentedPair{std::move(cur.camera_feat), std::move(cur.render_feat), cur.pose};
}

}  // namespace posemetric
