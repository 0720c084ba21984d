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

#include <random>
#include <span>
#include <string>
#include <vector>

#include "posemetric/dataset.hpp"

namespace posemetric {

using Rng = std::mt19937_64;

struct BBoxNoiseConfig {
  /// beta = 1 - IoU_min, in [0, 1].
  double beta_train = 0.1;
};

struct OcclusionConfig {
  double s_occ = 0.5;
  int min_occluders = 1;
  int max_occluders = 8;
  /// Occluders of this category are never applied (the object's own class).
  std::string excluded_category;

  void validate() const;
};

/// Axis-aligned rectangle [x0, x1] x [y0, y1] in normalized coordinates.
struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
  double area() const { return (x1 > x0 && y1 > y0) ? (x1 - x0) * (y1 - y0) : 0.0; }
  Rect clipped_to_unit() const;
  Rect intersect(const Rect& o) const;
};

struct Occluder {
  std::string category;
  /// Template mask, anchored at the origin; only its extent matters.
  Rect mask;
  /// Values blended into camera features under the mask footprint.
  std::vector<double> fill;
};

/// Maximum corner displacement n (pixels) such that shrinking every side by
/// n keeps IoU >= 1 - beta. Throws std::invalid_argument for w, h <= 0 or
/// beta outside [0, 1].
double max_corner_deviation(double w, double h, double beta);

/// IoU of a w x h box with the same box shrunk by n on every side.
double iou_for_deviation(double w, double h, double n);

/// Displaces each corner of `b` independently and uniformly within +-n along
/// x and y, n = max_corner_deviation(b.w, b.h, beta).
BBox perturb_bbox(const BBox& b, double beta, Rng& rng);

struct ResizeFactor {
  double fx = 0.0;
  double fy = 0.0;
};

/// f_x = f_y = s_occ * x with x ~ U[0, 1].
ResizeFactor occluder_resize_factor(double s_occ, Rng& rng);
/// Same law for a given draw x.
ResizeFactor occluder_resize_factor_at(double s_occ, double x);

/// Exact area of the union of rectangles intersected with the unit box.
double union_area(std::span<const Rect> rects);

/// 0-20% -> L0, 20-40% -> L1, 40-60% -> L2, 60%+ -> L3.
OcclusionLevel level_for_ratio(double ratio);

struct OcclusionResult {
  Sample sample;
  double occlusion_ratio = 0.0;
  std::vector<Rect> placed;
  std::vector<std::string> occluder_categories;
};

/// Blends one placed occluder into the camera features: each dimension
/// moves toward the fill by the covered fraction of its footprint.
void blend_occluder(std::vector<double>& camera_feat, const Rect& placed, std::span<const double> fill);

/// Places k ~ U{min..max} occluders drawn from the pool (minus the excluded
/// category), each resized by occluder_resize_factor and centred uniformly
/// in the unit box. Throws std::invalid_argument when the filtered pool is
/// empty.
OcclusionResult apply_occlusions(const Sample& s, const OcclusionConfig& cfg, std::span<const Occluder> pool,
                                 Rng& rng);

/// Test-set occlusion: redraws occluders at full scale until the covered
/// ratio falls inside the nominal band of `level`. Throws std::runtime_error
/// after `max_attempts` misses.
OcclusionResult occlude_to_level(const Sample& s, OcclusionLevel level, std::span<const Occluder> pool,
                                 const std::string& excluded_category, Rng& rng, int max_attempts = 10000);

/// Occluder templates for the 20 PASCAL VOC classes.
std::vector<Occluder> make_occluder_pool(std::uint64_t seed, int per_category = 4);

const std::vector<std::string>& voc_categories();

/// Perturbs the box with bbox noise and applies the crop response to the
/// camera features.
Sample apply_bbox_noise(const Sample& s, double beta, Rng& rng);

struct AugmentConfig {
  double beta = 0.0;
  double s_occ = 0.0;
  int min_occluders = 1;
  int max_occluders = 8;
  double jitter_sigma = 0.0;
  double flip_probability = 0.0;
};

/// Camera/rendering inputs of one training pair after augmentation.
struct AugmentedPair {
  std::vector<double> camera_feat;
  std::vector<double> render_feat;
  EulerPose pose;
};

/// Applies flip, bbox noise, occlusion and jitter to the camera side. The
/// rendering stays clean except for the flip, which relabels the pose and is
/// applied to both sides so the pair keeps describing one pose.
AugmentedPair augment_pair(const Sample& s, const AugmentConfig& cfg, std::span<const Occluder> pool, Rng& rng);

}  // namespace posemetric
