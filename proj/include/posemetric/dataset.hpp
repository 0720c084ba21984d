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

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "posemetric/pose_math.hpp"

namespace posemetric {

/// Width of the synthetic camera and rendering feature vectors.
inline constexpr int kFeatureDim = 16;

enum class OcclusionLevel { L0 = 0, L1 = 1, L2 = 2, L3 = 3 };

std::string to_string(OcclusionLevel level);
OcclusionLevel occlusion_level_from_string(const std::string& s);

/// Axis-aligned box in pixels, (x, y) is the top-left corner.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 1.0;
  double h = 1.0;

  double area() const { return w * h; }
  friend bool operator==(const BBox&, const BBox&) = default;
};

double iou(const BBox& a, const BBox& b);

struct Sample {
  std::int64_t id = 0;
  std::string category;
  std::string subcategory;
  EulerPose pose;
  BBox bbox;
  std::vector<double> camera_feat;
  std::vector<double> render_feat;
  OcclusionLevel occlusion_level = OcclusionLevel::L0;
  double occlusion_ratio = 0.0;
  // Rendering modality tag; only one synthetic realization exists.
  std::string channel = "normals";

  friend bool operator==(const Sample&, const Sample&) = default;
};

/// Closed interval in degrees.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

/// Pose ranges (degrees) and grid steps (degrees) of the viewing sphere.
struct ViewingSphere {
  Interval azimuth{0.0, 360.0};
  Interval elevation{-30.0, 60.0};
  Interval inplane{-30.0, 30.0};
  double azimuth_step = 5.0;
  double elevation_step = 5.0;
  double inplane_step = 5.0;

  /// True when the azimuth range covers the full circle, in which case the
  /// 360 degree endpoint coincides with 0 and is not gridded twice.
  bool azimuth_periodic() const;

  /// Throws std::invalid_argument on inverted ranges, non-positive steps, or
  /// steps that do not divide their ranges.
  void validate_grid() const;
};

enum class ReferenceDesign { TrainDB, CoarseDB, FineDB };

std::string to_string(ReferenceDesign design);
ReferenceDesign reference_design_from_string(const std::string& s);

/// Copy of `sphere` with the grid steps of `design` (CoarseDB 5/5/5, FineDB
/// 1/5/5 degrees). TrainDB leaves the sphere unchanged.
ViewingSphere with_design_steps(ViewingSphere sphere, ReferenceDesign design);

/// The fixed smooth maps from pose to features. Camera features are
///   G(pose, subcategory) = gain (.) lift(pose) + offset(category, subcategory)
/// and rendering features are H(pose) = tanh(1.5 lift(pose)), where lift() is
/// a 16-term trigonometric lift of the three angles. H is odd in every lift
/// term and the offsets vanish on azimuth-odd terms, so a horizontal flip
/// (az -> -az) is exactly a coordinate sign pattern on both modalities.
class FeatureModel {
 public:
  FeatureModel() = default;
  /// With shared_modality set, G == H and no subcategory offsets are applied.
  explicit FeatureModel(bool shared_modality) : shared_modality_(shared_modality) {}

  bool shared_modality() const { return shared_modality_; }

  static std::vector<double> lift(const EulerPose& pose);
  std::vector<double> render(const EulerPose& pose) const;
  std::vector<double> camera(const EulerPose& pose, const std::string& category,
                             const std::string& subcategory) const;

  /// Sign pattern realizing the horizontal flip in feature space.
  static const std::vector<double>& mirror_signs();
  static EulerPose mirror_pose(const EulerPose& pose);

  /// Normalized [x0, y0, x1, y1] footprint of feature dimension d inside the
  /// unit box (dims are laid out on a 4x4 grid).
  static std::array<double, 4> footprint(int d);

  /// Feature response of a crop displaced from `original` to `perturbed`.
  static std::vector<double> bbox_response(const BBox& original, const BBox& perturbed);

 private:
  bool shared_modality_ = false;
};

/// Subcategory weights of the synthetic generator. Weights are
/// nonnegative and must sum to a positive value.
using SubcategoryMix = std::map<std::string, double>;

/// Deterministic synthetic dataset. Poses are uniform over the sphere's
/// ranges; camera features carry N(0, noise_sigma^2) noise, renderings are
/// exact. Throws std::invalid_argument on an empty category list, bad mix, or
/// a sphere of zero measure.
std::vector<Sample> generate_dataset(std::uint64_t seed, int n_samples,
                                     const std::vector<std::string>& categories,
                                     const SubcategoryMix& subcategory_mix,
                                     const ViewingSphere& sphere, double noise_sigma,
                                     const FeatureModel& model = FeatureModel{});

struct ReferenceEntry {
  EulerPose pose;
  std::vector<double> render_feat;
  std::int64_t source_id = 0;
  int cad_model = 0;
};

/// Number of grid poses of `sphere` at its own steps.
std::size_t grid_size(const ViewingSphere& sphere);

/// Reference renderings for a design. TrainDB yields one entry per training
/// sample (source_id = sample id); CoarseDB/FineDB enumerate the sphere grid
/// at the design's steps once per CAD model (source_id = enumeration index).
std::vector<ReferenceEntry> build_reference_poses(ReferenceDesign design,
                                                  std::span<const Sample> train,
                                                  const ViewingSphere& sphere,
                                                  int cad_models = 1,
                                                  const FeatureModel& model = FeatureModel{});

}  // namespace posemetric
