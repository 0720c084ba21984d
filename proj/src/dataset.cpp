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

#include "posemetric/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "posemetric/hash.hpp"

namespace posemetric {

namespace {

// Uniform double in [0, 1) from the raw engine output; used for the fixed
// feature model so it does not depend on library distribution algorithms.
double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

const std::vector<double>& camera_gain() {
  static const std::vector<double> gain = [] {
    std::vector<double> g(kFeatureDim);
    for (int d = 0; d < kFeatureDim; ++d) {
      const double phi = (d + 1) * 0.6180339887498949;
      g[d] = 0.7 + 0.6 * (phi - std::floor(phi));
    }
    return g;
  }();
  return gain;
}

// 16x4 response of the features to (dcx, dcy, log sw, log sh) of the crop.
const std::vector<double>& bbox_matrix() {
  static const std::vector<double> k = [] {
    std::mt19937_64 rng(0x5eedb0c5ULL);
    std::vector<double> m(kFeatureDim * 4);
    for (double& v : m) v = 4.0 * (2.0 * unit_draw(rng) - 1.0);
    return m;
  }();
  return k;
}

std::vector<double> subcategory_offset(const std::string& category, const std::string& subcategory) {
  std::mt19937_64 rng(fnv1a64(category + "/" + subcategory));
  const auto& signs = FeatureModel::mirror_signs();
  std::vector<double> off(kFeatureDim, 0.0);
  for (int d = 0; d < kFeatureDim; ++d) {
    const double v = 0.5 * (2.0 * unit_draw(rng) - 1.0);
    if (signs[d] > 0) off[d] = v;
  }
  return off;
}

std::size_t axis_count(const Interval& r, double step, bool periodic) {
  const auto n = static_cast<std::size_t>(std::llround(r.width() / step));
  return periodic ? n : n + 1;
}

void check_divides(const Interval& r, double step, const char* axis) {
  if (!(step > 0.0)) throw std::invalid_argument(std::string("ViewingSphere: non-positive step on ") + axis);
  if (r.hi < r.lo) throw std::invalid_argument(std::string("ViewingSphere: inverted range on ") + axis);
  const double q = r.width() / step;
  if (std::abs(q - std::round(q)) > 1e-9) {
    throw std::invalid_argument(std::string("ViewingSphere: step does not divide range on ") + axis);
  }
}

}  // namespace

std::string to_string(OcclusionLevel level) {
  switch (level) {
    case OcclusionLevel::L0: return "L0";
    case OcclusionLevel::L1: return "L1";
    case OcclusionLevel::L2: return "L2";
    case OcclusionLevel::L3: return "L3";
  }
  return "L0";
}

OcclusionLevel occlusion_level_from_string(const std::string& s) {
  if (s == "L0") return OcclusionLevel::L0;
  if (s == "L1") return OcclusionLevel::L1;
  if (s == "L2") return OcclusionLevel::L2;
  if (s == "L3") return OcclusionLevel::L3;
  throw std::invalid_argument("unknown occlusion level: " + s);
}

double iou(const BBox& a, const BBox& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

bool ViewingSphere::azimuth_periodic() const { return std::abs(azimuth.width() - 360.0) < 1e-9; }

void ViewingSphere::validate_grid() const {
  check_divides(azimuth, azimuth_step, "azimuth");
  check_divides(elevation, elevation_step, "elevation");
  check_divides(inplane, inplane_step, "inplane");
}

std::string to_string(ReferenceDesign design) {
  switch (design) {
    case ReferenceDesign::TrainDB: return "TrainDB";
    case ReferenceDesign::CoarseDB: return "CoarseDB";
    case ReferenceDesign::FineDB: return "FineDB";
  }
  return "TrainDB";
}

ReferenceDesign reference_design_from_string(const std::string& s) {
  if (s == "TrainDB") return ReferenceDesign::TrainDB;
  if (s == "CoarseDB") return ReferenceDesign::CoarseDB;
  if (s == "FineDB") return ReferenceDesign::FineDB;
  throw std::invalid_argument("unknown reference design: " + s);
}

ViewingSphere with_design_steps(ViewingSphere sphere, ReferenceDesign design) {
  switch (design) {
    case ReferenceDesign::TrainDB: break;
    case ReferenceDesign::CoarseDB:
      sphere.azimuth_step = sphere.elevation_step = sphere.inplane_step = 5.0;
      break;
    case ReferenceDesign::FineDB:
      sphere.azimuth_step = 1.0;
      sphere.elevation_step = sphere.inplane_step = 5.0;
      break;
  }
  return sphere;
}

std::vector<double> FeatureModel::lift(const EulerPose& p) {
  const double a = p.azimuth, e = p.elevation, i = p.inplane;
  const double sa = std::sin(a), ca = std::cos(a), se = std::sin(e), ce = std::cos(e);
  return {sa,          ca,          std::sin(2 * a), std::cos(2 * a),
          se,          ce,          std::sin(2 * e), std::cos(2 * e),
          std::sin(i), std::cos(i), std::sin(2 * i), std::cos(2 * i),
          ce * sa,     ce * ca,     se * sa,         se * ca};
}

const std::vector<double>& FeatureModel::mirror_signs() {
  static const std::vector<double> s = {-1, 1, -1, 1, 1, 1, 1, 1, 1, 1, 1, 1, -1, 1, -1, 1};
  return s;
}

EulerPose FeatureModel::mirror_pose(const EulerPose& p) {
  return EulerPose{wrap_two_pi(-p.azimuth), p.elevation, p.inplane};
}

std::vector<double> FeatureModel::render(const EulerPose& pose) const {
  auto f = lift(pose);
  if (shared_modality_) return f;
  for (double& v : f) v = std::tanh(1.5 * v);
  return f;
}

std::vector<double> FeatureModel::camera(const EulerPose& pose, const std::string& category,
                                         const std::string& subcategory) const {
  if (shared_modality_) return render(pose);
  auto f = lift(pose);
  const auto& gain = camera_gain();
  const auto off = subcategory_offset(category, subcategory);
  for (int d = 0; d < kFeatureDim; ++d) f[d] = gain[d] * f[d] + off[d];
  return f;
}

std::array<double, 4> FeatureModel::footprint(int d) {
  const int cell = (5 * d) % kFeatureDim;
  const double col = cell % 4, row = cell / 4;
  return {col / 4.0, row / 4.0, (col + 1) / 4.0, (row + 1) / 4.0};
}

std::vector<double> FeatureModel::bbox_response(const BBox& o, const BBox& p) {
  const double v[4] = {((p.x + p.w / 2) - (o.x + o.w / 2)) / o.w, ((p.y + p.h / 2) - (o.y + o.h / 2)) / o.h,
                       std::log(p.w / o.w), std::log(p.h / o.h)};
  const auto& k = bbox_matrix();
  std::vector<double> out(kFeatureDim, 0.0);
  for (int d = 0; d < kFeatureDim; ++d) {
    for (int j = 0; j < 4; ++j) out[d] += k[d * 4 + j] * v[j];
  }
  return out;
}

std::vector<Sample> generate_dataset(std::uint64_t seed, int n_samples, const std::vector<std::string>& categories,
                                     const SubcategoryMix& subcategory_mix, const ViewingSphere& sphere,
                                     double noise_sigma, const FeatureModel& model) {
  if (n_samples <= 0) throw std::invalid_argument("generate_dataset: n_samples must be positive");
  if (categories.empty()) throw std::invalid_argument("generate_dataset: empty category list");
  if (subcategory_mix.empty()) throw std::invalid_argument("generate_dataset: empty subcategory mix");
  double total = 0.0;
  std::vector<std::string> names;
  std::vector<double> weights;
  for (const auto& [name, w] : subcategory_mix) {
    if (!(w >= 0.0)) throw std::invalid_argument("generate_dataset: negative subcategory weight");
    total += w;
    names.push_back(name);
    weights.push_back(w);
  }
  if (!(total > 0.0)) throw std::invalid_argument("generate_dataset: subcategory weights sum to zero");
  for (const Interval* r : {&sphere.azimuth, &sphere.elevation, &sphere.inplane}) {
    if (r->hi < r->lo) throw std::invalid_argument("generate_dataset: inverted sphere range");
  }
  if (sphere.azimuth.width() == 0.0 && sphere.elevation.width() == 0.0 && sphere.inplane.width() == 0.0) {
    throw std::invalid_argument("generate_dataset: zero-measure viewing sphere");
  }
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("generate_dataset: negative noise sigma");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::discrete_distribution<std::size_t> pick_sub(weights.begin(), weights.end());
  std::uniform_int_distribution<std::size_t> pick_cat(0, categories.size() - 1);

  auto draw = [&](const Interval& r) { return r.lo + r.width() * unit(rng); };

  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(n_samples));
  for (int k = 0; k < n_samples; ++k) {
    Sample s;
    s.id = k;
    s.category = categories[pick_cat(rng)];
    s.subcategory = names[pick_sub(rng)];
    s.pose = EulerPose::from_degrees(draw(sphere.azimuth), draw(sphere.elevation), draw(sphere.inplane));
    s.bbox.w = 80.0 + 240.0 * unit(rng);
    s.bbox.h = 80.0 + 240.0 * unit(rng);
    s.bbox.x = 320.0 * unit(rng);
    s.bbox.y = 320.0 * unit(rng);
    s.camera_feat = model.camera(s.pose, s.category, s.subcategory);
    if (noise_sigma > 0.0) {
      for (double& v : s.camera_feat) v += noise_sigma * noise(rng);
    }
    s.render_feat = model.render(s.pose);
    out.push_back(std::move(s));
  }
  return out;
}

std::size_t grid_size(const ViewingSphere& sphere) {
  sphere.validate_grid();
  return axis_count(sphere.azimuth, sphere.azimuth_step, sphere.azimuth_periodic()) *
         axis_count(sphere.elevation, sphere.elevation_step, false) *
         axis_count(sphere.inplane, sphere.inplane_step, false);
}

std::vector<ReferenceEntry> build_reference_poses(ReferenceDesign design, std::span<const Sample> train,
                                                  const ViewingSphere& sphere, int cad_models,
                                                  const FeatureModel& model) {
  if (cad_models < 1) throw std::invalid_argument("build_reference_poses: cad_models must be >= 1");
  std::vector<ReferenceEntry> out;
  if (design == ReferenceDesign::TrainDB) {
    if (train.empty()) throw std::invalid_argument("build_reference_poses: TrainDB needs training samples");
    out.reserve(train.size());
    for (const auto& s : train) {
      out.push_back(ReferenceEntry{s.pose, model.render(s.pose), s.id, 0});
    }
    return out;
  }

  const ViewingSphere grid = with_design_steps(sphere, design);
  grid.validate_grid();
  const std::size_t n_az = axis_count(grid.azimuth, grid.azimuth_step, grid.azimuth_periodic());
  const std::size_t n_el = axis_count(grid.elevation, grid.elevation_step, false);
  const std::size_t n_ip = axis_count(grid.inplane, grid.inplane_step, false);
  out.reserve(n_az * n_el * n_ip * static_cast<std::size_t>(cad_models));
  std::int64_t next_id = 0;
  for (int cad = 0; cad < cad_models; ++cad) {
    for (std::size_t a = 0; a < n_az; ++a) {
      for (std::size_t e = 0; e < n_el; ++e) {
        for (std::size_t i = 0; i < n_ip; ++i) {
          const EulerPose pose = EulerPose::from_degrees(grid.azimuth.lo + a * grid.azimuth_step,
                                                         grid.elevation.lo + e * grid.elevation_step,
                                                         grid.inplane.lo + i * grid.inplane_step);
          out.push_back(ReferenceEntry{pose, model.render(pose), next_id++, cad});
        }
      }
    }
  }
  return out;
}

}  // namespace posemetric
