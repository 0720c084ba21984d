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
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "posemetric/dataset.hpp"
#include "posemetric/retrieval.hpp"
#include "posemetric/train.hpp"

namespace posemetric {

/// Geodesic error between predicted and ground-truth pose, degrees.
double pose_error(const EulerPose& pred, const EulerPose& gt);

struct Metrics {
  double acc_pi6 = 0.0;   // fraction of errors < 30 degrees
  double acc_pi18 = 0.0;  // fraction of errors < 10 degrees
  double med_err = 0.0;   // degrees

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// Strict thresholds; the median of an even-length list is the mean of the
/// two middle values. Throws std::invalid_argument on an empty list.
Metrics compute_metrics(std::span<const double> errors_deg);

struct CategoryMetrics {
  Metrics metrics;
  std::size_t n = 0;
};

/// Sample-count-weighted mean of every metric, median error included (the
/// per-category medians are averaged, raw errors are not pooled).
Metrics weighted_average(const std::map<std::string, CategoryMetrics>& per_category);

struct ReportRow {
  std::string category;
  OcclusionLevel level = OcclusionLevel::L0;
  Metrics metrics;
  std::size_t n = 0;
};

struct EvalReport {
  std::vector<ReportRow> rows;
  /// Weighted average across categories for each occlusion level present.
  std::map<OcclusionLevel, Metrics> weighted;

  /// acc_pi18 <= acc_pi6 and med_err >= 0 on every row.
  bool consistent() const;
};

/// Retrieval of every query against the index, grouped by (category,
/// occlusion level of the query).
EvalReport evaluate(const ReferenceIndex& index, const Mlp& encoder_c, std::span<const Sample> queries);

struct DataConfig {
  std::uint64_t seed = 1;
  int n_train = 2000;
  int n_test = 400;
  std::vector<std::string> categories{"car"};
  SubcategoryMix subcategory_mix{{"sedan", 0.75}, {"van", 0.25}};
  /// Range poses are drawn from.
  ViewingSphere sphere{{0.0, 360.0}, {-10.0, 40.0}, {-10.0, 10.0}, 5.0, 5.0, 5.0};
  double noise_sigma = 0.02;
  bool shared_modality = false;
};

struct EvalConfig {
  std::vector<OcclusionLevel> levels{OcclusionLevel::L0};
  double beta_test = 0.0;
  ReferenceDesign design = ReferenceDesign::TrainDB;
  IndexBackend backend = IndexBackend::KdTree;
  int cad_models = 1;
  std::uint64_t seed = 11;
  /// Test-time occluders come from a different template set than training.
  std::uint64_t occluder_seed = 1011;
};

struct ExperimentConfig {
  DataConfig data;
  TrainConfig train;
  EvalConfig eval;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
/// FNV-1a of the canonical JSON dump.
std::uint64_t config_hash(const ExperimentConfig& cfg);

/// Train and test splits of the synthetic data (independent seeds).
std::vector<Sample> make_train_set(const DataConfig& cfg);
std::vector<Sample> make_test_set(const DataConfig& cfg);

/// Query set: each test sample at each requested occlusion level, then
/// bounding-box noise at beta_test. Deterministic given cfg.seed.
std::vector<Sample> make_query_set(std::span<const Sample> test, const EvalConfig& cfg);

/// Builds the reference index for cfg.design from the training set and the
/// data sphere, embedded with E_r.
ReferenceIndex make_reference_index(std::span<const Sample> train, const DataConfig& data, const EvalConfig& cfg,
                                    const Mlp& encoder_r);

enum class GridAxis { SOcc, BetaTrain, BetaTest, LossVariant, ReferenceDesign };

std::string to_string(GridAxis a);
GridAxis grid_axis_from_string(const std::string& s);

struct ExperimentGrid {
  GridAxis axis = GridAxis::SOcc;
  std::vector<std::string> values;
};

struct ExperimentRow {
  std::string value;
  std::string category;
  OcclusionLevel level = OcclusionLevel::L0;
  Metrics metrics;
  std::size_t n = 0;
  std::size_t reference_rows = 0;
  /// Empty on success; the failure message of the grid point otherwise.
  std::string status;
};

struct GridPointSummary {
  std::string value;
  std::map<OcclusionLevel, Metrics> weighted;
  std::vector<double> loss_history;
  std::size_t reference_rows = 0;
  double mean_query_ms = 0.0;
  std::string status;
};

struct ExperimentTable {
  GridAxis axis = GridAxis::SOcc;
  std::vector<ExperimentRow> rows;
  std::vector<GridPointSummary> points;

  /// UTF-8 CSV with a header row and fixed column order; byte-identical
  /// for identical seeds and configuration.
  std::string to_csv() const;
  nlohmann::json summary() const;
  const GridPointSummary& point(const std::string& value) const;
};

/// Trains and evaluates one model per grid value (evaluation-only axes
/// share a single trained model). A failing grid point is recorded with its
/// error message instead of aborting the sweep. Throws std::invalid_argument
/// on an empty grid.
ExperimentTable run_experiment(const ExperimentGrid& grid, const ExperimentConfig& base);

/// Trains per `cfg` and evaluates on the configured query set.
struct TrainEvalResult {
  TrainResult training;
  EvalReport report;
  std::size_t reference_rows = 0;
  double mean_query_ms = 0.0;
};
TrainEvalResult train_and_evaluate(const ExperimentConfig& cfg);

}  // namespace posemetric
