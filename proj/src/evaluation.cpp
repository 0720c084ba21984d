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

#include "posemetric/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "posemetric/hash.hpp"
#include "posemetric/io.hpp"

namespace posemetric {

using nlohmann::json;

double pose_error(const EulerPose& pred, const EulerPose& gt) { return rad2deg(pose_distance(pred, gt)); }

Metrics compute_metrics(std::span<const double> errors_deg) {
  if (errors_deg.empty()) throw std::invalid_argument("compute_metrics: empty error list");
  std::vector<double> e(errors_deg.begin(), errors_deg.end());
  std::size_t under30 = 0, under10 = 0;
  for (double v : e) {
    if (v < 30.0) ++under30;
    if (v < 10.0) ++under10;
  }
  std::sort(e.begin(), e.end());
  const std::size_t n = e.size();
  const double med = n % 2 == 1 ? e[n / 2] : 0.5 * (e[n / 2 - 1] + e[n / 2]);
  return Metrics{static_cast<double>(under30) / n, static_cast<double>(under10) / n, med};
}

Metrics weighted_average(const std::map<std::string, CategoryMetrics>& per_category) {
  if (per_category.empty()) throw std::invalid_argument("weighted_average: no categories");
  double total = 0.0;
  for (const auto& [name, cm] : per_category) total += static_cast<double>(cm.n);
  if (!(total > 0.0)) throw std::invalid_argument("weighted_average: zero total sample count");
  Metrics out;
  for (const auto& [name, cm] : per_category) {
    const double w = static_cast<double>(cm.n) / total;
    out.acc_pi6 += w * cm.metrics.acc_pi6;
    out.acc_pi18 += w * cm.metrics.acc_pi18;
    out.med_err += w * cm.metrics.med_err;
  }
  return out;
}

bool EvalReport::consistent() const {
  for (const auto& r : rows) {
    if (r.metrics.acc_pi18 > r.metrics.acc_pi6 || r.metrics.med_err < 0.0) return false;
  }
  return true;
}

EvalReport evaluate(const ReferenceIndex& index, const Mlp& encoder_c, std::span<const Sample> queries) {
  std::map<std::pair<OcclusionLevel, std::string>, std::vector<double>> errors;
  for (const auto& q : queries) {
    const QueryResult r = index.query(q.camera_feat, encoder_c);
    errors[{q.occlusion_level, q.category}].push_back(pose_error(r.pose, q.pose));
  }
  EvalReport rep;
  std::map<OcclusionLevel, std::map<std::string, CategoryMetrics>> by_level;
  for (const auto& [key, errs] : errors) {
    const Metrics m = compute_metrics(errs);
    rep.rows.push_back(ReportRow{key.second, key.first, m, errs.size()});
    by_level[key.first][key.second] = CategoryMetrics{m, errs.size()};
  }
  for (const auto& [level, cats] : by_level) rep.weighted[level] = weighted_average(cats);
  return rep;
}

namespace {

json sphere_to_json(const ViewingSphere& s) {
  return json{{"azimuth", {s.azimuth.lo, s.azimuth.hi}},
              {"elevation", {s.elevation.lo, s.elevation.hi}},
              {"inplane", {s.inplane.lo, s.inplane.hi}},
              {"steps", {s.azimuth_step, s.elevation_step, s.inplane_step}}};
}

ViewingSphere sphere_from_json(const json& j, ViewingSphere s) {
  auto interval = [&](const char* key, Interval& iv) {
    if (j.contains(key)) {
      const auto v = j.at(key).get<std::vector<double>>();
      if (v.size() != 2) throw std::invalid_argument(std::string("sphere.") + key + " needs [lo, hi]");
      iv = Interval{v[0], v[1]};
    }
  };
  interval("azimuth", s.azimuth);
  interval("elevation", s.elevation);
  interval("inplane", s.inplane);
  if (j.contains("steps")) {
    const auto v = j.at("steps").get<std::vector<double>>();
    if (v.size() != 3) throw std::invalid_argument("sphere.steps needs three values");
    s.azimuth_step = v[0];
    s.elevation_step = v[1];
    s.inplane_step = v[2];
  }
  return s;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json metrics_json(const Metrics& m) {
  return json{{"acc_pi6", m.acc_pi6}, {"acc_pi18", m.acc_pi18}, {"med_err", m.med_err}};
}

}  // namespace

json to_json(const ExperimentConfig& c) {
  const auto& d = c.data;
  const auto& t = c.train;
  const auto& e = c.eval;
  std::vector<std::string> levels;
  for (auto l : e.levels) levels.push_back(to_string(l));
  return json{
      {"data",
       {{"seed", d.seed},
        {"n_train", d.n_train},
        {"n_test", d.n_test},
        {"categories", d.categories},
        {"subcategory_mix", d.subcategory_mix},
        {"sphere", sphere_to_json(d.sphere)},
        {"noise_sigma", d.noise_sigma},
        {"shared_modality", d.shared_modality}}},
      {"train",
       {{"epochs", t.epochs},
        {"batch_size", t.sampler.batch_size},
        {"lr_backbone", t.lr_backbone},
        {"lr_head", t.lr_head},
        {"weight_decay", t.weight_decay},
        {"seed", t.seed},
        {"beta_train", t.beta_train},
        {"s_occ", t.s_occ},
        {"jitter_sigma", t.jitter_sigma},
        {"flip_probability", t.flip_probability},
        {"batches_per_epoch", t.batches_per_epoch},
        {"occluder_seed", t.occluder_seed},
        {"loss",
         {{"margin", t.loss.margin},
          {"pose_threshold_deg", rad2deg(t.loss.pose_threshold)},
          {"variant", to_string(t.loss.variant)}}},
        {"sampler",
         {{"neighbor_count", t.sampler.neighbor_count},
          {"neighbor_threshold_deg", rad2deg(t.sampler.neighbor_threshold)}}},
        {"architecture", architecture_to_json(t.arch)}}},
      {"eval",
       {{"levels", levels},
        {"beta_test", e.beta_test},
        {"design", to_string(e.design)},
        {"backend", to_string(e.backend)},
        {"cad_models", e.cad_models},
        {"seed", e.seed},
        {"occluder_seed", e.occluder_seed}}}};
}

ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig c;
  if (j.contains("data")) {
    const auto& d = j.at("data");
    c.data.seed = d.value("seed", c.data.seed);
    c.data.n_train = d.value("n_train", c.data.n_train);
    c.data.n_test = d.value("n_test", c.data.n_test);
    c.data.categories = d.value("categories", c.data.categories);
    if (d.contains("subcategory_mix")) c.data.subcategory_mix = d.at("subcategory_mix").get<SubcategoryMix>();
    if (d.contains("sphere")) c.data.sphere = sphere_from_json(d.at("sphere"), c.data.sphere);
    c.data.noise_sigma = d.value("noise_sigma", c.data.noise_sigma);
    c.data.shared_modality = d.value("shared_modality", c.data.shared_modality);
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    auto& o = c.train;
    o.epochs = t.value("epochs", o.epochs);
    o.sampler.batch_size = t.value("batch_size", o.sampler.batch_size);
    o.lr_backbone = t.value("lr_backbone", o.lr_backbone);
    o.lr_head = t.value("lr_head", o.lr_head);
    o.weight_decay = t.value("weight_decay", o.weight_decay);
    o.seed = t.value("seed", o.seed);
    o.beta_train = t.value("beta_train", o.beta_train);
    o.s_occ = t.value("s_occ", o.s_occ);
    o.jitter_sigma = t.value("jitter_sigma", o.jitter_sigma);
    o.flip_probability = t.value("flip_probability", o.flip_probability);
    o.batches_per_epoch = t.value("batches_per_epoch", o.batches_per_epoch);
    o.occluder_seed = t.value("occluder_seed", o.occluder_seed);
    if (t.contains("loss")) {
      const auto& l = t.at("loss");
      o.loss.margin = l.value("margin", o.loss.margin);
      o.loss.pose_threshold = deg2rad(l.value("pose_threshold_deg", rad2deg(o.loss.pose_threshold)));
      o.loss.variant = loss_variant_from_string(l.value("variant", to_string(o.loss.variant)));
    }
    if (t.contains("sampler")) {
      const auto& s = t.at("sampler");
      o.sampler.neighbor_count = s.value("neighbor_count", o.sampler.neighbor_count);
      o.sampler.neighbor_threshold = deg2rad(s.value("neighbor_threshold_deg", rad2deg(o.sampler.neighbor_threshold)));
    }
    if (t.contains("architecture")) o.arch = architecture_from_json(t.at("architecture"));
  }
  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    auto& o = c.eval;
    if (e.contains("levels")) {
      o.levels.clear();
      for (const auto& l : e.at("levels")) o.levels.push_back(occlusion_level_from_string(l.get<std::string>()));
    }
    o.beta_test = e.value("beta_test", o.beta_test);
    o.design = reference_design_from_string(e.value("design", to_string(o.design)));
    o.backend = index_backend_from_string(e.value("backend", to_string(o.backend)));
    o.cad_models = e.value("cad_models", o.cad_models);
    o.seed = e.value("seed", o.seed);
    o.occluder_seed = e.value("occluder_seed", o.occluder_seed);
  }
  return c;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) { return fnv1a64(to_json(cfg).dump()); }

std::vector<Sample> make_train_set(const DataConfig& c) {
  return generate_dataset(c.seed, c.n_train, c.categories, c.subcategory_mix, c.sphere, c.noise_sigma,
                          FeatureModel(c.shared_modality));
}

std::vector<Sample> make_test_set(const DataConfig& c) {
  auto test = generate_dataset(c.seed ^ 0x7e57da7aULL, c.n_test, c.categories, c.subcategory_mix, c.sphere,
                               c.noise_sigma, FeatureModel(c.shared_modality));
  // Keep ids disjoint from the training split.
  for (auto& s : test) s.id += c.n_train;
  return test;
}

std::vector<Sample> make_query_set(std::span<const Sample> test, const EvalConfig& cfg) {
  Rng rng(cfg.seed);
  const auto pool = make_occluder_pool(cfg.occluder_seed);
  std::vector<Sample> out;
  out.reserve(test.size() * cfg.levels.size());
  for (OcclusionLevel level : cfg.levels) {
    for (const auto& s : test) {
      Sample q = level == OcclusionLevel::L0 ? s : occlude_to_level(s, level, pool, s.category, rng).sample;
      q.occlusion_level = level;
      if (cfg.beta_test > 0.0) q = apply_bbox_noise(q, cfg.beta_test, rng);
      out.push_back(std::move(q));
    }
  }
  return out;
}

ReferenceIndex make_reference_index(std::span<const Sample> train, const DataConfig& data, const EvalConfig& cfg,
                                    const Mlp& encoder_r) {
  const auto refs = build_reference_poses(cfg.design, train, data.sphere, cfg.cad_models,
                                          FeatureModel(data.shared_modality));
  return build_index(refs, encoder_r, cfg.backend);
}

std::string to_string(GridAxis a) {
  switch (a) {
    case GridAxis::SOcc: return "s_occ";
    case GridAxis::BetaTrain: return "beta_train";
    case GridAxis::BetaTest: return "beta_test";
    case GridAxis::LossVariant: return "loss_variant";
    case GridAxis::ReferenceDesign: return "reference_design";
  }
  return "s_occ";
}

GridAxis grid_axis_from_string(const std::string& s) {
  for (GridAxis a : {GridAxis::SOcc, GridAxis::BetaTrain, GridAxis::BetaTest, GridAxis::LossVariant,
                     GridAxis::ReferenceDesign}) {
    if (to_string(a) == s) return a;
  }
  throw std::invalid_argument("unknown grid axis: " + s);
}

namespace {

bool eval_only(GridAxis a) { return a == GridAxis::BetaTest || a == GridAxis::ReferenceDesign; }

void apply_grid_value(ExperimentConfig& cfg, GridAxis axis, const std::string& value) {
  switch (axis) {
    case GridAxis::SOcc: cfg.train.s_occ = std::stod(value); break;
    case GridAxis::BetaTrain: cfg.train.beta_train = std::stod(value); break;
    case GridAxis::BetaTest: cfg.eval.beta_test = std::stod(value); break;
    case GridAxis::LossVariant: cfg.train.loss.variant = loss_variant_from_string(value); break;
    case GridAxis::ReferenceDesign: cfg.eval.design = reference_design_from_string(value); break;
  }
}

struct EvalOutcome {
  EvalReport report;
  std::size_t reference_rows = 0;
  double mean_query_ms = 0.0;
};

EvalOutcome evaluate_config(const ExperimentConfig& cfg, std::span<const Sample> train,
                            std::span<const Sample> test, const EncoderPair& enc) {
  const ReferenceIndex index = make_reference_index(train, cfg.data, cfg.eval, enc.render);
  const auto queries = make_query_set(test, cfg.eval);
  const auto t0 = std::chrono::steady_clock::now();
  EvalOutcome out{evaluate(index, enc.camera, queries), index.size(), 0.0};
  const auto t1 = std::chrono::steady_clock::now();
  if (!queries.empty()) {
    out.mean_query_ms = std::chrono::duration<double, std::milli>(t1 - t0).count() / static_cast<double>(queries.size());
  }
  return out;
}

}  // namespace

TrainEvalResult train_and_evaluate(const ExperimentConfig& cfg) {
  const auto train_set = make_train_set(cfg.data);
  const auto test_set = make_test_set(cfg.data);
  TrainEvalResult res;
  res.training = train(train_set, cfg.train);
  auto ev = evaluate_config(cfg, train_set, test_set, res.training.encoders);
  res.report = std::move(ev.report);
  res.reference_rows = ev.reference_rows;
  res.mean_query_ms = ev.mean_query_ms;
  return res;
}

ExperimentTable run_experiment(const ExperimentGrid& grid, const ExperimentConfig& base) {
  if (grid.values.empty()) throw std::invalid_argument("run_experiment: empty grid");
  ExperimentTable table;
  table.axis = grid.axis;
  const auto train_set = make_train_set(base.data);
  const auto test_set = make_test_set(base.data);

  std::optional<TrainResult> shared;
  for (const auto& value : grid.values) {
    GridPointSummary point;
    point.value = value;
    try {
      ExperimentConfig cfg = base;
      apply_grid_value(cfg, grid.axis, value);
      TrainResult trained;
      if (eval_only(grid.axis)) {
        if (!shared) shared = train(train_set, cfg.train);
        trained = *shared;
      } else {
        trained = train(train_set, cfg.train);
      }
      point.loss_history = trained.loss_history;
      const EvalOutcome ev = evaluate_config(cfg, train_set, test_set, trained.encoders);
      point.weighted = ev.report.weighted;
      point.reference_rows = ev.reference_rows;
      point.mean_query_ms = ev.mean_query_ms;
      for (const auto& r : ev.report.rows) {
        table.rows.push_back(ExperimentRow{value, r.category, r.level, r.metrics, r.n, ev.reference_rows, ""});
      }
    } catch (const std::exception& ex) {
      point.status = ex.what();
      ExperimentRow row;
      row.value = value;
      row.status = ex.what();
      table.rows.push_back(row);
    }
    table.points.push_back(std::move(point));
  }
  return table;
}

std::string ExperimentTable::to_csv() const {
  std::ostringstream os;
  os << "axis,value,category,occlusion_level,n,acc_pi6,acc_pi18,med_err,reference_rows,status\n";
  for (const auto& r : rows) {
    os << to_string(axis) << ',' << csv_field(r.value) << ',' << csv_field(r.category) << ',' << to_string(r.level)
       << ',' << r.n << ',' << fmt(r.metrics.acc_pi6) << ',' << fmt(r.metrics.acc_pi18) << ','
       << fmt(r.metrics.med_err) << ',' << r.reference_rows << ',' << csv_field(r.status.empty() ? "ok" : r.status)
       << '\n';
  }
  return os.str();
}

json ExperimentTable::summary() const {
  json points_json = json::array();
  for (const auto& p : points) {
    json weighted = json::object();
    for (const auto& [level, m] : p.weighted) weighted[to_string(level)] = metrics_json(m);
    points_json.push_back(json{{"value", p.value},
                               {"weighted", weighted},
                               {"final_loss", p.loss_history.empty() ? 0.0 : p.loss_history.back()},
                               {"initial_loss", p.loss_history.empty() ? 0.0 : p.loss_history.front()},
                               {"reference_rows", p.reference_rows},
                               {"mean_query_ms", p.mean_query_ms},
                               {"status", p.status.empty() ? "ok" : p.status}});
  }
  return json{{"axis", to_string(axis)}, {"points", points_json}};
}

const GridPointSummary& ExperimentTable::point(const std::string& value) const {
  for (const auto& p : points) {
    if (p.value == value) return p;
  }
  throw std::out_of_range("ExperimentTable: no grid point " + value);
}

}  // namespace posemetric
