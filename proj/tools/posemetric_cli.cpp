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

// Command-line driver: data generation, training, indexing, retrieval,
// evaluation, sweeps and the inference benchmark.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "posemetric/evaluation.hpp"
#include "posemetric/io.hpp"
#include "posemetric/retrieval.hpp"
#include "posemetric/train.hpp"

namespace pm = posemetric;
using nlohmann::json;

namespace {

pm::ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  return pm::experiment_config_from_json(json::parse(in));
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

pm::RowMatrix camera_matrix(const std::vector<pm::Sample>& samples) {
  if (samples.empty()) return {};
  const auto dim = static_cast<Eigen::Index>(samples.front().camera_feat.size());
  pm::RowMatrix m(static_cast<Eigen::Index>(samples.size()), dim);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>(samples[i].camera_feat.data(), dim);
  }
  return m;
}

json metrics_json(const pm::Metrics& m) {
  return json{{"acc_pi6", m.acc_pi6}, {"acc_pi18", m.acc_pi18}, {"med_err", m.med_err}};
}

std::string report_csv(const pm::EvalReport& rep) {
  std::ostringstream os;
  os << "category,occlusion_level,n,acc_pi6,acc_pi18,med_err\n";
  char buf[160];
  for (const auto& r : rep.rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%zu,%.6f,%.6f,%.6f\n", r.category.c_str(), pm::to_string(r.level).c_str(), r.n,
                  r.metrics.acc_pi6, r.metrics.acc_pi18, r.metrics.med_err);
    os << buf;
  }
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contrastive pose-metric learning and nearest-neighbour pose retrieval"};
  app.require_subcommand(1);

  std::string config_path, train_path, test_path, data_path, ckpt_path, index_path, out_path, summary_path,
      history_path, design = "TrainDB", backend = "KdTree", axis, values, variants;
  int reps = 1000, limit = 0;

  auto* cfg_cmd = app.add_subcommand("default-config", "Write the default configuration as JSON");
  cfg_cmd->add_option("--out", out_path, "Output path ('-' for stdout)");

  auto* gen = app.add_subcommand("generate-data", "Generate synthetic train/test splits as JSON Lines");
  gen->add_option("--config", config_path, "Configuration JSON");
  gen->add_option("--train", train_path, "Training split output")->required();
  gen->add_option("--test", test_path, "Test split output");

  auto* tr = app.add_subcommand("train", "Train the encoder pair");
  tr->add_option("--config", config_path, "Configuration JSON");
  tr->add_option("--data", data_path, "Training split (JSON Lines)")->required();
  tr->add_option("--out", ckpt_path, "Checkpoint output")->required();
  tr->add_option("--history", history_path, "Per-epoch loss CSV");

  auto* bi = app.add_subcommand("build-index", "Embed a reference set and write the index file");
  bi->add_option("--config", config_path, "Configuration JSON (viewing sphere, CAD model count)");
  bi->add_option("--checkpoint", ckpt_path, "Checkpoint")->required();
  bi->add_option("--data", data_path, "Training split (TrainDB source)")->required();
  bi->add_option("--design", design, "TrainDB | CoarseDB | FineDB");
  bi->add_option("--backend", backend, "Linear | KdTree");
  bi->add_option("--out", index_path, "Index output")->required();

  auto* qu = app.add_subcommand("query", "Retrieve the pose of every sample in a split");
  qu->add_option("--checkpoint", ckpt_path, "Checkpoint")->required();
  qu->add_option("--index", index_path, "Index file")->required();
  qu->add_option("--data", data_path, "Query samples (JSON Lines)")->required();
  qu->add_option("--out", out_path, "Prediction CSV ('-' for stdout)");

  auto* ev = app.add_subcommand("eval", "Evaluate retrieval on the configured query set");
  ev->add_option("--config", config_path, "Configuration JSON (occlusion levels, beta_test)");
  ev->add_option("--checkpoint", ckpt_path, "Checkpoint")->required();
  ev->add_option("--index", index_path, "Index file")->required();
  ev->add_option("--data", data_path, "Test split (JSON Lines)")->required();
  ev->add_option("--out", out_path, "Report CSV ('-' for stdout)");
  ev->add_option("--summary", summary_path, "JSON summary");

  auto* sw = app.add_subcommand("sweep", "Train/evaluate over one grid axis");
  sw->add_option("--config", config_path, "Base configuration JSON");
  sw->add_option("--axis", axis, "s_occ | beta_train | beta_test | loss_variant | reference_design")->required();
  sw->add_option("--values", values, "Comma-separated grid values")->required();
  sw->add_option("--out", out_path, "CSV output ('-' for stdout)");
  sw->add_option("--summary", summary_path, "JSON summary");

  auto* ab = app.add_subcommand("ablate", "Loss-variant ablation");
  ab->add_option("--config", config_path, "Base configuration JSON");
  ab->add_option("--variants", variants, "Comma-separated loss variants")
      ->default_val("ContrastivePose,FixedContrastive,TripletDynamic");
  ab->add_option("--out", out_path, "CSV output ('-' for stdout)");
  ab->add_option("--summary", summary_path, "JSON summary");

  auto* be = app.add_subcommand("bench", "Time embedding and search per query");
  be->add_option("--checkpoint", ckpt_path, "Checkpoint")->required();
  be->add_option("--index", index_path, "Index file")->required();
  be->add_option("--data", data_path, "Query samples (JSON Lines)")->required();
  be->add_option("--reps", reps, "Repetitions")->default_val(1000);
  be->add_option("--limit", limit, "Use only the first N queries (0 = all)");
  be->add_option("--summary", summary_path, "JSON output ('-' or empty for stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cfg_cmd) {
      write_text(out_path, pm::to_json(pm::ExperimentConfig{}).dump(2) + "\n");
    } else if (*gen) {
      const auto cfg = load_config(config_path);
      const auto train_set = pm::make_train_set(cfg.data);
      pm::write_jsonl(train_path, train_set);
      if (!test_path.empty()) pm::write_jsonl(test_path, pm::make_test_set(cfg.data));
      std::cerr << "wrote " << train_set.size() << " training samples\n";
    } else if (*tr) {
      const auto cfg = load_config(config_path);
      const auto data = pm::read_jsonl(data_path);
      const auto res = pm::train(data, cfg.train);
      pm::save_checkpoint(ckpt_path, res.encoders, {cfg.train.arch, cfg.train.seed, pm::config_hash(cfg)});
      if (!history_path.empty()) {
        std::ostringstream os;
        os << "epoch,loss\n";
        for (std::size_t e = 0; e < res.loss_history.size(); ++e) os << e << ',' << res.loss_history[e] << '\n';
        write_text(history_path, os.str());
      }
      std::cerr << "loss " << res.loss_history.front() << " -> " << res.loss_history.back() << "\n";
    } else if (*bi) {
      const auto cfg = load_config(config_path);
      const auto enc = pm::load_checkpoint(ckpt_path);
      const auto data = pm::read_jsonl(data_path);
      const auto refs = pm::build_reference_poses(pm::reference_design_from_string(design), data, cfg.data.sphere,
                                                  cfg.eval.cad_models, pm::FeatureModel(cfg.data.shared_modality));
      auto index = pm::build_index(refs, enc.render, pm::index_backend_from_string(backend));
      index.set_encoder_hash(pm::hash_file(ckpt_path));
      index.save(index_path);
      std::cerr << "indexed " << index.size() << " reference renderings\n";
    } else if (*qu) {
      const auto enc = pm::load_checkpoint(ckpt_path);
      const auto index = pm::ReferenceIndex::load(index_path);
      if (index.encoder_hash() != pm::hash_file(ckpt_path)) {
        std::cerr << "warning: index was built with a different checkpoint\n";
      }
      std::ostringstream os;
      os << "id,source_id,distance,azimuth,elevation,inplane,error_deg\n";
      char buf[256];
      for (const auto& s : pm::read_jsonl(data_path)) {
        const auto r = index.query(s.camera_feat, enc.camera);
        std::snprintf(buf, sizeof buf, "%lld,%lld,%.9g,%.9g,%.9g,%.9g,%.6f\n", static_cast<long long>(s.id),
                      static_cast<long long>(r.source_id), r.distance, r.pose.azimuth, r.pose.elevation,
                      r.pose.inplane, pm::pose_error(r.pose, s.pose));
        os << buf;
      }
      write_text(out_path, os.str());
    } else if (*ev) {
      const auto cfg = load_config(config_path);
      const auto enc = pm::load_checkpoint(ckpt_path);
      const auto index = pm::ReferenceIndex::load(index_path);
      const auto test = pm::read_jsonl(data_path);
      const auto queries = pm::make_query_set(test, cfg.eval);
      const auto rep = pm::evaluate(index, enc.camera, queries);
      write_text(out_path, report_csv(rep));
      if (!summary_path.empty()) {
        json weighted = json::object();
        for (const auto& [level, m] : rep.weighted) weighted[pm::to_string(level)] = metrics_json(m);
        write_text(summary_path, json{{"queries", queries.size()}, {"weighted", weighted}}.dump(2) + "\n");
      }
    } else if (*sw || *ab) {
      const auto cfg = load_config(config_path);
      pm::ExperimentGrid grid;
      if (*sw) {
        grid.axis = pm::grid_axis_from_string(axis);
        grid.values = split_csv(values);
      } else {
        grid.axis = pm::GridAxis::LossVariant;
        grid.values = split_csv(variants);
      }
      const auto table = pm::run_experiment(grid, cfg);
      write_text(out_path, table.to_csv());
      if (!summary_path.empty()) write_text(summary_path, table.summary().dump(2) + "\n");
    } else if (*be) {
      const auto enc = pm::load_checkpoint(ckpt_path);
      const auto index = pm::ReferenceIndex::load(index_path);
      auto data = pm::read_jsonl(data_path);
      if (limit > 0 && static_cast<std::size_t>(limit) < data.size()) data.resize(static_cast<std::size_t>(limit));
      const auto rep = pm::benchmark(index, camera_matrix(data), enc.camera, reps);
      const json out{{"queries", rep.queries},
                     {"repetitions", rep.repetitions},
                     {"index_rows", index.size()},
                     {"backend", pm::to_string(index.backend())},
                     {"embed_mean_us", rep.embed_mean_us},
                     {"search_mean_us", rep.search_mean_us},
                     {"embed_fraction", rep.embed_fraction()}};
      write_text(summary_path, out.dump(2) + "\n");
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
