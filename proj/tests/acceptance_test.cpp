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


// Acceptance gate: one PASS/FAIL line per criterion. Tolerances and the
// desk-scale configuration are pinned below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "posemetric/augmentation.hpp"
#include "posemetric/evaluation.hpp"
#include "posemetric/io.hpp"
#include "posemetric/retrieval.hpp"
#include "posemetric/sampling.hpp"

using namespace posemetric;

namespace {

constexpr double kGeodesicTol = 1e-6;        // rad
constexpr double kInverseIdentityTol = 1e-9;
constexpr double kGradRelTol = 1e-4;
constexpr double kLossRatio = 0.2;           // final / initial mean loss
constexpr double kMaxMedianDeg = 10.0;
constexpr double kMinAccPi6 = 0.9;
constexpr int kDeskEpochs = 200;
constexpr int kDeskTestQueries = 1000;
constexpr int kBenchRepetitions = 1000;
constexpr std::size_t kBenchRows = 100000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Every EvalReport produced by the trend criteria, checked again by criterion 10.
std::vector<EvalReport> g_reports;

// ---------------------------------------------------------------------------

Outcome math_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  bool sign_exact = true;
  for (int i = 0; i < 10000; ++i) {
    const Quat a(g(rng), g(rng), g(rng), g(rng)), b(g(rng), g(rng), g(rng), g(rng));
    const double d = geodesic_distance(a, b);
    const double o = oracle::relative_angle(oracle::quat_matrix(a.w(), a.x(), a.y(), a.z()),
                                            oracle::quat_matrix(b.w(), b.x(), b.y(), b.z()));
    worst = std::max(worst, std::abs(d - o));
    sign_exact &= geodesic_distance(a, -a) == 0.0 && geodesic_distance(-a, b) == d && geodesic_distance(a, -b) == d;
  }
  const double secs = seconds_since(t0);
  return {worst <= kGeodesicTol && sign_exact && secs < 1.0,
          fmt("max |d - oracle| = %.2e rad, q/-q exact = %s, %.2f s", worst, sign_exact ? "yes" : "no", secs)};
}

Outcome bbox_law() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int w = 20; w <= 400; ++w) {
    for (int h = 20; h <= 400; ++h) {
      for (int b = 0; b <= 10; ++b) {
        const double beta = b / 10.0;
        const double n = max_corner_deviation(w, h, beta);
        worst = std::max(worst, std::abs(iou_for_deviation(w, h, n) - (1.0 - beta)));
      }
    }
  }
  Rng rng(102);
  long violations = 0, draws = 0;
  for (int w = 20; w <= 400; w += 20) {
    for (int h = 20; h <= 400; h += 20) {
      const BBox box{50, 50, static_cast<double>(w), static_cast<double>(h)};
      for (int b = 0; b <= 10; ++b) {
        const double bound = 1.0 - b / 10.0;
        for (int k = 0; k < 10000; ++k) {
          const BBox p = perturb_bbox(box, b / 10.0, rng);
          const double v = oracle::box_iou(box.x, box.y, box.w, box.h, p.x, p.y, p.w, p.h);
          violations += v < bound - 1e-12;
          ++draws;
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= kInverseIdentityTol && violations == 0 && secs < 10.0,
          fmt("inverse identity max err %.2e, %ld/%ld draws violate the bound, %.2f s", worst, violations, draws, secs)};
}

Outcome loss_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  const LossConfig m1{1.0};
  auto single = [](double c0, double c1, double r0, double r1, double dt, PairLabel l) {
    RowMatrix c(1, 2), r(1, 2);
    c << c0, c1;
    r << r0, r1;
    return PairBatch{c, r, {LabeledPair{0, 0, dt, l}}};
  };
  RowMatrix c2(2, 2), r2 = RowMatrix::Zero(2, 2);
  c2 << 1, 1, 0, 0;
  const PairBatch two{c2, r2, {{0, 0, 1.0, PairLabel::Positive}, {1, 1, 1.0, PairLabel::Negative}}};
  const auto active = contrastive_pose_grad(single(2, 0, 0, 0, 1.0, PairLabel::Positive), m1);
  const bool hand = contrastive_pose_loss(single(1, 0, 0, 0, 1.0, PairLabel::Positive), m1) == 0.0 &&
                    contrastive_pose_loss(single(.3, .2, .3, .2, 0.0, PairLabel::Positive), m1) == 0.0 &&
                    contrastive_pose_loss(single(0, 0, 0, 0, 1.0, PairLabel::Negative), m1) == 0.5 &&
                    contrastive_pose_loss(two, m1) == 0.5 && active.camera(0, 0) == 2.0 && active.camera(0, 1) == 0.0;

  Rng rng(103);
  const LossConfig cfg{0.7, deg2rad(20.0)};
  double worst_emb = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto b = gradcheck::random_pair_batch(rng, 6, 4, 12, cfg, 1e-3);
    worst_emb = std::max(worst_emb, gradcheck::embedding_check(b, cfg, contrastive_pose_loss, contrastive_pose_grad));
  }
  const Architecture tiny{4, {8}, 8, {}, 4};
  const LossConfig e2e_cfg{};
  double worst_e2e = 0.0;
  int e2e = 0;
  while (e2e < 100) {
    const auto p = gradcheck::tiny_problem(rng, tiny, 8);
    if (gradcheck::pipeline_gap(p.enc, p.xc, p.xr, p.poses, e2e_cfg) < 1e-3) continue;
    const auto r = gradcheck::end_to_end_check(p.enc, p.xc, p.xr, p.poses, e2e_cfg, 5e-4);
    if (r.active == 0) continue;
    worst_e2e = std::max(worst_e2e, r.rel_err);
    ++e2e;
  }
  const double secs = seconds_since(t0);
  return {hand && worst_emb <= kGradRelTol && worst_e2e <= kGradRelTol && secs < 30.0,
          fmt("hand examples %s, embedding FD rel err %.2e, end-to-end FD rel err %.2e, %.2f s",
              hand ? "exact" : "WRONG", worst_emb, worst_e2e, secs)};
}

Outcome miner_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(104);
  std::uniform_int_distribution<int> size(1, 64);
  std::uniform_real_distribution<double> az(0, 40), el(-5, 5), f(-0.3, 0.3);
  const double thr = deg2rad(5.0), margin = 1.0;
  int mismatches = 0;
  long kept = 0;
  for (int t = 0; t < 1000; ++t) {
    const int b = size(rng);
    std::vector<EulerPose> poses;
    std::vector<oracle::Mat3> mats;
    for (int i = 0; i < b; ++i) {
      poses.push_back(EulerPose::from_degrees(az(rng), el(rng), el(rng)));
      mats.push_back(oracle::euler_matrix(poses.back().azimuth, poses.back().elevation, poses.back().inplane));
    }
    RowMatrix ec(b, 4), er(b, 4);
    for (Eigen::Index i = 0; i < ec.size(); ++i) ec.data()[i] = f(rng), er.data()[i] = f(rng);
    std::set<std::pair<std::size_t, std::size_t>> pos, neg;
    for (int i = 0; i < b; ++i) {
      for (int j = 0; j < b; ++j) {
        const double dt = oracle::relative_angle(mats[i], mats[j]);
        const double d2 = (ec.row(i) - er.row(j)).squaredNorm();
        if (dt < thr && d2 > margin * dt) pos.emplace(i, j);
        if (dt >= thr && d2 < margin * dt) neg.emplace(i, j);
      }
    }
    const auto m = mine_pairs(poses, ec, er, thr, margin);
    std::set<std::pair<std::size_t, std::size_t>> mp, mn;
    for (const auto& p : m.positives) mp.emplace(p.cam, p.ren);
    for (const auto& p : m.negatives) mn.emplace(p.cam, p.ren);
    mismatches += (mp != pos || mn != neg || mp.size() != m.positives.size() || mn.size() != m.negatives.size());
    kept += static_cast<long>(m.size());
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 10.0,
          fmt("%d/1000 batches differ from brute force (%ld pairs kept), %.2f s", mismatches, kept, secs)};
}

Outcome index_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(105);
  std::normal_distribution<float> g(0.0f, 1.0f);
  const std::size_t dim = 8;
  ReferenceIndex lin(dim, IndexBackend::Linear);
  std::vector<float> e(dim);
  for (std::size_t r = 0; r < 10000; ++r) {
    // Every tenth row duplicates its predecessor so ties occur.
    if (r % 10 != 0) {
      for (auto& v : e) v = g(rng);
    }
    lin.add(std::span<const float>(e), IndexRow{EulerPose{0.0001 * r, 0, 0}, static_cast<std::int64_t>(10000 - r)});
  }
  lin.freeze();
  const auto kd = lin.with_backend(IndexBackend::KdTree);
  int mismatches = 0;
  for (int q = 0; q < 1000; ++q) {
    std::vector<float> query(dim);
    if (q % 4 == 0) {
      const std::size_t r = static_cast<std::size_t>(q) * 7 % 10000;
      std::copy_n(lin.embeddings().begin() + static_cast<std::ptrdiff_t>(r * dim), dim, query.begin());
    } else {
      for (auto& v : query) v = g(rng);
    }
    mismatches += lin.nearest(query).row != kd.nearest(query).row;
  }
  const auto path = std::filesystem::temp_directory_path() / "posemetric_acceptance_index.bin";
  kd.save(path);
  const auto back = ReferenceIndex::load(path);
  const auto path2 = std::filesystem::temp_directory_path() / "posemetric_acceptance_index2.bin";
  back.save(path2);
  const bool bitwise = hash_file(path) == hash_file(path2) && back.embeddings() == kd.embeddings();
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
  const double secs = seconds_since(t0);
  return {mismatches == 0 && bitwise && secs < 30.0,
          fmt("%d/1000 queries differ between backends, round-trip bitwise %s, %.2f s", mismatches,
              bitwise ? "yes" : "no", secs)};
}

// ---------------------------------------------------------------------------
// Desk-scale experiments.

ExperimentConfig desk_config() {
  ExperimentConfig cfg;  // seeded; 2000 samples, one category, two subcategories
  cfg.data.n_test = kDeskTestQueries;
  cfg.train.epochs = kDeskEpochs;
  return cfg;
}

struct Trained {
  TrainResult result;
  double seconds = 0.0;
};

const Trained& trained_model(const ExperimentConfig& cfg) {
  static std::map<std::uint64_t, Trained> cache;
  ExperimentConfig key = cfg;
  key.eval = EvalConfig{};
  const auto h = config_hash(key);
  auto it = cache.find(h);
  if (it == cache.end()) {
    const auto t0 = std::chrono::steady_clock::now();
    Trained t{train(make_train_set(cfg.data), cfg.train), 0.0};
    t.seconds = seconds_since(t0);
    it = cache.emplace(h, std::move(t)).first;
  }
  return it->second;
}

EvalReport evaluate_model(const ExperimentConfig& cfg, const EncoderPair& enc) {
  const auto train_set = make_train_set(cfg.data);
  const auto test_set = make_test_set(cfg.data);
  const auto index = make_reference_index(train_set, cfg.data, cfg.eval, enc.render);
  auto report = evaluate(index, enc.camera, make_query_set(test_set, cfg.eval));
  g_reports.push_back(report);
  return report;
}

Outcome end_to_end() {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = desk_config();
  const Trained& t = trained_model(cfg);
  const auto& h = t.result.loss_history;
  const double ratio = h.back() / h.front();
  const Metrics m = evaluate_model(cfg, t.result.encoders).weighted.at(OcclusionLevel::L0);
  const double secs = seconds_since(t0);
  return {ratio < kLossRatio && m.med_err <= kMaxMedianDeg && m.acc_pi6 >= kMinAccPi6 && secs < 300.0,
          fmt("loss %.4f -> %.4f (ratio %.3f), L0 median %.2f deg, ACC_pi/6 %.3f, ACC_pi/18 %.3f, %.1f s", h.front(),
              h.back(), ratio, m.med_err, m.acc_pi6, m.acc_pi18, secs)};
}

Outcome occlusion_trend() {
  ExperimentConfig base = desk_config();
  base.eval.levels = {OcclusionLevel::L1, OcclusionLevel::L2, OcclusionLevel::L3};
  std::map<double, EvalReport> reports;
  for (double s : {0.0, 0.5}) {
    ExperimentConfig cfg = base;
    cfg.train.s_occ = s;
    reports[s] = evaluate_model(cfg, trained_model(cfg).result.encoders);
  }
  bool ok = true;
  std::ostringstream os;
  for (auto level : base.eval.levels) {
    const double a = reports[0.0].weighted.at(level).acc_pi6, b = reports[0.5].weighted.at(level).acc_pi6;
    ok &= b >= a;
    os << to_string(level) << " " << fmt("%.3f vs %.3f", b, a) << "; ";
  }
  return {ok, "ACC_pi/6 s_occ=0.5 vs s_occ=0: " + os.str()};
}

Outcome bbox_trend() {
  ExperimentConfig base = desk_config();
  base.eval.beta_test = 0.5;
  std::map<double, Metrics> m;
  for (double b : {0.0, 0.25}) {
    ExperimentConfig cfg = base;
    cfg.train.beta_train = b;
    m[b] = evaluate_model(cfg, trained_model(cfg).result.encoders).weighted.at(OcclusionLevel::L0);
  }
  return {m[0.25].acc_pi6 > m[0.0].acc_pi6,
          fmt("ACC_pi/6 at beta_test=0.5: beta_train=0.25 %.3f vs beta_train=0 %.3f", m[0.25].acc_pi6, m[0.0].acc_pi6)};
}

Outcome ablation() {
  std::map<LossVariant, Metrics> m;
  for (auto v : {LossVariant::ContrastivePose, LossVariant::FixedContrastive}) {
    ExperimentConfig cfg = desk_config();
    cfg.train.loss.variant = v;
    m[v] = evaluate_model(cfg, trained_model(cfg).result.encoders).weighted.at(OcclusionLevel::L0);
  }
  const double dyn = m[LossVariant::ContrastivePose].med_err, fixed = m[LossVariant::FixedContrastive].med_err;
  return {fixed > dyn, fmt("median error: fixed margin %.2f deg vs dynamic margin %.2f deg", fixed, dyn)};
}

Outcome metrics_criterion() {
  auto cm = [](std::vector<double> e) { return compute_metrics(e); };
  const Metrics a{0.9, 0.5, 4.0}, b{0.5, 0.1, 20.0};
  bool hand = cm({5, 15, 40}) == Metrics{2.0 / 3.0, 1.0 / 3.0, 15.0} && cm({0, 0, 0}) == Metrics{1, 1, 0} &&
              cm({10, 30}) == Metrics{0.5, 0, 20};
  hand &= weighted_average({{"A", {a, 100}}}) == a;
  const Metrics eq = weighted_average({{"A", {a, 100}}, {"B", {b, 100}}});
  hand &= eq.acc_pi6 == 0.7 && eq.acc_pi18 == 0.3 && eq.med_err == 12.0;
  hand &= weighted_average({{"A", {a, 100}}, {"B", {b, 300}}}).acc_pi6 == 0.6;
  std::size_t rows = 0;
  bool ordered = true;
  for (const auto& r : g_reports) {
    ordered &= r.consistent();
    for (const auto& row : r.rows) ordered &= row.metrics.acc_pi18 <= row.metrics.acc_pi6;
    rows += r.rows.size();
  }
  return {hand && ordered && rows > 0,
          fmt("hand examples %s, acc_pi18 <= acc_pi6 on %zu rows of %zu reports", hand ? "exact" : "WRONG", rows,
              g_reports.size())};
}

Outcome benchmark_criterion() {
  const ExperimentConfig cfg = desk_config();
  const auto& enc = trained_model(cfg).result.encoders;
  // Reference rows: renderings of random poses over the full sphere, embedded by E_r.
  const auto refs_data = generate_dataset(106, static_cast<int>(kBenchRows), {"car"}, cfg.data.subcategory_mix,
                                          ViewingSphere{}, 0.0, FeatureModel(cfg.data.shared_modality));
  std::vector<ReferenceEntry> refs;
  refs.reserve(refs_data.size());
  for (const auto& s : refs_data) refs.push_back(ReferenceEntry{s.pose, s.render_feat, s.id, 0});
  const auto kd = build_index(refs, enc.render, IndexBackend::KdTree);
  const auto lin = kd.with_backend(IndexBackend::Linear);

  const auto test = make_test_set(cfg.data);
  const Eigen::Index nq = 5;
  RowMatrix queries(nq, kFeatureDim);
  for (Eigen::Index q = 0; q < nq; ++q)
    for (int d = 0; d < kFeatureDim; ++d) queries(q, d) = test[static_cast<std::size_t>(q)].camera_feat[d];
  const BenchReport rk = benchmark(kd, queries, enc.camera, kBenchRepetitions);
  const BenchReport rl = benchmark(lin, queries, enc.camera, kBenchRepetitions);
  const bool measured = rk.repetitions == kBenchRepetitions && rk.embed_mean_us > 0 && rk.search_mean_us > 0 &&
                        rl.embed_mean_us > 0 && rl.search_mean_us > 0;
  return {measured && rk.search_mean_us <= rl.search_mean_us,
          fmt("%zu rows, %d reps x %zu queries: kd-tree embed %.2f us + search %.2f us (embed share %.0f%%), "
              "linear search %.2f us",
              kd.size(), rk.repetitions, rk.queries, rk.embed_mean_us, rk.search_mean_us, 100 * rk.embed_fraction(),
              rl.search_mean_us)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1  math exactness", math_exactness},
      {"2  bounding-box law", bbox_law},
      {"3  loss correctness", loss_correctness},
      {"4  miner oracle", miner_oracle},
      {"5  index oracle", index_oracle},
      {"6  end-to-end learning", end_to_end},
      {"7  occlusion trend", occlusion_trend},
      {"8  bounding-box noise trend", bbox_trend},
      {"9  dynamic margin ablation", ablation},
      {"10 metrics", metrics_criterion},
      {"11 benchmark harness", benchmark_criterion},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    failed += !o.pass;
    std::printf("[%s] criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
