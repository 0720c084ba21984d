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


#include <benchmark/benchmark.h>

#include <map>
#include <random>
#include <vector>

#include "posemetric/dataset.hpp"
#include "posemetric/encoder.hpp"
#include "posemetric/kernels.hpp"
#include "posemetric/retrieval.hpp"

namespace pm = posemetric;
namespace k = posemetric::kernels;

namespace {

std::vector<double> gaussian(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

std::vector<pm::Quat> quats(std::size_t n) {
  const auto v = gaussian(4 * n, 2);
  std::vector<pm::Quat> q;
  for (std::size_t i = 0; i < n; ++i) q.emplace_back(v[4 * i], v[4 * i + 1], v[4 * i + 2], v[4 * i + 3]);
  return q;
}

template <auto Fn>
void BM_pairwise(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0));
  const auto a = gaussian(b * 16, 1), c = gaussian(b * 16, 3);
  std::vector<double> out(b * b);
  for (auto _ : state) {
    Fn(a, c, 16, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <auto Fn>
void BM_pose_distances(benchmark::State& state) {
  const auto qs = quats(static_cast<std::size_t>(state.range(0)));
  std::vector<double> out(qs.size() * qs.size());
  for (auto _ : state) {
    Fn(qs, out);
    benchmark::DoNotOptimize(out.data());
  }
}

struct Rows {
  std::vector<float> data;
  std::vector<std::int64_t> ids;
  std::vector<float> query;
};

const Rows& rows(std::size_t n) {
  static std::map<std::size_t, Rows> cache;
  auto& r = cache[n];
  if (r.data.empty()) {
    const auto v = gaussian(n * 16 + 16, 4);
    r.data.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n * 16));
    r.query.assign(v.end() - 16, v.end());
    for (std::size_t i = 0; i < n; ++i) r.ids.push_back(static_cast<std::int64_t>(i));
  }
  return r;
}

template <auto Fn>
void BM_nearest_linear(benchmark::State& state) {
  const auto& r = rows(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(r.data, 16, r.query, r.ids));
}

// Index search over embeddings of rendered poses, as served at query time.
const pm::ReferenceIndex& pose_index(std::size_t n) {
  static std::map<std::size_t, pm::ReferenceIndex> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    pm::Rng rng(5);
    const pm::Mlp enc = pm::Mlp::random(pm::Architecture{}, rng);
    const auto data = pm::generate_dataset(6, static_cast<int>(n), {"car"}, {{"sedan", 1.0}}, pm::ViewingSphere{}, 0.0);
    std::vector<pm::ReferenceEntry> refs;
    for (const auto& s : data) refs.push_back({s.pose, s.render_feat, s.id, 0});
    it = cache.emplace(n, pm::build_index(refs, enc, pm::IndexBackend::KdTree)).first;
  }
  return it->second;
}

void BM_index_search(benchmark::State& state) {
  const auto& kd = pose_index(static_cast<std::size_t>(state.range(0)));
  const auto idx = state.range(1) ? kd.with_backend(pm::IndexBackend::KdTree) : kd.with_backend(pm::IndexBackend::Linear);
  std::vector<float> q(kd.embeddings().begin(), kd.embeddings().begin() + 16);
  for (auto& v : q) v += 0.01f;
  for (auto _ : state) benchmark::DoNotOptimize(idx.nearest(std::span<const float>(q)));
  state.SetLabel(state.range(1) ? "kd-tree" : "linear");
}

}  // namespace

BENCHMARK(BM_pairwise<k::serial::pairwise_sq_dists>)->Name("pairwise_sq_dists/serial")->Arg(32)->Arg(256);
BENCHMARK(BM_pairwise<k::omp::pairwise_sq_dists>)->Name("pairwise_sq_dists/omp")->Arg(32)->Arg(256);
BENCHMARK(BM_pose_distances<k::serial::pose_distances>)->Name("pose_distances/serial")->Arg(32)->Arg(256);
BENCHMARK(BM_pose_distances<k::omp::pose_distances>)->Name("pose_distances/omp")->Arg(32)->Arg(256);
BENCHMARK(BM_nearest_linear<k::serial::nearest_linear>)->Name("nearest_linear/serial")->Arg(10000)->Arg(100000);
BENCHMARK(BM_nearest_linear<k::omp::nearest_linear>)->Name("nearest_linear/omp")->Arg(10000)->Arg(100000);
BENCHMARK(BM_index_search)->ArgsProduct({{10000, 100000}, {0, 1}});
BENCHMARK_MAIN();
