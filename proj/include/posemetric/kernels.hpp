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

// Data-parallel inner loops. Every kernel has a serial reference in
// kernels::serial and an OpenMP version in kernels::omp; both produce
// bitwise-identical results, which the tests and benchmarks rely on.

#include <cstddef>
#include <cstdint>
#include <span>

#include "posemetric/pose_math.hpp"

namespace posemetric::kernels {

struct Nearest {
  std::size_t row = 0;
  double sq_dist = 0.0;
};

/// Squared L2 distance of float rows, accumulated in double in index order.
inline double sq_dist(const float* a, const float* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    const double d = static_cast<double>(a[k]) - static_cast<double>(b[k]);
    s += d * d;
  }
  return s;
}

/// (distance, id) ordering used to break ties by the smallest id.
inline bool closer(double da, std::int64_t ida, double db, std::int64_t idb) {
  return da < db || (da == db && ida < idb);
}

namespace serial {

/// Row minimizing the distance to `query`; ties go to the smallest id.
/// `rows` holds ids.size() rows of `dim` floats.
Nearest nearest_linear(std::span<const float> rows, std::size_t dim, std::span<const float> query,
                       std::span<const std::int64_t> ids);

/// out[i * n_b + j] = ||a_i - b_j||^2 for row-major double matrices.
void pairwise_sq_dists(std::span<const double> a, std::span<const double> b, std::size_t dim,
                       std::span<double> out);

/// out[i * n + j] = geodesic_distance(q_i, q_j).
void pose_distances(std::span<const Quat> qs, std::span<double> out);

}  // namespace serial

namespace omp {

Nearest nearest_linear(std::span<const float> rows, std::size_t dim, std::span<const float> query,
                       std::span<const std::int64_t> ids);

void pairwise_sq_dists(std::span<const double> a, std::span<const double> b, std::size_t dim,
                       std::span<double> out);

void pose_distances(std::span<const Quat> qs, std::span<double> out);

}  // namespace omp

}  // namespace posemetric::kernels
