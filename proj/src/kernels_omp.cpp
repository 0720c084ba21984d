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

#include <omp.h>

#include <limits>
#include <stdexcept>
#include <vector>

#include "posemetric/kernels.hpp"

namespace posemetric::kernels::omp {

Nearest nearest_linear(std::span<const float> rows, std::size_t dim, std::span<const float> query,
                       std::span<const std::int64_t> ids) {
  if (ids.empty()) throw std::invalid_argument("nearest_linear: no rows");
  if (query.size() != dim || rows.size() != ids.size() * dim) {
    throw std::invalid_argument("nearest_linear: dimension mismatch");
  }
  const auto n = static_cast<std::int64_t>(ids.size());
  std::vector<Nearest> local(static_cast<std::size_t>(omp_get_max_threads()),
                             Nearest{0, std::numeric_limits<double>::infinity()});
#pragma omp parallel
  {
    Nearest best{0, std::numeric_limits<double>::infinity()};
#pragma omp for schedule(static)
    for (std::int64_t r = 0; r < n; ++r) {
      const auto ur = static_cast<std::size_t>(r);
      const double d = sq_dist(rows.data() + ur * dim, query.data(), dim);
      if (closer(d, ids[ur], best.sq_dist, ids[best.row])) best = Nearest{ur, d};
    }
    local[static_cast<std::size_t>(omp_get_thread_num())] = best;
  }
  Nearest best = local[0];
  for (const auto& cand : local) {
    if (closer(cand.sq_dist, ids[cand.row], best.sq_dist, ids[best.row])) best = cand;
  }
  return best;
}

void pairwise_sq_dists(std::span<const double> a, std::span<const double> b, std::size_t dim,
                       std::span<double> out) {
  const std::size_t na = a.size() / dim, nb = b.size() / dim;
  if (out.size() != na * nb) throw std::invalid_argument("pairwise_sq_dists: output size mismatch");
#pragma omp parallel for schedule(static)
  for (std::int64_t si = 0; si < static_cast<std::int64_t>(na); ++si) {
    const auto i = static_cast<std::size_t>(si);
    for (std::size_t j = 0; j < nb; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double d = a[i * dim + k] - b[j * dim + k];
        s += d * d;
      }
      out[i * nb + j] = s;
    }
  }
}

void pose_distances(std::span<const Quat> qs, std::span<double> out) {
  const std::size_t n = qs.size();
  if (out.size() != n * n) throw std::invalid_argument("pose_distances: output size mismatch");
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t si = 0; si < static_cast<std::int64_t>(n); ++si) {
    const auto i = static_cast<std::size_t>(si);
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = geodesic_distance(qs[i], qs[j]);
  }
}

}  // namespace posemetric::kernels::omp
