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

#include "posemetric/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace posemetric {

KdTree::KdTree(std::span<const float> rows, std::size_t dim, std::size_t leaf_size)
    : dim_(dim), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
  if (dim == 0 || rows.size() % dim != 0) throw std::invalid_argument("KdTree: rows are not a multiple of dim");
  perm_.resize(rows.size() / dim);
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  if (!perm_.empty()) build(rows, 0, perm_.size());
}

std::uint32_t KdTree::build(std::span<const float> rows, std::size_t begin, std::size_t end) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= leaf_size_) return id;

  // Split on the axis of largest spread at the median.
  std::size_t axis = 0;
  float best_spread = -1.0f;
  for (std::size_t k = 0; k < dim_; ++k) {
    float lo = std::numeric_limits<float>::max(), hi = std::numeric_limits<float>::lowest();
    for (std::size_t i = begin; i < end; ++i) {
      const float v = rows[perm_[i] * dim_ + k];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      axis = k;
    }
  }
  if (best_spread <= 0.0f) return id;  // all rows identical: keep as a leaf

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(perm_.begin() + static_cast<std::ptrdiff_t>(begin), perm_.begin() + static_cast<std::ptrdiff_t>(mid),
                   perm_.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t a, std::size_t b) {
                     return rows[a * dim_ + axis] < rows[b * dim_ + axis];
                   });
  const float split = rows[perm_[mid] * dim_ + axis];
  const std::uint32_t left = build(rows, begin, mid);
  const std::uint32_t right = build(rows, mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  nodes_[id].axis = static_cast<std::uint32_t>(axis);
  nodes_[id].split = split;
  return id;
}

void KdTree::search(std::uint32_t node_id, std::span<const float> rows, std::span<const std::int64_t> ids,
                    const float* q, kernels::Nearest& best, bool& found) const {
  const Node& node = nodes_[node_id];
  if (node.left == 0) {
    for (std::size_t i = node.begin; i < node.end; ++i) {
      const std::size_t r = perm_[i];
      const double d = kernels::sq_dist(rows.data() + r * dim_, q, dim_);
      if (!found || kernels::closer(d, ids[r], best.sq_dist, ids[best.row])) {
        best = kernels::Nearest{r, d};
        found = true;
      }
    }
    return;
  }
  // Left rows have coordinate <= split, right rows >= split.
  const double diff = static_cast<double>(q[node.axis]) - static_cast<double>(node.split);
  const std::uint32_t near = diff <= 0.0 ? node.left : node.right;
  const std::uint32_t far = diff <= 0.0 ? node.right : node.left;
  search(near, rows, ids, q, best, found);
  if (!found || diff * diff <= best.sq_dist) search(far, rows, ids, q, best, found);
}

kernels::Nearest KdTree::nearest(std::span<const float> rows, std::span<const std::int64_t> ids,
                                 std::span<const float> query) const {
  if (perm_.empty()) throw std::invalid_argument("KdTree::nearest: empty tree");
  if (query.size() != dim_ || rows.size() != perm_.size() * dim_ || ids.size() != perm_.size()) {
    throw std::invalid_argument("KdTree::nearest: dimension mismatch");
  }
  kernels::Nearest best{};
  bool found = false;
  search(0, rows, ids, query.data(), best, found);
  return best;
}

}  // namespace posemetric
