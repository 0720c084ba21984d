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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "posemetric/kernels.hpp"

namespace posemetric {

/// Exact kd-tree over row-major float rows. The tree stores only its
/// structure; the rows and ids are passed to every query, so it can live next
/// to the data it indexes without holding pointers into it. Results match
/// kernels::serial::nearest_linear exactly, including the smallest-id tie
/// rule: subtrees are pruned only when their bound is strictly worse.
class KdTree {
 public:
  KdTree() = default;
  KdTree(std::span<const float> rows, std::size_t dim, std::size_t leaf_size = 12);

  kernels::Nearest nearest(std::span<const float> rows, std::span<const std::int64_t> ids,
                           std::span<const float> query) const;

  std::size_t size() const { return perm_.size(); }
  std::size_t dim() const { return dim_; }
  /// Row indices in leaf order; a permutation of 0..size-1.
  const std::vector<std::size_t>& permutation() const { return perm_; }

 private:
  struct Node {
    std::size_t begin = 0, end = 0;
    std::uint32_t left = 0, right = 0;  // 0 marks a leaf (the root is never a child)
    std::uint32_t axis = 0;
    float split = 0.0f;
  };

  std::uint32_t build(std::span<const float> rows, std::size_t begin, std::size_t end);
  void search(std::uint32_t node, std::span<const float> rows, std::span<const std::int64_t> ids,
              const float* q, kernels::Nearest& best, bool& found) const;

  std::size_t dim_ = 0;
  std::size_t leaf_size_ = 12;
  std::vector<Node> nodes_;
  std::vector<std::size_t> perm_;
};

}  // namespace posemetric
