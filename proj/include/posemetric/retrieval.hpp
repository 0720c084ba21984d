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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "posemetric/dataset.hpp"
#include "posemetric/encoder.hpp"
#include "posemetric/kdtree.hpp"

namespace posemetric {

enum class IndexBackend { Linear, KdTree };

std::string to_string(IndexBackend b);
IndexBackend index_backend_from_string(const std::string& s);

struct IndexRow {
  EulerPose pose;
  std::int64_t source_id = 0;
};

struct QueryResult {
  EulerPose pose;
  /// True L2 distance between query and row embeddings.
  double distance = 0.0;
  std::int64_t source_id = 0;
  std::size_t row = 0;
};

/// Pre-embedded reference set. Rows are added, then the index is frozen
/// (building the kd-tree for that backend); only frozen indexes answer
/// queries and a frozen index rejects further rows. Embeddings are stored as
/// float32, the same precision as the index file.
class ReferenceIndex {
 public:
  ReferenceIndex(std::size_t dim, IndexBackend backend);

  void add(std::span<const float> embedding, const IndexRow& row);
  void add(std::span<const double> embedding, const IndexRow& row);
  void freeze();

  bool frozen() const { return frozen_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return rows_.size(); }
  IndexBackend backend() const { return backend_; }
  const std::vector<IndexRow>& rows() const { return rows_; }
  const std::vector<float>& embeddings() const { return embeddings_; }
  const KdTree& tree() const { return tree_; }

  std::uint64_t encoder_hash() const { return encoder_hash_; }
  void set_encoder_hash(std::uint64_t h) { encoder_hash_ = h; }

  /// Nearest row to an already embedded query (ties: smallest source_id).
  /// Throws std::logic_error before freeze(), std::invalid_argument on a
  /// dimension mismatch or an empty index.
  QueryResult nearest(std::span<const float> query_embedding) const;
  QueryResult nearest(std::span<const double> query_embedding) const;

  /// Embeds `camera_feat` with E_c, then searches.
  QueryResult query(std::span<const double> camera_feat, const Mlp& encoder_c) const;

  /// Same frozen rows served by another backend.
  ReferenceIndex with_backend(IndexBackend backend) const;

  void save(const std::filesystem::path& path) const;
  static ReferenceIndex load(const std::filesystem::path& path);

 private:
  std::size_t dim_;
  IndexBackend backend_;
  bool frozen_ = false;
  std::uint64_t encoder_hash_ = 0;
  std::vector<float> embeddings_;
  std::vector<std::int64_t> ids_;
  std::vector<IndexRow> rows_;
  KdTree tree_;
};

/// Embeds every reference rendering with E_r and freezes the index. Throws
/// std::invalid_argument for an empty reference list.
ReferenceIndex build_index(std::span<const ReferenceEntry> refs, const Mlp& encoder_r, IndexBackend backend);

struct BenchReport {
  std::size_t queries = 0;
  int repetitions = 0;
  /// Mean wall-clock microseconds per query for each stage.
  double embed_mean_us = 0.0;
  double search_mean_us = 0.0;

  bool empty() const { return queries == 0; }
  double embed_fraction() const {
    const double t = embed_mean_us + search_mean_us;
    return t > 0.0 ? embed_mean_us / t : 0.0;
  }
};

/// Times the two inference stages (embedding with E_c, nearest-neighbour
/// search) separately, averaged over every query and repetition.
BenchReport benchmark(const ReferenceIndex& index, const RowMatrix& queries, const Mlp& encoder_c,
                      int repetitions);

}  // namespace posemetric
