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

#include "posemetric/retrieval.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "posemetric/io.hpp"

namespace posemetric {

std::string to_string(IndexBackend b) { return b == IndexBackend::KdTree ? "KdTree" : "Linear"; }

IndexBackend index_backend_from_string(const std::string& s) {
  if (s == "Linear" || s == "linear") return IndexBackend::Linear;
  if (s == "KdTree" || s == "kdtree" || s == "kd-tree") return IndexBackend::KdTree;
  throw std::invalid_argument("unknown index backend: " + s);
}

ReferenceIndex::ReferenceIndex(std::size_t dim, IndexBackend backend) : dim_(dim), backend_(backend) {
  if (dim == 0) throw std::invalid_argument("ReferenceIndex: dim must be positive");
}

void ReferenceIndex::add(std::span<const float> embedding, const IndexRow& row) {
  if (frozen_) throw std::logic_error("ReferenceIndex::add: index is frozen");
  if (embedding.size() != dim_) throw std::invalid_argument("ReferenceIndex::add: dimension mismatch");
  embeddings_.insert(embeddings_.end(), embedding.begin(), embedding.end());
  ids_.push_back(row.source_id);
  rows_.push_back(row);
}

void ReferenceIndex::add(std::span<const double> embedding, const IndexRow& row) {
  const std::vector<float> f(embedding.begin(), embedding.end());
  add(std::span<const float>(f), row);
}

void ReferenceIndex::freeze() {
  if (frozen_) return;
  if (backend_ == IndexBackend::KdTree) tree_ = KdTree(embeddings_, dim_);
  frozen_ = true;
}

QueryResult ReferenceIndex::nearest(std::span<const float> q) const {
  if (!frozen_) throw std::logic_error("ReferenceIndex: query before freeze()");
  if (rows_.empty()) throw std::invalid_argument("ReferenceIndex: empty index");
  if (q.size() != dim_) throw std::invalid_argument("ReferenceIndex: query dimension mismatch");
  const kernels::Nearest n = backend_ == IndexBackend::KdTree ? tree_.nearest(embeddings_, ids_, q)
                                                              : kernels::omp::nearest_linear(embeddings_, dim_, q, ids_);
  return QueryResult{rows_[n.row].pose, std::sqrt(n.sq_dist), rows_[n.row].source_id, n.row};
}

QueryResult ReferenceIndex::nearest(std::span<const double> q) const {
  const std::vector<float> f(q.begin(), q.end());
  return nearest(std::span<const float>(f));
}

QueryResult ReferenceIndex::query(std::span<const double> camera_feat, const Mlp& encoder_c) const {
  const Eigen::VectorXd e = encoder_c.forward(camera_feat);
  return nearest(std::span<const double>(e.data(), static_cast<std::size_t>(e.size())));
}

ReferenceIndex ReferenceIndex::with_backend(IndexBackend backend) const {
  ReferenceIndex out(dim_, backend);
  out.embeddings_ = embeddings_;
  out.ids_ = ids_;
  out.rows_ = rows_;
  out.encoder_hash_ = encoder_hash_;
  out.freeze();
  return out;
}

void ReferenceIndex::save(const std::filesystem::path& path) const {
  if (!frozen_) throw std::logic_error("ReferenceIndex::save: index is not frozen");
  const nlohmann::json header{{"format", "posemetric-index"},
                              {"version", 1},
                              {"dim", dim_},
                              {"count", rows_.size()},
                              {"backend", to_string(backend_)},
                              {"encoder_checkpoint_hash", hex64(encoder_hash_)},
                              {"embeddings", "float32-le, count x dim, row-major"},
                              {"pose_table", "per row: azimuth, elevation, inplane float64-le; source_id int64-le"}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_header_line(out, header);
  write_f32_le(out, embeddings_);
  for (const auto& r : rows_) {
    write_f64_le(out, r.pose.azimuth);
    write_f64_le(out, r.pose.elevation);
    write_f64_le(out, r.pose.inplane);
    write_i64_le(out, r.source_id);
  }
}

ReferenceIndex ReferenceIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const auto header = read_header_line(in);
  if (header.value("format", "") != "posemetric-index") throw std::runtime_error("not an index file: " + path.string());
  const auto dim = header.at("dim").get<std::size_t>();
  const auto count = header.at("count").get<std::size_t>();
  ReferenceIndex idx(dim, index_backend_from_string(header.at("backend").get<std::string>()));
  idx.encoder_hash_ = parse_hex64(header.at("encoder_checkpoint_hash").get<std::string>());
  idx.embeddings_ = read_f32_le(in, count * dim);
  idx.rows_.reserve(count);
  idx.ids_.reserve(count);
  for (std::size_t r = 0; r < count; ++r) {
    IndexRow row;
    row.pose.azimuth = read_f64_le(in);
    row.pose.elevation = read_f64_le(in);
    row.pose.inplane = read_f64_le(in);
    row.source_id = read_i64_le(in);
    idx.rows_.push_back(row);
    idx.ids_.push_back(row.source_id);
  }
  idx.freeze();
  return idx;
}

ReferenceIndex build_index(std::span<const ReferenceEntry> refs, const Mlp& encoder_r, IndexBackend backend) {
  if (refs.empty()) throw std::invalid_argument("build_index: empty reference set");
  const auto in_dim = static_cast<Eigen::Index>(encoder_r.input_dim());
  RowMatrix feats(static_cast<Eigen::Index>(refs.size()), in_dim);
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (static_cast<Eigen::Index>(refs[i].render_feat.size()) != in_dim) {
      throw std::invalid_argument("build_index: rendering feature dimension mismatch");
    }
    feats.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>(refs[i].render_feat.data(), in_dim);
  }
  const RowMatrix emb = encoder_r.embed_rows_omp(feats);
  ReferenceIndex idx(static_cast<std::size_t>(emb.cols()), backend);
  for (std::size_t i = 0; i < refs.size(); ++i) {
    idx.add(std::span<const double>(emb.row(static_cast<Eigen::Index>(i)).data(), static_cast<std::size_t>(emb.cols())),
            IndexRow{refs[i].pose, refs[i].source_id});
  }
  idx.freeze();
  return idx;
}

BenchReport benchmark(const ReferenceIndex& index, const RowMatrix& queries, const Mlp& encoder_c, int repetitions) {
  BenchReport rep;
  rep.repetitions = repetitions;
  if (queries.rows() == 0 || repetitions < 1) return rep;
  rep.queries = static_cast<std::size_t>(queries.rows());
  using clock = std::chrono::steady_clock;
  double embed_ns = 0.0, search_ns = 0.0;
  volatile double sink = 0.0;
  for (int r = 0; r < repetitions; ++r) {
    for (Eigen::Index q = 0; q < queries.rows(); ++q) {
      const auto t0 = clock::now();
      const Eigen::VectorXd e =
          encoder_c.forward(std::span<const double>(queries.row(q).data(), static_cast<std::size_t>(queries.cols())));
      const std::vector<float> ef(e.data(), e.data() + e.size());
      const auto t1 = clock::now();
      const QueryResult res = index.nearest(std::span<const float>(ef));
      const auto t2 = clock::now();
      sink = sink + res.distance;
      embed_ns += std::chrono::duration<double, std::nano>(t1 - t0).count();
      search_ns += std::chrono::duration<double, std::nano>(t2 - t1).count();
    }
  }
  const double n = static_cast<double>(repetitions) * static_cast<double>(rep.queries);
  rep.embed_mean_us = embed_ns / n / 1000.0;
  rep.search_mean_us = search_ns / n / 1000.0;
  return rep;
}

}  // namespace posemetric
