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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "posemetric/dataset.hpp"
#include "posemetric/encoder.hpp"

namespace posemetric {

// Little-endian primitives for the binary payloads.
void write_f32_le(std::ostream& os, std::span<const float> values);
void write_f64_le(std::ostream& os, double v);
void write_i64_le(std::ostream& os, std::int64_t v);
std::vector<float> read_f32_le(std::istream& is, std::size_t count);
double read_f64_le(std::istream& is);
std::int64_t read_i64_le(std::istream& is);

/// Files with a one-line JSON header followed by a binary payload.
void write_header_line(std::ostream& os, const nlohmann::json& header);
nlohmann::json read_header_line(std::istream& is);

std::string hex64(std::uint64_t v);
std::uint64_t parse_hex64(const std::string& s);
std::uint64_t hash_file(const std::filesystem::path& path);

nlohmann::json sample_to_json(const Sample& s);
Sample sample_from_json(const nlohmann::json& j);

/// JSON Lines, one Sample per line.
void write_jsonl(const std::filesystem::path& path, std::span<const Sample> samples);
std::vector<Sample> read_jsonl(const std::filesystem::path& path);

nlohmann::json architecture_to_json(const Architecture& a);
Architecture architecture_from_json(const nlohmann::json& j);

struct CheckpointMeta {
  Architecture arch;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
};

/// Checkpoint: JSON header line (architecture, dims, seed, config hash),
/// then both encoders' parameters as little-endian float32 in layer order
/// (camera first; per layer the row-major weight, then the bias).
void save_checkpoint(const std::filesystem::path& path, const EncoderPair& enc, const CheckpointMeta& meta);
EncoderPair load_checkpoint(const std::filesystem::path& path, CheckpointMeta* meta = nullptr);

}  // namespace posemetric
