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

#include "posemetric/io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>
#include <stdexcept>

#include "posemetric/hash.hpp"

namespace posemetric {

using nlohmann::json;

namespace {

template <typename T>
void put_le(std::ostream& os, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) throw std::runtime_error("unexpected end of binary payload");
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

void write_f32_le(std::ostream& os, std::span<const float> values) {
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
  } else {
    for (float v : values) put_le(os, v);
  }
}

void write_f64_le(std::ostream& os, double v) { put_le(os, v); }
void write_i64_le(std::ostream& os, std::int64_t v) { put_le(os, v); }

std::vector<float> read_f32_le(std::istream& is, std::size_t count) {
  std::vector<float> out(count);
  if constexpr (std::endian::native == std::endian::little) {
    if (!is.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(count * sizeof(float)))) {
      throw std::runtime_error("unexpected end of binary payload");
    }
  } else {
    for (auto& v : out) v = get_le<float>(is);
  }
  return out;
}

double read_f64_le(std::istream& is) { return get_le<double>(is); }
std::int64_t read_i64_le(std::istream& is) { return get_le<std::int64_t>(is); }

void write_header_line(std::ostream& os, const json& header) { os << header.dump() << '\n'; }

json read_header_line(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("missing JSON header line");
  return json::parse(line);
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::uint64_t parse_hex64(const std::string& s) { return std::stoull(s, nullptr, 16); }

std::uint64_t hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return fnv1a64(std::span<const unsigned char>(bytes));
}

json sample_to_json(const Sample& s) {
  return json{{"id", s.id},
              {"category", s.category},
              {"subcategory", s.subcategory},
              {"pose", {{"azimuth", s.pose.azimuth}, {"elevation", s.pose.elevation}, {"inplane", s.pose.inplane}}},
              {"bbox", {{"x", s.bbox.x}, {"y", s.bbox.y}, {"w", s.bbox.w}, {"h", s.bbox.h}}},
              {"camera_feat", s.camera_feat},
              {"render_feat", s.render_feat},
              {"channel", s.channel},
              {"occlusion_level", to_string(s.occlusion_level)},
              {"occlusion_ratio", s.occlusion_ratio}};
}

Sample sample_from_json(const json& j) {
  Sample s;
  s.id = j.at("id").get<std::int64_t>();
  s.category = j.at("category").get<std::string>();
  s.subcategory = j.at("subcategory").get<std::string>();
  const auto& p = j.at("pose");
  s.pose = EulerPose{p.at("azimuth").get<double>(), p.at("elevation").get<double>(), p.at("inplane").get<double>()};
  const auto& b = j.at("bbox");
  s.bbox = BBox{b.at("x").get<double>(), b.at("y").get<double>(), b.at("w").get<double>(), b.at("h").get<double>()};
  s.camera_feat = j.at("camera_feat").get<std::vector<double>>();
  s.render_feat = j.at("render_feat").get<std::vector<double>>();
  if (s.camera_feat.size() != s.render_feat.size()) {
    throw std::runtime_error("sample " + std::to_string(s.id) + ": camera/render feature dimensions differ");
  }
  s.channel = j.value("channel", std::string("normals"));
  s.occlusion_level = occlusion_level_from_string(j.value("occlusion_level", std::string("L0")));
  s.occlusion_ratio = j.value("occlusion_ratio", 0.0);
  return s;
}

void write_jsonl(const std::filesystem::path& path, std::span<const Sample> samples) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& s : samples) out << sample_to_json(s).dump() << '\n';
}

std::vector<Sample> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<Sample> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(sample_from_json(json::parse(line)));
  }
  return out;
}

json architecture_to_json(const Architecture& a) {
  return json{{"input_dim", a.input_dim},   {"hidden", a.hidden},     {"backbone_out", a.backbone_out},
              {"head_hidden", a.head_hidden}, {"head_out", a.head_out}};
}

Architecture architecture_from_json(const json& j) {
  Architecture a;
  a.input_dim = j.value("input_dim", a.input_dim);
  a.hidden = j.value("hidden", a.hidden);
  a.backbone_out = j.value("backbone_out", a.backbone_out);
  a.head_hidden = j.value("head_hidden", a.head_hidden);
  a.head_out = j.value("head_out", a.head_out);
  return a;
}

void save_checkpoint(const std::filesystem::path& path, const EncoderPair& enc, const CheckpointMeta& meta) {
  const auto cam = enc.camera.flatten();
  const auto ren = enc.render.flatten();
  json header{{"format", "posemetric-checkpoint"},
              {"version", 1},
              {"architecture", architecture_to_json(meta.arch)},
              {"encoders", {"camera", "render"}},
              {"parameters_per_encoder", cam.size()},
              {"dtype", "float32-le"},
              {"seed", meta.seed},
              {"config_hash", hex64(meta.config_hash)}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_header_line(out, header);
  for (const auto* flat : {&cam, &ren}) {
    std::vector<float> f(flat->begin(), flat->end());
    write_f32_le(out, f);
  }
}

EncoderPair load_checkpoint(const std::filesystem::path& path, CheckpointMeta* meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const json header = read_header_line(in);
  if (header.value("format", "") != "posemetric-checkpoint") throw std::runtime_error("not a checkpoint: " + path.string());
  const Architecture arch = architecture_from_json(header.at("architecture"));
  EncoderPair enc{Mlp::zeros(arch), Mlp::zeros(arch)};
  const auto count = header.at("parameters_per_encoder").get<std::size_t>();
  if (count != enc.camera.parameter_count()) throw std::runtime_error("checkpoint parameter count mismatch");
  for (Mlp* net : {&enc.camera, &enc.render}) {
    const auto f = read_f32_le(in, count);
    const std::vector<double> d(f.begin(), f.end());
    net->assign(d);
  }
  if (meta) {
    meta->arch = arch;
    meta->seed = header.value("seed", std::uint64_t{0});
    meta->config_hash = parse_hex64(header.value("config_hash", std::string("0")));
  }
  return enc;
}

}  // namespace posemetric
