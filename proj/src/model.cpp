// Copyright 2026 the asckit authors
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

#include "asckit/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "asckit/fp16.hpp"
#include "asckit/manifest.hpp"
#include "asckit/rng.hpp"

namespace asckit {
namespace {

using nlohmann::json;

struct TensorRole {
  const char* name;
  std::vector<float> GraphNode::*member;
  bool is_parameter;  // running stats are buffers, excluded from the count
};

const TensorRole kRoles[] = {
    {"weight", &GraphNode::weight, true},
    {"bias", &GraphNode::bias, true},
    {"gamma", &GraphNode::gamma, true},
    {"running_mean", &GraphNode::running_mean, false},
    {"running_var", &GraphNode::running_var, false},
};

void he_init(std::vector<float>& w, int fan_in, Rng& rng) {
  const double stddev = std::sqrt(2.0 / double(fan_in));
  for (auto& v : w) v = float(stddev * rng.normal());
}

}  // namespace

std::string layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::depthwise_conv2d: return "depthwise-conv2d";
    case LayerKind::pointwise_conv2d: return "pointwise-conv2d";
    case LayerKind::batchnorm: return "batchnorm";
    case LayerKind::activation: return "activation";
    case LayerKind::residual_add: return "residual-add";
    case LayerKind::global_pool: return "global-pool";
    case LayerKind::linear: return "linear";
  }
  throw std::logic_error("bad layer kind");
}

LayerKind parse_layer_kind(const std::string& name) {
  for (auto k : {LayerKind::conv2d, LayerKind::depthwise_conv2d, LayerKind::pointwise_conv2d,
                 LayerKind::batchnorm, LayerKind::activation, LayerKind::residual_add,
                 LayerKind::global_pool, LayerKind::linear}) {
    if (layer_kind_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown layer kind: " + name);
}

int make_divisible(double v, int divisor) {
  int out = std::max(divisor, int(v + divisor / 2.0) / divisor * divisor);
  if (out < 0.9 * v) out += divisor;
  return out;
}

ModelGraph build_baseline(const BaselineConfig& cfg, uint64_t seed) {
  if (cfg.base_channels < 1 || cfg.channels_multiplier <= 0.0 || cfg.expansion_rate <= 0.0 ||
      cfg.n_classes < 2)
    throw std::invalid_argument("build_baseline: invalid config");
  for (int b : cfg.blocks_per_stage)
    if (b < 1) throw std::invalid_argument("build_baseline: blocks per stage must be >= 1");

  ModelGraph g;
  g.input_shape = cfg.input_shape;
  g.n_classes = cfg.n_classes;
  g.precision_bits = 16;
  g.config = cfg;
  if (cfg.n_classes == kNumScenes)
    g.labels.assign(scene_labels().begin(), scene_labels().end());

  Rng rng(mix_seed(seed, hash_str("baseline-init")));

  auto add = [&](GraphNode n) {
    n.input = int(g.nodes.size()) - 1;
    g.nodes.push_back(std::move(n));
    return int(g.nodes.size()) - 1;
  };
  auto add_conv = [&](const std::string& name, LayerKind kind, int cin, int cout, int k, int sh,
                      int sw, int pad, int groups) {
    GraphNode n;
    n.name = name;
    n.spec = {kind, cin, cout, k, k, sh, sw, pad, pad, groups, false};
    n.weight.resize(size_t(cout) * (cin / groups) * k * k);
    he_init(n.weight, (cin / groups) * k * k, rng);
    return add(std::move(n));
  };
  auto add_bn = [&](const std::string& name, int c) {
    GraphNode n;
    n.name = name;
    n.spec.kind = LayerKind::batchnorm;
    n.spec.c_in = n.spec.c_out = c;
    n.gamma.assign(size_t(c), 1.0f);
    n.bias.assign(size_t(c), 0.0f);
    n.running_mean.assign(size_t(c), 0.0f);
    n.running_var.assign(size_t(c), 1.0f);
    return add(std::move(n));
  };
  auto add_relu = [&](const std::string& name, int c) {
    GraphNode n;
    n.name = name;
    n.spec.kind = LayerKind::activation;
    n.spec.c_in = n.spec.c_out = c;
    return add(std::move(n));
  };

  const int stem_ch = make_divisible(cfg.base_channels / 4.0);
  std::array<int, 3> stage_ch;
  for (int s = 0; s < 3; ++s)
    stage_ch[size_t(s)] =
        s == 0 ? cfg.base_channels
               : make_divisible(cfg.base_channels * std::pow(cfg.channels_multiplier, s));

  add_conv("stem1.conv", LayerKind::conv2d, g.input_shape.c, stem_ch, 3, 2, 2, 1, 1);
  add_bn("stem1.bn", stem_ch);
  add_relu("stem1.relu", stem_ch);
  add_conv("stem2.conv", LayerKind::conv2d, stem_ch, stage_ch[0], 3, 2, 2, 1, 1);
  add_bn("stem2.bn", stage_ch[0]);
  add_relu("stem2.relu", stage_ch[0]);

  int in_ch = stage_ch[0];
  int block_idx = 0;
  for (int s = 0; s < 3; ++s) {
    for (int b = 0; b < cfg.blocks_per_stage[size_t(s)]; ++b) {
      ++block_idx;
      const int out_ch = stage_ch[size_t(s)];
      auto it = cfg.block_strides.find(block_idx);
      const auto [sh, sw] = it != cfg.block_strides.end() ? it->second : std::pair<int, int>{1, 1};
      const int exp_ch = make_divisible(in_ch * cfg.expansion_rate);
      const std::string pfx = "block" + std::to_string(block_idx);
      const int block_in_node = int(g.nodes.size()) - 1;

      add_conv(pfx + ".expand.conv", LayerKind::pointwise_conv2d, in_ch, exp_ch, 1, 1, 1, 0, 1);
      add_bn(pfx + ".expand.bn", exp_ch);
      add_relu(pfx + ".expand.relu", exp_ch);
      add_conv(pfx + ".dw.conv", LayerKind::depthwise_conv2d, exp_ch, exp_ch, 3, sh, sw, 1,
               exp_ch);
      add_bn(pfx + ".dw.bn", exp_ch);
      add_relu(pfx + ".dw.relu", exp_ch);
      add_conv(pfx + ".project.conv", LayerKind::pointwise_conv2d, exp_ch, out_ch, 1, 1, 1, 0, 1);
      const int proj_bn = add_bn(pfx + ".project.bn", out_ch);

      if (in_ch == out_ch && sh == 1 && sw == 1) {
        GraphNode n;
        n.name = pfx + ".residual";
        n.spec.kind = LayerKind::residual_add;
        n.spec.c_in = n.spec.c_out = out_ch;
        n.input = proj_bn;
        n.residual_with = block_in_node;
        g.nodes.push_back(std::move(n));
      }
      in_ch = out_ch;
    }
  }

  add_conv("head.conv", LayerKind::pointwise_conv2d, in_ch, cfg.n_classes, 1, 1, 1, 0, 1);
  add_bn("head.bn", cfg.n_classes);
  {
    GraphNode n;
    n.name = "head.pool";
    n.spec.kind = LayerKind::global_pool;
    n.spec.c_in = n.spec.c_out = cfg.n_classes;
    add(std::move(n));
  }

  infer_shapes(g);  // validates the construction
  return g;
}

std::vector<Shape3> infer_shapes(const ModelGraph& g) {
  std::vector<Shape3> shapes(g.nodes.size());
  auto shape_of = [&](int idx, int at) -> const Shape3& {
    if (idx == -1) return g.input_shape;
    if (idx < 0 || idx >= at)
      throw std::invalid_argument("infer_shapes: node " + std::to_string(at) +
                                  " references invalid input " + std::to_string(idx));
    return shapes[size_t(idx)];
  };

  for (size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    const auto& s = n.spec;
    const Shape3& in = shape_of(n.input, int(i));
    Shape3 out = in;
    switch (s.kind) {
      case LayerKind::conv2d:
      case LayerKind::depthwise_conv2d:
      case LayerKind::pointwise_conv2d: {
        if (s.c_in != in.c)
          throw std::invalid_argument("infer_shapes: channel mismatch at " + n.name);
        if (s.groups < 1 || s.c_in % s.groups != 0 || s.c_out % s.groups != 0)
          throw std::invalid_argument("infer_shapes: bad groups at " + n.name);
        if (s.kind == LayerKind::pointwise_conv2d && (s.kh != 1 || s.kw != 1))
          throw std::invalid_argument("infer_shapes: pointwise kernel must be 1x1 at " + n.name);
        if (s.kind == LayerKind::depthwise_conv2d && s.groups != s.c_in)
          throw std::invalid_argument("infer_shapes: depthwise needs groups == c_in at " + n.name);
        out.c = s.c_out;
        out.h = (in.h + 2 * s.ph - s.kh) / s.sh + 1;
        out.w = (in.w + 2 * s.pw - s.kw) / s.sw + 1;
        if (out.h < 1 || out.w < 1)
          throw std::invalid_argument("infer_shapes: empty output at " + n.name);
        const size_t want = size_t(s.c_out) * (s.c_in / s.groups) * s.kh * s.kw;
        if (n.weight.size() != want)
          throw std::invalid_argument("infer_shapes: weight size mismatch at " + n.name);
        break;
      }
      case LayerKind::batchnorm:
        if (in.c != int(n.gamma.size()) || n.gamma.size() != n.bias.size())
          throw std::invalid_argument("infer_shapes: batchnorm size mismatch at " + n.name);
        break;
      case LayerKind::activation:
        break;
      case LayerKind::residual_add: {
        const Shape3& other = shape_of(n.residual_with, int(i));
        if (!(other == in))
          throw std::invalid_argument("infer_shapes: residual join across mismatched shapes at " +
                                      n.name);
        break;
      }
      case LayerKind::global_pool:
        out.h = out.w = 1;
        break;
      case LayerKind::linear:
        if (in.h != 1 || in.w != 1 || s.c_in != in.c)
          throw std::invalid_argument("infer_shapes: linear expects pooled input at " + n.name);
        if (n.weight.size() != size_t(s.c_in) * s.c_out)
          throw std::invalid_argument("infer_shapes: weight size mismatch at " + n.name);
        out.c = s.c_out;
        break;
    }
    shapes[i] = out;
  }
  return shapes;
}

int64_t parameter_count(const ModelGraph& g) {
  int64_t total = 0;
  for (const auto& n : g.nodes)
    for (const auto& role : kRoles)
      if (role.is_parameter) total += int64_t((n.*role.member).size());
  return total;
}

ModelGraph cast_fp16(const ModelGraph& g) {
  ModelGraph out = g;
  for (auto& n : out.nodes)
    for (const auto& role : kRoles)
      if (role.is_parameter)
        for (auto& v : n.*role.member) v = round_to_half(v);
  out.precision_bits = 16;
  return out;
}

// ---------------------------------------------------------------------------
// checkpoint container: magic, u64 header length, JSON header, raw LE tensors

namespace {

constexpr char kMagic[8] = {'A', 'S', 'C', 'K', 'I', 'T', '1', '\n'};

json frontend_to_json(const FrontendConfig& f) {
  return {{"target_rate", f.target_rate}, {"fft_size", f.fft_size},
          {"window_ms", f.window_ms},     {"hop_samples", f.hop_samples},
          {"n_mels", f.n_mels},           {"log_floor", f.log_floor}};
}

FrontendConfig frontend_from_json(const json& j) {
  FrontendConfig f;
  f.target_rate = j.at("target_rate").get<int>();
  f.fft_size = j.at("fft_size").get<int>();
  f.window_ms = j.at("window_ms").get<double>();
  f.hop_samples = j.at("hop_samples").get<int>();
  f.n_mels = j.at("n_mels").get<int>();
  f.log_floor = j.at("log_floor").get<double>();
  return f;
}

json config_to_json(const BaselineConfig& c) {
  json strides = json::object();
  for (const auto& [idx, sv] : c.block_strides)
    strides[std::to_string(idx)] = {sv.first, sv.second};
  return {{"base_channels", c.base_channels},
          {"channels_multiplier", c.channels_multiplier},
          {"expansion_rate", c.expansion_rate},
          {"blocks_per_stage", c.blocks_per_stage},
          {"block_strides", strides},
          {"n_classes", c.n_classes},
          {"input_shape", {c.input_shape.c, c.input_shape.h, c.input_shape.w}}};
}

BaselineConfig config_from_json(const json& j) {
  BaselineConfig c;
  c.base_channels = j.at("base_channels").get<int>();
  c.channels_multiplier = j.at("channels_multiplier").get<double>();
  c.expansion_rate = j.at("expansion_rate").get<double>();
  auto blocks = j.at("blocks_per_stage").get<std::vector<int>>();
  if (blocks.size() != 3) throw std::runtime_error("checkpoint: blocks_per_stage needs 3 stages");
  std::copy(blocks.begin(), blocks.end(), c.blocks_per_stage.begin());
  c.block_strides.clear();
  for (const auto& [key, sv] : j.at("block_strides").items())
    c.block_strides[std::stoi(key)] = {sv.at(0).get<int>(), sv.at(1).get<int>()};
  c.n_classes = j.at("n_classes").get<int>();
  auto shp = j.at("input_shape").get<std::vector<int>>();
  if (shp.size() != 3) throw std::runtime_error("checkpoint: input_shape needs 3 dims");
  c.input_shape = {shp[0], shp[1], shp[2]};
  return c;
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelGraph& g) {
  const bool fp16_params = g.precision_bits == 16;

  json nodes = json::array();
  for (const auto& n : g.nodes) {
    json tensors = json::array();
    for (const auto& role : kRoles) {
      const auto& vec = n.*role.member;
      if (vec.empty()) continue;
      tensors.push_back({{"role", role.name},
                         {"size", vec.size()},
                         {"dtype", role.is_parameter && fp16_params ? "f16" : "f32"}});
    }
    const auto& s = n.spec;
    nodes.push_back({{"name", n.name},
                     {"kind", layer_kind_name(s.kind)},
                     {"c_in", s.c_in},
                     {"c_out", s.c_out},
                     {"kh", s.kh},
                     {"kw", s.kw},
                     {"sh", s.sh},
                     {"sw", s.sw},
                     {"ph", s.ph},
                     {"pw", s.pw},
                     {"groups", s.groups},
                     {"has_bias", s.has_bias},
                     {"input", n.input},
                     {"residual_with", n.residual_with},
                     {"tensors", tensors}});
  }

  json header = {{"format", 1},
                 {"precision_bits", g.precision_bits},
                 {"input_shape", {g.input_shape.c, g.input_shape.h, g.input_shape.w}},
                 {"n_classes", g.n_classes},
                 {"normalize_input", g.normalize_input},
                 {"input_mean", g.input_mean},
                 {"input_std", g.input_std},
                 {"labels", g.labels},
                 {"config", config_to_json(g.config)},
                 {"frontend", frontend_to_json(g.frontend)},
                 {"nodes", nodes}};
  const std::string hdr = header.dump();

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write checkpoint: " + path);
  f.write(kMagic, 8);
  const uint64_t hlen = hdr.size();
  char lenbuf[8];
  for (int i = 0; i < 8; ++i) lenbuf[i] = char((hlen >> (8 * i)) & 0xFF);
  f.write(lenbuf, 8);
  f.write(hdr.data(), std::streamsize(hdr.size()));

  for (const auto& n : g.nodes) {
    for (const auto& role : kRoles) {
      const auto& vec = n.*role.member;
      if (vec.empty()) continue;
      if (role.is_parameter && fp16_params) {
        std::vector<uint16_t> half(vec.size());
        for (size_t i = 0; i < vec.size(); ++i) half[i] = float_to_half(vec[i]);
        f.write(reinterpret_cast<const char*>(half.data()), std::streamsize(half.size() * 2));
      } else {
        f.write(reinterpret_cast<const char*>(vec.data()), std::streamsize(vec.size() * 4));
      }
    }
  }
  if (!f) throw std::runtime_error("short write: " + path);
}

ModelGraph load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("not an asckit checkpoint: " + path);
  char lenbuf[8];
  f.read(lenbuf, 8);
  uint64_t hlen = 0;
  for (int i = 0; i < 8; ++i) hlen |= uint64_t(uint8_t(lenbuf[i])) << (8 * i);
  std::string hdr(hlen, '\0');
  f.read(hdr.data(), std::streamsize(hlen));
  if (!f) throw std::runtime_error("truncated checkpoint header: " + path);

  json header = json::parse(hdr);
  if (header.at("format").get<int>() != 1)
    throw std::runtime_error("unsupported checkpoint format in " + path);

  ModelGraph g;
  g.precision_bits = header.at("precision_bits").get<int>();
  auto shp = header.at("input_shape").get<std::vector<int>>();
  g.input_shape = {shp.at(0), shp.at(1), shp.at(2)};
  g.n_classes = header.at("n_classes").get<int>();
  g.normalize_input = header.at("normalize_input").get<bool>();
  g.input_mean = header.at("input_mean").get<float>();
  g.input_std = header.at("input_std").get<float>();
  g.labels = header.at("labels").get<std::vector<std::string>>();
  g.config = config_from_json(header.at("config"));
  g.frontend = frontend_from_json(header.at("frontend"));

  for (const auto& jn : header.at("nodes")) {
    GraphNode n;
    n.name = jn.at("name").get<std::string>();
    n.spec.kind = parse_layer_kind(jn.at("kind").get<std::string>());
    n.spec.c_in = jn.at("c_in").get<int>();
    n.spec.c_out = jn.at("c_out").get<int>();
    n.spec.kh = jn.at("kh").get<int>();
    n.spec.kw = jn.at("kw").get<int>();
    n.spec.sh = jn.at("sh").get<int>();
    n.spec.sw = jn.at("sw").get<int>();
    n.spec.ph = jn.at("ph").get<int>();
    n.spec.pw = jn.at("pw").get<int>();
    n.spec.groups = jn.at("groups").get<int>();
    n.spec.has_bias = jn.at("has_bias").get<bool>();
    n.input = jn.at("input").get<int>();
    n.residual_with = jn.at("residual_with").get<int>();

    for (const auto& jt : jn.at("tensors")) {
      const auto role_name = jt.at("role").get<std::string>();
      const auto size = jt.at("size").get<size_t>();
      const auto dtype = jt.at("dtype").get<std::string>();
      std::vector<float>* dst = nullptr;
      for (const auto& role : kRoles)
        if (role_name == role.name) dst = &(n.*role.member);
      if (!dst) throw std::runtime_error("checkpoint: unknown tensor role " + role_name);
      dst->resize(size);
      if (dtype == "f16") {
        std::vector<uint16_t> half(size);
        f.read(reinterpret_cast<char*>(half.data()), std::streamsize(size * 2));
        for (size_t i = 0; i < size; ++i) (*dst)[i] = half_to_float(half[i]);
      } else if (dtype == "f32") {
        f.read(reinterpret_cast<char*>(dst->data()), std::streamsize(size * 4));
      } else {
        throw std::runtime_error("checkpoint: unknown dtype " + dtype);
      }
      if (!f) throw std::runtime_error("truncated checkpoint tensors: " + path);
    }
    g.nodes.push_back(std::move(n));
  }

  infer_shapes(g);
  return g;
}

}  // namespace asckit
