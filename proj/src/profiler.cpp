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

#include "asckit/profiler.hpp"

#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace asckit {
namespace {

int64_t node_params(const GraphNode& n) {
  switch (n.spec.kind) {
    case LayerKind::conv2d:
    case LayerKind::depthwise_conv2d:
    case LayerKind::pointwise_conv2d:
    case LayerKind::linear:
      return int64_t(n.weight.size()) + int64_t(n.bias.size());
    case LayerKind::batchnorm:
      return int64_t(n.gamma.size()) + int64_t(n.bias.size());
    default:
      return 0;
  }
}

int64_t node_macs(const LayerSpec& s, const Shape3& out) {
  switch (s.kind) {
    case LayerKind::conv2d:
    case LayerKind::depthwise_conv2d:
    case LayerKind::pointwise_conv2d: {
      const int64_t per_out = int64_t(s.c_in / s.groups) * s.kh * s.kw;
      return per_out * out.c * out.h * out.w;
    }
    case LayerKind::linear:
      return int64_t(s.c_in) * s.c_out;
    default:
      return 0;
  }
}

std::string shape_str(const Shape3& s) {
  std::ostringstream os;
  os << "(" << s.c << ", " << s.h << ", " << s.w << ")";
  return os.str();
}

std::string with_commas(int64_t v) {
  std::string raw = std::to_string(v);
  std::string out;
  int count = 0;
  for (auto it = raw.rbegin(); it != raw.rend(); ++it) {
    if (count && count % 3 == 0 && *it != '-') out.push_back(',');
    out.push_back(*it);
    ++count;
  }
  return std::string(out.rbegin(), out.rend());
}

}  // namespace

int64_t param_memory_bytes(int64_t params, int precision_bits) {
  if (precision_bits != 8 && precision_bits != 16 && precision_bits != 32)
    throw std::invalid_argument("param_memory_bytes: unsupported precision " +
                                std::to_string(precision_bits) + " (expected 8, 16 or 32)");
  return params * precision_bits / 8;
}

ComplexityReport profile_model(const ModelGraph& g) {
  ComplexityReport rep;
  rep.precision_bits = g.precision_bits;
  const auto shapes = infer_shapes(g);
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    LayerReport row;
    row.name = n.name;
    row.kind = layer_kind_name(n.spec.kind);
    row.output = shapes[i];
    row.params = node_params(n);
    row.macs = node_macs(n.spec, shapes[i]);
    rep.total_params += row.params;
    rep.total_macs += row.macs;
    rep.layers.push_back(std::move(row));
  }
  rep.param_memory_bytes = param_memory_bytes(rep.total_params, rep.precision_bits);
  return rep;
}

LimitCheck check_limits(const ComplexityReport& report, int64_t memory_limit_bytes,
                        int64_t mac_limit) {
  LimitCheck c;
  c.memory_limit_bytes = memory_limit_bytes;
  c.mac_limit = mac_limit;
  c.memory_ok = report.param_memory_bytes <= memory_limit_bytes;
  c.macs_ok = report.total_macs <= mac_limit;
  return c;
}

std::string report_table(const ComplexityReport& report, const LimitCheck* check) {
  std::ostringstream os;
  size_t name_w = 5, kind_w = 4, shape_w = 6;
  for (const auto& r : report.layers) {
    name_w = std::max(name_w, r.name.size());
    kind_w = std::max(kind_w, r.kind.size());
    shape_w = std::max(shape_w, shape_str(r.output).size());
  }
  os << std::left << std::setw(int(name_w) + 2) << "layer" << std::setw(int(kind_w) + 2) << "kind"
     << std::setw(int(shape_w) + 2) << "output" << std::right << std::setw(12) << "params"
     << std::setw(14) << "MACs" << "\n";
  os << std::string(name_w + kind_w + shape_w + 4 + 26, '-') << "\n";
  for (const auto& r : report.layers) {
    os << std::left << std::setw(int(name_w) + 2) << r.name << std::setw(int(kind_w) + 2) << r.kind
       << std::setw(int(shape_w) + 2) << shape_str(r.output) << std::right << std::setw(12)
       << with_commas(r.params) << std::setw(14) << with_commas(r.macs) << "\n";
  }
  os << std::string(name_w + kind_w + shape_w + 4 + 26, '-') << "\n";
  os << "total parameters: " << with_commas(report.total_params) << "\n";
  os << "total MACs:       " << with_commas(report.total_macs) << "\n";
  os << "parameter memory: " << with_commas(report.param_memory_bytes) << " B ("
     << std::fixed << std::setprecision(1) << double(report.param_memory_bytes) / 1000.0
     << " kB at " << report.precision_bits << "-bit)\n";
  if (check) {
    os << "memory limit " << with_commas(check->memory_limit_bytes) << " B: "
       << (check->memory_ok ? "pass" : "FAIL") << "\n";
    os << "MAC limit    " << with_commas(check->mac_limit) << ": "
       << (check->macs_ok ? "pass" : "FAIL") << "\n";
  }
  return os.str();
}

nlohmann::json report_json(const ComplexityReport& report, const LimitCheck* check) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& r : report.layers) {
    layers.push_back({{"name", r.name},
                      {"kind", r.kind},
                      {"output", {r.output.c, r.output.h, r.output.w}},
                      {"params", r.params},
                      {"macs", r.macs}});
  }
  nlohmann::json j{{"layers", layers},
                   {"total_params", report.total_params},
                   {"total_macs", report.total_macs},
                   {"precision_bits", report.precision_bits},
                   {"param_memory_bytes", report.param_memory_bytes}};
  if (check) {
    j["limits"] = {{"memory_limit_bytes", check->memory_limit_bytes},
                   {"mac_limit", check->mac_limit},
                   {"memory_ok", check->memory_ok},
                   {"macs_ok", check->macs_ok},
                   {"ok", check->ok()}};
  }
  return j;
}

}  // namespace asckit
