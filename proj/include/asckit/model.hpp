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

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "asckit/frontend.hpp"

namespace asckit {

enum class LayerKind {
  conv2d,
  depthwise_conv2d,
  pointwise_conv2d,
  batchnorm,
  activation,  // ReLU
  residual_add,
  global_pool,
  linear,
};

std::string layer_kind_name(LayerKind k);
LayerKind parse_layer_kind(const std::string& name);

struct LayerSpec {
  LayerKind kind = LayerKind::activation;
  int c_in = 0, c_out = 0;
  int kh = 1, kw = 1;
  int sh = 1, sw = 1;
  int ph = 0, pw = 0;
  int groups = 1;
  bool has_bias = false;
};

// One node of the (topologically ordered) layer graph. Parameters are kept
// as fp32 master copies; the graph-level precision tag declares the
// deployment storage width used for memory accounting and export.
struct GraphNode {
  std::string name;
  LayerSpec spec;
  int input = -1;          // producing node index, -1 = graph input
  int residual_with = -1;  // second operand for residual_add

  std::vector<float> weight;  // conv / linear
  std::vector<float> bias;    // conv / linear bias, or batchnorm beta
  std::vector<float> gamma;   // batchnorm scale
  std::vector<float> running_mean;  // batchnorm buffers (not parameters)
  std::vector<float> running_var;
};

struct Shape3 {
  int c = 0, h = 0, w = 0;
  bool operator==(const Shape3&) const = default;
};

struct BaselineConfig {
  int base_channels = 32;
  double channels_multiplier = 1.8;
  double expansion_rate = 2.1;
  std::array<int, 3> blocks_per_stage = {3, 2, 1};
  // Strides keyed by global block position (1-based); unlisted blocks use 1x1.
  std::map<int, std::pair<int, int>> block_strides = {{3, {1, 2}}, {4, {2, 1}}};
  int n_classes = 10;
  Shape3 input_shape = {1, 256, 63};
};

struct ModelGraph {
  std::vector<GraphNode> nodes;
  Shape3 input_shape = {1, 256, 63};
  int n_classes = 10;
  int precision_bits = 16;  // declared deployment precision (8/16/32)
  BaselineConfig config;    // provenance echo
  FrontendConfig frontend;  // features the model was trained on
  bool normalize_input = false;  // global scalar normalization of log-mels
  float input_mean = 0.0f;
  float input_std = 1.0f;
  std::vector<std::string> labels;  // class index -> scene label
};

// Width rounding used when scaling channel counts: nearest multiple of 8,
// bumped up one step if rounding lost more than 10%.
int make_divisible(double v, int divisor = 8);

// Stem convolutions, three stages of inverted-residual blocks, pointwise
// head, batchnorm, global pooling. Parameters are seeded deterministically.
ModelGraph build_baseline(const BaselineConfig& cfg, uint64_t seed = 0);

// Output shape per node; throws on invalid topology (cycles via bad input
// indices, residual joins across mismatched shapes, bad channel counts).
std::vector<Shape3> infer_shapes(const ModelGraph& g);

int64_t parameter_count(const ModelGraph& g);

// Rounds every parameter (not the batchnorm running buffers) to the nearest
// fp16 value and declares 16-bit precision. Idempotent.
ModelGraph cast_fp16(const ModelGraph& g);

void save_checkpoint(const std::string& path, const ModelGraph& g);
ModelGraph load_checkpoint(const std::string& path);

}  // namespace asckit
