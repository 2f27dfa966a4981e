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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "asckit/model.hpp"
#include "asckit/network.hpp"
#include "asckit/profiler.hpp"
#include "asckit/rng.hpp"

namespace fs = std::filesystem;
using namespace asckit;

namespace {

GraphNode conv_node(const std::string& name, LayerKind kind, int c_in, int c_out, int k, int s,
                    int p, int groups, int input) {
  GraphNode n;
  n.name = name;
  n.spec.kind = kind;
  n.spec.c_in = c_in;
  n.spec.c_out = c_out;
  n.spec.kh = n.spec.kw = k;
  n.spec.sh = n.spec.sw = s;
  n.spec.ph = n.spec.pw = p;
  n.spec.groups = groups;
  n.input = input;
  n.weight.assign(size_t(c_out) * size_t(c_in / groups) * size_t(k) * size_t(k), 0.01f);
  return n;
}

GraphNode bn_node(const std::string& name, int c, int input) {
  GraphNode n;
  n.name = name;
  n.spec.kind = LayerKind::batchnorm;
  n.spec.c_in = n.spec.c_out = c;
  n.input = input;
  n.gamma.assign(size_t(c), 1.0f);
  n.bias.assign(size_t(c), 0.0f);
  n.running_mean.assign(size_t(c), 0.0f);
  n.running_var.assign(size_t(c), 1.0f);
  return n;
}

GraphNode plain_node(const std::string& name, LayerKind kind, int c, int input) {
  GraphNode n;
  n.name = name;
  n.spec.kind = kind;
  n.spec.c_in = n.spec.c_out = c;
  n.input = input;
  return n;
}

int64_t sum_params(const ComplexityReport& rep, const std::string& prefix) {
  int64_t total = 0;
  for (const auto& l : rep.layers)
    if (l.name.rfind(prefix, 0) == 0) total += l.params;
  return total;
}

TensorF random_input(const Shape3& s, int n, uint64_t seed) {
  TensorF t({n, s.c, s.h, s.w});
  Rng rng(seed);
  for (auto& v : t.data) v = float(rng.uniform(-2.0, 2.0));
  return t;
}

}  // namespace

TEST_CASE("make_divisible rounds to multiples of eight") {
  CHECK(make_divisible(32.0) == 32);
  CHECK(make_divisible(67.2) == 64);   // 32 * 2.1
  CHECK(make_divisible(117.6) == 120); // 56 * 2.1
  CHECK(make_divisible(2.0) == 8);  // clamps to one divisor step
  CHECK(make_divisible(7.2, 8) == 8);
  CHECK(make_divisible(12.0, 8) == 16);
}

TEST_CASE("default baseline hits the published complexity figures") {
  const ModelGraph g = build_baseline(BaselineConfig{});
  CHECK(parameter_count(g) == 61148);

  const ComplexityReport rep = profile_model(g);
  CHECK(rep.total_params == 61148);
  CHECK(rep.total_macs == 26951680);
  CHECK(rep.precision_bits == 16);
  CHECK(rep.param_memory_bytes == 122296);

  const LimitCheck check = check_limits(rep);
  CHECK(check.memory_ok);
  CHECK(check.macs_ok);
  CHECK(check.ok());
  CHECK(rep.total_macs <= 29500000);

  const std::string table = report_table(rep, &check);
  CHECK(table.find("61,148") != std::string::npos);
  CHECK(table.find("26,951,680") != std::string::npos);
}

TEST_CASE("param memory covers the supported precisions") {
  CHECK(param_memory_bytes(61148, 16) == 122296);
  CHECK(param_memory_bytes(128000, 8) == 128000);
  CHECK(param_memory_bytes(32000, 32) == 128000);
  CHECK(param_memory_bytes(0, 16) == 0);
  CHECK_THROWS_AS(param_memory_bytes(1000, 12), std::invalid_argument);
}

TEST_CASE("hand-counted MAC fixtures") {
  // 1x1 convolution, 8 -> 16 channels on a 10 x 10 map: 8*16*100.
  ModelGraph g;
  g.input_shape = {8, 10, 10};
  g.nodes.push_back(conv_node("pw", LayerKind::pointwise_conv2d, 8, 16, 1, 1, 0, 1, -1));
  CHECK(profile_model(g).total_macs == 12800);

  // Depthwise 3x3 over 8 channels, padded to keep 10 x 10: 1*9*8*100.
  ModelGraph d;
  d.input_shape = {8, 10, 10};
  d.nodes.push_back(conv_node("dw", LayerKind::depthwise_conv2d, 8, 8, 3, 1, 1, 8, -1));
  CHECK(profile_model(d).total_macs == 7200);

  // Linear layers count c_in * c_out.
  ModelGraph l;
  l.input_shape = {24, 1, 1};
  GraphNode fc;
  fc.name = "fc";
  fc.spec.kind = LayerKind::linear;
  fc.spec.c_in = 24;
  fc.spec.c_out = 10;
  fc.input = -1;
  fc.weight.assign(240, 0.0f);
  fc.bias.assign(10, 0.0f);
  l.nodes.push_back(fc);
  CHECK(profile_model(l).total_macs == 240);
  CHECK(profile_model(l).total_params == 250);
}

TEST_CASE("batchnorm, activations and pooling cost zero MACs") {
  ModelGraph g;
  g.input_shape = {6, 9, 9};
  g.nodes.push_back(bn_node("bn", 6, -1));
  g.nodes.push_back(plain_node("relu", LayerKind::activation, 6, 0));
  g.nodes.push_back(plain_node("pool", LayerKind::global_pool, 6, 1));
  const ComplexityReport rep = profile_model(g);
  CHECK(rep.total_macs == 0);
  CHECK(rep.total_params == 12);  // batchnorm gamma + beta only
}

TEST_CASE("an empty model profiles to zero and passes the limits") {
  ModelGraph g;
  const ComplexityReport rep = profile_model(g);
  CHECK(rep.total_params == 0);
  CHECK(rep.total_macs == 0);
  CHECK(check_limits(rep).ok());
}

TEST_CASE("limit boundaries: at the limit passes, one over fails") {
  ComplexityReport rep;
  rep.param_memory_bytes = 128000;
  rep.total_macs = 30000000;
  CHECK(check_limits(rep).ok());

  rep.param_memory_bytes = 128001;
  LimitCheck c = check_limits(rep);
  CHECK_FALSE(c.memory_ok);
  CHECK(c.macs_ok);
  CHECK_FALSE(c.ok());

  rep.param_memory_bytes = 128000;
  rep.total_macs = 30000001;
  c = check_limits(rep);
  CHECK(c.memory_ok);
  CHECK_FALSE(c.macs_ok);
}

TEST_CASE("doubling the width roughly quadruples block parameters") {
  BaselineConfig narrow, wide;
  wide.base_channels = narrow.base_channels * 2;
  const ComplexityReport a = profile_model(build_baseline(narrow));
  const ComplexityReport b = profile_model(build_baseline(wide));
  // Stem and head scale differently; the inverted-residual trunk dominates.
  const double ratio = double(sum_params(b, "block")) / double(sum_params(a, "block"));
  CHECK(ratio > 3.6);
  CHECK(ratio < 4.4);
}

TEST_CASE("mismatched residual joins are a build error") {
  ModelGraph g;
  g.input_shape = {4, 8, 8};
  g.nodes.push_back(conv_node("conv", LayerKind::conv2d, 4, 6, 3, 1, 1, 1, -1));
  GraphNode res = plain_node("res", LayerKind::residual_add, 6, 0);
  res.residual_with = -1;  // joins the 4-channel input against 6 channels
  g.nodes.push_back(res);
  CHECK_THROWS_WITH_AS(infer_shapes(g), doctest::Contains("mismatched"), std::invalid_argument);
}

TEST_CASE("infer_shapes validates topology") {
  ModelGraph g;
  g.input_shape = {4, 8, 8};
  GraphNode n = conv_node("conv", LayerKind::conv2d, 4, 6, 3, 1, 1, 1, 5);
  g.nodes.push_back(n);  // forward reference
  CHECK_THROWS_AS(infer_shapes(g), std::invalid_argument);

  g.nodes[0].input = -1;
  g.nodes[0].spec.c_in = 3;  // channel mismatch with the graph input
  CHECK_THROWS_AS(infer_shapes(g), std::invalid_argument);
}

TEST_CASE("zero input produces finite logits") {
  const ModelGraph g = build_baseline(BaselineConfig{});
  TensorF input({1, 1, 256, 63});
  input.zero();
  const TensorF logits = forward_eval(g, input);
  REQUIRE(logits.numel() == 10);
  for (float v : logits.data) CHECK(std::isfinite(v));
}

TEST_CASE("eval logits are batch-size invariant") {
  BaselineConfig cfg;
  cfg.input_shape = {1, 64, 16};
  const ModelGraph g = build_baseline(cfg, 5);
  const TensorF batch = random_input(cfg.input_shape, 8, 77);
  const TensorF all = forward_eval(g, batch);

  const int64_t sample = int64_t(cfg.input_shape.c) * cfg.input_shape.h * cfg.input_shape.w;
  for (int i = 0; i < 8; ++i) {
    TensorF one({1, cfg.input_shape.c, cfg.input_shape.h, cfg.input_shape.w});
    std::copy(batch.data.begin() + i * sample, batch.data.begin() + (i + 1) * sample,
              one.data.begin());
    const TensorF logits = forward_eval(g, one);
    for (int c = 0; c < 10; ++c)
      CHECK(logits.data[size_t(c)] ==
            doctest::Approx(all.data[size_t(i) * 10 + size_t(c)]).epsilon(1e-5));
  }
}

TEST_CASE("parameter gradients match finite differences") {
  BaselineConfig cfg;
  cfg.input_shape = {1, 32, 12};
  ModelGraph g = build_baseline(cfg, 3);

  Executor<double> exec(g);
  TensorD input({2, 1, 32, 12});
  Rng rng(55);
  for (auto& v : input.data) v = rng.uniform(-1.5, 1.5);

  // Fixed linear functional of the logits keeps the check loss-agnostic.
  TensorD dlogits({2, 10});
  for (auto& v : dlogits.data) v = rng.uniform(-1.0, 1.0);

  auto loss = [&]() {
    const TensorD logits = exec.forward(input, true);
    double acc = 0.0;
    for (int64_t i = 0; i < logits.numel(); ++i) acc += logits.data[size_t(i)] * dlogits.data[size_t(i)];
    return acc;
  };

  loss();
  exec.backward(dlogits);

  // Spot-check a spread of parameters from every tensor role.
  int checked = 0;
  for (size_t p = 0; p < exec.params().size(); p += 3) {
    auto& pt = exec.params()[p];
    const size_t k = pt.value.size() / 2;
    const double v0 = pt.value[k];
    const double h = 1e-5 * std::max(1.0, std::abs(v0));
    pt.value[k] = v0 + h;
    const double lp = loss();
    pt.value[k] = v0 - h;
    const double lm = loss();
    pt.value[k] = v0;
    const double fd = (lp - lm) / (2.0 * h);
    const double got = pt.grad[k];
    CHECK(std::abs(fd - got) <= 1e-3 * std::max({std::abs(fd), std::abs(got), 1e-3}));
    ++checked;
  }
  CHECK(checked >= 8);
}

TEST_CASE("cast_fp16 is idempotent and halves the memory") {
  ModelGraph g = build_baseline(BaselineConfig{}, 1);
  // Nudge a weight off the fp16 grid to see rounding actually happen.
  g.nodes[0].weight[0] = 0.1000001f;
  const ModelGraph once = cast_fp16(g);
  const ModelGraph twice = cast_fp16(once);
  CHECK(once.precision_bits == 16);
  CHECK(once.nodes[0].weight[0] != g.nodes[0].weight[0]);
  for (size_t i = 0; i < once.nodes.size(); ++i) {
    CHECK(once.nodes[i].weight == twice.nodes[i].weight);
    CHECK(once.nodes[i].bias == twice.nodes[i].bias);
    CHECK(once.nodes[i].gamma == twice.nodes[i].gamma);
    // Running statistics are buffers and stay untouched.
    CHECK(once.nodes[i].running_mean == g.nodes[i].running_mean);
    CHECK(once.nodes[i].running_var == g.nodes[i].running_var);
  }
  CHECK(parameter_count(once) == parameter_count(g));
  const ComplexityReport rep = profile_model(once);
  CHECK(rep.param_memory_bytes == 2 * rep.total_params);
}

TEST_CASE("checkpoints round trip") {
  const auto dir = fs::temp_directory_path() / "asckit-model-ckpt";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string path = (dir / "model.ckpt").string();

  BaselineConfig cfg;
  cfg.input_shape = {1, 64, 16};
  // 16-bit graphs are stored at fp16, so cast first for an exact round trip.
  ModelGraph g = cast_fp16(build_baseline(cfg, 9));
  g.normalize_input = true;
  g.input_mean = -3.25f;
  g.input_std = 2.5f;
  g.labels.assign({"airport", "bus", "metro", "metro_station", "park", "public_square",
                   "shopping_mall", "street_pedestrian", "street_traffic", "tram"});

  save_checkpoint(path, g);
  const ModelGraph back = load_checkpoint(path);

  CHECK(back.nodes.size() == g.nodes.size());
  CHECK(back.input_shape == g.input_shape);
  CHECK(back.precision_bits == g.precision_bits);
  CHECK(back.normalize_input == g.normalize_input);
  CHECK(back.input_mean == g.input_mean);
  CHECK(back.input_std == g.input_std);
  CHECK(back.labels == g.labels);
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    CHECK(back.nodes[i].name == g.nodes[i].name);
    CHECK(back.nodes[i].weight == g.nodes[i].weight);
    CHECK(back.nodes[i].bias == g.nodes[i].bias);
    CHECK(back.nodes[i].gamma == g.nodes[i].gamma);
    CHECK(back.nodes[i].running_mean == g.nodes[i].running_mean);
    CHECK(back.nodes[i].running_var == g.nodes[i].running_var);
  }

  CHECK_THROWS_AS(load_checkpoint((dir / "missing.ckpt").string()), std::runtime_error);
}
