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

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "asckit/model.hpp"

namespace asckit {

// Static complexity accounting for a model graph. Multiply-accumulates are
// counted for a single input sample: convolutions contribute
// (c_in / groups) * kh * kw per output element, linear layers c_in * c_out.
// Batchnorm, activations, pooling and residual adds count zero MACs.
// Parameters cover weights, biases and batchnorm affine terms; batchnorm
// running statistics are buffers and are not counted.

struct LayerReport {
  std::string name;
  std::string kind;
  Shape3 output{};
  int64_t params = 0;
  int64_t macs = 0;
};

struct ComplexityReport {
  std::vector<LayerReport> layers;
  int64_t total_params = 0;
  int64_t total_macs = 0;
  int precision_bits = 16;
  int64_t param_memory_bytes = 0;
};

struct LimitCheck {
  int64_t memory_limit_bytes = 0;
  int64_t mac_limit = 0;
  bool memory_ok = false;
  bool macs_ok = false;
  bool ok() const { return memory_ok && macs_ok; }
};

inline constexpr int64_t kDefaultMemoryLimitBytes = 128000;
inline constexpr int64_t kDefaultMacLimit = 30000000;

// Parameter memory in bytes at the given storage precision. Kilobytes in
// reports use the SI convention (1 kB = 1000 bytes). Throws for precisions
// other than 8, 16 or 32 bits.
int64_t param_memory_bytes(int64_t params, int precision_bits);

ComplexityReport profile_model(const ModelGraph& g);

// Boundary values pass: a model at exactly the limit is compliant.
LimitCheck check_limits(const ComplexityReport& report,
                        int64_t memory_limit_bytes = kDefaultMemoryLimitBytes,
                        int64_t mac_limit = kDefaultMacLimit);

std::string report_table(const ComplexityReport& report, const LimitCheck* check = nullptr);
nlohmann::json report_json(const ComplexityReport& report, const LimitCheck* check = nullptr);

}  // namespace asckit
