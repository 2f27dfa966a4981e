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
#include <vector>

namespace asckit::kernels {

// Windowed-sinc sample rate conversion. Tap weights are normalized per
// output sample, so a constant signal stays exactly constant, including
// at the edges where part of the kernel falls outside the input.
struct ResampleSpec {
  int in_rate = 0;
  int out_rate = 0;
  int taps = 16;  // sinc zero crossings per side at the cutoff
};

int64_t resample_out_len(int64_t in_len, int in_rate, int out_rate);

namespace ref {
void resample(const float* in, int64_t in_len, float* out, int64_t out_len,
              const ResampleSpec& spec);
}

namespace omp {
void resample(const float* in, int64_t in_len, float* out, int64_t out_len,
              const ResampleSpec& spec);
}

// Dispatch entry point (parallel build when OpenMP is enabled). Returns the
// input unchanged when the rates already match.
std::vector<float> resample(const std::vector<float>& in, int in_rate, int out_rate,
                            int taps = 16);

}  // namespace asckit::kernels
