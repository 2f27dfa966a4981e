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

#include <complex>
#include <vector>

namespace asckit::kernels {

// Iterative radix-2 FFT with precomputed twiddles and bit-reversal table.
// The plan is immutable after construction, so one plan can be shared
// read-only across threads that each transform their own buffer.
class FftPlan {
 public:
  explicit FftPlan(int n);

  int size() const { return n_; }

  void forward(std::complex<double>* x) const { run(x, false); }
  // Unnormalized inverse; caller divides by n.
  void inverse(std::complex<double>* x) const { run(x, true); }

 private:
  void run(std::complex<double>* x, bool invert) const;

  int n_;
  std::vector<int> rev_;
  std::vector<std::complex<double>> tw_;  // forward twiddles, n/2 entries
};

int next_pow2(int n);

// Linear convolution of two real signals via FFT, result length a+b-1.
// Internals are double precision regardless of output use.
std::vector<double> fft_convolve(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace asckit::kernels
