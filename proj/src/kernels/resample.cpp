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

#include "asckit/kernels/resample.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace asckit::kernels {
namespace {

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = M_PI * x;
  return std::sin(px) / px;
}

struct ResamplePlan {
  int64_t up = 0;    // in_rate / gcd
  int64_t down = 0;  // out_rate / gcd
  double ratio = 0;  // cutoff scale, min(1, out/in)
  double width = 0;  // kernel half width in input samples
  int half = 0;
  int tapw = 0;  // taps per output, 2*half + 1
  // Weights per fractional phase; the phase of output j is j*up mod down, so
  // there are only `down` distinct rows. Empty when down is too large.
  std::vector<double> wtab;
  std::vector<double> wsum;
};

double tap_weight(const ResamplePlan& p, double frac, int k) {
  const double t = double(k) - frac;
  if (t < -p.width || t > p.width) return 0.0;
  const double win = 0.5 + 0.5 * std::cos(M_PI * t / p.width);
  return p.ratio * sinc(p.ratio * t) * win;
}

ResamplePlan make_plan(const ResampleSpec& spec) {
  if (spec.in_rate <= 0 || spec.out_rate <= 0) {
    throw std::invalid_argument("resample: rates must be positive");
  }
  if (spec.taps < 1) throw std::invalid_argument("resample: taps must be >= 1");
  ResamplePlan p;
  const int64_t g = std::gcd(int64_t(spec.in_rate), int64_t(spec.out_rate));
  p.up = spec.in_rate / g;
  p.down = spec.out_rate / g;
  p.ratio = spec.out_rate < spec.in_rate ? double(spec.out_rate) / spec.in_rate : 1.0;
  p.width = spec.taps / p.ratio;
  p.half = int(std::ceil(p.width));
  p.tapw = 2 * p.half + 1;
  if (p.down <= 4096) {
    p.wtab.resize(size_t(p.down) * size_t(p.tapw));
    p.wsum.resize(size_t(p.down));
    for (int64_t ph = 0; ph < p.down; ++ph) {
      const double frac = double(ph) / double(p.down);
      double s = 0.0;
      for (int k = -p.half; k <= p.half; ++k) {
        const double w = tap_weight(p, frac, k);
        p.wtab[size_t(ph) * size_t(p.tapw) + size_t(k + p.half)] = w;
        s += w;
      }
      p.wsum[size_t(ph)] = s;
    }
  }
  return p;
}

// One output sample. The exact input position of output j is j*in/out; it is
// split into an integer index and a fraction with integer arithmetic so long
// signals do not accumulate floating point drift.
float output_sample(const float* in, int64_t in_len, int64_t j, const ResamplePlan& p) {
  const int64_t num = j * p.up;
  const int64_t i0 = num / p.down;
  const int64_t ph = num % p.down;

  // Interior samples read a full tap window straight from the phase table;
  // skipped taps are stored as exact zeros, so the sums match the direct
  // evaluation bit for bit.
  if (!p.wtab.empty() && i0 - p.half >= 0 && i0 + p.half < in_len) {
    const double* wr = p.wtab.data() + size_t(ph) * size_t(p.tapw);
    const float* base = in + (i0 - p.half);
    double acc = 0.0;
    for (int k = 0; k < p.tapw; ++k) acc += wr[k] * double(base[k]);
    const double ws = p.wsum[size_t(ph)];
    return ws != 0.0 ? float(acc / ws) : 0.0f;
  }

  const double frac = double(ph) / double(p.down);
  double acc = 0.0, wsum = 0.0;
  for (int k = -p.half; k <= p.half; ++k) {
    const int64_t idx = i0 + k;
    if (idx < 0 || idx >= in_len) continue;
    const double w = tap_weight(p, frac, k);
    acc += w * in[idx];
    wsum += w;
  }
  return wsum != 0.0 ? float(acc / wsum) : 0.0f;
}

}  // namespace

int64_t resample_out_len(int64_t in_len, int in_rate, int out_rate) {
  if (in_rate <= 0 || out_rate <= 0) throw std::invalid_argument("resample: rates must be positive");
  return in_len * out_rate / in_rate;
}

namespace ref {
void resample(const float* in, int64_t in_len, float* out, int64_t out_len,
              const ResampleSpec& spec) {
  const ResamplePlan p = make_plan(spec);
  for (int64_t j = 0; j < out_len; ++j) out[j] = output_sample(in, in_len, j, p);
}
}  // namespace ref

namespace omp {
void resample(const float* in, int64_t in_len, float* out, int64_t out_len,
              const ResampleSpec& spec) {
  const ResamplePlan p = make_plan(spec);
#pragma omp parallel for schedule(static)
  for (int64_t j = 0; j < out_len; ++j) out[j] = output_sample(in, in_len, j, p);
}
}  // namespace omp

std::vector<float> resample(const std::vector<float>& in, int in_rate, int out_rate, int taps) {
  if (in_rate == out_rate) return in;
  ResampleSpec spec;
  spec.in_rate = in_rate;
  spec.out_rate = out_rate;
  spec.taps = taps;
  std::vector<float> out(size_t(resample_out_len(int64_t(in.size()), in_rate, out_rate)));
  omp::resample(in.data(), int64_t(in.size()), out.data(), int64_t(out.size()), spec);
  return out;
}

}  // namespace asckit::kernels
