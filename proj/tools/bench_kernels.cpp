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

// Times the serial reference kernels against the OpenMP kernels and checks
// that both produce bit-identical outputs on the same inputs.

#include <chrono>
#include <cstring>
#include <functional>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "asckit/kernels/conv2d.hpp"
#include "asckit/kernels/resample.hpp"
#include "asckit/rng.hpp"

using namespace asckit;
using kernels::Conv2dGeom;

namespace {

double time_of(const std::function<void()>& fn, int repeats) {
  double best = 1e100;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

std::vector<float> random_vec(size_t n, Rng& rng) {
  std::vector<float> v(n);
  for (auto& x : v) x = float(rng.uniform(-1.0, 1.0));
  return v;
}

void report(const std::string& name, double t_ref, double t_omp, bool identical) {
  std::cout << std::left << std::setw(34) << name << std::right << std::fixed
            << std::setprecision(3) << std::setw(10) << t_ref * 1e3 << " ms" << std::setw(10)
            << t_omp * 1e3 << " ms" << std::setw(9) << std::setprecision(2) << t_ref / t_omp
            << "x   " << (identical ? "bit-identical" : "MISMATCH") << "\n";
}

bool bench_conv(const std::string& name, const Conv2dGeom& g, Rng& rng, int repeats) {
  const size_t in_n = size_t(g.n) * g.c_in * g.h_in * g.w_in;
  const size_t w_n = size_t(g.c_out) * (g.c_in / g.groups) * g.kh * g.kw;
  const size_t out_n = size_t(g.n) * g.c_out * g.h_out() * g.w_out();
  const auto in = random_vec(in_n, rng);
  const auto w = random_vec(w_n, rng);
  const auto gout = random_vec(out_n, rng);
  std::vector<float> out_ref(out_n), out_omp(out_n);
  std::vector<float> gin_ref(in_n), gin_omp(in_n);
  std::vector<float> gw_ref(w_n), gw_omp(w_n);

  bool ok = true;

  const double tf_ref = time_of(
      [&] { kernels::ref::conv2d_forward<float>(in.data(), w.data(), nullptr, out_ref.data(), g); },
      repeats);
  const double tf_omp = time_of(
      [&] { kernels::omp::conv2d_forward<float>(in.data(), w.data(), nullptr, out_omp.data(), g); },
      repeats);
  const bool f_same = std::memcmp(out_ref.data(), out_omp.data(), out_n * sizeof(float)) == 0;
  ok = ok && f_same;
  report(name + " forward", tf_ref, tf_omp, f_same);

  const double tbi_ref = time_of(
      [&] { kernels::ref::conv2d_backward_input<float>(gout.data(), w.data(), gin_ref.data(), g); },
      repeats);
  const double tbi_omp = time_of(
      [&] { kernels::omp::conv2d_backward_input<float>(gout.data(), w.data(), gin_omp.data(), g); },
      repeats);
  const bool bi_same = std::memcmp(gin_ref.data(), gin_omp.data(), in_n * sizeof(float)) == 0;
  ok = ok && bi_same;
  report(name + " backward-input", tbi_ref, tbi_omp, bi_same);

  const double tbw_ref = time_of(
      [&] {
        kernels::ref::conv2d_backward_weights<float>(in.data(), gout.data(), gw_ref.data(),
                                                     nullptr, g);
      },
      repeats);
  const double tbw_omp = time_of(
      [&] {
        kernels::omp::conv2d_backward_weights<float>(in.data(), gout.data(), gw_omp.data(),
                                                     nullptr, g);
      },
      repeats);
  const bool bw_same = std::memcmp(gw_ref.data(), gw_omp.data(), w_n * sizeof(float)) == 0;
  ok = ok && bw_same;
  report(name + " backward-weights", tbw_ref, tbw_omp, bw_same);

  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  int repeats = 5;
  int batch = 16;
  if (argc > 1) repeats = std::max(1, std::atoi(argv[1]));
  if (argc > 2) batch = std::max(1, std::atoi(argv[2]));

  Rng rng(12345);
  std::cout << "kernel benchmark, batch " << batch << ", best of " << repeats << " runs\n";
  std::cout << std::left << std::setw(34) << "case" << std::right << std::setw(13) << "serial"
            << std::setw(13) << "openmp" << std::setw(10) << "speedup" << "\n";
  std::cout << std::string(84, '-') << "\n";

  bool ok = true;

  Conv2dGeom stem;
  stem.n = batch;
  stem.c_in = 1;
  stem.c_out = 8;
  stem.h_in = 256;
  stem.w_in = 63;
  stem.kh = stem.kw = 3;
  stem.sh = stem.sw = 2;
  stem.ph = stem.pw = 1;
  ok &= bench_conv("conv3x3 s2 1->8 (256x63)", stem, rng, repeats);

  Conv2dGeom pw;
  pw.n = batch;
  pw.c_in = 64;
  pw.c_out = 64;
  pw.h_in = 64;
  pw.w_in = 16;
  ok &= bench_conv("pointwise 64->64 (64x16)", pw, rng, repeats);

  Conv2dGeom dw;
  dw.n = batch;
  dw.c_in = 64;
  dw.c_out = 64;
  dw.h_in = 64;
  dw.w_in = 16;
  dw.kh = dw.kw = 3;
  dw.ph = dw.pw = 1;
  dw.groups = 64;
  ok &= bench_conv("depthwise3x3 64 (64x16)", dw, rng, repeats);

  {
    const int in_len = 44100 * 4;
    std::vector<float> wave(static_cast<size_t>(in_len));
    for (auto& x : wave) x = float(rng.uniform(-1.0, 1.0));
    kernels::ResampleSpec spec;
    spec.in_rate = 44100;
    spec.out_rate = 32000;
    const int64_t out_len = kernels::resample_out_len(in_len, spec.in_rate, spec.out_rate);
    std::vector<float> out_ref(static_cast<size_t>(out_len));
    std::vector<float> out_omp(static_cast<size_t>(out_len));
    const double t_ref = time_of(
        [&] { kernels::ref::resample(wave.data(), in_len, out_ref.data(), out_len, spec); },
        repeats);
    const double t_omp = time_of(
        [&] { kernels::omp::resample(wave.data(), in_len, out_omp.data(), out_len, spec); },
        repeats);
    const bool same =
        std::memcmp(out_ref.data(), out_omp.data(), size_t(out_len) * sizeof(float)) == 0;
    ok &= same;
    report("resample 44.1k->32k (4 s)", t_ref, t_omp, same);
  }

  if (!ok) {
    std::cerr << "serial and OpenMP kernels disagree\n";
    return 1;
  }
  return 0;
}
