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

#include "asckit/kernels/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace asckit::kernels {

FftPlan::FftPlan(int n) : n_(n) {
  if (n < 1 || (n & (n - 1)) != 0) throw std::invalid_argument("FftPlan: size must be a power of two");
  rev_.resize(size_t(n));
  int log2n = 0;
  while ((1 << log2n) < n) ++log2n;
  for (int i = 0; i < n; ++i) {
    int r = 0;
    for (int b = 0; b < log2n; ++b) r |= ((i >> b) & 1) << (log2n - 1 - b);
    rev_[size_t(i)] = r;
  }
  tw_.resize(size_t(n / 2));
  for (int k = 0; k < n / 2; ++k) {
    double ang = -2.0 * M_PI * k / n;
    tw_[size_t(k)] = {std::cos(ang), std::sin(ang)};
  }
}

void FftPlan::run(std::complex<double>* x, bool invert) const {
  const int n = n_;
  for (int i = 0; i < n; ++i) {
    int j = rev_[size_t(i)];
    if (i < j) std::swap(x[i], x[j]);
  }
  // Twiddles store exp(-2*pi*i*k/n); the inverse transform conjugates them,
  // which is an exact sign flip on the imaginary part.
  const double im_sign = invert ? -1.0 : 1.0;
  const std::complex<double>* tw = tw_.data();
  for (int len = 2; len <= n; len <<= 1) {
    const int half = len >> 1;
    const int step = n / len;
    for (int i = 0; i < n; i += len) {
      std::complex<double>* a = x + i;
      std::complex<double>* b = x + i + half;
      for (int k = 0; k < half; ++k) {
        const std::complex<double> t = tw[size_t(k) * size_t(step)];
        const double wr = t.real();
        const double wi = t.imag() * im_sign;
        const double br = b[k].real(), bi = b[k].imag();
        const double vr = br * wr - bi * wi;
        const double vi = br * wi + bi * wr;
        const double ur = a[k].real(), ui = a[k].imag();
        a[k] = {ur + vr, ui + vi};
        b[k] = {ur - vr, ui - vi};
      }
    }
  }
}

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> fft_convolve(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) return {};
  const int out_len = int(a.size() + b.size()) - 1;
  const int n = next_pow2(out_len);
  FftPlan plan(n);

  std::vector<std::complex<double>> fa(static_cast<size_t>(n)), fb(static_cast<size_t>(n));
  for (size_t i = 0; i < a.size(); ++i) fa[i] = a[i];
  for (size_t i = 0; i < b.size(); ++i) fb[i] = b[i];
  plan.forward(fa.data());
  plan.forward(fb.data());
  for (int i = 0; i < n; ++i) fa[size_t(i)] *= fb[size_t(i)];
  plan.inverse(fa.data());

  std::vector<double> out(static_cast<size_t>(out_len));
  for (int i = 0; i < out_len; ++i) out[size_t(i)] = fa[size_t(i)].real() / n;
  return out;
}

}  // namespace asckit::kernels
