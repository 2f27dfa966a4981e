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

#include "asckit/kernels/conv2d.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace asckit::kernels {

void Conv2dGeom::validate() const {
  if (n < 1 || c_in < 1 || c_out < 1 || h_in < 1 || w_in < 1)
    throw std::invalid_argument("conv2d: sizes must be positive");
  if (kh < 1 || kw < 1 || sh < 1 || sw < 1 || ph < 0 || pw < 0 || groups < 1)
    throw std::invalid_argument("conv2d: bad kernel/stride/padding/groups");
  if (c_in % groups != 0 || c_out % groups != 0)
    throw std::invalid_argument("conv2d: channels not divisible by groups");
  if (h_in + 2 * ph < kh || w_in + 2 * pw < kw)
    throw std::invalid_argument("conv2d: kernel larger than padded input");
}

namespace {

struct Shapes {
  int hout, wout, cpg, opg;
  explicit Shapes(const Conv2dGeom& g)
      : hout(g.h_out()), wout(g.w_out()), cpg(g.c_in / g.groups), opg(g.c_out / g.groups) {}
};

bool is_pointwise(const Conv2dGeom& g) {
  return g.kh == 1 && g.kw == 1 && g.sh == 1 && g.sw == 1 && g.ph == 0 && g.pw == 0 &&
         g.groups == 1;
}

// Loop drivers. The element body is the same callable in both branches, so
// serial and parallel runs execute identical per-element code; the parallel
// branch only partitions independent iterations across threads.
template <typename F>
void run_rows(bool par, int a, int b, int c, const F& f) {
  if (par) {
#pragma omp parallel for collapse(3) schedule(static)
    for (int i = 0; i < a; ++i)
      for (int j = 0; j < b; ++j)
        for (int k = 0; k < c; ++k) f(i, j, k);
  } else {
    for (int i = 0; i < a; ++i)
      for (int j = 0; j < b; ++j)
        for (int k = 0; k < c; ++k) f(i, j, k);
  }
}

template <typename F>
void run_flat(bool par, int total, const F& f) {
  if (par) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < total; ++i) f(i);
  } else {
    for (int i = 0; i < total; ++i) f(i);
  }
}

template <typename T>
T fold8(const T* lanes) {
  T acc = lanes[0];
  for (int l = 1; l < 8; ++l) acc += lanes[l];
  return acc;
}

// Range of output positions o, clamped to [0, out), whose tap k lands inside
// the unpadded input: 0 <= o*stride - pad + k < in_size.
void tap_bounds(int pad, int k, int stride, int in_size, int out, int& lo, int& hi) {
  const int a = pad - k;
  lo = a > 0 ? (a + stride - 1) / stride : 0;
  const int b = in_size - 1 + pad - k;
  hi = b < 0 ? 0 : std::min(out, b / stride + 1);
  if (hi < lo) hi = lo;
}

// ---------------------------------------------------------------------------
// forward

template <typename T>
void forward_impl(const T* in, const T* w, const T* bias, T* out, const Conv2dGeom& g, bool par) {
  g.validate();
  const Shapes s(g);

  if (is_pointwise(g)) {
    // Four output channels per task share each input row load. Per output
    // element the reduction stays a single chain over ci ascending.
    const int64_t hw = int64_t(g.h_in) * g.w_in;
    const int W = g.w_in;
    const int ncb = (g.c_out + 3) / 4;
    auto row = [=](int n, int cb, int ho) {
      const int co0 = cb * 4;
      const T* ibase = in + int64_t(n) * g.c_in * hw + int64_t(ho) * W;
      T* obase = out + (int64_t(n) * g.c_out + co0) * hw + int64_t(ho) * W;
      if (co0 + 4 <= g.c_out) {
        T* o0 = obase;
        T* o1 = obase + hw;
        T* o2 = obase + 2 * hw;
        T* o3 = obase + 3 * hw;
        const T b0 = bias ? bias[co0] : T(0);
        const T b1 = bias ? bias[co0 + 1] : T(0);
        const T b2 = bias ? bias[co0 + 2] : T(0);
        const T b3 = bias ? bias[co0 + 3] : T(0);
        for (int x = 0; x < W; ++x) {
          o0[x] = b0;
          o1[x] = b1;
          o2[x] = b2;
          o3[x] = b3;
        }
        for (int ci = 0; ci < g.c_in; ++ci) {
          const T* irow = ibase + int64_t(ci) * hw;
          const T* wc = w + int64_t(co0) * g.c_in + ci;
          const T w0 = wc[0];
          const T w1 = wc[g.c_in];
          const T w2 = wc[2 * g.c_in];
          const T w3 = wc[3 * g.c_in];
          for (int x = 0; x < W; ++x) {
            const T v = irow[x];
            o0[x] += w0 * v;
            o1[x] += w1 * v;
            o2[x] += w2 * v;
            o3[x] += w3 * v;
          }
        }
      } else {
        for (int co = co0; co < g.c_out; ++co) {
          T* orow = obase + int64_t(co - co0) * hw;
          const T bv = bias ? bias[co] : T(0);
          for (int x = 0; x < W; ++x) orow[x] = bv;
          const T* wrow = w + int64_t(co) * g.c_in;
          for (int ci = 0; ci < g.c_in; ++ci) {
            const T wv = wrow[ci];
            const T* irow = ibase + int64_t(ci) * hw;
            for (int x = 0; x < W; ++x) orow[x] += wv * irow[x];
          }
        }
      }
    };
    run_rows(par, g.n, ncb, g.h_in, row);
    return;
  }

  // Generic path (covers depthwise as groups == channels, cpg == 1). Taps are
  // iterated tap-major with precomputed valid output ranges, so the inner
  // width loop is branch free; per output element the contribution order is
  // still ci, then r, then sk ascending.
  auto row = [=](int n, int co, int ho) {
    const int grp = co / s.opg;
    const int ci0 = grp * s.cpg;
    T* orow = out + ((int64_t(n) * g.c_out + co) * s.hout + ho) * s.wout;
    const T bv = bias ? bias[co] : T(0);
    for (int wo = 0; wo < s.wout; ++wo) orow[wo] = bv;
    const int base_h = ho * g.sh - g.ph;
    const int r_lo = std::max(0, -base_h);
    const int r_hi = std::min(g.kh, g.h_in - base_h);
    const T* wbase = w + int64_t(co) * s.cpg * g.kh * g.kw;
    for (int ci = 0; ci < s.cpg; ++ci) {
      const T* iplane = in + (int64_t(n) * g.c_in + ci0 + ci) * g.h_in * g.w_in;
      const T* wk = wbase + int64_t(ci) * g.kh * g.kw;
      for (int r = r_lo; r < r_hi; ++r) {
        const T* irow = iplane + int64_t(base_h + r) * g.w_in;
        const T* wkr = wk + r * g.kw;
        for (int sk = 0; sk < g.kw; ++sk) {
          int lo, hi;
          tap_bounds(g.pw, sk, g.sw, g.w_in, s.wout, lo, hi);
          const T wv = wkr[sk];
          if (g.sw == 1) {
            const T* ir = irow - g.pw + sk;
            for (int wo = lo; wo < hi; ++wo) orow[wo] += wv * ir[wo];
          } else {
            for (int wo = lo; wo < hi; ++wo)
              orow[wo] += wv * irow[int64_t(wo) * g.sw - g.pw + sk];
          }
        }
      }
    }
  };
  run_rows(par, g.n, g.c_out, s.hout, row);
}

// ---------------------------------------------------------------------------
// backward w.r.t. input

template <typename T>
void backward_input_impl(const T* gout, const T* w, T* gin, const Conv2dGeom& g, bool par) {
  g.validate();
  const Shapes s(g);

  if (is_pointwise(g)) {
    const int64_t hw = int64_t(g.h_in) * g.w_in;
    const int W = g.w_in;
    const int nib = (g.c_in + 3) / 4;
    auto row = [=](int n, int ib, int hi) {
      const int ci0 = ib * 4;
      const T* obase = gout + int64_t(n) * g.c_out * hw + int64_t(hi) * W;
      T* gbase = gin + (int64_t(n) * g.c_in + ci0) * hw + int64_t(hi) * W;
      if (ci0 + 4 <= g.c_in) {
        T* g0 = gbase;
        T* g1 = gbase + hw;
        T* g2 = gbase + 2 * hw;
        T* g3 = gbase + 3 * hw;
        for (int x = 0; x < W; ++x) {
          g0[x] = T(0);
          g1[x] = T(0);
          g2[x] = T(0);
          g3[x] = T(0);
        }
        for (int co = 0; co < g.c_out; ++co) {
          const T* orow = obase + int64_t(co) * hw;
          const T* wc = w + int64_t(co) * g.c_in + ci0;
          const T w0 = wc[0];
          const T w1 = wc[1];
          const T w2 = wc[2];
          const T w3 = wc[3];
          for (int x = 0; x < W; ++x) {
            const T v = orow[x];
            g0[x] += w0 * v;
            g1[x] += w1 * v;
            g2[x] += w2 * v;
            g3[x] += w3 * v;
          }
        }
      } else {
        for (int ci = ci0; ci < g.c_in; ++ci) {
          T* grow = gbase + int64_t(ci - ci0) * hw;
          for (int x = 0; x < W; ++x) grow[x] = T(0);
          for (int co = 0; co < g.c_out; ++co) {
            const T wv = w[int64_t(co) * g.c_in + ci];
            const T* orow = obase + int64_t(co) * hw;
            for (int x = 0; x < W; ++x) grow[x] += wv * orow[x];
          }
        }
      }
    };
    run_rows(par, g.n, nib, g.h_in, row);
    return;
  }

  // Valid (r, ho) pairs per input row, precomputed once: ho*sh - ph + r == hi.
  std::vector<int> hn(static_cast<size_t>(g.h_in));
  std::vector<int> hr(size_t(g.h_in) * g.kh);
  std::vector<int> hho(size_t(g.h_in) * g.kh);
  for (int hi = 0; hi < g.h_in; ++hi) {
    int c = 0;
    for (int r = 0; r < g.kh; ++r) {
      const int num = hi + g.ph - r;
      if (num < 0 || num % g.sh != 0) continue;
      const int ho = num / g.sh;
      if (ho >= s.hout) continue;
      hr[size_t(hi) * g.kh + c] = r;
      hho[size_t(hi) * g.kh + c] = ho;
      ++c;
    }
    hn[size_t(hi)] = c;
  }
  const int* hn_p = hn.data();
  const int* hr_p = hr.data();
  const int* hho_p = hho.data();

  // Tap-major accumulation into the gradient row; per input element the
  // contribution order is co offset, then r, then sk ascending.
  auto row = [=](int n, int ci, int hi) {
    const int grp = ci / s.cpg;
    const int co0 = grp * s.opg;
    const int cig = ci - grp * s.cpg;
    T* grow = gin + ((int64_t(n) * g.c_in + ci) * g.h_in + hi) * g.w_in;
    for (int wi = 0; wi < g.w_in; ++wi) grow[wi] = T(0);
    const int hc = hn_p[hi];
    const int* hrp = hr_p + size_t(hi) * g.kh;
    const int* hop = hho_p + size_t(hi) * g.kh;
    for (int od = 0; od < s.opg; ++od) {
      const int co = co0 + od;
      const T* gplane = gout + (int64_t(n) * g.c_out + co) * s.hout * s.wout;
      const T* wk = w + (int64_t(co) * s.cpg + cig) * g.kh * g.kw;
      for (int a = 0; a < hc; ++a) {
        const T* gr = gplane + int64_t(hop[a]) * s.wout;
        const T* wkr = wk + hrp[a] * g.kw;
        for (int sk = 0; sk < g.kw; ++sk) {
          const T wv = wkr[sk];
          int lo, hi2;
          tap_bounds(g.pw, sk, g.sw, g.w_in, s.wout, lo, hi2);
          if (g.sw == 1) {
            T* gd = grow - g.pw + sk;
            for (int wo = lo; wo < hi2; ++wo) gd[wo] += wv * gr[wo];
          } else {
            for (int wo = lo; wo < hi2; ++wo)
              grow[int64_t(wo) * g.sw - g.pw + sk] += wv * gr[wo];
          }
        }
      }
    }
  };
  run_rows(par, g.n, g.c_in, g.h_in, row);
}

// ---------------------------------------------------------------------------
// backward w.r.t. weights (and bias)

template <typename T>
void backward_weights_impl(const T* in, const T* gout, T* gw, T* gbias, const Conv2dGeom& g,
                           bool par) {
  g.validate();
  const Shapes s(g);

  if (is_pointwise(g)) {
    const int64_t hw = int64_t(g.h_in) * g.w_in;
    // One (co, ci) pair, scanning batch then plane with eight pinned partial
    // sums folded serially at the end.
    auto onepair = [=](int co, int ci) {
      T lanes[8] = {};
      for (int n = 0; n < g.n; ++n) {
        const T* gp = gout + (int64_t(n) * g.c_out + co) * hw;
        const T* ip = in + (int64_t(n) * g.c_in + ci) * hw;
        int64_t i = 0;
        for (; i + 8 <= hw; i += 8)
          for (int l = 0; l < 8; ++l) lanes[l] += gp[i + l] * ip[i + l];
        for (; i < hw; ++i) lanes[int(i & 7)] += gp[i] * ip[i];
      }
      gw[int64_t(co) * g.c_in + ci] = fold8(lanes);
    };
    // 4x4 register tile over (co, ci); each pair accumulates in the same
    // (n, plane) order as onepair, so results match the edge path exactly.
    const int ncb = (g.c_out + 3) / 4;
    const int nib = (g.c_in + 3) / 4;
    auto tile = [=](int t) {
      const int co0 = (t / nib) * 4;
      const int ci0 = (t % nib) * 4;
      if (co0 + 4 <= g.c_out && ci0 + 4 <= g.c_in) {
        T acc[4][4][8] = {};
        for (int n = 0; n < g.n; ++n) {
          const T* gp0 = gout + (int64_t(n) * g.c_out + co0) * hw;
          const T* ip0 = in + (int64_t(n) * g.c_in + ci0) * hw;
          int64_t i = 0;
          for (; i + 8 <= hw; i += 8) {
            for (int a = 0; a < 4; ++a) {
              const T* gp = gp0 + int64_t(a) * hw + i;
              for (int b = 0; b < 4; ++b) {
                const T* ip = ip0 + int64_t(b) * hw + i;
                T* ln = acc[a][b];
                for (int l = 0; l < 8; ++l) ln[l] += gp[l] * ip[l];
              }
            }
          }
          for (; i < hw; ++i)
            for (int a = 0; a < 4; ++a)
              for (int b = 0; b < 4; ++b)
                acc[a][b][int(i & 7)] += gp0[int64_t(a) * hw + i] * ip0[int64_t(b) * hw + i];
        }
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b)
            gw[int64_t(co0 + a) * g.c_in + (ci0 + b)] = fold8(acc[a][b]);
      } else {
        const int co1 = std::min(co0 + 4, g.c_out);
        const int ci1 = std::min(ci0 + 4, g.c_in);
        for (int co = co0; co < co1; ++co)
          for (int ci = ci0; ci < ci1; ++ci) onepair(co, ci);
      }
    };
    run_flat(par, ncb * nib, tile);
  } else {
    const int kwh = g.kh * g.kw;
    auto elem = [=](int we) {
      const int co = we / (s.cpg * kwh);
      int rem = we % (s.cpg * kwh);
      const int ci = rem / kwh;
      rem %= kwh;
      const int r = rem / g.kw;
      const int sk = rem % g.kw;
      const int ci_abs = (co / s.opg) * s.cpg + ci;
      int ho_lo, ho_hi, wo_lo, wo_hi;
      tap_bounds(g.ph, r, g.sh, g.h_in, s.hout, ho_lo, ho_hi);
      tap_bounds(g.pw, sk, g.sw, g.w_in, s.wout, wo_lo, wo_hi);
      T lanes[8] = {};
      for (int n = 0; n < g.n; ++n) {
        const T* gplane = gout + (int64_t(n) * g.c_out + co) * s.hout * s.wout;
        const T* iplane = in + (int64_t(n) * g.c_in + ci_abs) * g.h_in * g.w_in;
        for (int ho = ho_lo; ho < ho_hi; ++ho) {
          const int hi = ho * g.sh - g.ph + r;
          const T* grow = gplane + int64_t(ho) * s.wout;
          const T* irow = iplane + int64_t(hi) * g.w_in;
          if (g.sw == 1) {
            const T* ir = irow - g.pw + sk;
            int wo = wo_lo;
            for (; wo < wo_hi && (wo & 7) != 0; ++wo) lanes[wo & 7] += grow[wo] * ir[wo];
            for (; wo + 8 <= wo_hi; wo += 8)
              for (int l = 0; l < 8; ++l) lanes[l] += grow[wo + l] * ir[wo + l];
            for (; wo < wo_hi; ++wo) lanes[wo & 7] += grow[wo] * ir[wo];
          } else {
            for (int wo = wo_lo; wo < wo_hi; ++wo)
              lanes[wo & 7] += grow[wo] * irow[int64_t(wo) * g.sw - g.pw + sk];
          }
        }
      }
      gw[we] = fold8(lanes);
    };
    run_flat(par, g.c_out * s.cpg * kwh, elem);
  }

  if (gbias) {
    const int64_t hw = int64_t(s.hout) * s.wout;
    auto elem = [=](int co) {
      T lanes[8] = {};
      for (int n = 0; n < g.n; ++n) {
        const T* gp = gout + (int64_t(n) * g.c_out + co) * hw;
        int64_t i = 0;
        for (; i + 8 <= hw; i += 8)
          for (int l = 0; l < 8; ++l) lanes[l] += gp[i + l];
        for (; i < hw; ++i) lanes[int(i & 7)] += gp[i];
      }
      gbias[co] = fold8(lanes);
    };
    run_flat(par, g.c_out, elem);
  }
}

}  // namespace

namespace ref {
template <typename T>
void conv2d_forward(const T* in, const T* w, const T* bias, T* out, const Conv2dGeom& g) {
  forward_impl(in, w, bias, out, g, false);
}
template <typename T>
void conv2d_backward_input(const T* gout, const T* w, T* gin, const Conv2dGeom& g) {
  backward_input_impl(gout, w, gin, g, false);
}
template <typename T>
void conv2d_backward_weights(const T* in, const T* gout, T* gw, T* gbias, const Conv2dGeom& g) {
  backward_weights_impl(in, gout, gw, gbias, g, false);
}
}  // namespace ref

namespace omp {
template <typename T>
void conv2d_forward(const T* in, const T* w, const T* bias, T* out, const Conv2dGeom& g) {
  forward_impl(in, w, bias, out, g, true);
}
template <typename T>
void conv2d_backward_input(const T* gout, const T* w, T* gin, const Conv2dGeom& g) {
  backward_input_impl(gout, w, gin, g, true);
}
template <typename T>
void conv2d_backward_weights(const T* in, const T* gout, T* gw, T* gbias, const Conv2dGeom& g) {
  backward_weights_impl(in, gout, gw, gbias, g, true);
}
}  // namespace omp

#define ASCKIT_CONV2D_INSTANTIATE(T)                                                           \
  template void ref::conv2d_forward<T>(const T*, const T*, const T*, T*, const Conv2dGeom&);   \
  template void ref::conv2d_backward_input<T>(const T*, const T*, T*, const Conv2dGeom&);      \
  template void ref::conv2d_backward_weights<T>(const T*, const T*, T*, T*, const Conv2dGeom&); \
  template void omp::conv2d_forward<T>(const T*, const T*, const T*, T*, const Conv2dGeom&);   \
  template void omp::conv2d_backward_input<T>(const T*, const T*, T*, const Conv2dGeom&);      \
  template void omp::conv2d_backward_weights<T>(const T*, const T*, T*, T*, const Conv2dGeom&);

ASCKIT_CONV2D_INSTANTIATE(float)
ASCKIT_CONV2D_INSTANTIATE(double)

#undef ASCKIT_CONV2D_INSTANTIATE

}  // namespace asckit::kernels
