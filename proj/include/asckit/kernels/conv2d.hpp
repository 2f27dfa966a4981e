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

namespace asckit::kernels {

// 2D convolution geometry. Tensors are dense row-major:
//   input  [n, c_in, h_in, w_in]
//   weight [c_out, c_in/groups, kh, kw]
//   bias   [c_out] or null
//   output [n, c_out, h_out(), w_out()]
struct Conv2dGeom {
  int n = 1;
  int c_in = 1, c_out = 1;
  int h_in = 0, w_in = 0;
  int kh = 1, kw = 1;
  int sh = 1, sw = 1;
  int ph = 0, pw = 0;
  int groups = 1;

  int h_out() const { return (h_in + 2 * ph - kh) / sh + 1; }
  int w_out() const { return (w_in + 2 * pw - kw) / sw + 1; }
  void validate() const;  // throws std::invalid_argument
};

// Both namespaces compute bit-identical results: every output element is
// produced by exactly one loop iteration with a fixed-order reduction, and
// the omp build only distributes those iterations over threads. Weight
// gradients use an eight-lane strided partial sum (lane = position & 7,
// lanes folded in index order) so the reduction vectorizes without
// reassociating math between the two builds.
namespace ref {
template <typename T>
void conv2d_forward(const T* in, const T* w, const T* bias, T* out, const Conv2dGeom& g);
template <typename T>
void conv2d_backward_input(const T* gout, const T* w, T* gin, const Conv2dGeom& g);
template <typename T>
void conv2d_backward_weights(const T* in, const T* gout, T* gw, T* gbias, const Conv2dGeom& g);
}  // namespace ref

namespace omp {
template <typename T>
void conv2d_forward(const T* in, const T* w, const T* bias, T* out, const Conv2dGeom& g);
template <typename T>
void conv2d_backward_input(const T* gout, const T* w, T* gin, const Conv2dGeom& g);
template <typename T>
void conv2d_backward_weights(const T* in, const T* gout, T* gw, T* gbias, const Conv2dGeom& g);
}  // namespace omp

}  // namespace asckit::kernels
