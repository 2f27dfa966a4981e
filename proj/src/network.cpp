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

#include "asckit/network.hpp"

#include <cmath>
#include <stdexcept>

#include "asckit/kernels/conv2d.hpp"

namespace asckit {
namespace {

bool is_conv(LayerKind k) {
  return k == LayerKind::conv2d || k == LayerKind::depthwise_conv2d ||
         k == LayerKind::pointwise_conv2d;
}

kernels::Conv2dGeom conv_geom(const LayerSpec& s, const Shape3& in, int n) {
  kernels::Conv2dGeom g;
  g.n = n;
  g.c_in = s.c_in;
  g.c_out = s.c_out;
  g.h_in = in.h;
  g.w_in = in.w;
  g.kh = s.kh;
  g.kw = s.kw;
  g.sh = s.sh;
  g.sw = s.sw;
  g.ph = s.ph;
  g.pw = s.pw;
  g.groups = s.groups;
  return g;
}

template <typename T>
void add_into(Tensor<T>& dst, const Tensor<T>& src) {
  T* d = dst.ptr();
  const T* s = src.ptr();
  const int64_t n = src.numel();
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) d[i] += s[i];
}

template <typename T>
void ensure_shape(Tensor<T>& t, int n, const Shape3& s) {
  if (t.ndim() == 4 && t.dim(0) == n && t.dim(1) == s.c && t.dim(2) == s.h && t.dim(3) == s.w)
    return;
  t = Tensor<T>({n, s.c, s.h, s.w});
}

// Plane reduction with eight pinned partial sums; breaks the serial
// dependency chain while keeping a fixed summation order.
template <typename T>
void lane_sums(const T* x, int64_t count, double& sum, double& sumsq) {
  double sl[8] = {}, ql[8] = {};
  int64_t k = 0;
  for (; k + 8 <= count; k += 8) {
    for (int l = 0; l < 8; ++l) {
      const double v = double(x[k + l]);
      sl[l] += v;
      ql[l] += v * v;
    }
  }
  for (; k < count; ++k) {
    const double v = double(x[k]);
    sl[int(k & 7)] += v;
    ql[int(k & 7)] += v * v;
  }
  for (int l = 0; l < 8; ++l) {
    sum += sl[l];
    sumsq += ql[l];
  }
}

}  // namespace

template <typename T>
Executor<T>::Executor(const ModelGraph& g, double bn_momentum, double bn_eps)
    : graph_(&g), momentum_(bn_momentum), eps_(bn_eps) {
  shapes_ = infer_shapes(g);
  const int n_nodes = int(g.nodes.size());
  node_weight_.assign(size_t(n_nodes), -1);
  node_bias_.assign(size_t(n_nodes), -1);
  node_gamma_.assign(size_t(n_nodes), -1);
  running_mean_.resize(size_t(n_nodes));
  running_var_.resize(size_t(n_nodes));

  auto add_param = [&](int node, const char* role, bool is_bn, const std::vector<float>& src,
                       std::vector<int>& index) {
    ParamTensor p;
    p.node = node;
    p.role = role;
    p.is_bn = is_bn;
    p.value.assign(src.begin(), src.end());
    p.grad.assign(src.size(), T(0));
    index[size_t(node)] = int(params_.size());
    params_.push_back(std::move(p));
  };

  for (int i = 0; i < n_nodes; ++i) {
    const auto& n = g.nodes[size_t(i)];
    if (is_conv(n.spec.kind) || n.spec.kind == LayerKind::linear) {
      add_param(i, "weight", false, n.weight, node_weight_);
      if (n.spec.has_bias) add_param(i, "bias", false, n.bias, node_bias_);
    } else if (n.spec.kind == LayerKind::batchnorm) {
      add_param(i, "gamma", true, n.gamma, node_gamma_);
      add_param(i, "bias", true, n.bias, node_bias_);
      running_mean_[size_t(i)].assign(n.running_mean.begin(), n.running_mean.end());
      running_var_[size_t(i)].assign(n.running_var.begin(), n.running_var.end());
    }
  }
  bn_mean_.resize(size_t(n_nodes));
  bn_istd_.resize(size_t(n_nodes));
}

template <typename T>
Tensor<T> Executor<T>::forward(const Tensor<T>& input, bool training) {
  const auto& g = *graph_;
  if (input.ndim() != 4 || input.dim(1) != g.input_shape.c || input.dim(2) != g.input_shape.h ||
      input.dim(3) != g.input_shape.w)
    throw std::invalid_argument("forward: input shape does not match model input spec");
  batch_ = input.dim(0);
  training_ = training;
  input_ = input;
  if (outputs_.size() != g.nodes.size()) outputs_.assign(g.nodes.size(), Tensor<T>());

  auto node_in = [&](int idx) -> const Tensor<T>& {
    return idx == -1 ? input_ : outputs_[size_t(idx)];
  };

  for (size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    const auto& s = n.spec;
    const Tensor<T>& in = node_in(n.input);
    const Shape3 in_shape = n.input == -1 ? g.input_shape : shapes_[size_t(n.input)];
    const Shape3& out_shape = shapes_[i];
    Tensor<T>& out = outputs_[i];
    ensure_shape(out, batch_, out_shape);

    if (is_conv(s.kind)) {
      const auto geom = conv_geom(s, in_shape, batch_);
      const T* bias = node_bias_[i] >= 0 ? params_[size_t(node_bias_[i])].value.data() : nullptr;
      kernels::omp::conv2d_forward<T>(in.ptr(), params_[size_t(node_weight_[i])].value.data(),
                                      bias, out.ptr(), geom);
    } else if (s.kind == LayerKind::batchnorm) {
      const int C = out_shape.c;
      const int64_t hw = int64_t(out_shape.h) * out_shape.w;
      const int64_t count = int64_t(batch_) * hw;
      const auto& gamma = params_[size_t(node_gamma_[i])].value;
      const auto& beta = params_[size_t(node_bias_[i])].value;
      auto& mean_c = bn_mean_[i];
      auto& istd_c = bn_istd_[i];
      mean_c.assign(size_t(C), T(0));
      istd_c.assign(size_t(C), T(0));

      if (training) {
#pragma omp parallel for schedule(static)
        for (int c = 0; c < C; ++c) {
          double sum = 0.0, sumsq = 0.0;
          for (int b = 0; b < batch_; ++b)
            lane_sums(in.ptr() + (int64_t(b) * C + c) * hw, hw, sum, sumsq);
          const double mean = sum / double(count);
          const double var = std::max(0.0, sumsq / double(count) - mean * mean);
          mean_c[size_t(c)] = T(mean);
          istd_c[size_t(c)] = T(1.0 / std::sqrt(var + eps_));
          const double unbiased = count > 1 ? var * double(count) / double(count - 1) : var;
          running_mean_[i][size_t(c)] =
              T((1.0 - momentum_) * double(running_mean_[i][size_t(c)]) + momentum_ * mean);
          running_var_[i][size_t(c)] =
              T((1.0 - momentum_) * double(running_var_[i][size_t(c)]) + momentum_ * unbiased);
        }
      } else {
        for (int c = 0; c < C; ++c) {
          mean_c[size_t(c)] = running_mean_[i][size_t(c)];
          istd_c[size_t(c)] = T(1.0 / std::sqrt(double(running_var_[i][size_t(c)]) + eps_));
        }
      }

      std::vector<T> scale_c(static_cast<size_t>(C)), shift_c(static_cast<size_t>(C));
      for (int c = 0; c < C; ++c) {
        const double a = double(gamma[size_t(c)]) * double(istd_c[size_t(c)]);
        scale_c[size_t(c)] = T(a);
        shift_c[size_t(c)] = T(double(beta[size_t(c)]) - double(mean_c[size_t(c)]) * a);
      }
#pragma omp parallel for collapse(2) schedule(static)
      for (int b = 0; b < batch_; ++b) {
        for (int c = 0; c < C; ++c) {
          const T* x = in.ptr() + (int64_t(b) * C + c) * hw;
          T* y = out.ptr() + (int64_t(b) * C + c) * hw;
          const T a = scale_c[size_t(c)], sh = shift_c[size_t(c)];
          for (int64_t k = 0; k < hw; ++k) y[k] = a * x[k] + sh;
        }
      }
    } else if (s.kind == LayerKind::activation) {
      const T* x = in.ptr();
      T* y = out.ptr();
      const int64_t total = out.numel();
#pragma omp parallel for schedule(static)
      for (int64_t k = 0; k < total; ++k) y[k] = x[k] > T(0) ? x[k] : T(0);
    } else if (s.kind == LayerKind::residual_add) {
      const Tensor<T>& other = node_in(n.residual_with);
      const T* a = in.ptr();
      const T* b = other.ptr();
      T* y = out.ptr();
      const int64_t total = out.numel();
#pragma omp parallel for schedule(static)
      for (int64_t k = 0; k < total; ++k) y[k] = a[k] + b[k];
    } else if (s.kind == LayerKind::global_pool) {
      const int C = in_shape.c;
      const int64_t hw = int64_t(in_shape.h) * in_shape.w;
#pragma omp parallel for collapse(2) schedule(static)
      for (int b = 0; b < batch_; ++b) {
        for (int c = 0; c < C; ++c) {
          const T* x = in.ptr() + (int64_t(b) * C + c) * hw;
          double acc = 0.0;
          for (int64_t k = 0; k < hw; ++k) acc += double(x[k]);
          out.ptr()[int64_t(b) * C + c] = T(acc / double(hw));
        }
      }
    } else if (s.kind == LayerKind::linear) {
      const auto& w = params_[size_t(node_weight_[i])].value;
      const T* bias = node_bias_[i] >= 0 ? params_[size_t(node_bias_[i])].value.data() : nullptr;
#pragma omp parallel for collapse(2) schedule(static)
      for (int b = 0; b < batch_; ++b) {
        for (int co = 0; co < s.c_out; ++co) {
          T acc = bias ? bias[co] : T(0);
          const T* x = in.ptr() + int64_t(b) * s.c_in;
          for (int ci = 0; ci < s.c_in; ++ci) acc += w[size_t(co) * s.c_in + ci] * x[ci];
          out.ptr()[int64_t(b) * s.c_out + co] = acc;
        }
      }
    }
  }

  const Tensor<T>& last = outputs_.back();
  Tensor<T> logits({batch_, g.n_classes});
  std::copy(last.data.begin(), last.data.end(), logits.data.begin());
  return logits;
}

template <typename T>
void Executor<T>::backward(const Tensor<T>& dlogits) {
  const auto& g = *graph_;
  if (!training_) throw std::logic_error("backward: requires a training-mode forward");
  if (dlogits.ndim() != 2 || dlogits.dim(0) != batch_ || dlogits.dim(1) != g.n_classes)
    throw std::invalid_argument("backward: dlogits shape mismatch");

  if (grads_.size() != g.nodes.size()) grads_.assign(g.nodes.size(), Tensor<T>());
  grad_has_.assign(g.nodes.size(), char(0));
  {
    const Shape3& out_shape = shapes_.back();
    Tensor<T>& last = grads_.back();
    ensure_shape(last, batch_, out_shape);
    std::copy(dlogits.data.begin(), dlogits.data.end(), last.data.begin());
    grad_has_.back() = 1;
  }

  auto node_in = [&](int idx) -> const Tensor<T>& {
    return idx == -1 ? input_ : outputs_[size_t(idx)];
  };
  // Routes a produced input gradient into the producing node's slot. The
  // first consumer fills the slot in place; later ones (residual fan-out) go
  // through the scratch tensor and accumulate.
  auto emit = [&](int idx, auto&& fill) {
    if (idx == -1) return;  // gradient w.r.t. the graph input is not needed
    const Shape3& sh = shapes_[size_t(idx)];
    Tensor<T>& dst = grads_[size_t(idx)];
    ensure_shape(dst, batch_, sh);
    if (!grad_has_[size_t(idx)]) {
      fill(dst);
      grad_has_[size_t(idx)] = 1;
    } else {
      ensure_shape(scratch_, batch_, sh);
      fill(scratch_);
      add_into(dst, scratch_);
    }
  };

  for (int i = int(g.nodes.size()) - 1; i >= 0; --i) {
    const auto& n = g.nodes[size_t(i)];
    const auto& s = n.spec;
    if (!grad_has_[size_t(i)]) continue;  // node output unused
    Tensor<T>& gout = grads_[size_t(i)];
    const Tensor<T>& in = node_in(n.input);
    const Shape3 in_shape = n.input == -1 ? g.input_shape : shapes_[size_t(n.input)];

    if (is_conv(s.kind)) {
      const auto geom = conv_geom(s, in_shape, batch_);
      auto& wp = params_[size_t(node_weight_[i])];
      T* gbias = node_bias_[i] >= 0 ? params_[size_t(node_bias_[i])].grad.data() : nullptr;
      kernels::omp::conv2d_backward_weights<T>(in.ptr(), gout.ptr(), wp.grad.data(), gbias, geom);
      emit(n.input, [&](Tensor<T>& dst) {
        kernels::omp::conv2d_backward_input<T>(gout.ptr(), wp.value.data(), dst.ptr(), geom);
      });
    } else if (s.kind == LayerKind::batchnorm) {
      const int C = in_shape.c;
      const int64_t hw = int64_t(in_shape.h) * in_shape.w;
      const int64_t count = int64_t(batch_) * hw;
      const auto& gamma = params_[size_t(node_gamma_[i])].value;
      auto& dgamma = params_[size_t(node_gamma_[i])].grad;
      auto& dbeta = params_[size_t(node_bias_[i])].grad;
      const auto& mean_c = bn_mean_[size_t(i)];
      const auto& istd_c = bn_istd_[size_t(i)];
      // dx = A*dy + B*x + Cc, per-channel constants folded from the usual
      // batchnorm backward expression.
      std::vector<T> a_c(static_cast<size_t>(C)), b_c(static_cast<size_t>(C)),
          c_c(static_cast<size_t>(C));

#pragma omp parallel for schedule(static)
      for (int c = 0; c < C; ++c) {
        const double m = double(mean_c[size_t(c)]), is = double(istd_c[size_t(c)]);
        double dy8[8] = {}, dyx8[8] = {};
        for (int b = 0; b < batch_; ++b) {
          const T* x = in.ptr() + (int64_t(b) * C + c) * hw;
          const T* dy = gout.ptr() + (int64_t(b) * C + c) * hw;
          int64_t k = 0;
          for (; k + 8 <= hw; k += 8) {
            for (int l = 0; l < 8; ++l) {
              const double d = double(dy[k + l]);
              dy8[l] += d;
              dyx8[l] += d * (double(x[k + l]) - m) * is;
            }
          }
          for (; k < hw; ++k) {
            const double d = double(dy[k]);
            dy8[int(k & 7)] += d;
            dyx8[int(k & 7)] += d * (double(x[k]) - m) * is;
          }
        }
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (int l = 0; l < 8; ++l) {
          sum_dy += dy8[l];
          sum_dy_xhat += dyx8[l];
        }
        dgamma[size_t(c)] = T(sum_dy_xhat);
        dbeta[size_t(c)] = T(sum_dy);
        const double mean_dy = sum_dy / double(count);
        const double mean_dy_xhat = sum_dy_xhat / double(count);
        const double scale = double(gamma[size_t(c)]) * is;
        a_c[size_t(c)] = T(scale);
        b_c[size_t(c)] = T(-scale * is * mean_dy_xhat);
        c_c[size_t(c)] = T(scale * (is * mean_dy_xhat * m - mean_dy));
      }
      emit(n.input, [&](Tensor<T>& dstT) {
#pragma omp parallel for collapse(2) schedule(static)
        for (int b = 0; b < batch_; ++b) {
          for (int c = 0; c < C; ++c) {
            const T* x = in.ptr() + (int64_t(b) * C + c) * hw;
            const T* dy = gout.ptr() + (int64_t(b) * C + c) * hw;
            T* dx = dstT.ptr() + (int64_t(b) * C + c) * hw;
            const T A = a_c[size_t(c)], B = b_c[size_t(c)], Cc = c_c[size_t(c)];
            for (int64_t k = 0; k < hw; ++k) dx[k] = A * dy[k] + B * x[k] + Cc;
          }
        }
      });
    } else if (s.kind == LayerKind::activation) {
      emit(n.input, [&](Tensor<T>& dstT) {
        const T* y = outputs_[size_t(i)].ptr();
        const T* dy = gout.ptr();
        T* dx = dstT.ptr();
        const int64_t total = gout.numel();
#pragma omp parallel for schedule(static)
        for (int64_t k = 0; k < total; ++k) dx[k] = y[k] > T(0) ? dy[k] : T(0);
      });
    } else if (s.kind == LayerKind::residual_add) {
      auto copy_out = [&](Tensor<T>& dstT) {
        std::copy(gout.data.begin(), gout.data.end(), dstT.data.begin());
      };
      emit(n.input, copy_out);
      emit(n.residual_with, copy_out);
    } else if (s.kind == LayerKind::global_pool) {
      const int C = in_shape.c;
      const int64_t hw = int64_t(in_shape.h) * in_shape.w;
      const T inv = T(1.0 / double(hw));
      emit(n.input, [&](Tensor<T>& dstT) {
#pragma omp parallel for collapse(2) schedule(static)
        for (int b = 0; b < batch_; ++b) {
          for (int c = 0; c < C; ++c) {
            const T dy = gout.ptr()[int64_t(b) * C + c] * inv;
            T* dx = dstT.ptr() + (int64_t(b) * C + c) * hw;
            for (int64_t k = 0; k < hw; ++k) dx[k] = dy;
          }
        }
      });
    } else if (s.kind == LayerKind::linear) {
      auto& wp = params_[size_t(node_weight_[i])];
      for (int co = 0; co < s.c_out; ++co) {
        for (int ci = 0; ci < s.c_in; ++ci) {
          double acc = 0.0;
          for (int b = 0; b < batch_; ++b)
            acc += double(gout.ptr()[int64_t(b) * s.c_out + co]) *
                   double(in.ptr()[int64_t(b) * s.c_in + ci]);
          wp.grad[size_t(co) * s.c_in + ci] = T(acc);
        }
      }
      if (node_bias_[size_t(i)] >= 0) {
        auto& gb = params_[size_t(node_bias_[size_t(i)])].grad;
        for (int co = 0; co < s.c_out; ++co) {
          double acc = 0.0;
          for (int b = 0; b < batch_; ++b) acc += double(gout.ptr()[int64_t(b) * s.c_out + co]);
          gb[size_t(co)] = T(acc);
        }
      }
      emit(n.input, [&](Tensor<T>& dstT) {
        for (int b = 0; b < batch_; ++b) {
          for (int ci = 0; ci < s.c_in; ++ci) {
            T acc = T(0);
            for (int co = 0; co < s.c_out; ++co)
              acc += wp.value[size_t(co) * s.c_in + ci] * gout.ptr()[int64_t(b) * s.c_out + co];
            dstT.ptr()[int64_t(b) * s.c_in + ci] = acc;
          }
        }
      });
    }
  }
}

template <typename T>
void Executor<T>::store(ModelGraph& g) const {
  if (g.nodes.size() != graph_->nodes.size())
    throw std::invalid_argument("store: graph mismatch");
  for (const auto& p : params_) {
    auto& node = g.nodes[size_t(p.node)];
    std::vector<float>* dst = nullptr;
    if (p.role == "weight") dst = &node.weight;
    else if (p.role == "gamma") dst = &node.gamma;
    else if (p.role == "bias") dst = &node.bias;
    if (!dst || dst->size() != p.value.size()) throw std::logic_error("store: size mismatch");
    for (size_t k = 0; k < p.value.size(); ++k) (*dst)[k] = float(p.value[k]);
  }
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    if (g.nodes[i].spec.kind != LayerKind::batchnorm) continue;
    for (size_t k = 0; k < running_mean_[i].size(); ++k) {
      g.nodes[i].running_mean[k] = float(running_mean_[i][k]);
      g.nodes[i].running_var[k] = float(running_var_[i][k]);
    }
  }
}

template class Executor<float>;
template class Executor<double>;

TensorF forward_eval(const ModelGraph& g, const TensorF& input) {
  Executor<float> ex(g);
  return ex.forward(input, false);
}

TensorF make_input_batch(const ModelGraph& g, const std::vector<const MelSpectrogram*>& specs) {
  if (specs.empty()) throw std::invalid_argument("make_input_batch: empty batch");
  const int n = int(specs.size());
  TensorF batch({n, g.input_shape.c, g.input_shape.h, g.input_shape.w});
  const float mean = g.normalize_input ? g.input_mean : 0.0f;
  const float scale = g.normalize_input ? 1.0f / g.input_std : 1.0f;
  const int64_t plane = int64_t(g.input_shape.h) * g.input_shape.w;
  for (int b = 0; b < n; ++b) {
    const auto& s = *specs[size_t(b)];
    if (s.n_mels != g.input_shape.h || s.n_frames != g.input_shape.w || g.input_shape.c != 1)
      throw std::invalid_argument("make_input_batch: spectrogram shape mismatch");
    float* dst = batch.ptr() + int64_t(b) * plane;
    for (int64_t k = 0; k < plane; ++k) dst[k] = (s.values[size_t(k)] - mean) * scale;
  }
  return batch;
}

}  // namespace asckit
