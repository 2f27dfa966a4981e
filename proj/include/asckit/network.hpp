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

#include <string>
#include <vector>

#include "asckit/model.hpp"
#include "asckit/tensor.hpp"

namespace asckit {

// Runs a ModelGraph forward and backward on dense NCHW batches. The scalar
// type is a template parameter: float for training and inference, double for
// finite-difference gradient checks.
template <typename T>
class Executor {
 public:
  explicit Executor(const ModelGraph& g, double bn_momentum = 0.1, double bn_eps = 1e-5);

  // input [n, c, h, w]; returns logits [n, n_classes]. Training mode uses
  // batch statistics for batchnorm and caches activations for backward.
  Tensor<T> forward(const Tensor<T>& input, bool training);

  // dlogits [n, n_classes]; fills parameter gradients. Requires a preceding
  // training-mode forward on the same batch.
  void backward(const Tensor<T>& dlogits);

  struct ParamTensor {
    int node = -1;
    std::string role;   // weight | bias | gamma
    bool is_bn = false; // batchnorm affine terms, excluded from weight decay
    std::vector<T> value;
    std::vector<T> grad;
  };

  std::vector<ParamTensor>& params() { return params_; }
  const std::vector<ParamTensor>& params() const { return params_; }

  // Writes parameter values and batchnorm running buffers back to the graph.
  void store(ModelGraph& g) const;

  const std::vector<Shape3>& shapes() const { return shapes_; }

 private:
  const ModelGraph* graph_;
  double momentum_, eps_;
  std::vector<Shape3> shapes_;
  std::vector<ParamTensor> params_;
  std::vector<int> node_weight_, node_bias_, node_gamma_;  // node -> params_ index or -1

  // batchnorm running buffers, mirrored per node
  std::vector<std::vector<T>> running_mean_, running_var_;

  // forward caches
  int batch_ = 0;
  bool training_ = false;
  Tensor<T> input_;
  std::vector<Tensor<T>> outputs_;
  std::vector<std::vector<T>> bn_mean_, bn_istd_;  // per bn node, batch stats

  // backward buffers, reused across steps
  std::vector<Tensor<T>> grads_;
  std::vector<char> grad_has_;
  Tensor<T> scratch_;
};

// Convenience eval-mode forward straight off the graph parameters.
TensorF forward_eval(const ModelGraph& g, const TensorF& input);

// Stacks spectrograms into an NCHW batch, applying the graph's input
// normalization if declared.
TensorF make_input_batch(const ModelGraph& g, const std::vector<const MelSpectrogram*>& specs);

}  // namespace asckit
