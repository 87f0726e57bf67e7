// Copyright 2026 The grsvnet Authors.
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

#ifndef GRSV_NET_HPP_
#define GRSV_NET_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "grsv/linalg.hpp"

namespace grsv {

struct Layer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

/// Multilayer perceptron: rectifier after every layer except the last, which
/// is the identity. Also used as the container for parameter gradients and
/// optimizer velocities, which share its shape.
struct MlpParams {
  std::vector<Layer> layers;

  std::vector<Index> dims() const;
  Index input_dim() const { return layers.front().weight.cols(); }
  Index output_dim() const { return layers.back().weight.rows(); }
  size_t parameter_count() const;

  // Flat view across layers: each layer's weights (column-major), then bias.
  double& parameter(size_t flat_index);
  double parameter(size_t flat_index) const;

  MlpParams zeros_like() const;
  MlpParams& operator+=(const MlpParams& other);
  MlpParams& operator*=(double s);
  double squared_norm() const;
  bool all_finite() const;
};

struct ForwardCache {
  std::vector<Matrix> inputs;          // inputs[l] feeds layer l
  std::vector<Matrix> preactivations;  // W_l inputs[l] + b_l
};

struct ForwardResult {
  Matrix features;
  ForwardCache cache;

  /// Input of the last layer (post-rectifier activations of the last hidden
  /// layer, or the network input for a single-layer net).
  const Matrix& penultimate() const { return cache.inputs.back(); }
};

/// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
MlpParams xavier_init(std::span<const Index> dims, std::uint64_t seed);

/// x holds one sample per column.
ForwardResult forward(const MlpParams& params, const Matrix& x);

/// Gradient of <grad_features, net(x)> with respect to every parameter. When
/// grad_penultimate is given it is added at the input of the last layer, so
/// a loss on penultimate activations backpropagates in the same pass.
MlpParams backward(const MlpParams& params, const ForwardCache& cache,
                   const Matrix& grad_features, const Matrix* grad_penultimate = nullptr);

struct OptimizerState {
  MlpParams velocity;
  double learning_rate = 0.01;
  double momentum = 0.9;
  double weight_decay = 0.0;
};

OptimizerState make_optimizer(const MlpParams& params, double learning_rate, double momentum,
                              double weight_decay);

/// Nesterov momentum with coupled L2 decay:
///   d = g + wd * theta;  v <- mu v - lr d;  theta <- theta + mu v - lr d
void sgd_step(MlpParams& params, const MlpParams& grads, OptimizerState& state);

/// Step decay: base, base/10 from 50% of the epochs, base/100 from 75%.
double scheduled_learning_rate(double base, int epoch, int total_epochs);

// Checkpoint: text, one header line "grsvnet-checkpoint 1", then
// "mode <name>", "dims d0 d1 ... dL", and one line per layer holding the
// weights (column-major) followed by the bias, as shortest round-trip decimals.
void write_checkpoint(std::ostream& os, const MlpParams& params, const std::string& mode);
MlpParams read_checkpoint(std::istream& is, std::string* mode = nullptr);

}  // namespace grsv

#endif  // GRSV_NET_HPP_
