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

#include "grsv/net.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "grsv/error.hpp"

namespace grsv {

std::vector<Index> MlpParams::dims() const {
  std::vector<Index> d;
  if (layers.empty()) return d;
  d.push_back(layers.front().weight.cols());
  for (const auto& l : layers) d.push_back(l.weight.rows());
  return d;
}

size_t MlpParams::parameter_count() const {
  size_t n = 0;
  for (const auto& l : layers) n += static_cast<size_t>(l.weight.size() + l.bias.size());
  return n;
}

double& MlpParams::parameter(size_t flat_index) {
  for (auto& l : layers) {
    const auto w = static_cast<size_t>(l.weight.size());
    if (flat_index < w) return l.weight.data()[flat_index];
    flat_index -= w;
    const auto b = static_cast<size_t>(l.bias.size());
    if (flat_index < b) return l.bias.data()[flat_index];
    flat_index -= b;
  }
  throw ContractError("MlpParams::parameter: index out of range");
}

double MlpParams::parameter(size_t flat_index) const {
  return const_cast<MlpParams*>(this)->parameter(flat_index);
}

MlpParams MlpParams::zeros_like() const {
  MlpParams z;
  z.layers.reserve(layers.size());
  for (const auto& l : layers)
    z.layers.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
  return z;
}

MlpParams& MlpParams::operator+=(const MlpParams& other) {
  require(other.layers.size() == layers.size(), "MlpParams: layer count mismatch");
  for (size_t i = 0; i < layers.size(); ++i) {
    layers[i].weight += other.layers[i].weight;
    layers[i].bias += other.layers[i].bias;
  }
  return *this;
}

MlpParams& MlpParams::operator*=(double s) {
  for (auto& l : layers) {
    l.weight *= s;
    l.bias *= s;
  }
  return *this;
}

double MlpParams::squared_norm() const {
  double s = 0.0;
  for (const auto& l : layers) s += l.weight.squaredNorm() + l.bias.squaredNorm();
  return s;
}

bool MlpParams::all_finite() const {
  for (const auto& l : layers)
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

MlpParams xavier_init(std::span<const Index> dims, std::uint64_t seed) {
  require(dims.size() >= 2, "xavier_init: need at least two layer sizes");
  for (Index d : dims) require(d > 0, "xavier_init: layer sizes must be positive");
  std::mt19937_64 rng(seed);
  MlpParams p;
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    const Index fan_in = dims[l];
    const Index fan_out = dims[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Layer layer{Matrix(fan_out, fan_in), Vector::Zero(fan_out)};
    for (Index j = 0; j < fan_in; ++j)
      for (Index i = 0; i < fan_out; ++i) layer.weight(i, j) = dist(rng);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

ForwardResult forward(const MlpParams& params, const Matrix& x) {
  require(!params.layers.empty(), "forward: empty network");
  if (x.rows() != params.input_dim())
    throw ContractError("forward: input has " + std::to_string(x.rows()) +
                        " rows, network expects " + std::to_string(params.input_dim()));
  ForwardResult r;
  const size_t n_layers = params.layers.size();
  r.cache.inputs.reserve(n_layers);
  r.cache.preactivations.reserve(n_layers);
  Matrix h = x;
  for (size_t l = 0; l < n_layers; ++l) {
    const Layer& layer = params.layers[l];
    Matrix pre = layer.weight * h;
    pre.colwise() += layer.bias;
    r.cache.inputs.push_back(std::move(h));
    h = (l + 1 < n_layers) ? Matrix(pre.cwiseMax(0.0)) : pre;
    r.cache.preactivations.push_back(std::move(pre));
  }
  r.features = std::move(h);
  return r;
}

MlpParams backward(const MlpParams& params, const ForwardCache& cache, const Matrix& grad_features,
                   const Matrix* grad_penultimate) {
  const size_t n_layers = params.layers.size();
  require(cache.inputs.size() == n_layers, "backward: cache does not match network");
  const Matrix& out = cache.preactivations.back();
  require(grad_features.rows() == out.rows() && grad_features.cols() == out.cols(),
          "backward: grad_features shape does not match features");
  if (grad_penultimate) {
    require(grad_penultimate->rows() == cache.inputs.back().rows() &&
                grad_penultimate->cols() == cache.inputs.back().cols(),
            "backward: grad_penultimate shape mismatch");
  }
  MlpParams g;
  g.layers.resize(n_layers);
  Matrix delta = grad_features;  // gradient w.r.t. preactivation of layer l
  for (size_t l = n_layers; l-- > 0;) {
    const Layer& layer = params.layers[l];
    g.layers[l].weight = delta * cache.inputs[l].transpose();
    g.layers[l].bias = delta.rowwise().sum();
    if (l == 0) break;
    Matrix grad_in = layer.weight.transpose() * delta;
    if (l + 1 == n_layers && grad_penultimate) grad_in += *grad_penultimate;
    // Rectifier derivative is 0 at pre <= 0.
    delta = grad_in.cwiseProduct(
        (cache.preactivations[l - 1].array() > 0.0).cast<double>().matrix());
  }
  return g;
}

OptimizerState make_optimizer(const MlpParams& params, double learning_rate, double momentum,
                              double weight_decay) {
  require(momentum >= 0.0 && momentum < 1.0, "optimizer: momentum must lie in [0, 1)");
  require(learning_rate > 0.0, "optimizer: learning rate must be positive");
  require(weight_decay >= 0.0, "optimizer: weight decay must be nonnegative");
  return {params.zeros_like(), learning_rate, momentum, weight_decay};
}

void sgd_step(MlpParams& params, const MlpParams& grads, OptimizerState& state) {
  require(grads.layers.size() == params.layers.size() &&
              state.velocity.layers.size() == params.layers.size(),
          "sgd_step: shape mismatch");
  const double mu = state.momentum;
  const double lr = state.learning_rate;
  const double wd = state.weight_decay;
  auto update = [&](auto& theta, const auto& g, auto& v) {
    const auto d = (g + wd * theta).eval();
    v = mu * v - lr * d;
    theta += mu * v - lr * d;
  };
  for (size_t l = 0; l < params.layers.size(); ++l) {
    update(params.layers[l].weight, grads.layers[l].weight, state.velocity.layers[l].weight);
    update(params.layers[l].bias, grads.layers[l].bias, state.velocity.layers[l].bias);
  }
}

double scheduled_learning_rate(double base, int epoch, int total_epochs) {
  // Integer comparisons keep the switch points exact: epoch >= total/2 etc.
  if (4 * epoch >= 3 * total_epochs) return base * 0.01;
  if (2 * epoch >= total_epochs) return base * 0.1;
  return base;
}

namespace {

void write_double(std::ostream& os, double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  os.write(buf, end - buf);
}

double parse_double(const std::string& tok) {
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw IoError("checkpoint: malformed number '" + tok + "'");
  return x;
}

}  // namespace

void write_checkpoint(std::ostream& os, const MlpParams& params, const std::string& mode) {
  os << "grsvnet-checkpoint 1\n";
  os << "mode " << mode << '\n';
  os << "dims";
  for (Index d : params.dims()) os << ' ' << d;
  os << '\n';
  for (const auto& l : params.layers) {
    bool first = true;
    auto emit = [&](double x) {
      if (!first) os << ' ';
      first = false;
      write_double(os, x);
    };
    for (Index k = 0; k < l.weight.size(); ++k) emit(l.weight.data()[k]);
    for (Index k = 0; k < l.bias.size(); ++k) emit(l.bias(k));
    os << '\n';
  }
  if (!os) throw IoError("checkpoint: write failed");
}

MlpParams read_checkpoint(std::istream& is, std::string* mode) {
  std::string line;
  if (!std::getline(is, line) || line != "grsvnet-checkpoint 1")
    throw IoError("checkpoint: missing or unsupported header");
  std::string key, mode_name;
  if (!std::getline(is, line)) throw IoError("checkpoint: truncated");
  std::istringstream ms(line);
  ms >> key >> mode_name;
  if (key != "mode") throw IoError("checkpoint: expected 'mode' line");
  if (mode) *mode = mode_name;
  if (!std::getline(is, line)) throw IoError("checkpoint: truncated");
  std::istringstream ds(line);
  ds >> key;
  if (key != "dims") throw IoError("checkpoint: expected 'dims' line");
  std::vector<Index> dims;
  for (Index d; ds >> d;) dims.push_back(d);
  if (dims.size() < 2) throw IoError("checkpoint: need at least two dims");
  MlpParams p;
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    if (!std::getline(is, line)) throw IoError("checkpoint: missing layer " + std::to_string(l));
    std::istringstream ls(line);
    Layer layer{Matrix(dims[l + 1], dims[l]), Vector(dims[l + 1])};
    std::string tok;
    for (Index k = 0; k < layer.weight.size(); ++k) {
      if (!(ls >> tok)) throw IoError("checkpoint: layer " + std::to_string(l) + " too short");
      layer.weight.data()[k] = parse_double(tok);
    }
    for (Index k = 0; k < layer.bias.size(); ++k) {
      if (!(ls >> tok)) throw IoError("checkpoint: layer " + std::to_string(l) + " too short");
      layer.bias(k) = parse_double(tok);
    }
    if (ls >> tok) throw IoError("checkpoint: layer " + std::to_string(l) + " too long");
    p.layers.push_back(std::move(layer));
  }
  return p;
}

}  // namespace grsv
