// Copyright 2026 The REDistill Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "redistill/neural.hpp"

#include <cmath>
#include <stdexcept>

#include "redistill/rng.hpp"

namespace redistill {

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

void MlpSpec::validate() const {
  if (input_dim < 1) throw std::invalid_argument("input_dim must be >= 1");
  if (num_classes < 2) throw std::invalid_argument("num_classes must be >= 2");
  for (auto h : hidden_dims) {
    if (h < 1) throw std::invalid_argument("hidden layer widths must be >= 1");
  }
}

DenseLayer DenseLayer::zeros(std::size_t in, std::size_t out) {
  return DenseLayer{in, out, std::vector<double>(in * out, 0.0), std::vector<double>(out, 0.0)};
}

void Mlp::validate() const {
  spec.validate();
  if (layers.size() != spec.hidden_dims.size() + 1) {
    throw std::invalid_argument("layer count does not match spec");
  }
  std::size_t width = spec.input_dim;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const std::size_t out = l < spec.hidden_dims.size() ? spec.hidden_dims[l] : spec.num_classes;
    if (layer.in != width || layer.out != out || layer.weights.size() != layer.in * layer.out ||
        layer.bias.size() != layer.out) {
      throw std::invalid_argument("layer " + std::to_string(l) + " has inconsistent shape");
    }
    for (double w : layer.weights) {
      if (!std::isfinite(w)) throw std::invalid_argument("non-finite weight");
    }
    for (double b : layer.bias) {
      if (!std::isfinite(b)) throw std::invalid_argument("non-finite bias");
    }
    width = out;
  }
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

ParamBuffers ParamBuffers::zeros_like(const Mlp& model) {
  ParamBuffers b;
  b.layers.reserve(model.layers.size());
  for (const auto& l : model.layers) b.layers.push_back(DenseLayer::zeros(l.in, l.out));
  return b;
}

void ParamBuffers::fill_zero() {
  for (auto& l : layers) {
    std::fill(l.weights.begin(), l.weights.end(), 0.0);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
  }
}

void ParamBuffers::scale(double s) {
  for (auto& l : layers) {
    for (auto& w : l.weights) w *= s;
    for (auto& b : l.bias) b *= s;
  }
}

void ParamBuffers::axpy(double s, const ParamBuffers& other) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    auto& a = layers[i];
    const auto& b = other.layers[i];
    for (std::size_t j = 0; j < a.weights.size(); ++j) a.weights[j] += s * b.weights[j];
    for (std::size_t j = 0; j < a.bias.size(); ++j) a.bias[j] += s * b.bias[j];
  }
}

Mlp init_mlp(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  Mlp model{spec, {}};
  std::size_t in = spec.input_dim;
  const std::size_t depth = spec.hidden_dims.size() + 1;
  for (std::size_t l = 0; l < depth; ++l) {
    const std::size_t out = l < spec.hidden_dims.size() ? spec.hidden_dims[l] : spec.num_classes;
    auto layer = DenseLayer::zeros(in, out);
    const double a = std::sqrt(6.0 / static_cast<double>(in + out));
    CounterRng rng(derive_key(seed, {0x696e6974ULL, l}));
    for (auto& w : layer.weights) w = rng.uniform(-a, a);
    model.layers.push_back(std::move(layer));
    in = out;
  }
  return model;
}

namespace {

void check_input(const Mlp& model, std::span<const double> input) {
  if (input.size() != model.spec.input_dim) {
    throw std::invalid_argument("input has " + std::to_string(input.size()) +
                                " features, model expects " +
                                std::to_string(model.spec.input_dim));
  }
}

void affine(const DenseLayer& layer, std::span<const double> x, std::vector<double>& y) {
  y.assign(layer.bias.begin(), layer.bias.end());
  for (std::size_t o = 0; o < layer.out; ++o) {
    const double* row = layer.weights.data() + o * layer.in;
    double acc = 0.0;
    for (std::size_t i = 0; i < layer.in; ++i) acc += row[i] * x[i];
    y[o] += acc;
  }
}

double activate(Activation a, double x) {
  return a == Activation::relu ? (x > 0.0 ? x : 0.0) : std::tanh(x);
}

double activate_grad(Activation a, double pre) {
  if (a == Activation::relu) return pre > 0.0 ? 1.0 : 0.0;
  const double t = std::tanh(pre);
  return 1.0 - t * t;
}

}  // namespace

std::vector<double> forward(const Mlp& model, std::span<const double> input,
                            ForwardCache& cache) {
  check_input(model, input);
  const std::size_t depth = model.layers.size();
  cache.inputs.resize(depth);
  cache.pre.resize(depth);
  cache.inputs[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < depth; ++l) {
    affine(model.layers[l], cache.inputs[l], cache.pre[l]);
    if (l + 1 < depth) {
      auto& next = cache.inputs[l + 1];
      next.resize(cache.pre[l].size());
      for (std::size_t i = 0; i < next.size(); ++i) {
        next[i] = activate(model.spec.activation, cache.pre[l][i]);
      }
    }
  }
  return cache.pre.back();
}

LogitVector forward(const Mlp& model, std::span<const double> input) {
  ForwardCache cache;
  return LogitVector(forward(model, input, cache));
}

void accumulate_backward(const Mlp& model, const ForwardCache& cache,
                         std::span<const double> logit_grad, double weight, ParamBuffers& grads) {
  if (logit_grad.size() != model.spec.num_classes) {
    throw std::invalid_argument("logit gradient has wrong length");
  }
  std::vector<double> delta(logit_grad.begin(), logit_grad.end());
  std::vector<double> prev;
  for (std::size_t l = model.layers.size(); l-- > 0;) {
    const auto& layer = model.layers[l];
    auto& g = grads.layers[l];
    const auto& x = cache.inputs[l];
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double d = weight * delta[o];
      if (d == 0.0) continue;
      double* row = g.weights.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) row[i] += d * x[i];
      g.bias[o] += d;
    }
    if (l == 0) break;
    prev.assign(layer.in, 0.0);
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* row = layer.weights.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) prev[i] += row[i] * d;
    }
    const auto& pre = cache.pre[l - 1];
    for (std::size_t i = 0; i < prev.size(); ++i) {
      prev[i] *= activate_grad(model.spec.activation, pre[i]);
    }
    delta.swap(prev);
  }
}

ParamBuffers backward(const Mlp& model, std::span<const double> input,
                      std::span<const double> logit_grad) {
  ForwardCache cache;
  forward(model, input, cache);
  auto grads = ParamBuffers::zeros_like(model);
  accumulate_backward(model, cache, logit_grad, 1.0, grads);
  return grads;
}

void SgdConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must be in [0,1)");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("weight_decay must be >= 0");
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0)) {
    throw std::invalid_argument("lr_decay_factor must be in (0,1]");
  }
  for (std::size_t i = 0; i < lr_decay_epochs.size(); ++i) {
    const int m = lr_decay_epochs[i];
    if (m < 1 || m > epochs) throw std::invalid_argument("decay epoch outside [1, epochs]");
    if (i > 0 && m <= lr_decay_epochs[i - 1]) {
      throw std::invalid_argument("decay epochs must be strictly increasing");
    }
  }
}

void sgd_step(Mlp& model, const ParamBuffers& grads, ParamBuffers& velocity,
              const SgdConfig& config, double current_lr) {
  if (grads.layers.size() != model.layers.size() ||
      velocity.layers.size() != model.layers.size()) {
    throw std::invalid_argument("parameter buffer shape mismatch");
  }
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    auto& w = model.layers[l];
    const auto& g = grads.layers[l];
    auto& v = velocity.layers[l];
    if (g.weights.size() != w.weights.size() || v.weights.size() != w.weights.size() ||
        g.bias.size() != w.bias.size() || v.bias.size() != w.bias.size()) {
      throw std::invalid_argument("parameter buffer shape mismatch in layer " + std::to_string(l));
    }
    for (std::size_t j = 0; j < w.weights.size(); ++j) {
      v.weights[j] = config.momentum * v.weights[j] + g.weights[j] +
                     config.weight_decay * w.weights[j];
      w.weights[j] -= current_lr * v.weights[j];
    }
    for (std::size_t j = 0; j < w.bias.size(); ++j) {
      v.bias[j] = config.momentum * v.bias[j] + g.bias[j] + config.weight_decay * w.bias[j];
      w.bias[j] -= current_lr * v.bias[j];
    }
  }
}

double lr_at_epoch(const SgdConfig& config, int epoch) {
  if (epoch < 0 || epoch >= config.epochs) {
    throw std::out_of_range("epoch " + std::to_string(epoch) + " outside [0, " +
                            std::to_string(config.epochs) + ")");
  }
  double lr = config.learning_rate;
  for (int m : config.lr_decay_epochs) {
    if (m <= epoch) lr *= config.lr_decay_factor;
  }
  return lr;
}

}  // namespace redistill
