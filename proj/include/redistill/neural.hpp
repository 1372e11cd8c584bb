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

// Small fully connected classifier with hand-written backpropagation and a
// heavy-ball SGD optimizer.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "redistill/types.hpp"

namespace redistill {

enum class Activation { relu, tanh };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct MlpSpec {
  std::size_t input_dim = 2;
  std::vector<std::size_t> hidden_dims;
  std::size_t num_classes = 2;
  Activation activation = Activation::relu;

  void validate() const;
  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

/// Affine map y = W x + b with W stored row-major as out x in.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  static DenseLayer zeros(std::size_t in, std::size_t out);
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct Mlp {
  MlpSpec spec;
  std::vector<DenseLayer> layers;

  /// Checks that layer shapes chain from input_dim to num_classes and that
  /// every weight is finite.
  void validate() const;
  std::size_t parameter_count() const;
  friend bool operator==(const Mlp&, const Mlp&) = default;
};

/// Parameter-shaped buffers (gradients, momentum).
struct ParamBuffers {
  std::vector<DenseLayer> layers;

  static ParamBuffers zeros_like(const Mlp& model);
  void fill_zero();
  void scale(double s);
  /// this += s * other
  void axpy(double s, const ParamBuffers& other);
};

/// Glorot-uniform weights, zero biases; deterministic in (spec, seed).
Mlp init_mlp(const MlpSpec& spec, std::uint64_t seed);

/// Intermediate values of one forward pass, reused by backpropagation.
struct ForwardCache {
  std::vector<std::vector<double>> inputs;  // input to each layer
  std::vector<std::vector<double>> pre;     // pre-activation output of each layer
};

LogitVector forward(const Mlp& model, std::span<const double> input);
std::vector<double> forward(const Mlp& model, std::span<const double> input, ForwardCache& cache);

/// Gradient of <logit_grad, logits(input)> with respect to every parameter.
ParamBuffers backward(const Mlp& model, std::span<const double> input,
                      std::span<const double> logit_grad);

/// Adds weight * d<logit_grad, logits>/dparams into `grads`, using a cache
/// filled by forward() on the same model.
void accumulate_backward(const Mlp& model, const ForwardCache& cache,
                         std::span<const double> logit_grad, double weight, ParamBuffers& grads);

struct SgdConfig {
  double learning_rate = 0.05;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  int epochs = 40;
  int batch_size = 64;
  std::vector<int> lr_decay_epochs{25, 32};
  double lr_decay_factor = 0.1;

  void validate() const;
  friend bool operator==(const SgdConfig&, const SgdConfig&) = default;
};

/// v <- momentum v + grad + weight_decay w;  w <- w - lr v.
void sgd_step(Mlp& model, const ParamBuffers& grads, ParamBuffers& velocity,
              const SgdConfig& config, double current_lr);

/// learning_rate * factor^(number of milestones <= epoch).
double lr_at_epoch(const SgdConfig& config, int epoch);

}  // namespace redistill
