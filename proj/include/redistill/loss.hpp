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

// Distillation objectives over a single (student logits, teacher logits, label)
// triple. Every objective returns the loss together with its exact gradient
// with respect to the student logits.

#pragma once

#include <cstddef>
#include <vector>

#include "redistill/types.hpp"

namespace redistill {

/// Hyper-parameters of the robust decoupled objective.
///
///   loss = hard_weight * CE(label, softmax(v))
///        + alpha * tau^2 * D_lambda(p_target^tau,    q_target^tau)
///        + beta  * tau^2 * D_lambda(p_nontarget^tau, q_nontarget^tau)
struct RedistillConfig {
  double lambda = 2.0 / 3.0;
  double alpha = 1.0;
  double beta = 8.0;
  double tau = 4.0;
  double hard_weight = 1.0;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;

  friend bool operator==(const RedistillConfig&, const RedistillConfig&) = default;
};

/// Target-vs-rest binary split plus the renormalized distribution over the
/// non-target classes (ascending class order, target removed). The
/// conditional has K - 1 entries, so for K = 2 it is the single value 1.0 and
/// cannot be a ProbVector.
struct DecoupledDistributions {
  ProbVector target_binary;
  std::vector<double> nontarget_conditional;
};

/// Mass below which the non-target conditional is treated as undefined.
inline constexpr double kDegenerateMass = 1e-9;

/// Throws std::out_of_range for a bad class index and std::domain_error when
/// 1 - probs[target] < kDegenerateMass.
DecoupledDistributions decouple(const ProbVector& probs, std::size_t target_class);

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d student_logits
};

LossAndGrad redistill_loss(const LogitVector& student_logits, const LogitVector& teacher_logits,
                           std::size_t label, const RedistillConfig& config);

/// Hinton-style KD: c1 * CE(label, softmax(v)) + c2 * tau^2 * KL(p^tau, q^tau).
LossAndGrad kd_loss(const LogitVector& student_logits, const LogitVector& teacher_logits,
                    std::size_t label, double c1, double c2, double tau);

/// Plain cross-entropy against the label, with gradient softmax(v) - onehot.
LossAndGrad cross_entropy_loss(const LogitVector& student_logits, std::size_t label);

}  // namespace redistill
