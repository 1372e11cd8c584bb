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

// Cressie-Read power divergence family and its derivatives.
//
//   D_lambda(p, q) = 1 / (lambda (lambda + 1)) * sum_k p_k [ (p_k / q_k)^lambda - 1 ]
//
// lambda = 0 is the KL divergence KL(p, q), lambda = -1 is KL(q, p) and
// lambda = 1 is half the Pearson chi-square. All functions are pure.

#pragma once

#include <span>
#include <vector>

#include "redistill/types.hpp"

namespace redistill {

/// Probabilities below this floor are clamped before forming ratios.
inline constexpr double kProbFloor = 1e-12;

/// Box-Cox style relaxed logarithm (x^(1-gamma) - 1) / (1 - gamma).
/// Falls back to log(x) when |gamma - 1| < 1e-6. Throws std::domain_error for x <= 0.
double gamma_log(double x, double gamma);

/// Max-subtracted softmax of logits / tau.
ProbVector softmax(const LogitVector& logits, Temperature tau = Temperature(1.0));

/// KL(p, q) with 0 log 0 = 0. Throws on dimension mismatch or q_k <= 0 where p_k > 0.
double kl_divergence(const ProbVector& p, const ProbVector& q);

double power_divergence(const ProbVector& p, const ProbVector& q, DivergenceOrder order);

/// dD/dq_j = -(p_j/q_j)^(1+lambda) / (1+lambda), with q treated as unconstrained.
/// At lambda = -1 this is the reverse-KL gradient log(q_j/p_j) + 1.
std::vector<double> grad_divergence_wrt_probs(const ProbVector& p, const ProbVector& q,
                                              DivergenceOrder order);

/// Diagonal of the Hessian in q: (p_j/q_j)^(1+lambda) / q_j. Off-diagonals vanish.
std::vector<double> hessian_divergence_wrt_probs(const ProbVector& p, const ProbVector& q,
                                                 DivergenceOrder order);

/// Gradient of D_lambda(p, softmax(v / tau)) with respect to the student logits v:
///
///   (1/tau) * q_j / (1+lambda) * [ sum_i p_i (p_i/q_i)^lambda - (p_j/q_j)^(1+lambda) ]
///
/// `p` is the already-softened teacher distribution. Components sum to zero.
std::vector<double> grad_divergence_wrt_logits(const ProbVector& p,
                                               const LogitVector& student_logits,
                                               DivergenceOrder order, Temperature tau);

/// tau^2 * D_lambda(softmax(u/tau), softmax(v/tau)).
double scaled_temperature_divergence(const LogitVector& teacher_logits,
                                     const LogitVector& student_logits, DivergenceOrder order,
                                     Temperature tau);

/// Large-temperature approximation of the unscaled logit gradient for centered
/// logits: q_j^tau (v_j - u_j) / tau^2.
std::vector<double> large_temperature_gradient(const LogitVector& teacher_logits,
                                               const LogitVector& student_logits,
                                               Temperature tau);

namespace detail {

// Unchecked kernels over raw spans. Both inputs are assumed to be on the
// simplex; q is floored at kProbFloor. Used on hot paths (loss evaluation).
double power_divergence(std::span<const double> p, std::span<const double> q, double lambda);

// Writes d/dv_j D_lambda(p, q) for q = softmax(v) at unit temperature into `out`.
void grad_wrt_logits(std::span<const double> p, std::span<const double> q, double lambda,
                     std::span<double> out);

void softmax(std::span<const double> logits, double tau, std::span<double> out);

}  // namespace detail

}  // namespace redistill
