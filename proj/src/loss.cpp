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

#include "redistill/loss.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "redistill/divergence.hpp"

namespace redistill {

namespace {

void check_inputs(const LogitVector& student, const LogitVector& teacher, std::size_t label) {
  if (student.size() != teacher.size()) {
    throw std::invalid_argument("student and teacher logit dimensions differ");
  }
  if (label >= student.size()) {
    throw std::out_of_range("label " + std::to_string(label) + " out of range for " +
                            std::to_string(student.size()) + " classes");
  }
}

// -log softmax(v)[label] and its gradient, accumulated with weight w.
double add_cross_entropy(std::span<const double> v, std::size_t label, double w,
                         std::span<double> grad) {
  const double mx = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - mx);
  const double lse = mx + std::log(sum);
  for (std::size_t k = 0; k < v.size(); ++k) {
    grad[k] += w * (std::exp(v[k] - lse) - (k == label ? 1.0 : 0.0));
  }
  return w * (lse - v[label]);
}

// Softmax over every entry except `skip`, written densely (K - 1 entries).
std::vector<double> softmax_without(std::span<const double> v, std::size_t skip, double tau) {
  std::vector<double> rest;
  rest.reserve(v.size() - 1);
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k != skip) rest.push_back(v[k]);
  }
  std::vector<double> out(rest.size());
  detail::softmax(rest, tau, out);
  return out;
}

}  // namespace

void RedistillConfig::validate() const {
  if (!std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be > 0");
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
  if (!(hard_weight >= 0.0)) throw std::invalid_argument("hard_weight must be >= 0");
}

DecoupledDistributions decouple(const ProbVector& probs, std::size_t target_class) {
  if (target_class >= probs.size()) {
    throw std::out_of_range("target class out of range");
  }
  double rest = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (k != target_class) rest += probs[k];
  }
  if (rest < kDegenerateMass) {
    throw std::domain_error("non-target mass is degenerate (< 1e-9)");
  }
  std::vector<double> cond;
  cond.reserve(probs.size() - 1);
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (k != target_class) cond.push_back(probs[k] / rest);
  }
  return {ProbVector({probs[target_class], rest}), std::move(cond)};
}

LossAndGrad cross_entropy_loss(const LogitVector& student_logits, std::size_t label) {
  if (label >= student_logits.size()) throw std::out_of_range("label out of range");
  LossAndGrad out;
  out.grad.assign(student_logits.size(), 0.0);
  out.loss = add_cross_entropy(student_logits.values(), label, 1.0, out.grad);
  return out;
}

LossAndGrad redistill_loss(const LogitVector& student_logits, const LogitVector& teacher_logits,
                           std::size_t label, const RedistillConfig& config) {
  config.validate();
  check_inputs(student_logits, teacher_logits, label);
  const std::size_t n = student_logits.size();
  const auto v = student_logits.values();
  const auto u = teacher_logits.values();
  const double tau = config.tau;
  const double t2 = tau * tau;

  LossAndGrad out;
  out.grad.assign(n, 0.0);
  out.loss = add_cross_entropy(v, label, config.hard_weight, out.grad);

  std::vector<double> ps(n), qs(n);
  detail::softmax(u, tau, ps);
  detail::softmax(v, tau, qs);
  double p_rest = 0.0, q_rest = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == label) continue;
    p_rest += ps[k];
    q_rest += qs[k];
  }

  // Student non-target conditional, shared by both decoupled terms' chain rules.
  const std::vector<double> qc = softmax_without(v, label, tau);

  if (config.alpha != 0.0) {
    const std::array<double, 2> pb{ps[label], p_rest};
    const std::array<double, 2> qb{qs[label], q_rest};
    out.loss += config.alpha * t2 * detail::power_divergence(pb, qb, config.lambda);
    // The binary split is softmax over z = (v_t, logsumexp_{j != t} v_j) / tau.
    std::array<double, 2> gz{};
    detail::grad_wrt_logits(pb, qb, config.lambda, gz);
    const double scale = config.alpha * t2 / tau;
    std::size_t r = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == label) {
        out.grad[k] += scale * gz[0];
      } else {
        out.grad[k] += scale * gz[1] * qc[r++];
      }
    }
  }

  if (config.beta != 0.0 && n > 2 && p_rest >= kDegenerateMass && q_rest >= kDegenerateMass) {
    const std::vector<double> pc = softmax_without(u, label, tau);
    out.loss += config.beta * t2 * detail::power_divergence(pc, qc, config.lambda);
    std::vector<double> gc(n - 1);
    detail::grad_wrt_logits(pc, qc, config.lambda, gc);
    const double scale = config.beta * t2 / tau;
    std::size_t r = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k != label) out.grad[k] += scale * gc[r++];
    }
  }
  return out;
}

LossAndGrad kd_loss(const LogitVector& student_logits, const LogitVector& teacher_logits,
                    std::size_t label, double c1, double c2, double tau) {
  check_inputs(student_logits, teacher_logits, label);
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  if (!(c1 >= 0.0) || !(c2 >= 0.0)) throw std::invalid_argument("KD weights must be >= 0");
  const std::size_t n = student_logits.size();
  LossAndGrad out;
  out.grad.assign(n, 0.0);
  out.loss = add_cross_entropy(student_logits.values(), label, c1, out.grad);
  if (c2 != 0.0) {
    std::vector<double> ps(n), qs(n);
    detail::softmax(teacher_logits.values(), tau, ps);
    detail::softmax(student_logits.values(), tau, qs);
    out.loss += c2 * tau * tau * detail::power_divergence(ps, qs, 0.0);
    for (std::size_t k = 0; k < n; ++k) out.grad[k] += c2 * tau * (qs[k] - ps[k]);
  }
  return out;
}

}  // namespace redistill
