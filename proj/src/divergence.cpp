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

#include "redistill/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace redistill {

namespace {

bool is_kl(double lambda) { return std::abs(lambda) < DivergenceOrder::kBranchTolerance; }
bool is_reverse_kl(double lambda) {
  return std::abs(lambda + 1.0) < DivergenceOrder::kBranchTolerance;
}

double floored(double x) { return std::max(x, kProbFloor); }

void check_pair(const ProbVector& p, const ProbVector& q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("distribution dimensions differ");
  }
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0.0 && q[k] <= 0.0) {
      throw std::domain_error("q has zero mass where p is positive (class " +
                              std::to_string(k) + ")");
    }
  }
}

void check_reverse_support(const ProbVector& p, const ProbVector& q) {
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (q[k] > 0.0 && p[k] <= 0.0) {
      throw std::domain_error("reverse KL needs p > 0 wherever q > 0 (class " +
                              std::to_string(k) + ")");
    }
  }
}

}  // namespace

double gamma_log(double x, double gamma) {
  if (!(x > 0.0)) throw std::domain_error("gamma_log is undefined for x <= 0");
  const double a = 1.0 - gamma;
  if (std::abs(a) < 1e-6) return std::log(x);
  return std::expm1(a * std::log(x)) / a;
}

namespace detail {

void softmax(std::span<const double> logits, double tau, std::span<double> out) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp((logits[k] - mx) / tau);
    sum += out[k];
  }
  for (auto& v : out) v /= sum;
}

// Each class contributes q * g(p/q) / (lambda (lambda + 1)) with
// g(r) = r^(lambda+1) - 1 - (lambda+1)(r - 1). On the simplex the sum equals the
// textbook form, but every term has the sign of the total, so there is no
// cancellation when p is close to q. At lambda = 1 the term is (p - q)^2 / q.
double power_divergence(std::span<const double> p, std::span<const double> q, double lambda) {
  double acc = 0.0;
  if (is_reverse_kl(lambda)) {
    // p * (s log s - s + 1), s = q / p.
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double pk = floored(p[k]);
      const double d = (q[k] - pk) / pk;
      acc += q[k] > 0.0 ? pk * ((1.0 + d) * std::log1p(d) - d) : p[k];
    }
    return std::max(acc, 0.0);
  }
  if (is_kl(lambda)) {
    // q * (r log r - r + 1), r = p / q.
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double qk = floored(q[k]);
      const double d = (p[k] - qk) / qk;
      acc += p[k] > 0.0 ? qk * ((1.0 + d) * std::log1p(d) - d) : q[k];
    }
    return std::max(acc, 0.0);
  }
  const double a = lambda + 1.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0.0) {
      const double qk = floored(q[k]);
      const double d = (p[k] - qk) / qk;
      acc += qk * (std::expm1(a * std::log1p(d)) - a * d) / (lambda * a);
    } else {
      acc += q[k] / a;
    }
  }
  return std::max(acc, 0.0);
}

void grad_wrt_logits(std::span<const double> p, std::span<const double> q, double lambda,
                     std::span<double> out) {
  const std::size_t n = p.size();
  if (is_kl(lambda)) {
    for (std::size_t j = 0; j < n; ++j) out[j] = q[j] - p[j];
    return;
  }
  if (is_reverse_kl(lambda)) {
    double rkl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (q[i] > 0.0) rkl += q[i] * std::log(q[i] / floored(p[i]));
    }
    for (std::size_t j = 0; j < n; ++j) {
      out[j] = q[j] > 0.0 ? q[j] * (std::log(q[j] / floored(p[j])) - rkl) : 0.0;
    }
    return;
  }
  // q_j r_j^(1+lambda) == p_j r_j^lambda, which avoids forming r^(1+lambda).
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] > 0.0) {
      out[i] = p[i] * std::pow(p[i] / floored(q[i]), lambda);
      s += out[i];
    } else {
      out[i] = 0.0;
    }
  }
  const double inv = 1.0 / (1.0 + lambda);
  for (std::size_t j = 0; j < n; ++j) out[j] = (q[j] * s - out[j]) * inv;
}

}  // namespace detail

ProbVector softmax(const LogitVector& logits, Temperature tau) {
  std::vector<double> out(logits.size());
  detail::softmax(logits.values(), tau.value(), out);
  return ProbVector(std::move(out));
}

double kl_divergence(const ProbVector& p, const ProbVector& q) {
  check_pair(p, q);
  return detail::power_divergence(p.values(), q.values(), 0.0);
}

double power_divergence(const ProbVector& p, const ProbVector& q, DivergenceOrder order) {
  check_pair(p, q);
  if (order.is_reverse_kl()) check_reverse_support(p, q);
  return detail::power_divergence(p.values(), q.values(), order.value());
}

std::vector<double> grad_divergence_wrt_probs(const ProbVector& p, const ProbVector& q,
                                              DivergenceOrder order) {
  check_pair(p, q);
  std::vector<double> g(p.size());
  if (order.is_reverse_kl()) {
    check_reverse_support(p, q);
    for (std::size_t j = 0; j < p.size(); ++j) {
      g[j] = q[j] > 0.0 ? std::log(q[j] / floored(p[j])) + 1.0 : 0.0;
    }
    return g;
  }
  const double lambda = order.is_kl() ? 0.0 : order.value();
  for (std::size_t j = 0; j < p.size(); ++j) {
    g[j] = p[j] > 0.0 ? -std::pow(p[j] / floored(q[j]), 1.0 + lambda) / (1.0 + lambda) : 0.0;
  }
  return g;
}

std::vector<double> hessian_divergence_wrt_probs(const ProbVector& p, const ProbVector& q,
                                                 DivergenceOrder order) {
  check_pair(p, q);
  std::vector<double> h(p.size());
  if (order.is_reverse_kl()) {
    check_reverse_support(p, q);
    for (std::size_t j = 0; j < p.size(); ++j) h[j] = q[j] > 0.0 ? 1.0 / q[j] : 0.0;
    return h;
  }
  const double lambda = order.is_kl() ? 0.0 : order.value();
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double qj = floored(q[j]);
    h[j] = p[j] > 0.0 ? std::pow(p[j] / qj, 1.0 + lambda) / qj : 0.0;
  }
  return h;
}

std::vector<double> grad_divergence_wrt_logits(const ProbVector& p,
                                               const LogitVector& student_logits,
                                               DivergenceOrder order, Temperature tau) {
  if (p.size() != student_logits.size()) {
    throw std::invalid_argument("distribution and logit dimensions differ");
  }
  std::vector<double> q(p.size());
  detail::softmax(student_logits.values(), tau.value(), q);
  std::vector<double> g(p.size());
  detail::grad_wrt_logits(p.values(), q, order.value(), g);
  for (auto& v : g) v /= tau.value();
  return g;
}

double scaled_temperature_divergence(const LogitVector& teacher_logits,
                                     const LogitVector& student_logits, DivergenceOrder order,
                                     Temperature tau) {
  if (teacher_logits.size() != student_logits.size()) {
    throw std::invalid_argument("teacher and student logit dimensions differ");
  }
  const double t = tau.value();
  return t * t *
         power_divergence(softmax(teacher_logits, tau), softmax(student_logits, tau), order);
}

std::vector<double> large_temperature_gradient(const LogitVector& teacher_logits,
                                               const LogitVector& student_logits,
                                               Temperature tau) {
  const std::size_t n = teacher_logits.size();
  if (student_logits.size() != n) {
    throw std::invalid_argument("teacher and student logit dimensions differ");
  }
  double mu = 0.0, mv = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mu += teacher_logits[k];
    mv += student_logits[k];
  }
  mu /= static_cast<double>(n);
  mv /= static_cast<double>(n);
  const auto q = softmax(student_logits, tau);
  const double t2 = tau.value() * tau.value();
  std::vector<double> g(n);
  for (std::size_t j = 0; j < n; ++j) {
    g[j] = q[j] * ((student_logits[j] - mv) - (teacher_logits[j] - mu)) / t2;
  }
  return g;
}

}  // namespace redistill
