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

#include "redistill/robust_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "redistill/divergence.hpp"

namespace redistill {

InfluenceResult influence_function(const ProbVector& q, double lambda) {
  if (std::abs(lambda + 1.0) < DivergenceOrder::kBranchTolerance) {
    throw std::domain_error("influence function is singular at lambda = -1");
  }
  InfluenceResult r;
  r.lambda = lambda;
  r.scaling = 1.0 / (1.0 + lambda);
  r.vector.resize(q.size());
  for (std::size_t j = 0; j < q.size(); ++j) r.vector[j] = r.scaling * q[j];
  return r;
}

std::vector<double> project_to_simplex(std::span<const double> x) {
  std::vector<double> u(x.begin(), x.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    css += u[i];
    const double t = (css - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) theta = t;
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::max(x[i] - theta, 0.0);
  return out;
}

namespace {

// Weighted mean objective and its unconstrained gradient in q.
struct Objective {
  std::span<const ProbVector> samples;
  std::span<const double> weights;
  double lambda;
  double total_weight;

  double value(std::span<const double> q) const {
    double f = 0.0;
    for (std::size_t n = 0; n < samples.size(); ++n) {
      if (weights[n] == 0.0) continue;
      f += weights[n] * detail::power_divergence(samples[n].values(), q, lambda);
    }
    return f / total_weight;
  }

  void gradient(std::span<const double> q, std::span<double> g) const {
    std::fill(g.begin(), g.end(), 0.0);
    const bool kl = std::abs(lambda) < DivergenceOrder::kBranchTolerance;
    const bool rkl = std::abs(lambda + 1.0) < DivergenceOrder::kBranchTolerance;
    for (std::size_t n = 0; n < samples.size(); ++n) {
      const double w = weights[n] / total_weight;
      if (w == 0.0) continue;
      const auto& p = samples[n];
      for (std::size_t j = 0; j < q.size(); ++j) {
        const double qj = std::max(q[j], kProbFloor);
        if (rkl) {
          g[j] += w * (std::log(qj / std::max(p[j], kProbFloor)) + 1.0);
        } else if (p[j] > 0.0) {
          const double l = kl ? 0.0 : lambda;
          g[j] -= w * std::pow(p[j] / qj, 1.0 + l) / (1.0 + l);
        }
      }
    }
  }
};

double step_norm(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

ProbVector fit_simplex_center(std::span<const ProbVector> samples, std::span<const double> weights,
                              double lambda, const SimplexFitOptions& options,
                              const ProbVector* warm_start) {
  if (samples.empty()) throw std::invalid_argument("empty sample");
  if (weights.size() != samples.size()) throw std::invalid_argument("weights/sample size differ");
  const std::size_t k = samples.front().size();
  for (const auto& s : samples) {
    if (s.size() != k) throw std::invalid_argument("sample dimensions differ");
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("weights must have positive total");

  const Objective obj{samples, weights, lambda, total};
  std::vector<double> q = warm_start ? warm_start->vec() : ProbVector::uniform(k).vec();
  std::vector<double> g(k), trial(k);
  double f = obj.value(q);
  double step = options.initial_step;
  const double slack = 8.0 * std::numeric_limits<double>::epsilon();

  for (int it = 0; it < options.max_iterations; ++it) {
    obj.gradient(q, g);
    for (std::size_t j = 0; j < k; ++j) trial[j] = q[j] - options.initial_step * g[j];
    const double mapping = step_norm(q, project_to_simplex(trial)) / options.initial_step;
    if (mapping < options.tolerance) return ProbVector(q);

    // Backtracking on the sufficient-decrease condition of projected gradient.
    for (;;) {
      for (std::size_t j = 0; j < k; ++j) trial[j] = q[j] - step * g[j];
      auto next = project_to_simplex(trial);
      const double d = step_norm(next, q);
      const double fn = obj.value(next);
      if (fn <= f - 0.5 * d * d / step + slack * std::abs(f) || step < 1e-14) {
        q = std::move(next);
        f = fn;
        break;
      }
      step *= 0.5;
    }
    step = std::min(options.initial_step, step * 2.0);
  }
  throw std::runtime_error("simplex fit did not converge within " +
                           std::to_string(options.max_iterations) + " iterations");
}

std::vector<double> influence_empirical(std::span<const ProbVector> base_sample,
                                        const ProbVector& outlier, double epsilon, double lambda,
                                        const SimplexFitOptions& options) {
  if (!(epsilon > 0.0 && epsilon <= 0.1)) {
    throw std::invalid_argument("epsilon must lie in (0, 0.1]");
  }
  if (base_sample.empty()) throw std::invalid_argument("empty base sample");
  if (outlier.size() != base_sample.front().size()) {
    throw std::invalid_argument("outlier dimension differs from sample");
  }
  std::vector<double> w(base_sample.size(), 1.0);
  const ProbVector q0 = fit_simplex_center(base_sample, w, lambda, options);

  std::vector<ProbVector> augmented(base_sample.begin(), base_sample.end());
  augmented.push_back(outlier);
  w.push_back(epsilon);
  const ProbVector q1 = fit_simplex_center(augmented, w, lambda, options, &q0);

  std::vector<double> out(q0.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = (q1[j] - q0[j]) / epsilon;
  return out;
}

double gof_statistic(std::span<const std::uint64_t> observed_counts, const ProbVector& expected,
                     double lambda) {
  if (observed_counts.size() != expected.size()) {
    throw std::invalid_argument("count and expected dimensions differ");
  }
  const std::uint64_t total =
      std::accumulate(observed_counts.begin(), observed_counts.end(), std::uint64_t{0});
  if (total == 0) throw std::invalid_argument("goodness-of-fit needs a positive total count");
  for (std::size_t k = 0; k < expected.size(); ++k) {
    if (!(expected[k] > 0.0)) throw std::invalid_argument("expected probabilities must be > 0");
  }
  const double n = static_cast<double>(total);
  std::vector<double> observed(observed_counts.size());
  for (std::size_t k = 0; k < observed.size(); ++k) {
    observed[k] = static_cast<double>(observed_counts[k]) / n;
  }
  return 2.0 * n * detail::power_divergence(observed, expected.values(), lambda);
}

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw std::domain_error("gamma shape must be > 0");
  if (x <= 0.0) return 0.0;
  const double log_prefix = a * std::log(x) - x - std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a, sum = term;
    for (int n = 1; n < 10000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-17) break;
    }
    return std::min(1.0, sum * std::exp(log_prefix));
  }
  // Lentz continued fraction for Q(a, x).
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-17) break;
  }
  return std::max(0.0, 1.0 - std::exp(log_prefix) * h);
}

double chi2_cdf(double x, double df) { return regularized_gamma_p(0.5 * df, 0.5 * x); }

double chi2_upper_quantile(double upper_tail, double df) {
  if (!(upper_tail > 0.0 && upper_tail < 1.0)) {
    throw std::invalid_argument("upper tail probability must lie in (0, 1)");
  }
  if (!(df > 0.0)) throw std::invalid_argument("degrees of freedom must be > 0");
  const double target = 1.0 - upper_tail;

  // Standard normal quantile by bisection on erfc; only seeds the bracket.
  double zlo = -40.0, zhi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (zlo + zhi);
    (0.5 * std::erfc(-mid / std::numbers::sqrt2) < target ? zlo : zhi) = mid;
  }
  const double z = 0.5 * (zlo + zhi);
  const double c = 2.0 / (9.0 * df);
  const double wh = df * std::pow(std::max(1.0 - c + z * std::sqrt(c), 1e-3), 3.0);

  double lo = 0.5 * wh, hi = 2.0 * wh + 1.0;
  while (chi2_cdf(lo, df) > target) lo *= 0.5;
  while (chi2_cdf(hi, df) < target) hi *= 2.0;
  for (int i = 0; i < 300 && hi - lo > 1e-13 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (chi2_cdf(mid, df) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void AlternativeSpec::validate() const {
  if (k_classes < 2) throw std::invalid_argument("alternative needs at least 2 classes");
  if (!std::isfinite(delta) || !(delta > -1.0) ||
      !(delta / static_cast<double>(k_classes - 1) < 1.0)) {
    throw std::invalid_argument("delta " + std::to_string(delta) + " is invalid for K = " +
                                std::to_string(k_classes) +
                                " (need -1 < delta and delta / (K - 1) < 1)");
  }
}

ProbVector AlternativeSpec::distribution() const {
  validate();
  const double k = static_cast<double>(k_classes);
  std::vector<double> p(k_classes, (1.0 - delta / (k - 1.0)) / k);
  p.back() = (1.0 + delta) / k;
  return ProbVector(std::move(p));
}

std::uint64_t sample_binomial(std::uint64_t n, double p, CounterRng& rng) {
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  if (p > 0.5) return n - sample_binomial(n, 1.0 - p, rng);
  const double log_f0 = static_cast<double>(n) * std::log1p(-p);
  if (log_f0 < -700.0) {
    std::uint64_t k = 0;
    for (std::uint64_t i = 0; i < n; ++i) k += rng.bernoulli(p) ? 1 : 0;
    return k;
  }
  // Inversion: walk the pmf from 0.
  const double ratio = p / (1.0 - p);
  double f = std::exp(log_f0), cdf = f;
  const double u = rng.uniform();
  std::uint64_t k = 0;
  while (u > cdf && k < n) {
    f *= ratio * static_cast<double>(n - k) / static_cast<double>(k + 1);
    ++k;
    cdf += f;
  }
  return k;
}

std::vector<std::uint64_t> sample_multinomial(std::uint64_t n, std::span<const double> probs,
                                              CounterRng& rng) {
  std::vector<std::uint64_t> counts(probs.size(), 0);
  double mass = 1.0;
  std::uint64_t remaining = n;
  for (std::size_t k = 0; k + 1 < probs.size() && remaining > 0; ++k) {
    const double pk = mass > 0.0 ? std::clamp(probs[k] / mass, 0.0, 1.0) : 0.0;
    counts[k] = sample_binomial(remaining, pk, rng);
    remaining -= counts[k];
    mass -= probs[k];
  }
  counts.back() += remaining;
  return counts;
}

PowerEstimate mc_power(const AlternativeSpec& alt, double lambda, std::uint64_t sample_size,
                       double significance, std::uint64_t trials, std::uint64_t seed) {
  alt.validate();
  if (trials < 100) throw std::invalid_argument("mc_power needs at least 100 trials");
  if (!(significance > 0.0 && significance < 1.0)) {
    throw std::invalid_argument("significance must lie in (0, 1)");
  }
  if (sample_size == 0) throw std::invalid_argument("sample size must be >= 1");
  const ProbVector h1 = alt.distribution();
  const ProbVector h0 = ProbVector::uniform(static_cast<std::size_t>(alt.k_classes));
  const double crit = chi2_upper_quantile(significance, alt.k_classes - 1.0);

  std::uint64_t rejections = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    CounterRng rng(derive_key(seed, {0x706f776572ULL, t}));
    const auto counts = sample_multinomial(sample_size, h1.values(), rng);
    if (gof_statistic(counts, h0, lambda) > crit) ++rejections;
  }
  PowerEstimate est;
  est.trials = trials;
  est.sample_size = sample_size;
  est.significance = significance;
  est.critical_value = crit;
  est.rejection_rate = static_cast<double>(rejections) / static_cast<double>(trials);
  est.std_error = std::sqrt(est.rejection_rate * (1.0 - est.rejection_rate) /
                            static_cast<double>(trials));
  return est;
}

double sign_test_p_value(std::size_t wins, std::size_t losses) {
  const std::size_t n = wins + losses;
  if (n == 0) return 1.0;
  const double log_half_n = -static_cast<double>(n) * std::log(2.0);
  double p = 0.0;
  for (std::size_t i = wins; i <= n; ++i) {
    const double log_choose = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0);
    p += std::exp(log_choose + log_half_n);
  }
  return std::min(1.0, p);
}

}  // namespace redistill
