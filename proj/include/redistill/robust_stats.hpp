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

// Influence functions of power-divergence estimators and the power-divergence
// goodness-of-fit test family.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "redistill/rng.hpp"
#include "redistill/types.hpp"

namespace redistill {

struct InfluenceResult {
  std::vector<double> vector;
  double lambda = 0.0;
  double scaling = 1.0;  // 1 / (1 + lambda)
};

/// Closed-form influence q / (1 + lambda). Throws std::domain_error at lambda = -1.
InfluenceResult influence_function(const ProbVector& q, double lambda);

/// Euclidean projection onto the probability simplex (sort-based).
std::vector<double> project_to_simplex(std::span<const double> x);

struct SimplexFitOptions {
  double initial_step = 0.1;
  double tolerance = 1e-8;  // on the projected-gradient mapping norm
  int max_iterations = 100000;
};

/// argmin_q sum_n w_n D_lambda(y_n, q) over the simplex by projected gradient
/// descent with backtracking. Throws std::runtime_error on non-convergence.
ProbVector fit_simplex_center(std::span<const ProbVector> samples, std::span<const double> weights,
                              double lambda, const SimplexFitOptions& options = {},
                              const ProbVector* warm_start = nullptr);

/// (q_eps - q_0) / epsilon, where q_0 fits `base_sample` and q_eps additionally
/// carries `outlier` with weight epsilon. epsilon must lie in (0, 0.1].
std::vector<double> influence_empirical(std::span<const ProbVector> base_sample,
                                        const ProbVector& outlier, double epsilon, double lambda,
                                        const SimplexFitOptions& options = {});

/// 2N D_lambda(counts / N, expected). lambda = 1 is Pearson's X^2, lambda = 0 is G^2.
double gof_statistic(std::span<const std::uint64_t> observed_counts, const ProbVector& expected,
                     double lambda);

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);
double chi2_cdf(double x, double df);
/// x such that P(X > x) = upper_tail for X ~ chi^2(df).
double chi2_upper_quantile(double upper_tail, double df);

/// Bump (delta > 0) or dip (delta < 0) of the last class against a uniform null.
struct AlternativeSpec {
  int k_classes = 10;
  double delta = 0.0;

  /// Throws std::invalid_argument unless every cell lies in (0, 1).
  void validate() const;
  ProbVector distribution() const;
};

/// Multinomial draw by sequential conditional binomials.
std::vector<std::uint64_t> sample_multinomial(std::uint64_t n, std::span<const double> probs,
                                              CounterRng& rng);
std::uint64_t sample_binomial(std::uint64_t n, double p, CounterRng& rng);

struct PowerEstimate {
  double rejection_rate = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t sample_size = 0;
  double significance = 0.05;
  double std_error = 0.0;
  double critical_value = 0.0;
};

/// Monte-Carlo rejection rate of the lambda-test of H0 = uniform when data come
/// from `alt`. Trial t draws from a stream keyed by (seed, t), so the result is
/// independent of scheduling and shared across lambdas for the same seed.
PowerEstimate mc_power(const AlternativeSpec& alt, double lambda, std::uint64_t sample_size,
                       double significance, std::uint64_t trials, std::uint64_t seed);

/// One-sided sign test: P(X >= wins) for X ~ Binomial(wins + losses, 1/2). Ties
/// are discarded by the caller.
double sign_test_p_value(std::size_t wins, std::size_t losses);

}  // namespace redistill
