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

#include <cmath>
#include <numeric>
#include <stdexcept>

#include <doctest.h>

#ifdef REDISTILL_HAVE_BOOST_MATH
#include <boost/math/distributions/chi_squared.hpp>
#endif

#include "redistill/divergence.hpp"
#include "redistill/robust_stats.hpp"
#include "test_util.hpp"

using namespace redistill;
using namespace redistill::testing;

namespace {

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<ProbVector> random_sample(CounterRng& rng, std::size_t n, std::size_t k) {
  std::vector<ProbVector> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_simplex(rng, k, 0.2));
  return out;
}

double pearson_counts(const std::vector<std::uint64_t>& c, const std::vector<double>& e) {
  const double n = std::accumulate(c.begin(), c.end(), 0.0);
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) s += (c[i] - n * e[i]) * (c[i] - n * e[i]) / (n * e[i]);
  return s;
}

double g2_counts(const std::vector<std::uint64_t>& c, const std::vector<double>& e) {
  const double n = std::accumulate(c.begin(), c.end(), 0.0);
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] > 0) s += c[i] * std::log(c[i] / (n * e[i]));
  }
  return 2.0 * s;
}

}  // namespace

TEST_CASE("influence_function") {
  const ProbVector q({0.1, 0.2, 0.3, 0.4});
  CHECK(influence_function(q, 0.0).vector == q.vec());
  const auto r = influence_function(q, 2.0 / 3.0);
  CHECK(r.scaling == doctest::Approx(0.6).epsilon(1e-15));
  for (std::size_t i = 0; i < 4; ++i) CHECK(r.vector[i] == doctest::Approx(0.6 * q[i]).epsilon(1e-15));
  const auto h = influence_function(q, 1.0);
  for (std::size_t i = 0; i < 4; ++i) CHECK(h.vector[i] == doctest::Approx(q[i] / 2.0).epsilon(1e-15));
  CHECK_THROWS_AS(influence_function(q, -1.0), std::domain_error);

  double prev = INFINITY;
  for (double l = 0.0; l <= 2.0; l += 0.125) {
    const double n = norm(influence_function(q, l).vector);
    CHECK(n < prev);
    prev = n;
  }
}

TEST_CASE("project_to_simplex") {
  const auto a = project_to_simplex(std::vector<double>{0.2, 0.3, 0.5});
  CHECK(a[0] == doctest::Approx(0.2));
  CHECK(a[2] == doctest::Approx(0.5));
  const auto b = project_to_simplex(std::vector<double>{2.0, 0.0});
  CHECK(b[0] == 1.0);
  CHECK(b[1] == 0.0);
  const auto c = project_to_simplex(std::vector<double>{0.0, 0.0, 0.0});
  for (double x : c) CHECK(x == doctest::Approx(1.0 / 3.0));

  // Optimality: <x - proj, y - proj> <= 0 for simplex points y.
  CounterRng rng(31);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> x(6);
    for (auto& xi : x) xi = rng.uniform(-2.0, 2.0);
    const auto p = project_to_simplex(x);
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    for (int s = 0; s < 5; ++s) {
      const auto y = random_simplex(rng, 6);
      double ip = 0.0;
      for (std::size_t i = 0; i < 6; ++i) ip += (x[i] - p[i]) * (y[i] - p[i]);
      CHECK(ip <= 1e-12);
    }
  }
}

TEST_CASE("fit_simplex_center reaches the closed-form KL optimum") {
  // For lambda = 0 the weighted minimizer of sum_n w_n KL(y_n, q) is the weighted mean.
  CounterRng rng(32);
  const auto sample = random_sample(rng, 8, 5);
  std::vector<double> w(8, 1.0);
  const auto q = fit_simplex_center(sample, w, 0.0);
  for (std::size_t k = 0; k < 5; ++k) {
    double mean = 0.0;
    for (const auto& y : sample) mean += y[k] / 8.0;
    CHECK(q[k] == doctest::Approx(mean).epsilon(1e-6));
  }
}

TEST_CASE("fit_simplex_center is stationary for other lambdas") {
  CounterRng rng(33);
  const auto sample = random_sample(rng, 6, 4);
  std::vector<double> w(6, 1.0);
  for (double l : {1.0 / 3.0, 2.0 / 3.0, 1.0, 2.0}) {
    const auto q = fit_simplex_center(sample, w, l);
    // KKT on the interior: the summed gradient is constant across coordinates.
    std::vector<double> g(4, 0.0);
    for (const auto& y : sample) {
      for (std::size_t k = 0; k < 4; ++k) g[k] += -std::pow(y[k] / q[k], 1.0 + l) / (1.0 + l);
    }
    for (std::size_t k = 1; k < 4; ++k) CHECK(g[k] == doctest::Approx(g[0]).epsilon(1e-6));
  }
}

TEST_CASE("influence_empirical") {
  CounterRng rng(34);
  const auto sample = random_sample(rng, 10, 5);
  std::vector<double> w(10, 1.0);

  SUBCASE("outlier at the optimum moves nothing") {
    for (double l : {0.0, 2.0 / 3.0}) {
      const auto q0 = fit_simplex_center(sample, w, l);
      CHECK(norm(influence_empirical(sample, q0, 1e-3, l)) < 1e-6);
    }
  }
  SUBCASE("converges as epsilon shrinks") {
    const auto outlier = ProbVector::one_hot(5, 2);
    for (double l : {0.0, 2.0 / 3.0, 1.0}) {
      const auto a = influence_empirical(sample, outlier, 1e-2, l);
      const auto b = influence_empirical(sample, outlier, 1e-3, l);
      const auto c = influence_empirical(sample, outlier, 1e-4, l);
      std::vector<double> ab(5), bc(5);
      for (std::size_t i = 0; i < 5; ++i) {
        ab[i] = a[i] - b[i];
        bc[i] = b[i] - c[i];
      }
      CHECK(norm(bc) < norm(ab));
    }
  }
  SUBCASE("refit direction lies in the simplex tangent space") {
    const auto d = influence_empirical(sample, ProbVector::one_hot(5, 0), 1e-4, 2.0 / 3.0);
    CHECK(std::abs(std::accumulate(d.begin(), d.end(), 0.0)) < 1e-6);
  }
  SUBCASE("argument checks") {
    CHECK_THROWS_AS(influence_empirical(sample, ProbVector::uniform(5), 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(influence_empirical(sample, ProbVector::uniform(5), 0.2, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(influence_empirical({}, ProbVector::uniform(5), 0.01, 0.0), std::invalid_argument);
  }
}

// Expected to fail: the damping claim holds for q/(1+lambda) but not for the
// simplex-constrained refit, whose perturbation grows with lambda for a one-hot
// outlier. Kept so the discrepancy stays visible in the test log.
TEST_CASE("larger lambda damps the empirical perturbation" * doctest::may_fail()) {
  CounterRng rng(35);
  const auto sample = random_sample(rng, 10, 5);
  const auto outlier = ProbVector::one_hot(5, 1);
  const double n0 = norm(influence_empirical(sample, outlier, 1e-4, 0.0));
  const double n23 = norm(influence_empirical(sample, outlier, 1e-4, 2.0 / 3.0));
  MESSAGE("norm at lambda 0: " << n0 << ", at lambda 2/3: " << n23);
  CHECK(n23 < n0);
}

TEST_CASE("gof_statistic") {
  const ProbVector half({0.5, 0.5});
  const std::vector<std::uint64_t> c{10, 30};
  CHECK(gof_statistic(c, half, 1.0) == doctest::Approx(10.0).epsilon(1e-14));
  const double g2 = 2.0 * (10.0 * std::log(0.5) + 30.0 * std::log(1.5));
  CHECK(gof_statistic(c, half, 0.0) == doctest::Approx(g2).epsilon(1e-14));
  CHECK(g2 == doctest::Approx(10.46).epsilon(1e-3));
  const std::vector<std::uint64_t> prop{20, 20};
  CHECK(gof_statistic(prop, half, 2.0 / 3.0) == 0.0);
  const std::vector<std::uint64_t> none{0, 0};
  CHECK_THROWS_AS(gof_statistic(none, half, 1.0), std::invalid_argument);

  CounterRng rng(36);
  for (int t = 0; t < 200; ++t) {
    const std::size_t k = 2 + rng.below(9);
    const auto e = random_simplex(rng, k, 0.1);
    std::vector<std::uint64_t> counts(k);
    for (auto& x : counts) x = rng.below(50);
    counts[0] += 1;
    CHECK(rel_err(gof_statistic(counts, e, 1.0), pearson_counts(counts, e.vec())) < 1e-9);
    CHECK(rel_err(gof_statistic(counts, e, 0.0), g2_counts(counts, e.vec())) < 1e-9);
  }
}

TEST_CASE("chi-square distribution functions") {
  CHECK(regularized_gamma_p(1.0, 2.0) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-13));
  CHECK(chi2_cdf(0.0, 3.0) == 0.0);
  // df = 2 is exponential with mean 2.
  CHECK(chi2_upper_quantile(0.05, 2.0) == doctest::Approx(-2.0 * std::log(0.05)).epsilon(1e-9));
#ifdef REDISTILL_HAVE_BOOST_MATH
  for (double df : {1.0, 2.0, 3.0, 9.0, 30.0, 99.0}) {
    boost::math::chi_squared_distribution<double> dist(df);
    for (double a : {0.5, 0.1, 0.05, 0.01, 1e-4}) {
      const double ref = boost::math::quantile(boost::math::complement(dist, a));
      CHECK(rel_err(chi2_upper_quantile(a, df), ref) < 1e-8);
    }
    for (double x : {0.1, 1.0, df, 3.0 * df}) {
      CHECK(std::abs(chi2_cdf(x, df) - boost::math::cdf(dist, x)) < 1e-12);
    }
  }
#endif
}

TEST_CASE("alternatives") {
  AlternativeSpec a{10, 0.5};
  const auto d = a.distribution();
  CHECK(d[9] == doctest::Approx(0.15));
  CHECK(d[0] == doctest::Approx((1.0 - 0.5 / 9.0) / 10.0));
  CHECK(AlternativeSpec{10, 0.0}.distribution() == ProbVector::uniform(10));
  CHECK_THROWS_AS((AlternativeSpec{10, -1.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((AlternativeSpec{10, 9.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((AlternativeSpec{1, 0.0}.validate()), std::invalid_argument);
}

TEST_CASE("samplers") {
  CounterRng rng(37);
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
  std::vector<double> mean(4, 0.0);
  const int reps = 4000;
  for (int r = 0; r < reps; ++r) {
    const auto c = sample_multinomial(100, p, rng);
    CHECK(std::accumulate(c.begin(), c.end(), std::uint64_t{0}) == 100);
    for (std::size_t i = 0; i < 4; ++i) mean[i] += c[i] / static_cast<double>(reps);
  }
  for (std::size_t i = 0; i < 4; ++i) {
    const double se = std::sqrt(100.0 * p[i] * (1.0 - p[i]) / reps);
    CHECK(std::abs(mean[i] - 100.0 * p[i]) < 4.0 * se);
  }
  CHECK(sample_binomial(50, 0.0, rng) == 0);
  CHECK(sample_binomial(50, 1.0, rng) == 50);
  // Large n exercises the fallback path.
  double s = 0.0;
  for (int r = 0; r < 200; ++r) s += sample_binomial(100000, 0.3, rng);
  CHECK(s / 200.0 == doctest::Approx(30000.0).epsilon(0.01));
}

TEST_CASE("mc_power") {
  const auto a = mc_power({10, 0.0}, 1.0, 200, 0.05, 1000, 9);
  const auto b = mc_power({10, 0.0}, 1.0, 200, 0.05, 1000, 9);
  CHECK(a.rejection_rate == b.rejection_rate);
  CHECK(a.std_error == doctest::Approx(std::sqrt(a.rejection_rate * (1.0 - a.rejection_rate) / 1000.0)));
  for (double l : {0.0, 2.0 / 3.0, 1.0}) {
    const auto r = mc_power({10, 0.0}, l, 200, 0.05, 2000, 3);
    CHECK(std::abs(r.rejection_rate - 0.05) <= 3.0 * r.std_error);
  }
  CHECK(mc_power({10, 0.5}, 1.0, 200, 0.05, 1000, 3).rejection_rate >
        mc_power({10, 0.5}, 0.0, 200, 0.05, 1000, 3).rejection_rate - 1e-12);
  CHECK_THROWS_AS(mc_power({10, 0.0}, 1.0, 200, 0.05, 99, 3), std::invalid_argument);
  CHECK_THROWS_AS(mc_power({10, 0.0}, 1.0, 200, 1.0, 100, 3), std::invalid_argument);
  CHECK_THROWS_AS(mc_power({10, 20.0}, 1.0, 200, 0.05, 100, 3), std::invalid_argument);
}

TEST_CASE("sign test") {
  // Direct binomial tail sum with n choose k computed iteratively.
  const auto oracle = [](int w, int l) {
    const int n = w + l;
    double tail = 0.0, c = 1.0;
    for (int k = 0; k <= n; ++k) {
      if (k >= w) tail += c;
      c = c * (n - k) / (k + 1);
    }
    return tail / std::pow(2.0, n);
  };
  for (int w = 0; w <= 20; ++w) {
    for (int l = 0; l + w <= 20; ++l) {
      if (w + l == 0) continue;
      CHECK(sign_test_p_value(w, l) == doctest::Approx(oracle(w, l)).epsilon(1e-12));
    }
  }
  CHECK(sign_test_p_value(9, 1) == doctest::Approx(11.0 / 1024.0));
  CHECK(sign_test_p_value(0, 0) == 1.0);
}
