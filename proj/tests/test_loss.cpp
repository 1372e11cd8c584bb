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
#include <stdexcept>

#include <doctest.h>

#include "redistill/divergence.hpp"
#include "redistill/loss.hpp"
#include "test_util.hpp"

using namespace redistill;
using namespace redistill::testing;

namespace {

std::vector<double> fd_grad(const std::function<double(const std::vector<double>&)>& f,
                            const std::vector<double>& x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = central_diff(f, x, i, h);
  return g;
}

}  // namespace

TEST_CASE("decouple examples") {
  const auto u = decouple(ProbVector::uniform(4), 0);
  CHECK(u.target_binary[0] == doctest::Approx(0.25));
  CHECK(u.target_binary[1] == doctest::Approx(0.75));
  REQUIRE(u.nontarget_conditional.size() == 3);
  for (double x : u.nontarget_conditional) CHECK(x == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  const ProbVector p({0.7, 0.2, 0.1});
  const auto d = decouple(p, 0);
  CHECK(d.target_binary[0] == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(d.target_binary[1] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(d.nontarget_conditional[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(d.nontarget_conditional[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  // Reconstruction: probs[j] = (1 - p_t) * conditional[j'].
  CHECK(d.target_binary[1] * d.nontarget_conditional[0] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(d.target_binary[1] * d.nontarget_conditional[1] == doctest::Approx(0.1).epsilon(1e-15));

  const auto two = decouple(ProbVector({0.5, 0.5}), 1);
  CHECK(two.target_binary[0] == 0.5);
  REQUIRE(two.nontarget_conditional.size() == 1);
  CHECK(two.nontarget_conditional[0] == 1.0);

  CHECK_THROWS_AS(decouple(p, 3), std::out_of_range);
  CHECK_THROWS_AS(decouple(ProbVector::one_hot(3, 0), 0), std::domain_error);
}

TEST_CASE("decouple reconstruction on random vectors") {
  CounterRng rng(21);
  for (int t = 0; t < 100; ++t) {
    const auto p = random_simplex(rng, 7, 0.01);
    const std::size_t target = rng.below(7);
    const auto d = decouple(p, target);
    std::size_t r = 0;
    for (std::size_t j = 0; j < 7; ++j) {
      if (j == target) continue;
      CHECK(d.target_binary[1] * d.nontarget_conditional[r++] == doctest::Approx(p[j]).epsilon(1e-13));
    }
  }
}

TEST_CASE("config validation") {
  RedistillConfig c;
  CHECK_NOTHROW(c.validate());
  c.tau = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.beta = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.lambda = -1.0;
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("redistill_loss with identical logits leaves only the hard term") {
  const LogitVector v({2.0, 0.1, -0.3, 0.7});
  for (double l : {0.0, 2.0 / 3.0, 2.0}) {
    RedistillConfig c;
    c.lambda = l;
    const auto r = redistill_loss(v, v, 0, c);
    CHECK(r.loss == doctest::Approx(ce_oracle(v.vec(), 0)).epsilon(1e-13));
  }
}

TEST_CASE("alpha = beta = 0 reduces to cross-entropy") {
  CounterRng rng(22);
  for (int t = 0; t < 20; ++t) {
    const auto v = random_logits(rng, 5, 3.0);
    const auto u = random_logits(rng, 5, 3.0);
    RedistillConfig c;
    c.alpha = c.beta = 0.0;
    const auto r = redistill_loss(v, u, 2, c);
    const auto ce = cross_entropy_loss(v, 2);
    CHECK(r.loss == ce.loss);
    CHECK(r.grad == ce.grad);
    CHECK(ce.loss == doctest::Approx(ce_oracle(v.vec(), 2)).epsilon(1e-13));
  }
}

TEST_CASE("lambda = 0 matches an independent DKD evaluation") {
  CounterRng rng(23);
  for (std::size_t k : {2u, 5u, 100u}) {
    for (int t = 0; t < 30; ++t) {
      const auto v = random_logits(rng, k, 3.0);
      const auto u = random_logits(rng, k, 3.0);
      const std::size_t label = rng.below(k);
      RedistillConfig c;
      c.lambda = 0.0;
      c.alpha = rng.uniform(0.0, 2.0);
      c.beta = rng.uniform(0.0, 10.0);
      c.tau = rng.uniform(1.0, 6.0);
      c.hard_weight = rng.uniform(0.0, 2.0);
      const double got = redistill_loss(v, u, label, c).loss;
      const double ref = dkd_oracle(v.vec(), u.vec(), label, c.alpha, c.beta, c.tau, c.hard_weight);
      CHECK(std::abs(got - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST_CASE("redistill_loss gradient matches finite differences") {
  CounterRng rng(24);
  for (std::size_t k : {2u, 5u, 100u}) {
    for (int t = 0; t < 15; ++t) {
      const auto v = random_logits(rng, k, 2.0);
      const auto u = random_logits(rng, k, 2.0);
      const std::size_t label = rng.below(k);
      for (double l : {-0.5, 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0, 2.0}) {
        RedistillConfig c;
        c.lambda = l;
        c.tau = rng.uniform(1.0, 5.0);
        const auto r = redistill_loss(v, u, label, c);
        const auto f = [&](const std::vector<double>& x) {
          return redistill_loss(LogitVector(x), u, label, c).loss;
        };
        CHECK(max_rel_err(r.grad, fd_grad(f, v.vec(), 1e-5)) < 1e-6);
      }
    }
  }
}

TEST_CASE("kd_loss") {
  CounterRng rng(25);
  const auto v = random_logits(rng, 5, 2.0);
  const auto u = random_logits(rng, 5, 2.0);
  const auto ce = cross_entropy_loss(v, 1);
  const auto r0 = kd_loss(v, u, 1, 1.0, 0.0, 4.0);
  CHECK(r0.loss == ce.loss);
  CHECK(r0.grad == ce.grad);

  CHECK(kd_loss(v, v, 1, 0.7, 1.0, 4.0).loss == doctest::Approx(0.7 * ce.loss).epsilon(1e-13));

  const double tau = 4.0;
  const auto r = kd_loss(v, u, 1, 0.5, 0.9, tau);
  const double ref = 0.5 * ce_oracle(v.vec(), 1) +
                     0.9 * tau * tau * kl_oracle(softmax_oracle(u.vec(), tau), softmax_oracle(v.vec(), tau));
  CHECK(r.loss == doctest::Approx(ref).epsilon(1e-12));
  const auto f = [&](const std::vector<double>& x) { return kd_loss(LogitVector(x), u, 1, 0.5, 0.9, tau).loss; };
  CHECK(max_rel_err(r.grad, fd_grad(f, v.vec(), 1e-5)) < 1e-6);

  CHECK_THROWS_AS(kd_loss(v, u, 5, 1.0, 1.0, 4.0), std::out_of_range);
  CHECK_THROWS_AS(kd_loss(v, u, 0, 1.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(kd_loss(v, LogitVector({0.0, 1.0}), 0, 1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("degenerate non-target mass drops the non-target term") {
  // Teacher puts essentially all mass on the label at tau = 1.
  const LogitVector u({60.0, 0.0, 0.0});
  const LogitVector v({0.5, 0.2, -0.1});
  RedistillConfig c;
  c.tau = 1.0;
  c.beta = 5.0;
  const auto with_beta = redistill_loss(v, u, 0, c);
  c.beta = 0.0;
  const auto without = redistill_loss(v, u, 0, c);
  CHECK(with_beta.loss == without.loss);
  CHECK(with_beta.grad == without.grad);
  for (double g : with_beta.grad) CHECK(std::isfinite(g));
}
