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

#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "redistill/divergence.hpp"
#include "redistill/loss.hpp"
#include "redistill/rng.hpp"

namespace redistill::cli {

namespace {

const double kLambdas[] = {-0.5, 0.0, 1.0 / 3.0, 0.5, 2.0 / 3.0, 1.0, 1.5, 2.0};
const std::size_t kSizes[] = {2, 5, 100};

std::string fmt(std::span<const double> v) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  const std::size_t shown = std::min<std::size_t>(v.size(), 8);
  for (std::size_t i = 0; i < shown; ++i) os << (i ? ", " : "") << v[i];
  if (shown < v.size()) os << ", ... [" << v.size() << " entries]";
  os << ")";
  return os.str();
}

ProbVector draw_simplex(CounterRng& rng, std::size_t k, double floor) {
  std::vector<double> v(k);
  double s = 0.0;
  for (auto& x : v) s += x = floor - std::log(1.0 - rng.uniform());
  for (auto& x : v) x /= s;
  double total = 0.0;
  for (double x : v) total += x;
  *std::max_element(v.begin(), v.end()) += 1.0 - total;
  return ProbVector(std::move(v));
}

LogitVector draw_logits(CounterRng& rng, std::size_t k) {
  std::vector<double> v(k);
  for (auto& x : v) x = rng.uniform(-2.0, 2.0);
  return LogitVector(std::move(v));
}

double rel_vec_err(const std::vector<double>& a, const std::vector<double>& b) {
  double scale = 1e-8, m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]) / scale);
  return m;
}

std::vector<double> fd(const std::function<double(const std::vector<double>&)>& f,
                       std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    x[i] = x0 + h;
    const double fp = f(x);
    x[i] = x0 - h;
    const double fm = f(x);
    x[i] = x0;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Textbook sum, valid off the simplex too; the gradient is taken in this form.
double unconstrained_divergence(const ProbVector& p, const std::vector<double>& q, double lambda) {
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] <= 0.0) continue;
    acc += lambda == 0.0 ? p[k] * std::log(p[k] / q[k])
                         : p[k] * (std::pow(p[k] / q[k], lambda) - 1.0) / (lambda * (lambda + 1.0));
  }
  return acc;
}

class Suite {
 public:
  explicit Suite(std::string name) { result_.name = std::move(name); }

  // Records a check; returns false once the suite has failed.
  bool check(bool ok, const std::function<std::string()>& describe) {
    ++result_.checks;
    if (!ok && result_.passed) {
      result_.passed = false;
      result_.counterexample = describe();
    }
    return result_.passed;
  }
  SuiteResult result() const { return result_; }

 private:
  SuiteResult result_;
};

SuiteResult axioms(const VerifyOptions& o) {
  Suite s("axioms");
  CounterRng rng(derive_key(o.seed, {1}));
  for (int t = 0; t < o.trials; ++t) {
    const std::size_t k = kSizes[t % 3];
    const auto p = draw_simplex(rng, k, 0.0);
    const auto q = draw_simplex(rng, k, 0.0);
    for (double l : kLambdas) {
      const DivergenceOrder order(l);
      const double d = power_divergence(p, q, order);
      const double self = power_divergence(p, p, order);
      double gap = 0.0;
      for (std::size_t i = 0; i < k; ++i) gap = std::max(gap, std::abs(p[i] - q[i]));
      const auto where = [&](const char* what, double value) {
        return std::string(what) + ": lambda=" + std::to_string(l) + " p=" + fmt(p.values()) +
               " q=" + fmt(q.values()) + " value=" + std::to_string(value);
      };
      if (!s.check(d >= 0.0, [&] { return where("D < 0", d); })) return s.result();
      if (!s.check(self <= 1e-12, [&] { return where("D(p,p) > 1e-12", self); })) return s.result();
      if (!s.check(gap <= 1e-9 || d > 0.0, [&] { return where("D = 0 for p != q", d); })) {
        return s.result();
      }
    }
  }
  return s.result();
}

SuiteResult identities(const VerifyOptions& o) {
  Suite s("identities");
  CounterRng rng(derive_key(o.seed, {2}));
  for (int t = 0; t < o.trials; ++t) {
    const std::size_t k = kSizes[t % 3];
    // Entries >= 1e-3 keep the log terms well conditioned.
    const auto p = draw_simplex(rng, k, 0.2);
    const auto q = draw_simplex(rng, k, 0.2);
    double kl = 0.0, chi2 = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      kl += p[i] * std::log(p[i] / q[i]);
      chi2 += (p[i] - q[i]) * (p[i] - q[i]) / q[i];
    }
    const double d0 = power_divergence(p, q, DivergenceOrder(0.0));
    const double d1 = power_divergence(p, q, DivergenceOrder(1.0));
    const auto where = [&](const char* what, double a, double b) {
      std::ostringstream os;
      os.precision(17);
      os << what << ": p=" << fmt(p.values()) << " q=" << fmt(q.values()) << " got " << a
         << " expected " << b;
      return os.str();
    };
    if (!s.check(std::abs(d0 - kl) <= 1e-6, [&] { return where("D_0 != KL", d0, kl); })) {
      return s.result();
    }
    const double half = 0.5 * chi2;
    if (!s.check(std::abs(d1 - half) <= 1e-12 * std::max(half, 1e-300),
                 [&] { return where("D_1 != chi2/2", d1, half); })) {
      return s.result();
    }
  }
  return s.result();
}

SuiteResult gradients(const VerifyOptions& o) {
  Suite s("gradients");
  CounterRng rng(derive_key(o.seed, {3}));
  for (int t = 0; t < o.trials; ++t) {
    const std::size_t k = kSizes[t % 3];
    const double l = kLambdas[t % 8];
    const DivergenceOrder order(l);
    const auto p = draw_simplex(rng, k, 0.2);
    const auto q = draw_simplex(rng, k, 0.2);
    const auto where = [&](const char* what, const std::vector<double>& a,
                           const std::vector<double>& b) {
      return std::string(what) + ": lambda=" + std::to_string(l) + " p=" + fmt(p.values()) +
             " q=" + fmt(q.values()) + " analytic=" + fmt(a) + " finite-difference=" + fmt(b);
    };

    auto g = grad_divergence_wrt_probs(p, q, order);
    g[0] += o.gradient_perturbation;
    const auto gfd = fd([&](const std::vector<double>& x) {
      return unconstrained_divergence(p, x, l);
    }, q.vec(), 1e-6);
    if (!s.check(rel_vec_err(g, gfd) <= 1e-6, [&] { return where("probability gradient", g, gfd); })) {
      return s.result();
    }

    const auto h = hessian_divergence_wrt_probs(p, q, order);
    // Central difference of the closed-form gradient entry along its own coordinate.
    const double e = order.is_kl() ? 0.0 : l;
    std::vector<double> hfd(k);
    for (std::size_t i = 0; i < k; ++i) {
      const auto gi = [&](double qi) { return -std::pow(p[i] / qi, 1.0 + e) / (1.0 + e); };
      hfd[i] = (gi(q[i] + 1e-6) - gi(q[i] - 1e-6)) / 2e-6;
    }
    if (!s.check(rel_vec_err(h, hfd) <= 1e-4, [&] { return where("hessian diagonal", h, hfd); })) {
      return s.result();
    }

    const auto v = draw_logits(rng, k);
    const double tau = rng.uniform(0.5, 6.0);
    auto gl = grad_divergence_wrt_logits(p, v, order, Temperature(tau));
    gl[0] += o.gradient_perturbation;
    const auto glfd = fd([&](const std::vector<double>& x) {
      return power_divergence(p, softmax(LogitVector(x), Temperature(tau)), order);
    }, v.vec(), 1e-5);
    if (!s.check(rel_vec_err(gl, glfd) <= 1e-6, [&] { return where("logit gradient", gl, glfd); })) {
      return s.result();
    }
  }
  return s.result();
}

SuiteResult loss(const VerifyOptions& o) {
  Suite s("loss");
  CounterRng rng(derive_key(o.seed, {4}));
  for (int t = 0; t < o.trials; ++t) {
    const std::size_t k = kSizes[t % 3];
    const auto v = draw_logits(rng, k);
    const auto u = draw_logits(rng, k);
    const std::size_t label = rng.below(k);
    RedistillConfig c;
    c.lambda = kLambdas[t % 8];
    c.tau = rng.uniform(1.0, 6.0);
    auto r = redistill_loss(v, u, label, c);
    r.grad[0] += o.gradient_perturbation;
    const auto gfd = fd([&](const std::vector<double>& x) {
      return redistill_loss(LogitVector(x), u, label, c).loss;
    }, v.vec(), 1e-5);
    if (!s.check(rel_vec_err(r.grad, gfd) <= 1e-6, [&] {
          return "loss gradient: lambda=" + std::to_string(c.lambda) + " tau=" +
                 std::to_string(c.tau) + " label=" + std::to_string(label) +
                 " student=" + fmt(v.values()) + " teacher=" + fmt(u.values()) +
                 " analytic=" + fmt(r.grad) + " finite-difference=" + fmt(gfd);
        })) {
      return s.result();
    }

    // At lambda = 0 the objective is the decoupled KL form.
    RedistillConfig c0 = c;
    c0.lambda = 0.0;
    const double got = redistill_loss(v, u, label, c0).loss;
    const auto qs = softmax(v, Temperature(c.tau));
    const auto ps = softmax(u, Temperature(c.tau));
    const auto qh = softmax(v);
    double expect = -std::log(qh[label]);
    const double bt = ps[label], bs = qs[label];
    expect += c.tau * c.tau * (bt * std::log(bt / bs) + (1 - bt) * std::log((1 - bt) / (1 - bs)));
    if (k > 2) {
      double kl = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        if (j == label) continue;
        const double a = ps[j] / (1 - bt), b = qs[j] / (1 - bs);
        kl += a * std::log(a / b);
      }
      expect += c.beta * c.tau * c.tau * kl;
    }
    if (!s.check(std::abs(got - expect) <= 1e-10 * std::max(1.0, std::abs(expect)), [&] {
          std::ostringstream os;
          os.precision(17);
          os << "lambda=0 objective: student=" << fmt(v.values()) << " teacher=" << fmt(u.values())
             << " label=" << label << " got " << got << " expected " << expect;
          return os.str();
        })) {
      return s.result();
    }
  }
  return s.result();
}

}  // namespace

SuiteResult run_suite(const std::string& name, const VerifyOptions& options) {
  if (name == "axioms") return axioms(options);
  if (name == "identities") return identities(options);
  if (name == "gradients") return gradients(options);
  if (name == "loss") return loss(options);
  throw std::invalid_argument("unknown suite '" + name + "'");
}

}  // namespace redistill::cli
