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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace redistill {

/// A point on the probability simplex with at least two classes.
///
/// Construction validates non-negativity and normalization (|sum - 1| <= 1e-9);
/// violations throw std::invalid_argument.
class ProbVector {
 public:
  static constexpr double kSumTolerance = 1e-9;

  explicit ProbVector(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& vec() const { return values_; }

  /// Uniform distribution over k classes.
  static ProbVector uniform(std::size_t k);
  /// Point mass on `cls`.
  static ProbVector one_hot(std::size_t k, std::size_t cls);

  friend bool operator==(const ProbVector&, const ProbVector&) = default;

 private:
  std::vector<double> values_;
};

/// Raw pre-softmax scores; every entry finite, at least two classes.
class LogitVector {
 public:
  explicit LogitVector(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& vec() const { return values_; }

  friend bool operator==(const LogitVector&, const LogitVector&) = default;

 private:
  std::vector<double> values_;
};

/// Order of the power divergence. Any finite value is accepted; the
/// singular points 0 and -1 are evaluated through their limits.
class DivergenceOrder {
 public:
  static constexpr double kBranchTolerance = 1e-6;

  explicit DivergenceOrder(double lambda);

  double value() const { return lambda_; }
  bool is_kl() const;          // |lambda| < kBranchTolerance
  bool is_reverse_kl() const;  // |lambda + 1| < kBranchTolerance

 private:
  double lambda_;
};

/// Softmax temperature, strictly positive.
class Temperature {
 public:
  explicit Temperature(double tau);
  double value() const { return tau_; }

 private:
  double tau_;
};

}  // namespace redistill
