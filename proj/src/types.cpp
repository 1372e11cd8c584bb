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

#include "redistill/types.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace redistill {

ProbVector::ProbVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) {
    throw std::invalid_argument("ProbVector needs at least 2 classes");
  }
  double sum = 0.0;
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("ProbVector entry must be finite and non-negative, got " +
                                  std::to_string(v));
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw std::invalid_argument("ProbVector entries sum to " + std::to_string(sum) +
                                ", expected 1");
  }
}

ProbVector ProbVector::uniform(std::size_t k) {
  return ProbVector(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

ProbVector ProbVector::one_hot(std::size_t k, std::size_t cls) {
  if (cls >= k) throw std::out_of_range("one_hot class index out of range");
  std::vector<double> v(k, 0.0);
  v[cls] = 1.0;
  return ProbVector(std::move(v));
}

LogitVector::LogitVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) {
    throw std::invalid_argument("LogitVector needs at least 2 classes");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("LogitVector entry is not finite");
  }
}

DivergenceOrder::DivergenceOrder(double lambda) : lambda_(lambda) {
  if (!std::isfinite(lambda)) throw std::invalid_argument("divergence order must be finite");
}

bool DivergenceOrder::is_kl() const { return std::abs(lambda_) < kBranchTolerance; }

bool DivergenceOrder::is_reverse_kl() const {
  return std::abs(lambda_ + 1.0) < kBranchTolerance;
}

Temperature::Temperature(double tau) : tau_(tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw std::invalid_argument("temperature must be positive and finite");
  }
}

}  // namespace redistill
