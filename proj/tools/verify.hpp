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

// Self-checks behind `redistill verify`.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace redistill::cli {

struct VerifyOptions {
  std::uint64_t seed = 0;
  int trials = 1000;
  // Test-only: added to the first analytic gradient entry before comparison.
  double gradient_perturbation = 0.0;
};

struct SuiteResult {
  std::string name;
  bool passed = true;
  std::uint64_t checks = 0;
  std::string counterexample;  // first failure, empty when passed
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"axioms", "identities", "gradients", "loss"};
  return names;
}

/// Runs one named suite; stops at the first failing check.
SuiteResult run_suite(const std::string& name, const VerifyOptions& options);

}  // namespace redistill::cli
