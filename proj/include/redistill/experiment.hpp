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

// Value types describing a distillation experiment and its results.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "redistill/dataset.hpp"
#include "redistill/loss.hpp"
#include "redistill/neural.hpp"

namespace redistill {

enum class NoiseKind { none, label_flip, logit_bump, logit_dip, overconfidence };

std::string to_string(NoiseKind k);
NoiseKind noise_kind_from_string(const std::string& s);

struct NoiseModel {
  NoiseKind kind = NoiseKind::none;
  double rate = 0.0;       // fraction of corrupted teacher predictions
  double magnitude = 0.0;  // logit shift, or sharpening factor for overconfidence
  // Draw corruption once per sample instead of per (sample, epoch).
  bool fixed_per_sample = false;

  /// Throws std::invalid_argument; kind none requires rate 0.
  void validate() const;
  friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

enum class LossKind { cross_entropy, kd, dkd, redistill };

std::string to_string(LossKind k);
LossKind loss_kind_from_string(const std::string& s);

struct KdConfig {
  double c1 = 1.0;
  double c2 = 1.0;
  double tau = 4.0;
  friend bool operator==(const KdConfig&, const KdConfig&) = default;
};

struct LossConfig {
  LossKind kind = LossKind::redistill;
  RedistillConfig redistill;  // also supplies alpha, beta, tau, hard_weight for dkd
  KdConfig kd;
  friend bool operator==(const LossConfig&, const LossConfig&) = default;
};

inline SgdConfig student_defaults() {
  SgdConfig s;
  s.learning_rate = 0.002;
  return s;
}

struct ExperimentConfig {
  DatasetSpec dataset;
  MlpSpec teacher_spec{20, {256, 128}, 10, Activation::relu};
  MlpSpec student_spec{20, {32}, 10, Activation::relu};
  SgdConfig teacher_train;
  // The distillation objectives weight the soft term by beta * tau (32 with
  // the defaults), so the student base rate is scaled down to match.
  SgdConfig student_train = student_defaults();
  LossConfig loss;
  NoiseModel noise;
  std::vector<std::uint64_t> seeds{0};

  /// Checks every nested invariant plus: at least one seed, teacher and student
  /// agree on input_dim and num_classes, and both match the dataset.
  void validate() const;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// diverged: training loss blew up and the run stopped early; failed: the run
// threw before producing a model.
enum class RunStatus { ok, diverged, failed };

struct RunRecord {
  ExperimentConfig config;
  std::uint64_t seed = 0;
  std::string role;  // "teacher" or "student"
  std::vector<double> train_loss;    // per epoch
  std::vector<double> val_accuracy;  // per epoch
  double final_accuracy = 0.0;
  double wall_time_seconds = 0.0;
  RunStatus status = RunStatus::ok;
  std::string message;
  // Fraction of teacher predictions corrupted over the run (students only).
  double corrupted_fraction = 0.0;

  /// Equality on everything except wall time.
  bool same_outcome(const RunRecord& other) const;
  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

}  // namespace redistill
