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

// Desk-scale teacher/student experiments.
//
// Every run is a pure function of (config, seed): the dataset, initial weights,
// mini-batch order and teacher corruption are all drawn from counter-based
// streams derived from the seed. Runs themselves are single-threaded; the
// multi-run drivers may execute independent (lambda, seed) cells concurrently
// and join them in a fixed order.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "redistill/dataset.hpp"
#include "redistill/experiment.hpp"
#include "redistill/neural.hpp"
#include "redistill/rng.hpp"
#include "redistill/types.hpp"

namespace redistill {

/// Applies `noise` with probability noise.rate using draws from `rng`:
///   label_flip      swap the top-1 logit with a uniformly chosen other class
///   logit_bump      add magnitude to a uniformly chosen class other than label
///   logit_dip       subtract magnitude from the label's logit
///   overconfidence  multiply every logit by (1 + magnitude)
/// `corrupted`, when given, reports whether the sample was perturbed.
LogitVector corrupt_teacher_logits(const LogitVector& logits, std::size_t label,
                                   const NoiseModel& noise, CounterRng& rng,
                                   bool* corrupted = nullptr);

/// Dataset for a run: the configured spec with its seed mixed with the run seed.
LabeledDataset run_dataset(const ExperimentConfig& config, std::uint64_t seed);

struct TrainedModel {
  Mlp model;
  RunRecord record;
};

/// Fraction of validation rows whose argmax logit equals the label.
double validation_accuracy(const Mlp& model, const LabeledDataset& data);

TrainedModel train_teacher(const ExperimentConfig& config, std::uint64_t seed);

TrainedModel distill_student(const ExperimentConfig& config, const Mlp& teacher,
                             std::uint64_t seed);

struct AggregateRow {
  double lambda = 0.0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // sample standard deviation (n - 1)
  std::size_t n_seeds = 0;    // successful runs
  std::size_t n_failed = 0;
  std::vector<double> accuracies;  // per seed, config.seeds order; NaN for failed cells
};

struct SweepResult {
  std::vector<AggregateRow> rows;  // ascending lambda
  std::vector<RunRecord> records;  // (lambda, seed) order
};

/// Mean and sample standard deviation of `xs`, skipping NaN.
AggregateRow aggregate(double lambda, const std::vector<double>& xs);

/// Distills one student per (lambda, seed) with loss kind redistill. Teachers
/// are trained once per seed and shared across lambdas.
SweepResult lambda_sweep(const ExperimentConfig& config, const std::vector<double>& lambdas,
                         unsigned threads = 1);

struct PairwiseComparison {
  std::string first;
  std::string second;
  std::vector<double> differences;  // first - second, per seed
  double median_difference = 0.0;
  std::size_t wins = 0;
  std::size_t losses = 0;
  std::size_t ties = 0;
  double sign_test_p = 1.0;  // one-sided, H1: first > second
};

struct ComparisonReport {
  std::map<std::string, AggregateRow> per_loss;  // keyed by loss name
  std::vector<PairwiseComparison> pairs;
  std::vector<RunRecord> records;
};

/// Runs kd, dkd and redistill on identical seeds, data and noise.
ComparisonReport compare_losses(const ExperimentConfig& config, unsigned threads = 1);

/// Seed-matched comparison of two accuracy series; NaN cells are skipped.
PairwiseComparison compare_paired(const std::string& first, const std::vector<double>& a,
                                  const std::string& second, const std::vector<double>& b);

}  // namespace redistill
