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

#include "redistill/lab.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "redistill/loss.hpp"
#include "redistill/robust_stats.hpp"

namespace redistill {

namespace {

constexpr std::uint64_t kInitTag = 0x696e6974ULL;
constexpr std::uint64_t kShuffleTag = 0x73687566ULL;
constexpr std::uint64_t kNoiseTag = 0x6e6f6973ULL;
constexpr std::uint64_t kDataTag = 0x64617461ULL;
constexpr double kAbortLoss = 1e6;

// Per-sample loss: fills d loss / d logits and returns the loss.
using SampleLoss = std::function<double(std::size_t index, int epoch,
                                        const std::vector<double>& logits,
                                        std::vector<double>& grad)>;

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// Mini-batch SGD over the train split. Batch gradients are the mean of
// per-sample gradients, accumulated in batch order.
void fit(Mlp& model, const SgdConfig& sgd, const LabeledDataset& data, std::uint64_t seed,
         const SampleLoss& loss, RunRecord& record) {
  const auto start = std::chrono::steady_clock::now();
  auto grads = ParamBuffers::zeros_like(model);
  auto velocity = ParamBuffers::zeros_like(model);
  std::vector<std::size_t> order(data.train_size);
  std::vector<double> dlogits;
  ForwardCache cache;

  for (int epoch = 0; epoch < sgd.epochs && record.status == RunStatus::ok; ++epoch) {
    const double lr = lr_at_epoch(sgd, epoch);
    std::iota(order.begin(), order.end(), std::size_t{0});
    CounterRng shuffle_rng(derive_key(seed, {kShuffleTag, static_cast<std::uint64_t>(epoch)}));
    shuffle_rng.shuffle(std::span<std::size_t>(order));

    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += sgd.batch_size) {
      const std::size_t end = std::min(order.size(), begin + sgd.batch_size);
      const double inv = 1.0 / static_cast<double>(end - begin);
      grads.fill_zero();
      double batch_loss = 0.0;
      for (std::size_t b = begin; b < end; ++b) {
        const std::size_t i = order[b];
        const auto logits = forward(model, data.row(i), cache);
        dlogits.assign(logits.size(), 0.0);
        batch_loss += loss(i, epoch, logits, dlogits);
        accumulate_backward(model, cache, dlogits, inv, grads);
      }
      batch_loss *= inv;
      if (!std::isfinite(batch_loss) || batch_loss > kAbortLoss) {
        record.status = RunStatus::diverged;
        record.message = "loss " + std::to_string(batch_loss) + " at epoch " +
                         std::to_string(epoch) + ", batch starting " + std::to_string(begin);
        break;
      }
      epoch_loss += batch_loss * static_cast<double>(end - begin);
      sgd_step(model, grads, velocity, sgd, lr);
    }
    if (record.status != RunStatus::ok) break;
    record.train_loss.push_back(epoch_loss / static_cast<double>(order.size()));
    record.val_accuracy.push_back(validation_accuracy(model, data));
  }

  // A diverged run still reports what its model scores; status marks the failure.
  record.final_accuracy = validation_accuracy(model, data);
  record.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

LogitVector corrupt_teacher_logits(const LogitVector& logits, std::size_t label,
                                   const NoiseModel& noise, CounterRng& rng, bool* corrupted) {
  if (corrupted) *corrupted = false;
  if (noise.kind == NoiseKind::none || noise.rate <= 0.0) return logits;
  if (!rng.bernoulli(noise.rate)) return logits;
  if (label >= logits.size()) throw std::out_of_range("label out of range");

  std::vector<double> v = logits.vec();
  const std::size_t k = v.size();
  switch (noise.kind) {
    case NoiseKind::label_flip: {
      const std::size_t top = argmax(v);
      std::size_t other = rng.below(k - 1);
      if (other >= top) ++other;
      std::swap(v[top], v[other]);
      break;
    }
    case NoiseKind::logit_bump: {
      std::size_t cls = rng.below(k - 1);
      if (cls >= label) ++cls;
      v[cls] += noise.magnitude;
      break;
    }
    case NoiseKind::logit_dip:
      v[label] -= noise.magnitude;
      break;
    case NoiseKind::overconfidence:
      for (auto& x : v) x *= 1.0 + noise.magnitude;
      break;
    case NoiseKind::none:
      break;
  }
  if (corrupted) *corrupted = true;
  return LogitVector(std::move(v));
}

LabeledDataset run_dataset(const ExperimentConfig& config, std::uint64_t seed) {
  DatasetSpec spec = config.dataset;
  if (spec.kind != DatasetKind::csv) spec.seed = derive_key(spec.seed, {kDataTag, seed});
  return materialize(spec);
}

double validation_accuracy(const Mlp& model, const LabeledDataset& data) {
  if (data.val_size() == 0) return 0.0;
  ForwardCache cache;
  std::size_t correct = 0;
  for (std::size_t i = data.train_size; i < data.size(); ++i) {
    const auto logits = forward(model, data.row(i), cache);
    // Non-finite logits (a diverged model) never count as a correct prediction.
    if (!std::all_of(logits.begin(), logits.end(), [](double x) { return std::isfinite(x); })) {
      continue;
    }
    if (argmax(logits) == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.val_size());
}

TrainedModel train_teacher(const ExperimentConfig& config, std::uint64_t seed) {
  config.validate();
  const auto data = run_dataset(config, seed);
  TrainedModel out{init_mlp(config.teacher_spec, derive_key(seed, {kInitTag})), {}};
  out.record.config = config;
  out.record.seed = seed;
  out.record.role = "teacher";
  const SampleLoss ce = [&](std::size_t i, int, const std::vector<double>& logits,
                            std::vector<double>& grad) {
    auto r = cross_entropy_loss(LogitVector(logits), data.labels[i]);
    grad = std::move(r.grad);
    return r.loss;
  };
  fit(out.model, config.teacher_train, data, seed, ce, out.record);
  return out;
}

TrainedModel distill_student(const ExperimentConfig& config, const Mlp& teacher,
                             std::uint64_t seed) {
  config.validate();
  if (teacher.spec.input_dim != config.student_spec.input_dim ||
      teacher.spec.num_classes != config.student_spec.num_classes) {
    throw std::invalid_argument("teacher does not match the student's dimensions");
  }
  const auto data = run_dataset(config, seed);
  TrainedModel out{init_mlp(config.student_spec, derive_key(seed, {kInitTag})), {}};
  out.record.config = config;
  out.record.seed = seed;
  out.record.role = "student";

  // The teacher is frozen, so its clean logits are computed once.
  std::vector<LogitVector> teacher_logits;
  if (config.loss.kind != LossKind::cross_entropy) {
    teacher_logits.reserve(data.train_size);
    for (std::size_t i = 0; i < data.train_size; ++i) {
      teacher_logits.push_back(forward(teacher, data.row(i)));
    }
  }

  RedistillConfig rcfg = config.loss.redistill;
  if (config.loss.kind == LossKind::dkd) rcfg.lambda = 0.0;
  const KdConfig kd = config.loss.kd;
  const NoiseModel noise = config.noise;
  std::uint64_t draws = 0, hits = 0;

  const SampleLoss loss = [&](std::size_t i, int epoch, const std::vector<double>& logits,
                              std::vector<double>& grad) {
    const LogitVector student(logits);
    const std::size_t label = data.labels[i];
    if (config.loss.kind == LossKind::cross_entropy) {
      auto r = cross_entropy_loss(student, label);
      grad = std::move(r.grad);
      return r.loss;
    }
    const std::uint64_t key =
        noise.fixed_per_sample
            ? derive_key(seed, {kNoiseTag, i})
            : derive_key(seed, {kNoiseTag, static_cast<std::uint64_t>(epoch), i});
    CounterRng rng(key);
    bool hit = false;
    const LogitVector t = corrupt_teacher_logits(teacher_logits[i], label, noise, rng, &hit);
    ++draws;
    hits += hit ? 1 : 0;
    LossAndGrad r = config.loss.kind == LossKind::kd
                        ? kd_loss(student, t, label, kd.c1, kd.c2, kd.tau)
                        : redistill_loss(student, t, label, rcfg);
    grad = std::move(r.grad);
    return r.loss;
  };
  fit(out.model, config.student_train, data, seed, loss, out.record);
  out.record.corrupted_fraction =
      draws > 0 ? static_cast<double>(hits) / static_cast<double>(draws) : 0.0;
  return out;
}

AggregateRow aggregate(double lambda, const std::vector<double>& xs) {
  AggregateRow row;
  row.lambda = lambda;
  row.accuracies = xs;
  double sum = 0.0;
  for (double x : xs) {
    if (std::isnan(x)) {
      ++row.n_failed;
    } else {
      sum += x;
      ++row.n_seeds;
    }
  }
  if (row.n_seeds == 0) {
    row.mean_accuracy = std::numeric_limits<double>::quiet_NaN();
    return row;
  }
  row.mean_accuracy = sum / static_cast<double>(row.n_seeds);
  if (row.n_seeds > 1) {
    double ss = 0.0;
    for (double x : xs) {
      if (!std::isnan(x)) ss += (x - row.mean_accuracy) * (x - row.mean_accuracy);
    }
    row.std_accuracy = std::sqrt(ss / static_cast<double>(row.n_seeds - 1));
  }
  return row;
}

namespace {

// Diverged runs contribute the accuracy of their final model; cells that threw
// before producing a model are NaN and excluded from the aggregate.
double cell_accuracy(const RunRecord& r) {
  return r.status == RunStatus::failed ? std::numeric_limits<double>::quiet_NaN()
                                       : r.final_accuracy;
}

std::vector<Mlp> train_teachers(const ExperimentConfig& config, unsigned threads) {
  std::vector<Mlp> teachers(config.seeds.size());
  parallel_for(config.seeds.size(), threads, [&](std::size_t s) {
    teachers[s] = train_teacher(config, config.seeds[s]).model;
  });
  return teachers;
}

// Runs one student per (variant, seed) cell; records come back in
// (variant, seed) order regardless of scheduling.
std::vector<RunRecord> run_cells(const std::vector<ExperimentConfig>& variants,
                                 const std::vector<Mlp>& teachers,
                                 const std::vector<std::uint64_t>& seeds, unsigned threads) {
  const std::size_t n_seeds = seeds.size();
  std::vector<RunRecord> records(variants.size() * n_seeds);
  parallel_for(records.size(), threads, [&](std::size_t cell) {
    const std::size_t v = cell / n_seeds, s = cell % n_seeds;
    try {
      records[cell] = distill_student(variants[v], teachers[s], seeds[s]).record;
    } catch (const std::exception& e) {
      RunRecord failed;
      failed.config = variants[v];
      failed.seed = seeds[s];
      failed.role = "student";
      failed.status = RunStatus::failed;
      failed.message = e.what();
      records[cell] = std::move(failed);
    }
  });
  return records;
}

}  // namespace

SweepResult lambda_sweep(const ExperimentConfig& config, const std::vector<double>& lambdas,
                         unsigned threads) {
  config.validate();
  if (lambdas.empty()) throw std::invalid_argument("lambda sweep needs at least one value");
  std::vector<double> sorted = lambdas;
  std::sort(sorted.begin(), sorted.end());

  std::vector<ExperimentConfig> variants;
  for (double l : sorted) {
    ExperimentConfig c = config;
    c.loss.kind = LossKind::redistill;
    c.loss.redistill.lambda = l;
    variants.push_back(std::move(c));
  }
  const auto teachers = train_teachers(config, threads);
  SweepResult result;
  result.records = run_cells(variants, teachers, config.seeds, threads);
  const std::size_t n = config.seeds.size();
  for (std::size_t v = 0; v < sorted.size(); ++v) {
    std::vector<double> accs;
    for (std::size_t s = 0; s < n; ++s) accs.push_back(cell_accuracy(result.records[v * n + s]));
    result.rows.push_back(aggregate(sorted[v], accs));
  }
  return result;
}

PairwiseComparison compare_paired(const std::string& first, const std::vector<double>& a,
                                  const std::string& second, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired series differ in length");
  PairwiseComparison pc;
  pc.first = first;
  pc.second = second;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isnan(a[i]) || std::isnan(b[i])) continue;
    const double d = a[i] - b[i];
    pc.differences.push_back(d);
    if (d > 0.0) {
      ++pc.wins;
    } else if (d < 0.0) {
      ++pc.losses;
    } else {
      ++pc.ties;
    }
  }
  if (!pc.differences.empty()) {
    auto sorted = pc.differences;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    pc.median_difference = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  }
  pc.sign_test_p = sign_test_p_value(pc.wins, pc.losses);
  return pc;
}

ComparisonReport compare_losses(const ExperimentConfig& config, unsigned threads) {
  config.validate();
  const std::vector<LossKind> kinds{LossKind::kd, LossKind::dkd, LossKind::redistill};
  std::vector<ExperimentConfig> variants;
  for (auto k : kinds) {
    ExperimentConfig c = config;
    c.loss.kind = k;
    variants.push_back(std::move(c));
  }
  const auto teachers = train_teachers(config, threads);
  ComparisonReport report;
  report.records = run_cells(variants, teachers, config.seeds, threads);

  const std::size_t n = config.seeds.size();
  std::map<std::string, std::vector<double>> accs;
  for (std::size_t v = 0; v < kinds.size(); ++v) {
    auto& xs = accs[to_string(kinds[v])];
    for (std::size_t s = 0; s < n; ++s) xs.push_back(cell_accuracy(report.records[v * n + s]));
    const double lambda = kinds[v] == LossKind::redistill ? config.loss.redistill.lambda : 0.0;
    report.per_loss[to_string(kinds[v])] = aggregate(lambda, xs);
  }
  report.pairs.push_back(compare_paired("redistill", accs["redistill"], "dkd", accs["dkd"]));
  report.pairs.push_back(compare_paired("redistill", accs["redistill"], "kd", accs["kd"]));
  report.pairs.push_back(compare_paired("dkd", accs["dkd"], "kd", accs["kd"]));
  return report;
}

}  // namespace redistill
