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

// redistill: command-line front end.
//
// Exit codes: 0 success, 1 verification or experiment failure (including
// unreadable or invalid files), 2 usage error.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "redistill/divergence.hpp"
#include "redistill/lab.hpp"
#include "redistill/persistence.hpp"
#include "redistill/robust_stats.hpp"
#include "verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace redistill;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr const char* kOutDirEnv = "REDISTILL_OUT_DIR";
constexpr int kOutputSchemaVersion = 1;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string format = "table";
  unsigned threads = 0;
};

// ---- output helpers -------------------------------------------------------

std::string num(double x, int precision = 4) {
  if (std::isnan(x)) return "nan";
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << x;
  return os.str();
}

std::string shortest(double x) { return json(x).dump(); }

void print_table(const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> w(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    w[c] = header[c].size();
    for (const auto& r : rows) w[c] = std::max(w[c], r[c].size());
  }
  const auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      std::cout << (c ? "  " : "") << std::setw(static_cast<int>(w[c])) << r[c];
    }
    std::cout << "\n";
  };
  line(header);
  std::vector<std::string> rule;
  for (std::size_t c = 0; c < w.size(); ++c) rule.push_back(std::string(w[c], '-'));
  line(rule);
  for (const auto& r : rows) line(r);
}

void print_csv(const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows, std::ostream& os = std::cout) {
  const auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << r[c];
    os << "\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
}

json envelope(const std::string& kind, const std::optional<std::uint64_t>& seed) {
  json j{{"schema_version", kOutputSchemaVersion}, {"kind", kind}};
  j["seed"] = seed ? json(*seed) : json(nullptr);
  return j;
}

// ---- config / seeds / output directory ------------------------------------

fs::path out_dir(const Globals& g) {
  fs::path dir;
  if (!g.out.empty()) {
    dir = g.out;
  } else if (const char* env = std::getenv(kOutDirEnv); env && *env) {
    dir = env;
  } else {
    dir = "redistill_out";
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw PersistenceError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

ExperimentConfig require_config(const Globals& g, const std::string& cmd) {
  if (g.config.empty()) throw UsageError(cmd + " requires --config <path>");
  return load_config(g.config);
}

// --seed replaces the config's seed list with the same number of consecutive seeds.
void apply_seed(ExperimentConfig& c, const Globals& g) {
  if (!g.seed) return;
  const std::size_t n = c.seeds.size();
  c.seeds.clear();
  for (std::size_t i = 0; i < n; ++i) c.seeds.push_back(*g.seed + i);
}

unsigned thread_count(const Globals& g) {
  return g.threads > 0 ? g.threads : std::max(1u, std::thread::hardware_concurrency());
}

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used == 0 || used != item.size() || !std::isfinite(v)) {
      throw UsageError(flag + ": '" + item + "' is not a number");
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(flag + " needs at least one value");
  return out;
}

// ---- verify ----------------------------------------------------------------

struct VerifyArgs {
  std::string suite = "all";
  int trials = 1000;
  double perturb = 0.0;
};

int cmd_verify(const Globals& g, const VerifyArgs& a) {
  if (a.trials < 1) throw UsageError("--trials must be >= 1");
  cli::VerifyOptions o;
  o.seed = g.seed.value_or(0);
  o.trials = a.trials;
  o.gradient_perturbation = a.perturb;
  std::vector<std::string> suites;
  if (a.suite == "all") {
    suites = cli::suite_names();
  } else {
    suites = {a.suite};
  }
  std::vector<cli::SuiteResult> results;
  bool ok = true;
  for (const auto& s : suites) {
    results.push_back(cli::run_suite(s, o));
    ok = ok && results.back().passed;
  }
  if (g.format == "json") {
    json j = envelope("verify", o.seed);
    j["passed"] = ok;
    j["trials"] = a.trials;
    j["suites"] = json::array();
    for (const auto& r : results) {
      j["suites"].push_back({{"name", r.name}, {"passed", r.passed}, {"checks", r.checks},
                             {"counterexample", r.counterexample}});
    }
    std::cout << j.dump(2) << "\n";
  } else {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : results) {
      rows.push_back({r.name, r.passed ? "PASS" : "FAIL", std::to_string(r.checks)});
    }
    if (g.format == "csv") {
      print_csv({"suite", "status", "checks"}, rows);
    } else {
      print_table({"suite", "status", "checks"}, rows);
    }
  }
  for (const auto& r : results) {
    if (!r.passed) std::cerr << "verify: " << r.name << " failed: " << r.counterexample << "\n";
  }
  return ok ? kExitOk : kExitFailure;
}

// ---- train-teacher / distill ------------------------------------------------

void print_records(const Globals& g, const std::string& kind, const std::vector<RunRecord>& recs,
                   const json& artifacts) {
  if (g.format == "json") {
    json j = envelope(kind, recs.empty() ? std::nullopt : std::optional(recs.front().seed));
    j["records"] = recs;
    j["artifacts"] = artifacts;
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : recs) {
    rows.push_back({r.role, std::to_string(r.seed), to_string(r.config.loss.kind),
                    num(r.final_accuracy),
                    r.train_loss.empty() ? "-" : num(r.train_loss.back(), 6),
                    r.status == RunStatus::ok ? "ok" : (r.status == RunStatus::diverged ? "diverged" : "failed")});
  }
  const std::vector<std::string> header{"role", "seed", "loss", "accuracy", "final_train_loss", "status"};
  if (g.format == "csv") {
    print_csv(header, rows);
  } else {
    print_table(header, rows);
    for (const auto& [k, v] : artifacts.items()) std::cout << k << ": " << v.get<std::string>() << "\n";
  }
}

int cmd_train_teacher(const Globals& g) {
  auto c = require_config(g, "train-teacher");
  const std::uint64_t seed = g.seed.value_or(c.seeds.front());
  c.seeds = {seed};
  const auto dir = out_dir(g);
  const auto t = train_teacher(c, seed);
  const auto ckpt = dir / ("teacher_seed" + std::to_string(seed) + ".json");
  const auto metrics = dir / ("teacher_seed" + std::to_string(seed) + "_metrics.json");
  save_checkpoint(t.model, ckpt);
  save_metrics({t.record}, metrics);
  print_records(g, "train_teacher", {t.record},
                {{"checkpoint", ckpt.string()}, {"metrics", metrics.string()}});
  return t.record.status == RunStatus::ok ? kExitOk : kExitFailure;
}

struct DistillArgs {
  std::string teacher;
  std::string loss;
  std::optional<double> lambda;
};

int cmd_distill(const Globals& g, const DistillArgs& a) {
  auto c = require_config(g, "distill");
  if (!a.loss.empty()) c.loss.kind = loss_kind_from_string(a.loss);
  if (a.lambda) c.loss.redistill.lambda = *a.lambda;
  const std::uint64_t seed = g.seed.value_or(c.seeds.front());
  c.seeds = {seed};
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto dir = out_dir(g);
  std::vector<RunRecord> recs;
  Mlp teacher;
  if (!a.teacher.empty()) {
    teacher = load_checkpoint(a.teacher);
  } else {
    auto t = train_teacher(c, seed);
    teacher = std::move(t.model);
    recs.push_back(std::move(t.record));
  }
  const auto s = distill_student(c, teacher, seed);
  recs.push_back(s.record);
  const std::string stem = "student_" + to_string(c.loss.kind) + "_seed" + std::to_string(seed);
  const auto ckpt = dir / (stem + ".json");
  const auto metrics = dir / (stem + "_metrics.json");
  save_checkpoint(s.model, ckpt);
  save_metrics(recs, metrics);
  print_records(g, "distill", recs, {{"checkpoint", ckpt.string()}, {"metrics", metrics.string()}});
  return s.record.status == RunStatus::ok ? kExitOk : kExitFailure;
}

// ---- sweep / compare / report -----------------------------------------------

const std::vector<double> kDefaultGrid{0.0, 1.0 / 3.0, 0.5, 2.0 / 3.0, 1.0, 1.5, 2.0};

std::vector<std::vector<std::string>> curve_rows(const std::vector<AggregateRow>& rows) {
  std::vector<std::vector<std::string>> out;
  for (const auto& r : rows) {
    out.push_back({shortest(r.lambda), shortest(r.mean_accuracy), shortest(r.std_accuracy),
                   std::to_string(r.n_seeds)});
  }
  return out;
}

json rows_json(const std::vector<AggregateRow>& rows) {
  json a = json::array();
  for (const auto& r : rows) {
    json acc = json::array();
    for (double x : r.accuracies) acc.push_back(std::isnan(x) ? json(nullptr) : json(x));
    a.push_back({{"lambda", r.lambda},
                 {"mean_acc", std::isnan(r.mean_accuracy) ? json(nullptr) : json(r.mean_accuracy)},
                 {"std_acc", r.std_accuracy},
                 {"n_seeds", r.n_seeds},
                 {"n_failed", r.n_failed},
                 {"accuracies", acc}});
  }
  return a;
}

const std::vector<std::string> kCurveHeader{"lambda", "mean_acc", "std_acc", "n_seeds"};

void emit_curve(const Globals& g, const std::string& kind, std::uint64_t seed,
                const std::vector<AggregateRow>& rows, const json& artifacts) {
  if (g.format == "json") {
    json j = envelope(kind, seed);
    j["rows"] = rows_json(rows);
    j["artifacts"] = artifacts;
    std::cout << j.dump(2) << "\n";
  } else if (g.format == "csv") {
    print_csv(kCurveHeader, curve_rows(rows));
  } else {
    std::vector<std::vector<std::string>> t;
    for (const auto& r : rows) {
      t.push_back({num(r.lambda), num(r.mean_accuracy), num(r.std_accuracy), std::to_string(r.n_seeds),
                   std::to_string(r.n_failed)});
    }
    print_table({"lambda", "mean_acc", "std_acc", "n_seeds", "n_failed"}, t);
    for (const auto& [k, v] : artifacts.items()) std::cout << k << ": " << v.get<std::string>() << "\n";
  }
}

int cmd_sweep(const Globals& g, const std::string& lambdas) {
  auto c = require_config(g, "sweep-lambda");
  apply_seed(c, g);
  const auto grid = lambdas.empty() ? kDefaultGrid : parse_list(lambdas, "--lambdas");
  for (double l : grid) {
    if (std::abs(l + 1.0) < DivergenceOrder::kBranchTolerance) {
      throw UsageError("--lambdas: -1 is not a valid redistill order");
    }
  }
  const auto dir = out_dir(g);
  const auto r = lambda_sweep(c, grid, thread_count(g));
  const auto metrics = dir / "sweep_metrics.json";
  const auto csv = dir / "sweep.csv";
  save_metrics(r.records, metrics);
  std::ofstream f(csv);
  print_csv(kCurveHeader, curve_rows(r.rows), f);
  if (!f) throw PersistenceError("cannot write " + csv.string());
  emit_curve(g, "lambda_sweep", c.seeds.front(), r.rows,
             {{"metrics", metrics.string()}, {"curve_csv", csv.string()}});
  return kExitOk;
}

int cmd_compare(const Globals& g) {
  auto c = require_config(g, "compare");
  apply_seed(c, g);
  const auto dir = out_dir(g);
  const auto r = compare_losses(c, thread_count(g));
  const auto metrics = dir / "compare_metrics.json";
  save_metrics(r.records, metrics);
  if (g.format == "json") {
    json j = envelope("compare", c.seeds.front());
    j["per_loss"] = json::object();
    for (const auto& [k, row] : r.per_loss) {
      j["per_loss"][k] = {{"mean_acc", std::isnan(row.mean_accuracy) ? json(nullptr) : json(row.mean_accuracy)},
                          {"std_acc", row.std_accuracy},
                          {"n_seeds", row.n_seeds},
                          {"n_failed", row.n_failed}};
    }
    j["pairs"] = json::array();
    for (const auto& p : r.pairs) {
      j["pairs"].push_back({{"first", p.first}, {"second", p.second},
                            {"median_difference", p.median_difference}, {"wins", p.wins},
                            {"losses", p.losses}, {"ties", p.ties}, {"sign_test_p", p.sign_test_p}});
    }
    j["artifacts"] = {{"metrics", metrics.string()}};
    std::cout << j.dump(2) << "\n";
    return kExitOk;
  }
  std::vector<std::vector<std::string>> rows;
  for (const auto& [k, row] : r.per_loss) {
    rows.push_back({k, num(row.mean_accuracy), num(row.std_accuracy), std::to_string(row.n_seeds)});
  }
  std::vector<std::vector<std::string>> pairs;
  for (const auto& p : r.pairs) {
    pairs.push_back({p.first + " - " + p.second, num(p.median_difference), std::to_string(p.wins),
                     std::to_string(p.losses), std::to_string(p.ties), num(p.sign_test_p)});
  }
  if (g.format == "csv") {
    print_csv({"loss", "mean_acc", "std_acc", "n_seeds"}, rows);
  } else {
    print_table({"loss", "mean_acc", "std_acc", "n_seeds"}, rows);
    std::cout << "\n";
    print_table({"pair", "median_diff", "wins", "losses", "ties", "sign_p"}, pairs);
    std::cout << "metrics: " << metrics.string() << "\n";
  }
  return kExitOk;
}

int cmd_report(const Globals& g, const std::vector<std::string>& files) {
  if (files.empty()) throw UsageError("report needs at least one metrics file");
  std::vector<RunRecord> recs;
  for (const auto& f : files) {
    auto part = load_metrics(f);
    recs.insert(recs.end(), part.begin(), part.end());
  }
  // (method, lambda) -> accuracies; lambda only distinguishes redistill rows.
  std::map<std::pair<std::string, double>, std::vector<double>> cells;
  for (const auto& r : recs) {
    if (r.role != "student") continue;
    const auto kind = r.config.loss.kind;
    const double l = kind == LossKind::redistill ? r.config.loss.redistill.lambda : 0.0;
    const double acc = r.status == RunStatus::failed ? std::nan("") : r.final_accuracy;
    cells[{to_string(kind), l}].push_back(acc);
  }
  std::vector<std::pair<std::string, AggregateRow>> methods;
  std::vector<AggregateRow> curve;
  for (const auto& [key, accs] : cells) {
    const auto row = aggregate(key.second, accs);
    methods.emplace_back(key.first, row);
    if (key.first == "redistill") curve.push_back(row);
  }
  const auto dir = out_dir(g);
  const auto csv = dir / "lambda_curve.csv";
  std::ofstream f(csv);
  print_csv(kCurveHeader, curve_rows(curve), f);
  if (!f) throw PersistenceError("cannot write " + csv.string());

  if (g.format == "json") {
    json j = envelope("report", g.seed);
    j["methods"] = json::array();
    for (const auto& [m, row] : methods) {
      j["methods"].push_back({{"method", m},
                              {"lambda", row.lambda},
                              {"mean_acc", std::isnan(row.mean_accuracy) ? json(nullptr) : json(row.mean_accuracy)},
                              {"std_acc", row.std_accuracy},
                              {"n_seeds", row.n_seeds},
                              {"n_failed", row.n_failed}});
    }
    j["rows"] = rows_json(curve);
    j["artifacts"] = {{"curve_csv", csv.string()}};
    std::cout << j.dump(2) << "\n";
  } else if (g.format == "csv") {
    print_csv(kCurveHeader, curve_rows(curve));
  } else {
    std::vector<std::vector<std::string>> rows;
    for (const auto& [m, row] : methods) {
      rows.push_back({m, m == "redistill" ? num(row.lambda) : "-",
                      num(100.0 * row.mean_accuracy, 2) + " +- " + num(100.0 * row.std_accuracy, 2),
                      std::to_string(row.n_seeds)});
    }
    print_table({"method", "lambda", "accuracy (%)", "n_seeds"}, rows);
    std::cout << "curve_csv: " << csv.string() << "\n";
  }
  return kExitOk;
}

// ---- statistics -------------------------------------------------------------

struct InfluenceArgs {
  int k = 5;
  std::string lambdas = "0,0.3333333333333333,0.6666666666666666,1,2";
  double epsilon = 1e-4;
  int samples = 20;
  int outlier = 0;
};

int cmd_influence(const Globals& g, const InfluenceArgs& a) {
  if (a.k < 2) throw UsageError("--k must be >= 2");
  if (a.samples < 1) throw UsageError("--samples must be >= 1");
  if (a.outlier < 0 || a.outlier >= a.k) throw UsageError("--outlier must be a class in [0, k)");
  if (!(a.epsilon > 0.0 && a.epsilon <= 0.1)) throw UsageError("--epsilon must be in (0, 0.1]");
  const auto lambdas = parse_list(a.lambdas, "--lambdas");
  const std::uint64_t seed = g.seed.value_or(0);
  CounterRng rng(derive_key(seed, {0x696e666cULL}));
  std::vector<ProbVector> base;
  for (int n = 0; n < a.samples; ++n) {
    std::vector<double> v(a.k);
    double s = 0.0;
    for (auto& x : v) s += x = 0.2 - std::log(1.0 - rng.uniform());
    for (auto& x : v) x /= s;
    double total = 0.0;
    for (double x : v) total += x;
    *std::max_element(v.begin(), v.end()) += 1.0 - total;
    base.emplace_back(std::move(v));
  }
  const auto outlier = ProbVector::one_hot(a.k, a.outlier);
  const std::vector<double> ones(base.size(), 1.0);

  json rows = json::array();
  std::vector<std::vector<std::string>> table;
  for (double l : lambdas) {
    if (std::abs(l + 1.0) < DivergenceOrder::kBranchTolerance) throw UsageError("--lambdas: -1 has no influence function");
    const auto q = fit_simplex_center(base, ones, l);
    const auto analytic = influence_function(q, l).vector;
    const auto empirical = influence_empirical(base, outlier, a.epsilon, l);
    double dot = 0.0, na = 0.0, ne = 0.0;
    for (int i = 0; i < a.k; ++i) {
      dot += analytic[i] * empirical[i];
      na += analytic[i] * analytic[i];
      ne += empirical[i] * empirical[i];
    }
    const double cosine = dot / std::sqrt(na * ne);
    rows.push_back({{"lambda", l}, {"analytic_norm", std::sqrt(na)}, {"empirical_norm", std::sqrt(ne)},
                    {"cosine", cosine}, {"analytic", analytic}, {"empirical", empirical}});
    table.push_back({num(l), num(std::sqrt(na), 6), num(std::sqrt(ne), 6), num(cosine, 6)});
  }
  const std::vector<std::string> header{"lambda", "analytic_norm", "empirical_norm", "cosine"};
  if (g.format == "json") {
    json j = envelope("influence", seed);
    j["k"] = a.k;
    j["epsilon"] = a.epsilon;
    j["rows"] = rows;
    std::cout << j.dump(2) << "\n";
  } else if (g.format == "csv") {
    print_csv(header, table);
  } else {
    print_table(header, table);
  }
  return kExitOk;
}

struct GofArgs {
  std::string counts;
  std::string expected;
  double lambda = 2.0 / 3.0;
  double alpha = 0.05;
};

int cmd_gof(const Globals& g, const GofArgs& a) {
  const auto raw = parse_list(a.counts, "--counts");
  std::vector<std::uint64_t> counts;
  for (double x : raw) {
    if (x < 0 || x != std::floor(x)) throw UsageError("--counts must be non-negative integers");
    counts.push_back(static_cast<std::uint64_t>(x));
  }
  if (counts.size() < 2) throw UsageError("--counts needs at least two cells");
  std::vector<double> e = a.expected.empty() ? std::vector<double>(counts.size(), 1.0 / counts.size())
                                             : parse_list(a.expected, "--expected");
  if (e.size() != counts.size()) throw UsageError("--expected must have one entry per count");
  if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw UsageError("--alpha must be in (0, 1)");
  std::optional<ProbVector> expected;
  try {
    expected.emplace(e);
  } catch (const std::invalid_argument& ex) {
    throw UsageError(std::string("--expected: ") + ex.what());
  }
  double stat = 0.0;
  try {
    stat = gof_statistic(counts, *expected, a.lambda);
  } catch (const std::exception& ex) {
    throw UsageError(ex.what());
  }
  const double df = static_cast<double>(counts.size() - 1);
  const double p = 1.0 - chi2_cdf(stat, df);
  const double crit = chi2_upper_quantile(a.alpha, df);
  if (g.format == "json") {
    json j = envelope("gof", g.seed);
    j.update({{"lambda", a.lambda}, {"statistic", stat}, {"df", df}, {"p_value", p},
              {"alpha", a.alpha}, {"critical_value", crit}, {"reject", stat > crit}});
    std::cout << j.dump(2) << "\n";
  } else {
    const std::vector<std::string> header{"lambda", "statistic", "df", "p_value", "critical", "reject"};
    const std::vector<std::vector<std::string>> rows{
        {num(a.lambda), num(stat, 6), num(df, 0), num(p, 6), num(crit, 6), stat > crit ? "yes" : "no"}};
    g.format == "csv" ? print_csv(header, rows) : print_table(header, rows);
  }
  return kExitOk;
}

struct PowerArgs {
  int k = 10;
  double delta = 0.0;
  std::uint64_t n = 200;
  double alpha = 0.05;
  std::uint64_t trials = 5000;
  double lambda = 2.0 / 3.0;
};

int cmd_power(const Globals& g, const PowerArgs& a) {
  const AlternativeSpec alt{a.k, a.delta};
  try {
    alt.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (a.trials < 100) throw UsageError("--trials must be >= 100");
  if (a.n < 1) throw UsageError("--n must be >= 1");
  if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw UsageError("--alpha must be in (0, 1)");
  const std::uint64_t seed = g.seed.value_or(0);
  const auto r = mc_power(alt, a.lambda, a.n, a.alpha, a.trials, seed);
  if (g.format == "json") {
    json j = envelope("power", seed);
    j["k"] = a.k;
    j["delta"] = a.delta;
    j["lambda"] = a.lambda;
    j["estimate"] = r;
    std::cout << j.dump(2) << "\n";
  } else {
    const std::vector<std::string> header{"k", "delta", "lambda", "n", "alpha", "trials",
                                          "rejection_rate", "std_error", "critical_value"};
    const std::vector<std::vector<std::string>> rows{
        {std::to_string(a.k), num(a.delta), num(a.lambda), std::to_string(a.n), num(a.alpha),
         std::to_string(r.trials), num(r.rejection_rate), num(r.std_error), num(r.critical_value)}};
    g.format == "csv" ? print_csv(header, rows) : print_table(header, rows);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Power-divergence robust knowledge distillation toolkit"};
  app.fallthrough();
  app.require_subcommand(1);

  Globals g;
  app.add_option("--config", g.config, "Experiment config (JSON)");
  app.add_option("--out", g.out, std::string("Output directory (default: $") + kOutDirEnv +
                                     ", else ./redistill_out)");
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--format", g.format, "Stdout format")->check(CLI::IsMember({"table", "json", "csv"}));
  app.add_option("--threads", g.threads, "Worker threads for sweep/compare (default: all cores)");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Run the divergence and loss self-checks");
  verify->add_option("--suite", va.suite, "Suite to run")
      ->check(CLI::IsMember({"all", "axioms", "identities", "gradients", "loss"}));
  verify->add_option("--trials", va.trials, "Random instances per suite");
  verify->add_option("--perturb-gradient", va.perturb)->group("");

  auto* teacher = app.add_subcommand("train-teacher", "Train one teacher and save its checkpoint");

  DistillArgs da;
  auto* distill = app.add_subcommand("distill", "Distill one student from a teacher");
  distill->add_option("--teacher", da.teacher, "Teacher checkpoint (default: train one)");
  distill->add_option("--loss", da.loss, "Override the config's loss kind")
      ->check(CLI::IsMember({"cross_entropy", "kd", "dkd", "redistill"}));
  distill->add_option("--lambda", da.lambda, "Override the redistill order");

  std::string lambdas;
  auto* sweep = app.add_subcommand("sweep-lambda", "Distill across a grid of lambda values");
  sweep->add_option("--lambdas", lambdas, "Comma-separated grid (default 0,1/3,1/2,2/3,1,3/2,2)");

  auto* compare = app.add_subcommand("compare", "Compare kd, dkd and redistill on matched seeds");

  std::vector<std::string> report_files;
  auto* report = app.add_subcommand("report", "Summarize stored metrics files");
  report->add_option("metrics", report_files, "Metrics JSON files")->required()->check(CLI::ExistingFile);

  InfluenceArgs ia;
  auto* influence = app.add_subcommand("influence", "Analytic vs refit influence on random problems");
  influence->add_option("--k", ia.k, "Classes");
  influence->add_option("--lambdas", ia.lambdas, "Comma-separated lambda values");
  influence->add_option("--epsilon", ia.epsilon, "Outlier weight");
  influence->add_option("--samples", ia.samples, "Base sample size");
  influence->add_option("--outlier", ia.outlier, "Class of the one-hot outlier");

  GofArgs ga;
  auto* gof = app.add_subcommand("gof", "Power-divergence goodness-of-fit test");
  gof->add_option("--counts", ga.counts, "Observed counts, comma-separated")->required();
  gof->add_option("--expected", ga.expected, "Expected probabilities (default uniform)");
  gof->add_option("--lambda", ga.lambda, "Divergence order");
  gof->add_option("--alpha", ga.alpha, "Significance level");

  PowerArgs pa;
  auto* power = app.add_subcommand("power", "Monte-Carlo power against bump (delta > 0) or dip (delta < 0)");
  power->add_option("--k", pa.k, "Classes");
  power->add_option("--delta", pa.delta, "Alternative strength")->required();
  power->add_option("--n", pa.n, "Sample size");
  power->add_option("--alpha", pa.alpha, "Significance level");
  power->add_option("--trials", pa.trials, "Monte-Carlo trials");
  power->add_option("--lambda", pa.lambda, "Divergence order");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*verify) return cmd_verify(g, va);
    if (*teacher) return cmd_train_teacher(g);
    if (*distill) return cmd_distill(g, da);
    if (*sweep) return cmd_sweep(g, lambdas);
    if (*compare) return cmd_compare(g);
    if (*report) return cmd_report(g, report_files);
    if (*influence) return cmd_influence(g, ia);
    if (*gof) return cmd_gof(g, ga);
    if (*power) return cmd_power(g, pa);
  } catch (const UsageError& e) {
    std::cerr << "redistill: " << e.what() << "\nRun with --help for usage.\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "redistill: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
