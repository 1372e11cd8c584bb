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

#include "redistill/persistence.hpp"

#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

namespace redistill {

using nlohmann::json;

namespace {

// Errors thrown while decoding carry a JSON-pointer prefix that grows as the
// exception unwinds through nested objects.
[[noreturn]] void field_error(const std::string& key, const std::string& detail) {
  throw PersistenceError("/" + key + ": " + detail);
}

template <typename T>
void read(const json& j, const char* key, T& out, bool required = false) {
  if (!j.contains(key)) {
    if (required) field_error(key, "missing required field");
    return;
  }
  try {
    out = j.at(key).get<T>();
  } catch (const PersistenceError& e) {
    throw PersistenceError("/" + std::string(key) + e.what());
  } catch (const json::exception& e) {
    field_error(key, e.what());
  } catch (const std::invalid_argument& e) {
    field_error(key, e.what());
  }
}

// Non-finite values are written as null by the serializer; read them back as NaN.
double real_or_nan(const json& v) {
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

void read_real(const json& j, const char* key, double& out, bool required = false) {
  if (!j.contains(key)) {
    if (required) field_error(key, "missing required field");
    return;
  }
  try {
    out = real_or_nan(j.at(key));
  } catch (const json::exception& e) {
    field_error(key, e.what());
  }
}

void read_reals(const json& j, const char* key, std::vector<double>& out) {
  if (!j.contains(key)) field_error(key, "missing required field");
  const json& a = j.at(key);
  if (!a.is_array()) field_error(key, "expected an array");
  out.clear();
  try {
    for (const auto& v : a) out.push_back(real_or_nan(v));
  } catch (const json::exception& e) {
    field_error(key, e.what());
  }
}

void expect_object(const json& j, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw PersistenceError(": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) field_error(key, "unknown field");
  }
}

std::string status_string(RunStatus s) {
  switch (s) {
    case RunStatus::ok:
      return "ok";
    case RunStatus::diverged:
      return "diverged";
    case RunStatus::failed:
      return "failed";
  }
  return "?";
}

RunStatus status_from_string(const std::string& s) {
  if (s == "ok") return RunStatus::ok;
  if (s == "diverged") return RunStatus::diverged;
  if (s == "failed") return RunStatus::failed;
  throw std::invalid_argument("unknown run status '" + s + "'");
}

void check_version(const json& j, int expected, const std::string& what) {
  if (!j.contains("schema_version")) {
    throw PersistenceError(what + ": missing schema_version");
  }
  if (!j.at("schema_version").is_number_integer() ||
      j.at("schema_version").get<int>() != expected) {
    throw PersistenceError(what + ": unsupported schema_version " +
                           j.at("schema_version").dump() + " (expected " +
                           std::to_string(expected) + ")");
  }
}

}  // namespace

void to_json(json& j, const MlpSpec& s) {
  j = json{{"input_dim", s.input_dim},
           {"hidden_dims", s.hidden_dims},
           {"num_classes", s.num_classes},
           {"activation", to_string(s.activation)}};
}

void from_json(const json& j, MlpSpec& s) {
  expect_object(j, {"input_dim", "hidden_dims", "num_classes", "activation"});
  read(j, "input_dim", s.input_dim, true);
  read(j, "hidden_dims", s.hidden_dims);
  read(j, "num_classes", s.num_classes, true);
  std::string act = to_string(s.activation);
  read(j, "activation", act);
  try {
    s.activation = activation_from_string(act);
  } catch (const std::invalid_argument& e) {
    field_error("activation", e.what());
  }
}

void to_json(json& j, const SgdConfig& s) {
  j = json{{"learning_rate", s.learning_rate}, {"momentum", s.momentum},
           {"weight_decay", s.weight_decay},   {"epochs", s.epochs},
           {"batch_size", s.batch_size},       {"lr_decay_epochs", s.lr_decay_epochs},
           {"lr_decay_factor", s.lr_decay_factor}};
}

void from_json(const json& j, SgdConfig& s) {
  expect_object(j, {"learning_rate", "momentum", "weight_decay", "epochs", "batch_size",
                    "lr_decay_epochs", "lr_decay_factor"});
  read(j, "learning_rate", s.learning_rate);
  read(j, "momentum", s.momentum);
  read(j, "weight_decay", s.weight_decay);
  read(j, "epochs", s.epochs);
  read(j, "batch_size", s.batch_size);
  read(j, "lr_decay_epochs", s.lr_decay_epochs);
  read(j, "lr_decay_factor", s.lr_decay_factor);
}

void to_json(json& j, const RedistillConfig& s) {
  j = json{{"lambda", s.lambda}, {"alpha", s.alpha},           {"beta", s.beta},
           {"tau", s.tau},       {"hard_weight", s.hard_weight}};
}

void from_json(const json& j, RedistillConfig& s) {
  expect_object(j, {"lambda", "alpha", "beta", "tau", "hard_weight"});
  read(j, "lambda", s.lambda);
  read(j, "alpha", s.alpha);
  read(j, "beta", s.beta);
  read(j, "tau", s.tau);
  read(j, "hard_weight", s.hard_weight);
}

void to_json(json& j, const DatasetSpec& s) {
  j = json{{"kind", to_string(s.kind)},
           {"num_classes", s.num_classes},
           {"features", s.features},
           {"train_size", s.train_size},
           {"val_size", s.val_size},
           {"class_separation", s.class_separation},
           {"seed", s.seed}};
  if (s.path) j["path"] = *s.path;
}

void from_json(const json& j, DatasetSpec& s) {
  expect_object(j, {"kind", "num_classes", "features", "train_size", "val_size",
                    "class_separation", "seed", "path"});
  std::string kind = to_string(s.kind);
  read(j, "kind", kind);
  try {
    s.kind = dataset_kind_from_string(kind);
  } catch (const std::invalid_argument& e) {
    field_error("kind", e.what());
  }
  read(j, "num_classes", s.num_classes);
  read(j, "features", s.features);
  read(j, "train_size", s.train_size);
  read(j, "val_size", s.val_size);
  read(j, "class_separation", s.class_separation);
  read(j, "seed", s.seed);
  if (j.contains("path")) {
    std::string p;
    read(j, "path", p);
    s.path = p;
  }
}

void to_json(json& j, const NoiseModel& s) {
  j = json{{"kind", to_string(s.kind)},
           {"rate", s.rate},
           {"magnitude", s.magnitude},
           {"fixed_per_sample", s.fixed_per_sample}};
}

void from_json(const json& j, NoiseModel& s) {
  expect_object(j, {"kind", "rate", "magnitude", "fixed_per_sample"});
  std::string kind = to_string(s.kind);
  read(j, "kind", kind);
  try {
    s.kind = noise_kind_from_string(kind);
  } catch (const std::invalid_argument& e) {
    field_error("kind", e.what());
  }
  read(j, "rate", s.rate);
  read(j, "magnitude", s.magnitude);
  read(j, "fixed_per_sample", s.fixed_per_sample);
}

void to_json(json& j, const LossConfig& s) {
  j = json{{"kind", to_string(s.kind)},
           {"redistill", s.redistill},
           {"kd", json{{"c1", s.kd.c1}, {"c2", s.kd.c2}, {"tau", s.kd.tau}}}};
}

void from_json(const json& j, LossConfig& s) {
  expect_object(j, {"kind", "redistill", "kd"});
  std::string kind = to_string(s.kind);
  read(j, "kind", kind);
  try {
    s.kind = loss_kind_from_string(kind);
  } catch (const std::invalid_argument& e) {
    field_error("kind", e.what());
  }
  read(j, "redistill", s.redistill);
  if (j.contains("kd")) {
    const auto& kd = j.at("kd");
    try {
      expect_object(kd, {"c1", "c2", "tau"});
      read(kd, "c1", s.kd.c1);
      read(kd, "c2", s.kd.c2);
      read(kd, "tau", s.kd.tau);
    } catch (const PersistenceError& e) {
      throw PersistenceError(std::string("/kd") + e.what());
    }
  }
}

void to_json(json& j, const ExperimentConfig& s) {
  j = json{{"schema_version", kConfigSchemaVersion},
           {"dataset", s.dataset},
           {"teacher", s.teacher_spec},
           {"student", s.student_spec},
           {"teacher_train", s.teacher_train},
           {"student_train", s.student_train},
           {"loss", s.loss},
           {"noise", s.noise},
           {"seeds", s.seeds}};
}

void from_json(const json& j, ExperimentConfig& s) {
  expect_object(j, {"schema_version", "dataset", "teacher", "student", "teacher_train",
                    "student_train", "loss", "noise", "seeds"});
  if (j.contains("schema_version")) check_version(j, kConfigSchemaVersion, "config");
  read(j, "dataset", s.dataset);
  read(j, "teacher", s.teacher_spec);
  read(j, "student", s.student_spec);
  read(j, "teacher_train", s.teacher_train);
  read(j, "student_train", s.student_train);
  read(j, "loss", s.loss);
  read(j, "noise", s.noise);
  read(j, "seeds", s.seeds);
}

void to_json(json& j, const RunRecord& r) {
  j = json{{"schema_version", kMetricsSchemaVersion},
           {"config", r.config},
           {"seed", r.seed},
           {"role", r.role},
           {"train_loss", r.train_loss},
           {"val_accuracy", r.val_accuracy},
           {"final_accuracy", r.final_accuracy},
           {"wall_time_seconds", r.wall_time_seconds},
           {"status", status_string(r.status)},
           {"message", r.message},
           {"corrupted_fraction", r.corrupted_fraction}};
}

void from_json(const json& j, RunRecord& r) {
  check_version(j, kMetricsSchemaVersion, "metrics record");
  expect_object(j, {"schema_version", "config", "seed", "role", "train_loss", "val_accuracy",
                    "final_accuracy", "wall_time_seconds", "status", "message",
                    "corrupted_fraction"});
  read(j, "config", r.config, true);
  read(j, "seed", r.seed, true);
  read(j, "role", r.role);
  read_reals(j, "train_loss", r.train_loss);
  read_reals(j, "val_accuracy", r.val_accuracy);
  read_real(j, "final_accuracy", r.final_accuracy, true);
  read(j, "wall_time_seconds", r.wall_time_seconds);
  std::string status = "ok";
  read(j, "status", status);
  try {
    r.status = status_from_string(status);
  } catch (const std::invalid_argument& e) {
    field_error("status", e.what());
  }
  read(j, "message", r.message);
  read(j, "corrupted_fraction", r.corrupted_fraction);
}

void to_json(json& j, const Mlp& m) {
  json layers = json::array();
  for (const auto& l : m.layers) {
    layers.push_back(json{{"in", l.in}, {"out", l.out}, {"weights", l.weights}, {"bias", l.bias}});
  }
  j = json{{"format", "redistill-mlp"},
           {"schema_version", kCheckpointSchemaVersion},
           {"spec", m.spec},
           {"layers", std::move(layers)}};
}

void from_json(const json& j, Mlp& m) {
  check_version(j, kCheckpointSchemaVersion, "checkpoint");
  if (j.value("format", std::string()) != "redistill-mlp") {
    throw PersistenceError("checkpoint: format is not redistill-mlp");
  }
  read(j, "spec", m.spec, true);
  m.layers.clear();
  if (!j.contains("layers") || !j.at("layers").is_array()) {
    field_error("layers", "missing layer array");
  }
  for (const auto& lj : j.at("layers")) {
    DenseLayer l;
    read(lj, "in", l.in, true);
    read(lj, "out", l.out, true);
    read(lj, "weights", l.weights, true);
    read(lj, "bias", l.bias, true);
    m.layers.push_back(std::move(l));
  }
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw PersistenceError(std::string("checkpoint: ") + e.what());
  }
}

void to_json(json& j, const PowerEstimate& p) {
  j = json{{"rejection_rate", p.rejection_rate}, {"trials", p.trials},
           {"sample_size", p.sample_size},       {"significance", p.significance},
           {"std_error", p.std_error},           {"critical_value", p.critical_value}};
}

json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw PersistenceError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) +
                           ": " + e.what());
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PersistenceError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path.string());
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw PersistenceError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw PersistenceError("write failed for " + path.string());
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  try {
    c = j.get<ExperimentConfig>();
  } catch (const json::exception& e) {
    throw PersistenceError(std::string("config: ") + e.what());
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw PersistenceError(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  try {
    return config_from_json(j);
  } catch (const PersistenceError& e) {
    throw PersistenceError(path.string() + ": " + e.what());
  }
}

void save_config(const ExperimentConfig& config, const std::filesystem::path& path) {
  write_json_file(path, json(config));
}

void save_checkpoint(const Mlp& model, const std::filesystem::path& path) {
  write_json_file(path, json(model));
}

Mlp load_checkpoint(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  try {
    return j.get<Mlp>();
  } catch (const PersistenceError& e) {
    throw PersistenceError(path.string() + ": " + e.what());
  } catch (const json::exception& e) {
    throw PersistenceError(path.string() + ": " + e.what());
  }
}

void save_metrics(const std::vector<RunRecord>& records, const std::filesystem::path& path) {
  json arr = json::array();
  for (const auto& r : records) arr.push_back(r);
  write_json_file(path, arr);
}

std::vector<RunRecord> load_metrics(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  if (!j.is_array()) throw PersistenceError(path.string() + ": metrics must be a JSON array");
  std::vector<RunRecord> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    try {
      out.push_back(j[i].get<RunRecord>());
    } catch (const PersistenceError& e) {
      throw PersistenceError(path.string() + ": record " + std::to_string(i) + ": " + e.what());
    } catch (const json::exception& e) {
      throw PersistenceError(path.string() + ": record " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace redistill
