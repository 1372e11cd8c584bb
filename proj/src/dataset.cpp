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

#include "redistill/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "redistill/rng.hpp"

namespace redistill {

std::string to_string(DatasetKind k) {
  switch (k) {
    case DatasetKind::gaussian_blobs:
      return "gaussian_blobs";
    case DatasetKind::concentric_rings:
      return "concentric_rings";
    case DatasetKind::csv:
      return "csv";
  }
  return "?";
}

DatasetKind dataset_kind_from_string(const std::string& s) {
  if (s == "gaussian_blobs") return DatasetKind::gaussian_blobs;
  if (s == "concentric_rings") return DatasetKind::concentric_rings;
  if (s == "csv") return DatasetKind::csv;
  throw std::invalid_argument("unknown dataset kind '" + s + "'");
}

void DatasetSpec::validate() const {
  if (num_classes < 2) throw std::invalid_argument("dataset needs at least 2 classes");
  if (features < 1) throw std::invalid_argument("dataset needs at least 1 feature");
  if (kind == DatasetKind::csv) {
    if (!path) throw std::invalid_argument("csv dataset requires a path");
    return;
  }
  if (train_size < num_classes || val_size < num_classes) {
    throw std::invalid_argument("split sizes must be >= num_classes");
  }
  if (!(class_separation > 0.0)) throw std::invalid_argument("class_separation must be > 0");
  if (kind == DatasetKind::concentric_rings && features < 2) {
    throw std::invalid_argument("concentric_rings needs at least 2 features");
  }
  if (kind == DatasetKind::gaussian_blobs && features < num_classes && features < 2) {
    throw std::invalid_argument("gaussian_blobs with fewer features than classes needs >= 2");
  }
}

namespace {

void sample_point(const DatasetSpec& spec, std::size_t cls, CounterRng& rng, double* out) {
  const double sep = spec.class_separation;
  const double k = static_cast<double>(spec.num_classes);
  const double c = static_cast<double>(cls);
  if (spec.kind == DatasetKind::gaussian_blobs) {
    for (std::size_t f = 0; f < spec.features; ++f) out[f] = rng.normal();
    if (spec.features >= spec.num_classes) {
      out[cls] += sep;
    } else {
      const double angle = 2.0 * std::numbers::pi * c / k;
      out[0] += sep * std::cos(angle);
      out[1] += sep * std::sin(angle);
    }
    return;
  }
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double radius = (c + 1.0) * sep + 0.1 * sep * rng.normal();
  out[0] = radius * std::cos(angle);
  out[1] = radius * std::sin(angle);
  for (std::size_t f = 2; f < spec.features; ++f) out[f] = 0.1 * sep * rng.normal();
}

void fill_split(const DatasetSpec& spec, std::size_t begin, std::size_t count,
                std::uint64_t split_tag, LabeledDataset& ds) {
  CounterRng order_rng(derive_key(spec.seed, {split_tag, 0}));
  std::vector<std::size_t> labels(count);
  for (std::size_t i = 0; i < count; ++i) labels[i] = i % spec.num_classes;
  order_rng.shuffle(std::span<std::size_t>(labels));
  for (std::size_t i = 0; i < count; ++i) {
    CounterRng rng(derive_key(spec.seed, {split_tag, 1, i}));
    ds.labels[begin + i] = labels[i];
    sample_point(spec, labels[i], rng, ds.features.data() + (begin + i) * spec.features);
  }
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

}  // namespace

LabeledDataset generate(const DatasetSpec& spec) {
  spec.validate();
  if (spec.kind == DatasetKind::csv) {
    throw std::invalid_argument("csv datasets are loaded with load_csv, not generated");
  }
  LabeledDataset ds;
  ds.num_features = spec.features;
  ds.num_classes = spec.num_classes;
  ds.train_size = spec.train_size;
  const std::size_t n = spec.train_size + spec.val_size;
  ds.features.assign(n * spec.features, 0.0);
  ds.labels.assign(n, 0);
  fill_split(spec, 0, spec.train_size, 0x747261696eULL, ds);
  fill_split(spec, spec.train_size, spec.val_size, 0x76616cULL, ds);
  return ds;
}

LabeledDataset load_csv(const std::filesystem::path& path, std::size_t num_classes,
                        std::size_t features, std::optional<std::size_t> train_rows) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open " + path.string(), 0);

  LabeledDataset ds;
  ds.num_features = features;
  ds.num_classes = num_classes;
  std::string line;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    std::vector<double> values(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size(); ++i) numeric = numeric && parse_double(fields[i], values[i]);
    if (first_content) {
      first_content = false;
      if (!numeric) continue;  // header
    }
    if (fields.size() != features + 1) {
      throw CsvError("line " + std::to_string(line_no) + ": expected " +
                         std::to_string(features + 1) + " fields, got " +
                         std::to_string(fields.size()),
                     line_no);
    }
    if (!numeric) {
      throw CsvError("line " + std::to_string(line_no) + ": non-numeric field", line_no);
    }
    const double label = values.back();
    if (label < 0.0 || label != std::floor(label) ||
        label >= static_cast<double>(num_classes)) {
      throw CsvError("line " + std::to_string(line_no) + ": label " + trim(fields.back()) +
                         " outside [0, " + std::to_string(num_classes) + ")",
                     line_no);
    }
    ds.features.insert(ds.features.end(), values.begin(), values.end() - 1);
    ds.labels.push_back(static_cast<std::size_t>(label));
  }
  if (ds.labels.empty()) throw CsvError(path.string() + ": no data rows", 0);

  const std::size_t n = ds.labels.size();
  ds.train_size = train_rows ? *train_rows : std::max<std::size_t>(1, (n * 4) / 5);
  if (ds.train_size == 0 || ds.train_size > n) {
    throw CsvError("train split size " + std::to_string(ds.train_size) + " invalid for " +
                       std::to_string(n) + " rows",
                   0);
  }

  // Standardize with train-split statistics only.
  for (std::size_t f = 0; f < features; ++f) {
    double mean = 0.0;
    for (std::size_t i = 0; i < ds.train_size; ++i) mean += ds.features[i * features + f];
    mean /= static_cast<double>(ds.train_size);
    double var = 0.0;
    for (std::size_t i = 0; i < ds.train_size; ++i) {
      const double d = ds.features[i * features + f] - mean;
      var += d * d;
    }
    var /= static_cast<double>(ds.train_size);
    const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto& x = ds.features[i * features + f];
      x = (x - mean) / sd;
    }
  }
  return ds;
}

LabeledDataset materialize(const DatasetSpec& spec) {
  spec.validate();
  if (spec.kind == DatasetKind::csv) {
    return load_csv(*spec.path, spec.num_classes, spec.features,
                    spec.train_size > 0 ? std::optional<std::size_t>(spec.train_size)
                                        : std::nullopt);
  }
  return generate(spec);
}

}  // namespace redistill
