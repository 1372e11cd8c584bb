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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace redistill {

enum class DatasetKind { gaussian_blobs, concentric_rings, csv };

std::string to_string(DatasetKind k);
DatasetKind dataset_kind_from_string(const std::string& s);

struct DatasetSpec {
  DatasetKind kind = DatasetKind::gaussian_blobs;
  std::size_t num_classes = 10;
  std::size_t features = 20;
  std::size_t train_size = 2000;
  std::size_t val_size = 500;
  double class_separation = 2.0;
  std::uint64_t seed = 0;
  std::optional<std::string> path;  // csv only

  void validate() const;
  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

/// Row-major feature matrix; rows [0, train_size) are the train split and the
/// remaining rows are validation.
struct LabeledDataset {
  std::size_t num_features = 0;
  std::size_t num_classes = 0;
  std::size_t train_size = 0;
  std::vector<double> features;
  std::vector<std::size_t> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t val_size() const { return size() - train_size; }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * num_features, num_features};
  }
};

/// Thrown for malformed CSV input; carries the 1-based line number (0 when the
/// problem is not tied to a line).
class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Synthetic datasets. Blob class c is centred at separation * e_c when
/// features >= num_classes, otherwise at separation * (cos, sin)(2 pi c / K) in
/// the first two coordinates; noise is unit isotropic. Ring class c lies at
/// radius (c + 1) * separation with radial noise 0.1 * separation. Labels are
/// assigned round-robin in each split, so class counts differ by at most one.
/// Throws std::invalid_argument for csv specs (use load_csv).
LabeledDataset generate(const DatasetSpec& spec);

/// Parses `feature_1,...,feature_F,label` rows. A first row that does not parse
/// as numbers is a header. The first `train_rows` rows (default: 80%) form the
/// train split; features are standardized with train-split statistics only.
LabeledDataset load_csv(const std::filesystem::path& path, std::size_t num_classes,
                        std::size_t features, std::optional<std::size_t> train_rows = {});

/// Generates or loads according to the spec kind.
LabeledDataset materialize(const DatasetSpec& spec);

}  // namespace redistill
