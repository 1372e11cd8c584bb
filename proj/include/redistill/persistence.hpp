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

// JSON persistence for experiment configs, model checkpoints and metrics.
// Doubles are written in shortest round-trip form, so save/load is exact.
// Schemas are documented under schemas/.

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "redistill/experiment.hpp"
#include "redistill/neural.hpp"
#include "redistill/robust_stats.hpp"

namespace redistill {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr int kCheckpointSchemaVersion = 1;
inline constexpr int kMetricsSchemaVersion = 1;

/// Any persistence failure: unreadable/unwritable path, JSON syntax (with
/// line:column), missing or mistyped field (with its JSON pointer), or an
/// unsupported schema version.
class PersistenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void to_json(nlohmann::json& j, const MlpSpec& s);
void from_json(const nlohmann::json& j, MlpSpec& s);
void to_json(nlohmann::json& j, const SgdConfig& s);
void from_json(const nlohmann::json& j, SgdConfig& s);
void to_json(nlohmann::json& j, const RedistillConfig& s);
void from_json(const nlohmann::json& j, RedistillConfig& s);
void to_json(nlohmann::json& j, const DatasetSpec& s);
void from_json(const nlohmann::json& j, DatasetSpec& s);
void to_json(nlohmann::json& j, const NoiseModel& s);
void from_json(const nlohmann::json& j, NoiseModel& s);
void to_json(nlohmann::json& j, const LossConfig& s);
void from_json(const nlohmann::json& j, LossConfig& s);
void to_json(nlohmann::json& j, const ExperimentConfig& s);
void from_json(const nlohmann::json& j, ExperimentConfig& s);
void to_json(nlohmann::json& j, const RunRecord& r);
void from_json(const nlohmann::json& j, RunRecord& r);
void to_json(nlohmann::json& j, const Mlp& m);
void from_json(const nlohmann::json& j, Mlp& m);
void to_json(nlohmann::json& j, const PowerEstimate& p);

/// Parses text, reporting syntax errors as "<origin>:<line>:<col>: ...".
nlohmann::json parse_json_text(const std::string& text, const std::string& origin);
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

ExperimentConfig load_config(const std::filesystem::path& path);
/// Parses and validates an in-memory config document.
ExperimentConfig config_from_json(const nlohmann::json& j);
void save_config(const ExperimentConfig& config, const std::filesystem::path& path);

void save_checkpoint(const Mlp& model, const std::filesystem::path& path);
Mlp load_checkpoint(const std::filesystem::path& path);

void save_metrics(const std::vector<RunRecord>& records, const std::filesystem::path& path);
std::vector<RunRecord> load_metrics(const std::filesystem::path& path);

}  // namespace redistill
