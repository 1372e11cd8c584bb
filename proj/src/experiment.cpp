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

#include "redistill/experiment.hpp"

#include <stdexcept>

namespace redistill {

std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::none:
      return "none";
    case NoiseKind::label_flip:
      return "label_flip";
    case NoiseKind::logit_bump:
      return "logit_bump";
    case NoiseKind::logit_dip:
      return "logit_dip";
    case NoiseKind::overconfidence:
      return "overconfidence";
  }
  return "?";
}

NoiseKind noise_kind_from_string(const std::string& s) {
  if (s == "none") return NoiseKind::none;
  if (s == "label_flip") return NoiseKind::label_flip;
  if (s == "logit_bump") return NoiseKind::logit_bump;
  if (s == "logit_dip") return NoiseKind::logit_dip;
  if (s == "overconfidence") return NoiseKind::overconfidence;
  throw std::invalid_argument("unknown noise kind '" + s + "'");
}

std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::cross_entropy:
      return "cross_entropy";
    case LossKind::kd:
      return "kd";
    case LossKind::dkd:
      return "dkd";
    case LossKind::redistill:
      return "redistill";
  }
  return "?";
}

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "cross_entropy") return LossKind::cross_entropy;
  if (s == "kd") return LossKind::kd;
  if (s == "dkd") return LossKind::dkd;
  if (s == "redistill") return LossKind::redistill;
  throw std::invalid_argument("unknown loss kind '" + s + "'");
}

void NoiseModel::validate() const {
  if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("noise rate must be in [0,1]");
  if (!(magnitude >= 0.0)) throw std::invalid_argument("noise magnitude must be >= 0");
  if (kind == NoiseKind::none && rate != 0.0) {
    throw std::invalid_argument("noise kind 'none' requires rate 0");
  }
}

void ExperimentConfig::validate() const {
  dataset.validate();
  teacher_spec.validate();
  student_spec.validate();
  teacher_train.validate();
  student_train.validate();
  loss.redistill.validate();
  if (!(loss.kd.tau > 0.0) || !(loss.kd.c1 >= 0.0) || !(loss.kd.c2 >= 0.0)) {
    throw std::invalid_argument("kd config needs tau > 0 and non-negative weights");
  }
  noise.validate();
  if (seeds.empty()) throw std::invalid_argument("experiment needs at least one seed");
  if (teacher_spec.input_dim != student_spec.input_dim ||
      teacher_spec.num_classes != student_spec.num_classes) {
    throw std::invalid_argument("teacher and student must share input_dim and num_classes");
  }
  if (teacher_spec.input_dim != dataset.features ||
      teacher_spec.num_classes != dataset.num_classes) {
    throw std::invalid_argument("model dimensions do not match the dataset");
  }
}

bool RunRecord::same_outcome(const RunRecord& other) const {
  RunRecord a = *this;
  a.wall_time_seconds = other.wall_time_seconds;
  return a == other;
}

}  // namespace redistill
