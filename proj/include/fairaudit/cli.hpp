/*
 * Copyright 2026 The fairaudit Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fairaudit/common.hpp"
#include "fairaudit/drift.hpp"
#include "fairaudit/metrics.hpp"
#include "fairaudit/repro.hpp"
#include "fairaudit/subgroups.hpp"
#include "fairaudit/surrogate.hpp"
#include "json.hpp"

namespace fairaudit::cli {

inline constexpr std::string_view kSchemaVersion = "1";
inline constexpr std::string_view kToolVersion = "0.1.0";
// The only field allowed to differ between two runs with the same inputs.
inline constexpr std::string_view kTimestampField = "generated_at";

enum ExitCode : int { kOk = 0, kUsage = 1, kValidation = 2, kGateViolation = 3 };

// Fairness gates; unset thresholds are not checked.
struct GateConfig {
  std::optional<double> max_abs_parity_difference;
  std::optional<double> max_abs_fnr_difference;
  std::optional<double> min_group_balanced_accuracy;
  std::optional<double> min_group_coverage;

  // Throws BadConfig for unknown keys or thresholds outside [0, 1].
  static GateConfig FromJson(const nlohmann::json& j);
  nlohmann::json ToJson() const;
};

struct GateViolation {
  std::string gate;
  std::string subject;  // group or period
  double value = 0.0;
  double threshold = 0.0;
};

// Undefined metrics never violate a gate; they are reported as warnings.
std::vector<GateViolation> CheckFairness(const GateConfig& gates,
                                         const metrics::FairnessReport& report,
                                         std::string_view subject = "");
std::vector<GateViolation> CheckCoverage(const GateConfig& gates,
                                         const metrics::CoverageReport& coverage);
std::vector<GateViolation> CheckDrift(const GateConfig& gates, const drift::DriftSeries& series);

// JSON encodings used in reports. Undefined rates become "undefined".
nlohmann::json RateJson(const Rate& r);
nlohmann::json ToJson(const metrics::ConfusionCounts& c);
nlohmann::json ToJson(const metrics::GroupMetricsTable& t);
nlohmann::json ToJson(const metrics::FairnessReport& r);
nlohmann::json ToJson(const metrics::CoverageReport& r);
nlohmann::json ToJson(const subgroups::SubgroupGrid& g);
nlohmann::json ToJson(const subgroups::HeterogeneityResult& r);
nlohmann::json ToJson(const drift::DriftSeries& s);
nlohmann::json ToJson(const std::vector<drift::Alert>& alerts);
nlohmann::json ToJson(const repro::SimilarityMatrix& m);
nlohmann::json ToJson(const std::vector<surrogate::GroupFidelity>& table);
nlohmann::json ToJson(const std::vector<GateViolation>& violations);

// Copy of a report without the timestamp field, for determinism checks.
nlohmann::json StripTimestamp(nlohmann::json report);

// Runs one subcommand: audit, drift, repro, explain, heterogeneity, synth,
// bvlab. Returns an ExitCode.
int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fairaudit::cli
