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

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairaudit/common.hpp"
#include "fairaudit/forest.hpp"
#include "fairaudit/metrics.hpp"
#include "fairaudit/tabular.hpp"

namespace fairaudit::drift {

struct DriftProtocolConfig {
  forest::ForestConfig model;
  forest::ThresholdRule rule = forest::ThresholdRule::TopQ(0.25);
  std::string protected_column;
  std::string reference_group;
  // Group whose differences fill the scalar series. Defaults to the only
  // other category when the protected column has two.
  std::optional<std::string> comparison_group;
  std::size_t train_window = 1;
  std::size_t eval_offset = 1;
};

struct DriftRecord {
  std::vector<std::int64_t> train_periods;
  std::int64_t eval_period = 0;
  std::size_t n_train = 0;
  std::size_t n_eval = 0;
  Rate balanced_accuracy;
  Rate delta_balanced_accuracy;  // vs the previous record; absent for the first
  Rate parity_difference;
  Rate fnr_difference;
  Rate base_rate_difference;
  metrics::GroupMetricsTable per_group;
  std::string model_hash;
};

struct DriftSeries {
  std::string protected_column;
  std::string reference_group;
  std::string comparison_group;
  std::string threshold_rule;
  std::vector<DriftRecord> records;  // ascending eval period
};

// For every window of `train_window` consecutive periods, trains a fresh
// forest on those rows only and evaluates the period `eval_offset` later.
// The threshold rule is applied to each eval period's scores separately.
// Throws TooFewPeriods, EmptyPeriod.
DriftSeries RunRollingProtocol(const tabular::Dataset& ds, const DriftProtocolConfig& config);

struct AlertThresholds {
  double max_abs_delta_ba = std::numeric_limits<double>::infinity();
  double max_abs_parity = std::numeric_limits<double>::infinity();
  double max_abs_fnr = std::numeric_limits<double>::infinity();
  double min_group_ba = -std::numeric_limits<double>::infinity();
};

struct Alert {
  std::int64_t eval_period = 0;
  std::string kind;   // delta_balanced_accuracy, parity_difference, fnr_difference, group_balanced_accuracy
  std::string group;  // set for group-level alerts
  double value = 0.0;
  double threshold = 0.0;
};

// One alert per (record, violated threshold); group balanced accuracy is
// checked for every group, so alerts can fire while the overall metric is
// flat.
std::vector<Alert> DetectAlerts(const DriftSeries& series, const AlertThresholds& thresholds);

// Spearman rank correlation with average ranks for ties. Undefined when a
// side is constant or shorter than 2.
Rate SpearmanCorrelation(std::span<const double> a, std::span<const double> b);

}  // namespace fairaudit::drift
