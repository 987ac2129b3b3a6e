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

#include "fairaudit/drift.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fairaudit::drift {

namespace {

std::vector<double> AverageRanks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

DriftSeries RunRollingProtocol(const tabular::Dataset& ds, const DriftProtocolConfig& config) {
  if (config.train_window == 0 || config.eval_offset == 0) {
    throw Error(ErrorCode::kBadConfig, "train_window and eval_offset must be >= 1");
  }
  const auto slices = tabular::SliceByTime(ds);
  if (slices.size() < config.train_window + config.eval_offset) {
    throw Error(ErrorCode::kTooFewPeriods,
                fmt::format("{} periods cannot fill a window of {} plus offset {}", slices.size(),
                            config.train_window, config.eval_offset));
  }
  const std::size_t group_col = ds.schema().IndexOf(config.protected_column);
  const auto& categories = ds.schema().column(group_col).categories;
  if (!ds.schema().CategoryCode(group_col, config.reference_group)) {
    throw Error(ErrorCode::kUnknownGroup,
                fmt::format("'{}' is not a category of '{}'", config.reference_group,
                            config.protected_column));
  }
  std::string comparison;
  if (config.comparison_group) {
    if (!ds.schema().CategoryCode(group_col, *config.comparison_group)) {
      throw Error(ErrorCode::kUnknownGroup, "unknown comparison group " + *config.comparison_group);
    }
    comparison = *config.comparison_group;
  } else if (categories.size() == 2) {
    comparison = categories[0] == config.reference_group ? categories[1] : categories[0];
  } else {
    throw Error(ErrorCode::kBadConfig,
                "comparison_group is required when the protected column has more than 2 groups");
  }

  const auto x = tabular::FeatureMatrix::FromDataset(ds);
  const auto labels = ds.Labels();
  const auto group_codes = ds.codes(group_col);

  DriftSeries series;
  series.protected_column = config.protected_column;
  series.reference_group = config.reference_group;
  series.comparison_group = comparison;
  series.threshold_rule = config.rule.ToString();

  for (std::size_t start = 0; start + config.train_window + config.eval_offset <= slices.size();
       ++start) {
    const std::size_t eval_index = start + config.train_window + config.eval_offset - 1;
    DriftRecord record;
    std::vector<std::size_t> train_rows;
    for (std::size_t p = start; p < start + config.train_window; ++p) {
      if (slices[p].rows.empty()) {
        throw Error(ErrorCode::kEmptyPeriod, fmt::format("period {} is empty", slices[p].period));
      }
      record.train_periods.push_back(slices[p].period);
      train_rows.insert(train_rows.end(), slices[p].rows.begin(), slices[p].rows.end());
    }
    std::sort(train_rows.begin(), train_rows.end());
    const auto& eval_rows = slices[eval_index].rows;
    if (eval_rows.empty()) {
      throw Error(ErrorCode::kEmptyPeriod,
                  fmt::format("period {} is empty", slices[eval_index].period));
    }
    record.eval_period = slices[eval_index].period;
    record.n_train = train_rows.size();
    record.n_eval = eval_rows.size();

    const auto model = forest::TrainForest(x, labels, train_rows, config.model);
    record.model_hash = model.Hash();

    // Scores for the eval period only.
    tabular::FeatureMatrix eval_x(x.features(), eval_rows.size());
    std::vector<std::uint8_t> y;
    std::vector<std::int32_t> groups;
    for (std::size_t i = 0; i < eval_rows.size(); ++i) {
      for (std::size_t f = 0; f < x.n_features(); ++f) eval_x.set(i, f, x.at(eval_rows[i], f));
      y.push_back(labels[eval_rows[i]]);
      groups.push_back(group_codes[eval_rows[i]]);
    }
    const auto scores = model.PredictScores(eval_x);
    const auto yhat = forest::Classify(scores, config.rule);

    record.balanced_accuracy = metrics::BalancedAccuracy(metrics::Confusion(y, yhat));
    const metrics::GroupColumn column{config.protected_column, groups, categories};
    const auto report = metrics::MakeFairnessReport(y, yhat, column, config.reference_group);
    if (const auto* diff = report.Find(comparison)) {
      record.parity_difference = diff->parity_difference;
      record.fnr_difference = diff->fnr_difference;
      record.base_rate_difference = diff->base_rate_difference;
    }
    record.per_group = report.per_group;
    if (!series.records.empty()) {
      const Rate& prev = series.records.back().balanced_accuracy;
      if (prev && record.balanced_accuracy) {
        record.delta_balanced_accuracy = *record.balanced_accuracy - *prev;
      }
    }
    series.records.push_back(std::move(record));
  }
  return series;
}

std::vector<Alert> DetectAlerts(const DriftSeries& series, const AlertThresholds& thresholds) {
  if (series.records.empty()) throw Error(ErrorCode::kBadConfig, "empty drift series");
  std::vector<Alert> alerts;
  for (const DriftRecord& r : series.records) {
    auto check_abs = [&](const Rate& value, double limit, const char* kind) {
      if (value && std::abs(*value) > limit) {
        alerts.push_back({r.eval_period, kind, "", *value, limit});
      }
    };
    check_abs(r.delta_balanced_accuracy, thresholds.max_abs_delta_ba, "delta_balanced_accuracy");
    check_abs(r.parity_difference, thresholds.max_abs_parity, "parity_difference");
    check_abs(r.fnr_difference, thresholds.max_abs_fnr, "fnr_difference");
    for (const auto& g : r.per_group.groups) {
      if (g.balanced_accuracy && *g.balanced_accuracy < thresholds.min_group_ba) {
        alerts.push_back({r.eval_period, "group_balanced_accuracy", g.group,
                          *g.balanced_accuracy, thresholds.min_group_ba});
      }
    }
  }
  return alerts;
}

Rate SpearmanCorrelation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kLengthMismatch, "series lengths differ");
  if (a.size() < 2) return std::nullopt;
  const auto ra = AverageRanks(a);
  const auto rb = AverageRanks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n + 1.0) / 2.0;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - mean) * (rb[i] - mean);
    saa += (ra[i] - mean) * (ra[i] - mean);
    sbb += (rb[i] - mean) * (rb[i] - mean);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace fairaudit::drift
