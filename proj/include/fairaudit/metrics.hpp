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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairaudit/common.hpp"

namespace fairaudit::metrics {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  std::size_t positives() const { return tp + fn; }
  std::size_t negatives() const { return tn + fp; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

// Throws LengthMismatch (also for empty inputs).
ConfusionCounts Confusion(std::span<const std::uint8_t> y, std::span<const std::uint8_t> yhat);

Rate TruePositiveRate(const ConfusionCounts& c);
Rate FalseNegativeRate(const ConfusionCounts& c);
Rate FalsePositiveRate(const ConfusionCounts& c);
Rate TrueNegativeRate(const ConfusionCounts& c);
Rate Precision(const ConfusionCounts& c);
Rate Accuracy(const ConfusionCounts& c);
Rate BaseRate(const ConfusionCounts& c);
Rate PredictedPositiveRate(const ConfusionCounts& c);
// (tpr + tnr) / 2; undefined when the ground truth holds a single class.
Rate BalancedAccuracy(const ConfusionCounts& c);

// A categorical column aligned with the evaluated rows.
struct GroupColumn {
  std::string name;
  std::span<const std::int32_t> codes;
  std::span<const std::string> categories;
};

struct GroupMetrics {
  std::int32_t code = 0;
  std::string group;
  std::size_t n = 0;
  Rate base_rate;
  Rate pred_positive_rate;
  Rate tpr;
  Rate fnr;
  Rate fpr;
  Rate precision;
  Rate accuracy;
  Rate balanced_accuracy;
  ConfusionCounts confusion;
};

struct GroupMetricsTable {
  // One entry per category present, in category order.
  std::vector<GroupMetrics> groups;
  // Categories with no evaluated rows.
  std::vector<std::string> absent_groups;

  const GroupMetrics* Find(std::string_view group) const;
};

GroupMetricsTable ComputeGroupMetrics(std::span<const std::uint8_t> y,
                                      std::span<const std::uint8_t> yhat,
                                      const GroupColumn& groups);

// Differences are comparison group minus reference group.
struct GroupDifference {
  std::string group;
  Rate parity_difference;
  Rate base_rate_difference;
  Rate fnr_difference;
  Rate fpr_difference;
  // max(|fnr difference|, |fpr difference|); undefined if either is.
  Rate equalized_odds_gap;
};

struct SufficiencyOptions {
  std::size_t bins = 10;
  std::size_t min_support = 20;
};

struct SufficiencyBin {
  std::size_t bin = 0;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> support;  // per present group
  std::vector<Rate> positive_rate;   // per present group
  Rate gap;                          // max |rate(group) - rate(reference)|
  bool qualified = false;            // every group has min_support rows
};

struct SufficiencyResult {
  std::vector<std::string> groups;  // order of the per-bin vectors
  Rate gap;                         // max over qualified bins
  std::vector<SufficiencyBin> bins;
  std::vector<std::size_t> excluded_bins;
};

// Equal-width score bins; the gap compares P(Y=1 | bin, group) with the
// reference group. Needs two present groups; otherwise the result is empty.
SufficiencyResult SufficiencyGap(std::span<const std::uint8_t> y, std::span<const double> scores,
                                 const GroupColumn& groups, std::string_view reference,
                                 const SufficiencyOptions& options = {});

struct FairnessReport {
  std::string reference_group;
  std::vector<GroupDifference> comparisons;  // one per present non-reference group
  GroupMetricsTable per_group;
  Rate sufficiency_gap;
  SufficiencyResult sufficiency;

  // First comparison; throws UnknownGroup when there is none.
  const GroupDifference& primary() const;
  const GroupDifference* Find(std::string_view group) const;
};

// Throws UnknownGroup when the reference group has no rows.
FairnessReport MakeFairnessReport(std::span<const std::uint8_t> y,
                                  std::span<const std::uint8_t> yhat, const GroupColumn& groups,
                                  std::string_view reference);
// Also fills the sufficiency section from scores.
FairnessReport MakeFairnessReport(std::span<const std::uint8_t> y,
                                  std::span<const std::uint8_t> yhat,
                                  std::span<const double> scores, const GroupColumn& groups,
                                  std::string_view reference,
                                  const SufficiencyOptions& options = {});

// Split-conformal calibrator. Conformity of class c is 1 - p(c), with
// p(1) = score and p(0) = 1 - score.
struct ConformalCalibrator {
  double alpha = 0.1;
  double threshold = 1.0;  // ceil((n_cal + 1)(1 - alpha))-th smallest conformity
  std::size_t n_cal = 0;
  std::vector<std::size_t> calibration_rows;  // ascending, for the overlap guard
};

// Bit c set means class c is in the set.
using PredictionSet = std::uint8_t;
constexpr PredictionSet kContainsNegative = 1;
constexpr PredictionSet kContainsPositive = 2;

// Throws TooFewCalibration or BadConfig.
ConformalCalibrator ConformalCalibrate(std::span<const std::uint8_t> y_cal,
                                       std::span<const double> scores_cal, double alpha,
                                       std::span<const std::size_t> calibration_rows);
// Throws SplitOverlap when an evaluated row was used for calibration.
std::vector<PredictionSet> ConformalSets(const ConformalCalibrator& calibrator,
                                         std::span<const double> scores,
                                         std::span<const std::size_t> eval_rows);

struct GroupCoverage {
  std::string group;
  std::size_t n = 0;
  Rate coverage;
  Rate mean_set_size;
  bool low_support = false;
};

struct CoverageReport {
  Rate marginal;
  std::vector<GroupCoverage> groups;
};

CoverageReport ComputeGroupCoverage(std::span<const std::uint8_t> y,
                                    std::span<const PredictionSet> sets,
                                    const GroupColumn& groups, std::size_t min_support = 20);

}  // namespace fairaudit::metrics
