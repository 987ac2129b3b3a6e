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

#include "fairaudit/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace fairaudit::metrics {

namespace {

double D(std::size_t v) { return static_cast<double>(v); }

Rate Difference(const Rate& comparison, const Rate& reference) {
  if (!comparison || !reference) return std::nullopt;
  return *comparison - *reference;
}

void CheckLengths(std::size_t a, std::size_t b, std::string_view what) {
  if (a != b) {
    throw Error(ErrorCode::kLengthMismatch, fmt::format("{}: {} vs {} rows", what, a, b));
  }
}

std::size_t GroupIndexOf(const GroupColumn& groups, std::string_view name) {
  for (std::size_t i = 0; i < groups.categories.size(); ++i) {
    if (groups.categories[i] == name) return i;
  }
  throw Error(ErrorCode::kUnknownGroup,
              fmt::format("'{}' is not a category of '{}'", name, groups.name));
}

}  // namespace

ConfusionCounts Confusion(std::span<const std::uint8_t> y, std::span<const std::uint8_t> yhat) {
  CheckLengths(y.size(), yhat.size(), "labels vs predictions");
  if (y.empty()) throw Error(ErrorCode::kLengthMismatch, "no rows to evaluate");
  ConfusionCounts c;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i]) {
      (yhat[i] ? c.tp : c.fn)++;
    } else {
      (yhat[i] ? c.fp : c.tn)++;
    }
  }
  return c;
}

Rate TruePositiveRate(const ConfusionCounts& c) { return SafeRatio(D(c.tp), D(c.positives())); }
Rate FalseNegativeRate(const ConfusionCounts& c) { return SafeRatio(D(c.fn), D(c.positives())); }
Rate FalsePositiveRate(const ConfusionCounts& c) { return SafeRatio(D(c.fp), D(c.negatives())); }
Rate TrueNegativeRate(const ConfusionCounts& c) { return SafeRatio(D(c.tn), D(c.negatives())); }
Rate Precision(const ConfusionCounts& c) { return SafeRatio(D(c.tp), D(c.tp + c.fp)); }
Rate Accuracy(const ConfusionCounts& c) { return SafeRatio(D(c.tp + c.tn), D(c.total())); }
Rate BaseRate(const ConfusionCounts& c) { return SafeRatio(D(c.positives()), D(c.total())); }
Rate PredictedPositiveRate(const ConfusionCounts& c) {
  return SafeRatio(D(c.tp + c.fp), D(c.total()));
}

Rate BalancedAccuracy(const ConfusionCounts& c) {
  const Rate tpr = TruePositiveRate(c);
  const Rate tnr = TrueNegativeRate(c);
  if (!tpr || !tnr) return std::nullopt;
  return (*tpr + *tnr) / 2.0;
}

const GroupMetrics* GroupMetricsTable::Find(std::string_view group) const {
  for (const auto& g : groups) {
    if (g.group == group) return &g;
  }
  return nullptr;
}

GroupMetricsTable ComputeGroupMetrics(std::span<const std::uint8_t> y,
                                      std::span<const std::uint8_t> yhat,
                                      const GroupColumn& groups) {
  CheckLengths(y.size(), yhat.size(), "labels vs predictions");
  CheckLengths(y.size(), groups.codes.size(), "labels vs group column");
  std::vector<ConfusionCounts> counts(groups.categories.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto g = static_cast<std::size_t>(groups.codes[i]);
    if (g >= counts.size()) {
      throw Error(ErrorCode::kBadCell, fmt::format("group code {} out of range", groups.codes[i]));
    }
    ConfusionCounts& c = counts[g];
    if (y[i]) {
      (yhat[i] ? c.tp : c.fn)++;
    } else {
      (yhat[i] ? c.fp : c.tn)++;
    }
  }
  GroupMetricsTable table;
  for (std::size_t g = 0; g < counts.size(); ++g) {
    const ConfusionCounts& c = counts[g];
    if (c.total() == 0) {
      table.absent_groups.push_back(groups.categories[g]);
      continue;
    }
    GroupMetrics m;
    m.code = static_cast<std::int32_t>(g);
    m.group = groups.categories[g];
    m.n = c.total();
    m.base_rate = BaseRate(c);
    m.pred_positive_rate = PredictedPositiveRate(c);
    m.tpr = TruePositiveRate(c);
    m.fnr = FalseNegativeRate(c);
    m.fpr = FalsePositiveRate(c);
    m.precision = Precision(c);
    m.accuracy = Accuracy(c);
    m.balanced_accuracy = BalancedAccuracy(c);
    m.confusion = c;
    table.groups.push_back(std::move(m));
  }
  return table;
}

const GroupDifference& FairnessReport::primary() const {
  if (comparisons.empty()) {
    throw Error(ErrorCode::kUnknownGroup, "no comparison group has evaluated rows");
  }
  return comparisons.front();
}

const GroupDifference* FairnessReport::Find(std::string_view group) const {
  for (const auto& d : comparisons) {
    if (d.group == group) return &d;
  }
  return nullptr;
}

FairnessReport MakeFairnessReport(std::span<const std::uint8_t> y,
                                  std::span<const std::uint8_t> yhat, const GroupColumn& groups,
                                  std::string_view reference) {
  GroupIndexOf(groups, reference);
  FairnessReport report;
  report.reference_group = std::string(reference);
  report.per_group = ComputeGroupMetrics(y, yhat, groups);
  const GroupMetrics* ref = report.per_group.Find(reference);
  if (!ref) {
    throw Error(ErrorCode::kUnknownGroup,
                fmt::format("reference group '{}' has no evaluated rows", reference));
  }
  for (const GroupMetrics& g : report.per_group.groups) {
    if (g.group == reference) continue;
    GroupDifference d;
    d.group = g.group;
    d.parity_difference = Difference(g.pred_positive_rate, ref->pred_positive_rate);
    d.base_rate_difference = Difference(g.base_rate, ref->base_rate);
    d.fnr_difference = Difference(g.fnr, ref->fnr);
    d.fpr_difference = Difference(g.fpr, ref->fpr);
    if (d.fnr_difference && d.fpr_difference) {
      d.equalized_odds_gap = std::max(std::abs(*d.fnr_difference), std::abs(*d.fpr_difference));
    }
    report.comparisons.push_back(std::move(d));
  }
  return report;
}

FairnessReport MakeFairnessReport(std::span<const std::uint8_t> y,
                                  std::span<const std::uint8_t> yhat,
                                  std::span<const double> scores, const GroupColumn& groups,
                                  std::string_view reference, const SufficiencyOptions& options) {
  FairnessReport report = MakeFairnessReport(y, yhat, groups, reference);
  report.sufficiency = SufficiencyGap(y, scores, groups, reference, options);
  report.sufficiency_gap = report.sufficiency.gap;
  return report;
}

SufficiencyResult SufficiencyGap(std::span<const std::uint8_t> y, std::span<const double> scores,
                                 const GroupColumn& groups, std::string_view reference,
                                 const SufficiencyOptions& options) {
  if (options.bins < 2) throw Error(ErrorCode::kBadConfig, "need at least 2 bins");
  CheckLengths(y.size(), scores.size(), "labels vs scores");
  CheckLengths(y.size(), groups.codes.size(), "labels vs group column");
  const std::size_t ref_code = GroupIndexOf(groups, reference);
  const std::size_t n_cats = groups.categories.size();
  const std::size_t bins = options.bins;

  std::vector<std::size_t> n(bins * n_cats, 0);
  std::vector<std::size_t> pos(bins * n_cats, 0);
  std::vector<std::size_t> group_total(n_cats, 0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto g = static_cast<std::size_t>(groups.codes[i]);
    const double s = std::clamp(scores[i], 0.0, 1.0);
    const std::size_t b = std::min(bins - 1, static_cast<std::size_t>(s * static_cast<double>(bins)));
    ++n[b * n_cats + g];
    pos[b * n_cats + g] += y[i];
    ++group_total[g];
  }

  SufficiencyResult result;
  std::vector<std::size_t> present;
  for (std::size_t g = 0; g < n_cats; ++g) {
    if (group_total[g] > 0) present.push_back(g);
  }
  if (present.size() < 2 || group_total[ref_code] == 0) return result;
  for (std::size_t g : present) result.groups.push_back(groups.categories[g]);

  for (std::size_t b = 0; b < bins; ++b) {
    SufficiencyBin bin;
    bin.bin = b;
    bin.lo = static_cast<double>(b) / static_cast<double>(bins);
    bin.hi = static_cast<double>(b + 1) / static_cast<double>(bins);
    bin.qualified = true;
    for (std::size_t g : present) {
      const std::size_t cell_n = n[b * n_cats + g];
      bin.support.push_back(cell_n);
      bin.positive_rate.push_back(SafeRatio(D(pos[b * n_cats + g]), D(cell_n)));
      if (cell_n < options.min_support) bin.qualified = false;
    }
    const std::size_t ref_n = n[b * n_cats + ref_code];
    if (ref_n > 0) {
      const double ref_rate = D(pos[b * n_cats + ref_code]) / D(ref_n);
      double gap = 0.0;
      bool any = false;
      for (std::size_t g : present) {
        const std::size_t cell_n = n[b * n_cats + g];
        if (g == ref_code || cell_n == 0) continue;
        gap = std::max(gap, std::abs(D(pos[b * n_cats + g]) / D(cell_n) - ref_rate));
        any = true;
      }
      if (any) bin.gap = gap;
    }
    if (bin.qualified && bin.gap) {
      result.gap = std::max(result.gap.value_or(0.0), *bin.gap);
    } else {
      bin.qualified = false;
      result.excluded_bins.push_back(b);
    }
    result.bins.push_back(std::move(bin));
  }
  return result;
}

ConformalCalibrator ConformalCalibrate(std::span<const std::uint8_t> y_cal,
                                       std::span<const double> scores_cal, double alpha,
                                       std::span<const std::size_t> calibration_rows) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::kBadConfig, "alpha must be in (0, 1)");
  CheckLengths(y_cal.size(), scores_cal.size(), "calibration labels vs scores");
  CheckLengths(y_cal.size(), calibration_rows.size(), "calibration labels vs row ids");
  const std::size_t n = y_cal.size();
  const auto k = static_cast<std::size_t>(
      std::ceil(static_cast<double>(n + 1) * (1.0 - alpha) - 1e-9));
  if (n == 0 || k > n) {
    throw Error(ErrorCode::kTooFewCalibration,
                fmt::format("{} calibration rows cannot support alpha {}", n, alpha));
  }
  std::vector<double> conformity(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p_true = y_cal[i] ? scores_cal[i] : 1.0 - scores_cal[i];
    conformity[i] = 1.0 - p_true;
  }
  std::nth_element(conformity.begin(), conformity.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   conformity.end());
  ConformalCalibrator cal;
  cal.alpha = alpha;
  cal.threshold = conformity[k - 1];
  cal.n_cal = n;
  cal.calibration_rows.assign(calibration_rows.begin(), calibration_rows.end());
  std::sort(cal.calibration_rows.begin(), cal.calibration_rows.end());
  return cal;
}

std::vector<PredictionSet> ConformalSets(const ConformalCalibrator& calibrator,
                                         std::span<const double> scores,
                                         std::span<const std::size_t> eval_rows) {
  CheckLengths(scores.size(), eval_rows.size(), "scores vs row ids");
  for (std::size_t r : eval_rows) {
    if (std::binary_search(calibrator.calibration_rows.begin(),
                           calibrator.calibration_rows.end(), r)) {
      throw Error(ErrorCode::kSplitOverlap,
                  fmt::format("row {} was used for calibration", r));
    }
  }
  std::vector<PredictionSet> sets;
  sets.reserve(scores.size());
  for (double s : scores) {
    PredictionSet set = 0;
    if (1.0 - (1.0 - s) <= calibrator.threshold) set |= kContainsNegative;
    if (1.0 - s <= calibrator.threshold) set |= kContainsPositive;
    sets.push_back(set);
  }
  return sets;
}

CoverageReport ComputeGroupCoverage(std::span<const std::uint8_t> y,
                                    std::span<const PredictionSet> sets,
                                    const GroupColumn& groups, std::size_t min_support) {
  CheckLengths(y.size(), sets.size(), "labels vs prediction sets");
  CheckLengths(y.size(), groups.codes.size(), "labels vs group column");
  const std::size_t n_cats = groups.categories.size();
  std::vector<std::size_t> n(n_cats, 0), covered(n_cats, 0), size(n_cats, 0);
  std::size_t total_covered = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto g = static_cast<std::size_t>(groups.codes[i]);
    const bool hit = (sets[i] & (y[i] ? kContainsPositive : kContainsNegative)) != 0;
    ++n.at(g);
    covered[g] += hit;
    total_covered += hit;
    size[g] += ((sets[i] & kContainsNegative) ? 1 : 0) + ((sets[i] & kContainsPositive) ? 1 : 0);
  }
  CoverageReport report;
  report.marginal = SafeRatio(D(total_covered), D(y.size()));
  for (std::size_t g = 0; g < n_cats; ++g) {
    GroupCoverage entry;
    entry.group = groups.categories[g];
    entry.n = n[g];
    entry.coverage = SafeRatio(D(covered[g]), D(n[g]));
    entry.mean_set_size = SafeRatio(D(size[g]), D(n[g]));
    entry.low_support = n[g] < min_support;
    report.groups.push_back(std::move(entry));
  }
  return report;
}

}  // namespace fairaudit::metrics
