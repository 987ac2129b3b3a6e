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
#include <utility>
#include <vector>

#include "fairaudit/common.hpp"
#include "fairaudit/forest.hpp"
#include "fairaudit/tabular.hpp"

namespace fairaudit::subgroups {

struct SubgroupKey {
  std::vector<std::pair<std::string, std::string>> parts;  // (attribute, category)
  std::vector<std::int32_t> codes;

  // "cit=DE & sex=F"
  std::string Label() const;
  // Code scheme like "0-1-2": category codes joined in attribute order.
  std::string CodeLabel() const;
  bool operator==(const SubgroupKey&) const = default;
};

// Full Cartesian product, lexicographic in (attribute order, category order).
// Throws BadAttribute for unknown, non-categorical or repeated attributes.
std::vector<SubgroupKey> EnumerateIntersections(const tabular::Schema& schema,
                                                std::span<const std::string> attributes);

enum class GridMetric { kBalancedAccuracy, kAccuracy, kFnr, kParityVsGlobal };

std::string_view GridMetricName(GridMetric metric);
GridMetric ParseGridMetric(std::string_view name);

struct GridCell {
  SubgroupKey key;
  std::size_t support = 0;
  Rate value;
  bool low_support = false;
};

struct SubgroupGrid {
  GridMetric metric = GridMetric::kBalancedAccuracy;
  std::vector<std::string> attributes;
  std::vector<std::size_t> shape;  // category count per attribute
  std::size_t min_support = 50;
  Rate global_value;
  std::vector<GridCell> cells;

  // Defined cell with the smallest value; nullptr when none is defined.
  const GridCell* Min() const;
  const GridCell* Max() const;
};

// `y` and `yhat` are aligned with `rows`. Cells with fewer than min_support
// rows are flagged; empty cells have an undefined value.
SubgroupGrid ComputeSubgroupGrid(const tabular::Dataset& ds, std::span<const std::size_t> rows,
                                 std::span<const std::uint8_t> y,
                                 std::span<const std::uint8_t> yhat,
                                 std::span<const std::string> attributes, GridMetric metric,
                                 std::size_t min_support = 50);

enum class Statistic { kErrorIndicator, kResidual, kOutcome };

std::string_view StatisticName(Statistic s);
Statistic ParseStatistic(std::string_view name);

std::vector<double> ErrorIndicator(std::span<const std::uint8_t> y,
                                   std::span<const std::uint8_t> yhat);
std::vector<double> Residual(std::span<const std::uint8_t> y, std::span<const double> scores);

struct HeterogeneityConfig {
  double delta = 0.0;          // minimum meaningful deviation from the global mean
  double alpha = 0.05;         // family-wise level after Bonferroni
  double split_fraction = 0.5; // share of rows in the discovery half
  std::size_t max_depth = 3;
  std::size_t min_leaf = 50;
  std::uint64_t seed = 0;
};

struct HeterogeneityFinding {
  std::size_t node = 0;  // node index in HeterogeneityResult::tree
  std::string predicate;
  std::size_t discovery_n = 0;
  double discovery_mean = 0.0;
  double discovery_deviation = 0.0;
  std::size_t confirmation_n = 0;
  double confirmation_mean = 0.0;
  double confirmation_deviation = 0.0;
  double p_value = 1.0;
  double adjusted_p = 1.0;
  bool confirmed = false;
};

struct HeterogeneityResult {
  Statistic statistic = Statistic::kErrorIndicator;
  double discovery_global_mean = 0.0;
  double confirmation_global_mean = 0.0;
  std::vector<std::size_t> discovery_rows;     // dataset row ids
  std::vector<std::size_t> confirmation_rows;  // dataset row ids
  std::vector<tabular::FeatureInfo> features;
  forest::DecisionTree tree;
  std::vector<HeterogeneityFinding> findings;  // every candidate node

  std::vector<const HeterogeneityFinding*> Confirmed() const;
  // Dataset rows (from `rows`) that satisfy the finding's predicate.
  std::vector<std::size_t> MatchingRows(const tabular::Dataset& ds,
                                        std::span<const std::size_t> rows,
                                        const HeterogeneityFinding& finding) const;
};

// Discovery/confirmation membership is a hash of the seed and a stable row
// id (the id column when present, else the row index), so reordering rows
// does not move rows between halves. A regression tree on the discovery half
// proposes the shallowest nodes deviating by at least delta (descendants of a
// candidate are refinements of it and are not tested); each is re-tested on
// the confirmation half (two-sided pooled-variance z-test, node vs rest) with
// a Bonferroni correction over candidates. `statistic` is aligned with `rows`.
HeterogeneityResult FindHeterogeneity(const tabular::Dataset& ds,
                                      std::span<const std::size_t> rows,
                                      std::span<const double> statistic,
                                      const HeterogeneityConfig& config,
                                      Statistic kind = Statistic::kErrorIndicator);

}  // namespace fairaudit::subgroups
