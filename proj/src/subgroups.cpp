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

#include "fairaudit/subgroups.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "fairaudit/metrics.hpp"
#include "fairaudit/random.hpp"

namespace fairaudit::subgroups {

namespace {

std::uint64_t StableIdHash(std::string_view id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct MeanVar {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void Add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double Variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
};

std::string ConditionText(const tabular::FeatureInfo& f, const forest::TreeNode& node, bool left) {
  if (node.left_categories.empty()) {
    return fmt::format("{} {} {:.6g}", f.name, left ? "<=" : ">", node.threshold);
  }
  std::vector<std::string> cats;
  for (std::int32_t c : node.left_categories) cats.push_back(f.categories.at(c));
  return fmt::format("{} {} {{{}}}", f.name, left ? "in" : "not in", fmt::join(cats, ", "));
}

void CollectPaths(const forest::DecisionTree& tree, const std::vector<tabular::FeatureInfo>& features,
                  std::size_t node, std::vector<std::string>& path,
                  std::vector<std::string>& out) {
  const forest::TreeNode& n = tree.nodes()[node];
  out[node] = path.empty() ? "all rows" : fmt::format("{}", fmt::join(path, " & "));
  if (n.is_leaf()) return;
  const auto& f = features[static_cast<std::size_t>(n.feature)];
  path.push_back(ConditionText(f, n, true));
  CollectPaths(tree, features, static_cast<std::size_t>(n.left), path, out);
  path.back() = ConditionText(f, n, false);
  CollectPaths(tree, features, static_cast<std::size_t>(n.right), path, out);
  path.pop_back();
}

std::vector<std::size_t> HeterogeneityColumns(const tabular::Schema& schema) {
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    const auto role = schema.column(c).role;
    if (role != tabular::Role::kLabel && role != tabular::Role::kId) cols.push_back(c);
  }
  return cols;
}

}  // namespace

std::string SubgroupKey::Label() const {
  std::vector<std::string> items;
  for (const auto& [attr, cat] : parts) items.push_back(attr + "=" + cat);
  return fmt::format("{}", fmt::join(items, " & "));
}

std::string SubgroupKey::CodeLabel() const { return fmt::format("{}", fmt::join(codes, "-")); }

std::vector<SubgroupKey> EnumerateIntersections(const tabular::Schema& schema,
                                                std::span<const std::string> attributes) {
  if (attributes.empty()) throw Error(ErrorCode::kBadAttribute, "need at least one attribute");
  std::set<std::string> seen;
  std::vector<std::size_t> columns;
  for (const std::string& a : attributes) {
    if (!seen.insert(a).second) {
      throw Error(ErrorCode::kBadAttribute, fmt::format("attribute '{}' listed twice", a));
    }
    const auto c = schema.Find(a);
    if (!c || !schema.column(*c).IsCategorical() ||
        schema.column(*c).role == tabular::Role::kLabel) {
      throw Error(ErrorCode::kBadAttribute,
                  fmt::format("'{}' is not a categorical attribute", a));
    }
    columns.push_back(*c);
  }
  std::vector<SubgroupKey> keys(1);
  for (std::size_t i = 0; i < columns.size(); ++i) {
    const auto& cats = schema.column(columns[i]).categories;
    std::vector<SubgroupKey> next;
    next.reserve(keys.size() * cats.size());
    for (const SubgroupKey& k : keys) {
      for (std::size_t c = 0; c < cats.size(); ++c) {
        SubgroupKey key = k;
        key.parts.emplace_back(attributes[i], cats[c]);
        key.codes.push_back(static_cast<std::int32_t>(c));
        next.push_back(std::move(key));
      }
    }
    keys = std::move(next);
  }
  return keys;
}

std::string_view GridMetricName(GridMetric metric) {
  switch (metric) {
    case GridMetric::kBalancedAccuracy: return "balanced_accuracy";
    case GridMetric::kAccuracy: return "accuracy";
    case GridMetric::kFnr: return "fnr";
    case GridMetric::kParityVsGlobal: return "parity_vs_global";
  }
  return "unknown";
}

GridMetric ParseGridMetric(std::string_view name) {
  for (GridMetric m : {GridMetric::kBalancedAccuracy, GridMetric::kAccuracy, GridMetric::kFnr,
                       GridMetric::kParityVsGlobal}) {
    if (GridMetricName(m) == name) return m;
  }
  throw Error(ErrorCode::kBadConfig, fmt::format("unknown grid metric '{}'", name));
}

const GridCell* SubgroupGrid::Min() const {
  const GridCell* best = nullptr;
  for (const auto& c : cells) {
    if (c.value && (!best || *c.value < *best->value)) best = &c;
  }
  return best;
}

const GridCell* SubgroupGrid::Max() const {
  const GridCell* best = nullptr;
  for (const auto& c : cells) {
    if (c.value && (!best || *c.value > *best->value)) best = &c;
  }
  return best;
}

SubgroupGrid ComputeSubgroupGrid(const tabular::Dataset& ds, std::span<const std::size_t> rows,
                                 std::span<const std::uint8_t> y,
                                 std::span<const std::uint8_t> yhat,
                                 std::span<const std::string> attributes, GridMetric metric,
                                 std::size_t min_support) {
  if (y.size() != rows.size() || yhat.size() != rows.size()) {
    throw Error(ErrorCode::kLengthMismatch, "labels and predictions must align with rows");
  }
  SubgroupGrid grid;
  grid.metric = metric;
  grid.attributes.assign(attributes.begin(), attributes.end());
  grid.min_support = min_support;
  const auto keys = EnumerateIntersections(ds.schema(), attributes);

  std::vector<std::span<const std::int32_t>> codes;
  for (const auto& a : attributes) {
    const std::size_t c = ds.schema().IndexOf(a);
    codes.push_back(ds.codes(c));
    grid.shape.push_back(ds.schema().column(c).categories.size());
  }
  std::vector<metrics::ConfusionCounts> counts(keys.size());
  metrics::ConfusionCounts global;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::size_t cell = 0;
    for (std::size_t a = 0; a < codes.size(); ++a) {
      cell = cell * grid.shape[a] + static_cast<std::size_t>(codes[a][rows[i]]);
    }
    metrics::ConfusionCounts& c = counts.at(cell);
    if (y[i]) {
      (yhat[i] ? c.tp : c.fn)++;
    } else {
      (yhat[i] ? c.fp : c.tn)++;
    }
  }
  for (const auto& c : counts) global += c;

  auto value_of = [&](const metrics::ConfusionCounts& c) -> Rate {
    switch (metric) {
      case GridMetric::kBalancedAccuracy: return metrics::BalancedAccuracy(c);
      case GridMetric::kAccuracy: return metrics::Accuracy(c);
      case GridMetric::kFnr: return metrics::FalseNegativeRate(c);
      case GridMetric::kParityVsGlobal: {
        const Rate cell = metrics::PredictedPositiveRate(c);
        const Rate all = metrics::PredictedPositiveRate(global);
        if (!cell || !all) return std::nullopt;
        return *cell - *all;
      }
    }
    return std::nullopt;
  };

  grid.global_value = metric == GridMetric::kParityVsGlobal
                          ? (global.total() ? Rate(0.0) : std::nullopt)
                          : value_of(global);
  for (std::size_t k = 0; k < keys.size(); ++k) {
    GridCell cell;
    cell.key = keys[k];
    cell.support = counts[k].total();
    cell.value = cell.support ? value_of(counts[k]) : std::nullopt;
    cell.low_support = cell.support < min_support;
    grid.cells.push_back(std::move(cell));
  }
  return grid;
}

std::string_view StatisticName(Statistic s) {
  switch (s) {
    case Statistic::kErrorIndicator: return "error_indicator";
    case Statistic::kResidual: return "residual";
    case Statistic::kOutcome: return "outcome";
  }
  return "unknown";
}

Statistic ParseStatistic(std::string_view name) {
  for (Statistic s : {Statistic::kErrorIndicator, Statistic::kResidual, Statistic::kOutcome}) {
    if (StatisticName(s) == name) return s;
  }
  throw Error(ErrorCode::kBadConfig, fmt::format("unknown statistic '{}'", name));
}

std::vector<double> ErrorIndicator(std::span<const std::uint8_t> y,
                                   std::span<const std::uint8_t> yhat) {
  if (y.size() != yhat.size()) throw Error(ErrorCode::kLengthMismatch, "labels vs predictions");
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] != yhat[i] ? 1.0 : 0.0;
  return out;
}

std::vector<double> Residual(std::span<const std::uint8_t> y, std::span<const double> scores) {
  if (y.size() != scores.size()) throw Error(ErrorCode::kLengthMismatch, "labels vs scores");
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = static_cast<double>(y[i]) - scores[i];
  return out;
}

std::vector<const HeterogeneityFinding*> HeterogeneityResult::Confirmed() const {
  std::vector<const HeterogeneityFinding*> out;
  for (const auto& f : findings) {
    if (f.confirmed) out.push_back(&f);
  }
  return out;
}

std::vector<std::size_t> HeterogeneityResult::MatchingRows(
    const tabular::Dataset& ds, std::span<const std::size_t> rows,
    const HeterogeneityFinding& finding) const {
  const auto x = tabular::FeatureMatrix::FromDataset(ds, std::span<const tabular::FeatureInfo>(features));
  std::vector<std::size_t> out;
  for (std::size_t r : rows) {
    const auto path = tree.NodePath(x, r);
    if (std::find(path.begin(), path.end(), finding.node) != path.end()) out.push_back(r);
  }
  return out;
}

HeterogeneityResult FindHeterogeneity(const tabular::Dataset& ds,
                                      std::span<const std::size_t> rows,
                                      std::span<const double> statistic,
                                      const HeterogeneityConfig& config, Statistic kind) {
  if (statistic.size() != rows.size()) {
    throw Error(ErrorCode::kLengthMismatch, "statistic must align with rows");
  }
  if (!(config.delta > 0.0)) throw Error(ErrorCode::kBadConfig, "delta must be > 0");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw Error(ErrorCode::kBadConfig, "alpha must be in (0, 1)");
  }
  if (!(config.split_fraction > 0.0 && config.split_fraction < 1.0)) {
    throw Error(ErrorCode::kBadConfig, "split_fraction must be in (0, 1)");
  }
  if (config.max_depth == 0 || config.min_leaf == 0) {
    throw Error(ErrorCode::kBadConfig, "max_depth and min_leaf must be >= 1");
  }
  if (rows.size() < 2 * config.min_leaf) {
    throw Error(ErrorCode::kTooFewRows,
                fmt::format("{} rows < 2 * min_leaf ({})", rows.size(), config.min_leaf));
  }

  HeterogeneityResult result;
  result.statistic = kind;

  std::optional<std::size_t> id_column;
  for (std::size_t c = 0; c < ds.schema().size(); ++c) {
    if (ds.schema().column(c).role == tabular::Role::kId) {
      id_column = c;
      break;
    }
  }
  // Membership and the statistic are looked up by dataset row.
  std::vector<double> target(ds.n_rows(), 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t r = rows[i];
    target.at(r) = statistic[i];
    const std::uint64_t id = id_column ? StableIdHash(ds.ids(*id_column)[r]) : r;
    const double u = static_cast<double>(Mix64(config.seed ^ Mix64(id)) >> 11) * 0x1.0p-53;
    (u < config.split_fraction ? result.discovery_rows : result.confirmation_rows).push_back(r);
  }
  std::sort(result.discovery_rows.begin(), result.discovery_rows.end());
  std::sort(result.confirmation_rows.begin(), result.confirmation_rows.end());
  if (result.discovery_rows.size() < config.min_leaf ||
      result.confirmation_rows.size() < 2) {
    throw Error(ErrorCode::kTooFewRows, "a data-splitting half is too small");
  }

  const auto columns = HeterogeneityColumns(ds.schema());
  const auto x = tabular::FeatureMatrix::FromDataset(ds, columns);
  result.features = x.features();

  forest::TreeParams params;
  params.criterion = forest::Criterion::kVariance;
  params.min_node_size = config.min_leaf;
  params.max_depth = config.max_depth;
  Rng unused(config.seed);
  result.tree = forest::BuildTree(x, target, result.discovery_rows, params, unused);
  const auto& nodes = result.tree.nodes();

  MeanVar disc_all;
  for (std::size_t r : result.discovery_rows) disc_all.Add(target[r]);
  result.discovery_global_mean = disc_all.mean;

  // Shallowest deviating nodes, in pre-order.
  std::vector<std::size_t> candidates;
  std::vector<std::size_t> stack = {0};
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    if (std::abs(nodes[i].value - disc_all.mean) >= config.delta) {
      candidates.push_back(i);
    } else if (!nodes[i].is_leaf()) {
      stack.push_back(static_cast<std::size_t>(nodes[i].right));
      stack.push_back(static_cast<std::size_t>(nodes[i].left));
    }
  }

  std::vector<MeanVar> in_node(nodes.size());
  MeanVar conf_all;
  for (std::size_t r : result.confirmation_rows) {
    for (std::size_t i : result.tree.NodePath(x, r)) in_node[i].Add(target[r]);
    conf_all.Add(target[r]);
  }
  result.confirmation_global_mean = conf_all.mean;

  std::vector<std::string> predicates(nodes.size());
  std::vector<std::string> path;
  CollectPaths(result.tree, result.features, 0, path, predicates);

  const double k = static_cast<double>(candidates.size());
  for (std::size_t node : candidates) {
    HeterogeneityFinding f;
    f.node = node;
    f.predicate = predicates[node];
    f.discovery_n = nodes[node].count;
    f.discovery_mean = nodes[node].value;
    f.discovery_deviation = nodes[node].value - disc_all.mean;
    const MeanVar& inside = in_node[node];
    f.confirmation_n = inside.n;
    f.confirmation_mean = inside.mean;
    f.confirmation_deviation = inside.n ? inside.mean - conf_all.mean : 0.0;

    // Under the null the node and the rest share one distribution, so the
    // variance comes from the whole confirmation half (for a 0/1 statistic
    // this is the two-proportion z-test). A per-side variance would be zero
    // for small nodes without events and overstate significance.
    const std::size_t n_rest = conf_all.n - inside.n;
    if (inside.n >= 1 && n_rest >= 1 && conf_all.n >= 2) {
      const double sum_all = conf_all.mean * static_cast<double>(conf_all.n);
      const double sum_in = inside.mean * static_cast<double>(inside.n);
      const double mean_rest = (sum_all - sum_in) / static_cast<double>(n_rest);
      const double se = std::sqrt(conf_all.Variance() * (1.0 / static_cast<double>(inside.n) +
                                                         1.0 / static_cast<double>(n_rest)));
      const double diff = inside.mean - mean_rest;
      if (se > 0.0) {
        f.p_value = std::erfc(std::abs(diff / se) / std::sqrt(2.0));
      } else {
        f.p_value = diff == 0.0 ? 1.0 : 0.0;
      }
    }
    f.adjusted_p = std::min(1.0, f.p_value * k);
    f.confirmed = f.adjusted_p <= config.alpha &&
                  std::abs(f.confirmation_deviation) >= config.delta;
    result.findings.push_back(std::move(f));
  }
  return result;
}

}  // namespace fairaudit::subgroups
