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

#include "fairaudit/surrogate.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "fairaudit/svg.hpp"

namespace fairaudit::surrogate {

namespace {

nlohmann::json RateJson(const Rate& r) {
  return r ? nlohmann::json(*r) : nlohmann::json("undefined");
}

Rate Agreement(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.empty()) return std::nullopt;
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
  return static_cast<double>(same) / static_cast<double>(a.size());
}

std::string Condition(const forest::TreeNode& node,
                      std::span<const tabular::FeatureInfo> features) {
  const auto& f = features[static_cast<std::size_t>(node.feature)];
  if (f.kind == tabular::FeatureKind::kNumeric) {
    return fmt::format("{} <= {:.3f}", f.name, node.threshold);
  }
  std::vector<std::string> names;
  for (auto code : node.left_categories) {
    const auto c = static_cast<std::size_t>(code);
    names.push_back(c < f.categories.size() ? f.categories[c] : fmt::format("{}", code));
  }
  return fmt::format("{} in {{{}}}", f.name, fmt::join(names, ", "));
}

std::string LeafLabel(const forest::DecisionTree& tree, const forest::TreeNode& node) {
  return tree.criterion() == forest::Criterion::kVariance
             ? fmt::format("score {:.3f} (n={})", node.value, node.count)
             : fmt::format("p1 {:.3f} (n={})", node.value, node.count);
}

}  // namespace

std::string_view TargetName(Target t) { return t == Target::kScore ? "score" : "hard_label"; }

Target ParseTarget(std::string_view s) {
  if (s == "score") return Target::kScore;
  if (s == "hard_label") return Target::kHardLabel;
  throw Error(ErrorCode::kBadConfig, fmt::format("unknown surrogate target '{}'", s));
}

nlohmann::json SurrogateConfig::ToJson() const {
  nlohmann::json j = {{"max_depth", max_depth},
                      {"target", std::string(TargetName(target))},
                      {"min_node_size", min_node_size},
                      {"label_threshold", label_threshold},
                      {"fidelity_fraction", fidelity_fraction},
                      {"seed", seed}};
  j["filter"] = filter ? nlohmann::json{{"column", filter->column}, {"category", filter->category}}
                       : nlohmann::json(nullptr);
  return j;
}

SurrogateConfig SurrogateConfig::FromJson(const nlohmann::json& j) {
  SurrogateConfig c;
  try {
    c.max_depth = j.value("max_depth", c.max_depth);
    if (j.contains("target")) c.target = ParseTarget(j["target"].get<std::string>());
    c.min_node_size = j.value("min_node_size", c.min_node_size);
    c.label_threshold = j.value("label_threshold", c.label_threshold);
    c.fidelity_fraction = j.value("fidelity_fraction", c.fidelity_fraction);
    c.seed = j.value("seed", c.seed);
    if (j.contains("filter") && !j["filter"].is_null()) {
      c.filter = RowFilter{j["filter"].at("column").get<std::string>(),
                           j["filter"].at("category").get<std::string>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kBadConfig, e.what());
  }
  return c;
}

BlackBox BlackBox::FromForest(const forest::RandomForest& model) {
  return {model.features(), [&model](std::span<const double> row) { return model.Score(row); }};
}

BlackBox BlackBox::FromTree(forest::DecisionTree tree, std::vector<tabular::FeatureInfo> features) {
  return {std::move(features),
          [tree = std::move(tree)](std::span<const double> row) { return tree.Predict(row); }};
}

nlohmann::json SurrogateResult::ToJson() const {
  nlohmann::json feats = nlohmann::json::array();
  for (const auto& f : features) feats.push_back(f.name);
  return {{"config", config.ToJson()},
          {"features", std::move(feats)},
          {"tree", tree.ToJson()},
          {"fidelity_r2", RateJson(fidelity_r2)},
          {"agreement", RateJson(agreement)},
          {"n_rows_used", rows_used.size()},
          {"n_fit_rows", fit_rows.size()},
          {"n_fidelity_rows", fidelity_rows.size()}};
}

Rate RSquared(std::span<const double> reference, std::span<const double> predicted) {
  if (reference.empty() || reference.size() != predicted.size()) return std::nullopt;
  double mean = 0.0;
  for (double v : reference) mean += v;
  mean /= static_cast<double>(reference.size());
  double ss_tot = 0.0, ss_res = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    ss_tot += (reference[i] - mean) * (reference[i] - mean);
    ss_res += (reference[i] - predicted[i]) * (reference[i] - predicted[i]);
  }
  if (ss_tot <= 1e-24) return std::nullopt;
  return 1.0 - ss_res / ss_tot;
}

SurrogateResult FitSurrogate(const BlackBox& blackbox, const tabular::Dataset& ds,
                             std::span<const std::size_t> rows, const SurrogateConfig& config) {
  if (config.max_depth < 1 || config.min_node_size < 1) {
    throw Error(ErrorCode::kBadConfig, "max_depth and min_node_size must be >= 1");
  }
  const auto& schema = ds.schema();
  SurrogateResult result;
  result.config = config;

  std::optional<std::size_t> filter_col;
  if (config.filter) {
    filter_col = schema.IndexOf(config.filter->column);
    if (!schema.column(*filter_col).IsCategorical()) {
      throw Error(ErrorCode::kBadColumn, config.filter->column + " is not categorical");
    }
    const auto code = schema.CategoryCode(*filter_col, config.filter->category);
    if (!code) {
      throw Error(ErrorCode::kUnknownGroup,
                  fmt::format("'{}' is not a category of {}", config.filter->category,
                              config.filter->column));
    }
    const auto& codes = ds.codes(*filter_col);
    for (auto r : rows) {
      if (codes[r] == *code) result.rows_used.push_back(r);
    }
  } else {
    result.rows_used.assign(rows.begin(), rows.end());
  }
  if (result.rows_used.empty()) {
    throw Error(ErrorCode::kEmptyAfterFilter, "no rows left after filtering");
  }
  if (result.rows_used.size() < 2) {
    throw Error(ErrorCode::kTooFewRows, "need at least 2 rows to hold out fidelity rows");
  }

  std::vector<std::size_t> columns;
  for (auto c : schema.FeatureIndices()) {
    if (c != filter_col) columns.push_back(c);
  }
  if (columns.empty()) throw Error(ErrorCode::kBadConfig, "no surrogate features");
  const auto x = tabular::FeatureMatrix::FromDataset(ds, columns);
  const auto bx = tabular::FeatureMatrix::FromDataset(ds, blackbox.features);
  result.features = x.features();

  // Black-box outputs for every used row, indexed by dataset row.
  std::vector<double> bb(ds.n_rows(), 0.0);
  const auto& used = result.rows_used;
  const auto n_used = static_cast<std::int64_t>(used.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n_used; ++i) {
    const auto r = used[static_cast<std::size_t>(i)];
    bb[r] = blackbox.score(bx.Row(r));
  }
  const auto hard = [&](double s) -> std::uint8_t { return s >= config.label_threshold ? 1 : 0; };

  auto [fit, held] = tabular::SplitIndices(used, 1.0 - config.fidelity_fraction, config.seed);
  result.fit_rows = std::move(fit);
  result.fidelity_rows = std::move(held);

  std::vector<double> target(ds.n_rows(), 0.0);
  for (auto r : used) {
    target[r] = config.target == Target::kScore ? bb[r] : static_cast<double>(hard(bb[r]));
  }
  forest::TreeParams params;
  params.criterion =
      config.target == Target::kScore ? forest::Criterion::kVariance : forest::Criterion::kGini;
  params.min_node_size = config.min_node_size;
  params.max_depth = config.max_depth;
  Rng rng(config.seed);  // unused: all features are tried at every node
  result.tree = forest::BuildTree(x, target, result.fit_rows, params, rng);

  for (auto r : result.fidelity_rows) {
    const double out = result.tree.Predict(x, r);
    result.blackbox_scores.push_back(bb[r]);
    result.surrogate_outputs.push_back(out);
    result.blackbox_labels.push_back(hard(bb[r]));
    result.surrogate_labels.push_back(config.target == Target::kScore ? hard(out)
                                                                      : (out >= 0.5 ? 1 : 0));
  }
  if (config.target == Target::kScore) {
    result.fidelity_r2 = RSquared(result.blackbox_scores, result.surrogate_outputs);
  }
  result.agreement = Agreement(result.blackbox_labels, result.surrogate_labels);
  return result;
}

std::vector<GroupFidelity> FidelityByGroup(const SurrogateResult& result,
                                           const tabular::Dataset& ds,
                                           std::string_view group_column,
                                           std::size_t min_support) {
  const auto col = ds.schema().IndexOf(group_column);
  const auto& spec = ds.schema().column(col);
  if (!spec.IsCategorical()) {
    throw Error(ErrorCode::kBadColumn, std::string(group_column) + " is not categorical");
  }
  const auto& codes = ds.codes(col);
  std::vector<GroupFidelity> table;
  for (std::size_t g = 0; g < spec.categories.size(); ++g) {
    std::vector<double> ref, pred;
    std::vector<std::uint8_t> lab_bb, lab_sur;
    for (std::size_t i = 0; i < result.fidelity_rows.size(); ++i) {
      if (codes[result.fidelity_rows[i]] != static_cast<std::int32_t>(g)) continue;
      ref.push_back(result.blackbox_scores[i]);
      pred.push_back(result.surrogate_outputs[i]);
      lab_bb.push_back(result.blackbox_labels[i]);
      lab_sur.push_back(result.surrogate_labels[i]);
    }
    GroupFidelity row;
    row.group = spec.categories[g];
    row.n = ref.size();
    if (result.config.target == Target::kScore) row.r2 = RSquared(ref, pred);
    row.agreement = Agreement(lab_bb, lab_sur);
    row.low_support = row.n < min_support;
    table.push_back(std::move(row));
  }
  return table;
}

RenderedTree RenderTree(const forest::DecisionTree& tree,
                        std::span<const tabular::FeatureInfo> features, std::string_view title) {
  const auto& nodes = tree.nodes();
  RenderedTree out;
  svg::TreePlot plot;
  plot.title = std::string(title);
  for (const auto& node : nodes) {
    plot.nodes.push_back({node.is_leaf() ? LeafLabel(tree, node) : Condition(node, features),
                          node.is_leaf() ? -1 : node.left, node.is_leaf() ? -1 : node.right});
  }
  // Iterative pre-order walk for the outline.
  struct Item {
    std::int32_t node;
    int depth;
    std::string_view tag;
  };
  std::vector<Item> stack = {{0, 0, ""}};
  while (!nodes.empty() && !stack.empty()) {
    auto [i, depth, tag] = stack.back();
    stack.pop_back();
    const auto& node = nodes[static_cast<std::size_t>(i)];
    out.text += std::string(2 * static_cast<std::size_t>(depth), ' ');
    out.text += tag;
    out.text += plot.nodes[static_cast<std::size_t>(i)].label;
    out.text += '\n';
    if (!node.is_leaf()) {
      stack.push_back({node.right, depth + 1, "false: "});
      stack.push_back({node.left, depth + 1, "true: "});
    }
  }
  if (!nodes.empty()) out.svg = svg::EmitSvg(plot);
  return out;
}

}  // namespace fairaudit::surrogate
