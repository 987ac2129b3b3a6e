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

#include <fmt/format.h>

#include <cmath>

#include "fairaudit/cli.hpp"

namespace fairaudit::cli {

namespace {

void Violate(std::vector<GateViolation>& out, std::string gate, std::string subject,
             double value, double threshold) {
  out.push_back({std::move(gate), std::move(subject), value, threshold});
}

}  // namespace

GateConfig GateConfig::FromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kBadConfig, "gates must be a JSON object");
  GateConfig g;
  for (const auto& [key, value] : j.items()) {
    std::optional<double>* slot = nullptr;
    if (key == "max_abs_parity_difference") slot = &g.max_abs_parity_difference;
    if (key == "max_abs_fnr_difference") slot = &g.max_abs_fnr_difference;
    if (key == "min_group_balanced_accuracy") slot = &g.min_group_balanced_accuracy;
    if (key == "min_group_coverage") slot = &g.min_group_coverage;
    if (slot == nullptr) throw Error(ErrorCode::kBadConfig, "unknown gate " + key);
    if (value.is_null()) continue;
    if (!value.is_number()) throw Error(ErrorCode::kBadConfig, key + " must be a number");
    const double v = value.get<double>();
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::kBadConfig, fmt::format("{} = {} is outside [0, 1]", key, v));
    }
    *slot = v;
  }
  return g;
}

nlohmann::json GateConfig::ToJson() const {
  const auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return {{"max_abs_parity_difference", opt(max_abs_parity_difference)},
          {"max_abs_fnr_difference", opt(max_abs_fnr_difference)},
          {"min_group_balanced_accuracy", opt(min_group_balanced_accuracy)},
          {"min_group_coverage", opt(min_group_coverage)}};
}

std::vector<GateViolation> CheckFairness(const GateConfig& gates,
                                         const metrics::FairnessReport& report,
                                         std::string_view subject) {
  std::vector<GateViolation> out;
  const auto tag = [&](const std::string& group) {
    return subject.empty() ? group : fmt::format("{} {}", subject, group);
  };
  for (const auto& d : report.comparisons) {
    if (gates.max_abs_parity_difference && d.parity_difference &&
        std::abs(*d.parity_difference) > *gates.max_abs_parity_difference) {
      Violate(out, "max_abs_parity_difference", tag(d.group), *d.parity_difference,
              *gates.max_abs_parity_difference);
    }
    if (gates.max_abs_fnr_difference && d.fnr_difference &&
        std::abs(*d.fnr_difference) > *gates.max_abs_fnr_difference) {
      Violate(out, "max_abs_fnr_difference", tag(d.group), *d.fnr_difference,
              *gates.max_abs_fnr_difference);
    }
  }
  if (gates.min_group_balanced_accuracy) {
    for (const auto& g : report.per_group.groups) {
      if (g.balanced_accuracy && *g.balanced_accuracy < *gates.min_group_balanced_accuracy) {
        Violate(out, "min_group_balanced_accuracy", tag(g.group), *g.balanced_accuracy,
                *gates.min_group_balanced_accuracy);
      }
    }
  }
  return out;
}

std::vector<GateViolation> CheckCoverage(const GateConfig& gates,
                                         const metrics::CoverageReport& coverage) {
  std::vector<GateViolation> out;
  if (!gates.min_group_coverage) return out;
  for (const auto& g : coverage.groups) {
    if (!g.low_support && g.coverage && *g.coverage < *gates.min_group_coverage) {
      Violate(out, "min_group_coverage", g.group, *g.coverage, *gates.min_group_coverage);
    }
  }
  return out;
}

std::vector<GateViolation> CheckDrift(const GateConfig& gates, const drift::DriftSeries& series) {
  std::vector<GateViolation> out;
  for (const auto& r : series.records) {
    const std::string period = fmt::format("period {}", r.eval_period);
    if (gates.max_abs_parity_difference && r.parity_difference &&
        std::abs(*r.parity_difference) > *gates.max_abs_parity_difference) {
      Violate(out, "max_abs_parity_difference", period, *r.parity_difference,
              *gates.max_abs_parity_difference);
    }
    if (gates.max_abs_fnr_difference && r.fnr_difference &&
        std::abs(*r.fnr_difference) > *gates.max_abs_fnr_difference) {
      Violate(out, "max_abs_fnr_difference", period, *r.fnr_difference,
              *gates.max_abs_fnr_difference);
    }
    if (gates.min_group_balanced_accuracy) {
      for (const auto& g : r.per_group.groups) {
        if (g.balanced_accuracy && *g.balanced_accuracy < *gates.min_group_balanced_accuracy) {
          Violate(out, "min_group_balanced_accuracy", fmt::format("{} {}", period, g.group),
                  *g.balanced_accuracy, *gates.min_group_balanced_accuracy);
        }
      }
    }
  }
  return out;
}

nlohmann::json RateJson(const Rate& r) {
  return r && std::isfinite(*r) ? nlohmann::json(*r) : nlohmann::json("undefined");
}

nlohmann::json ToJson(const metrics::ConfusionCounts& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
}

nlohmann::json ToJson(const metrics::GroupMetricsTable& t) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : t.groups) {
    groups.push_back({{"group", g.group},
                      {"code", g.code},
                      {"n", g.n},
                      {"base_rate", RateJson(g.base_rate)},
                      {"pred_positive_rate", RateJson(g.pred_positive_rate)},
                      {"tpr", RateJson(g.tpr)},
                      {"fnr", RateJson(g.fnr)},
                      {"fpr", RateJson(g.fpr)},
                      {"precision", RateJson(g.precision)},
                      {"accuracy", RateJson(g.accuracy)},
                      {"balanced_accuracy", RateJson(g.balanced_accuracy)},
                      {"confusion", ToJson(g.confusion)}});
  }
  return {{"groups", std::move(groups)}, {"absent_groups", t.absent_groups}};
}

nlohmann::json ToJson(const metrics::FairnessReport& r) {
  nlohmann::json comparisons = nlohmann::json::array();
  for (const auto& d : r.comparisons) {
    comparisons.push_back({{"group", d.group},
                           {"parity_difference", RateJson(d.parity_difference)},
                           {"base_rate_difference", RateJson(d.base_rate_difference)},
                           {"fnr_difference", RateJson(d.fnr_difference)},
                           {"fpr_difference", RateJson(d.fpr_difference)},
                           {"equalized_odds_gap", RateJson(d.equalized_odds_gap)}});
  }
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& b : r.sufficiency.bins) {
    nlohmann::json rates = nlohmann::json::array();
    for (const auto& p : b.positive_rate) rates.push_back(RateJson(p));
    bins.push_back({{"bin", b.bin},
                    {"lo", b.lo},
                    {"hi", b.hi},
                    {"support", b.support},
                    {"positive_rate", std::move(rates)},
                    {"gap", RateJson(b.gap)},
                    {"qualified", b.qualified}});
  }
  return {{"reference_group", r.reference_group},
          {"comparisons", std::move(comparisons)},
          {"per_group", ToJson(r.per_group)},
          {"sufficiency",
           {{"groups", r.sufficiency.groups},
            {"gap", RateJson(r.sufficiency_gap)},
            {"bins", std::move(bins)},
            {"excluded_bins", r.sufficiency.excluded_bins}}}};
}

nlohmann::json ToJson(const metrics::CoverageReport& r) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : r.groups) {
    groups.push_back({{"group", g.group},
                      {"n", g.n},
                      {"coverage", RateJson(g.coverage)},
                      {"mean_set_size", RateJson(g.mean_set_size)},
                      {"low_support", g.low_support}});
  }
  return {{"marginal", RateJson(r.marginal)}, {"groups", std::move(groups)}};
}

nlohmann::json ToJson(const subgroups::SubgroupGrid& g) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : g.cells) {
    cells.push_back({{"label", c.key.Label()},
                     {"code", c.key.CodeLabel()},
                     {"support", c.support},
                     {"value", RateJson(c.value)},
                     {"low_support", c.low_support}});
  }
  nlohmann::json j = {{"metric", std::string(subgroups::GridMetricName(g.metric))},
                      {"attributes", g.attributes},
                      {"shape", g.shape},
                      {"min_support", g.min_support},
                      {"global_value", RateJson(g.global_value)},
                      {"cells", std::move(cells)}};
  const auto* lo = g.Min();
  const auto* hi = g.Max();
  j["min_cell"] = lo ? nlohmann::json(lo->key.Label()) : nlohmann::json(nullptr);
  j["max_cell"] = hi ? nlohmann::json(hi->key.Label()) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json ToJson(const subgroups::HeterogeneityResult& r) {
  nlohmann::json findings = nlohmann::json::array();
  for (const auto& f : r.findings) {
    findings.push_back({{"node", f.node},
                        {"predicate", f.predicate},
                        {"discovery_n", f.discovery_n},
                        {"discovery_mean", f.discovery_mean},
                        {"discovery_deviation", f.discovery_deviation},
                        {"confirmation_n", f.confirmation_n},
                        {"confirmation_mean", f.confirmation_mean},
                        {"confirmation_deviation", f.confirmation_deviation},
                        {"p_value", f.p_value},
                        {"adjusted_p", f.adjusted_p},
                        {"confirmed", f.confirmed}});
  }
  return {{"statistic", std::string(subgroups::StatisticName(r.statistic))},
          {"discovery_global_mean", r.discovery_global_mean},
          {"confirmation_global_mean", r.confirmation_global_mean},
          {"n_discovery", r.discovery_rows.size()},
          {"n_confirmation", r.confirmation_rows.size()},
          {"findings", std::move(findings)},
          {"n_confirmed", r.Confirmed().size()}};
}

nlohmann::json ToJson(const drift::DriftSeries& s) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : s.records) {
    records.push_back({{"train_periods", r.train_periods},
                       {"eval_period", r.eval_period},
                       {"n_train", r.n_train},
                       {"n_eval", r.n_eval},
                       {"balanced_accuracy", RateJson(r.balanced_accuracy)},
                       {"delta_balanced_accuracy", RateJson(r.delta_balanced_accuracy)},
                       {"parity_difference", RateJson(r.parity_difference)},
                       {"fnr_difference", RateJson(r.fnr_difference)},
                       {"base_rate_difference", RateJson(r.base_rate_difference)},
                       {"per_group", ToJson(r.per_group)},
                       {"model_hash", r.model_hash}});
  }
  return {{"protected_column", s.protected_column},
          {"reference_group", s.reference_group},
          {"comparison_group", s.comparison_group},
          {"threshold_rule", s.threshold_rule},
          {"records", std::move(records)}};
}

nlohmann::json ToJson(const std::vector<drift::Alert>& alerts) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& a : alerts) {
    out.push_back({{"eval_period", a.eval_period},
                   {"kind", a.kind},
                   {"group", a.group},
                   {"value", a.value},
                   {"threshold", a.threshold}});
  }
  return out;
}

nlohmann::json ToJson(const repro::SimilarityMatrix& m) {
  const auto lo = m.MinOffDiagonal();
  return {{"group", m.group},
          {"n_rows", m.n_rows},
          {"variants", m.variants},
          {"positives", m.positives},
          {"values", m.values},
          {"min_off_diagonal",
           {{"value", lo.value}, {"a", m.variants.at(lo.i)}, {"b", m.variants.at(lo.j)}}}};
}

nlohmann::json ToJson(const std::vector<surrogate::GroupFidelity>& table) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& g : table) {
    out.push_back({{"group", g.group},
                   {"n", g.n},
                   {"r2", RateJson(g.r2)},
                   {"agreement", RateJson(g.agreement)},
                   {"low_support", g.low_support}});
  }
  return out;
}

nlohmann::json ToJson(const std::vector<GateViolation>& violations) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& v : violations) {
    out.push_back({{"gate", v.gate},
                   {"subject", v.subject},
                   {"value", v.value},
                   {"threshold", v.threshold}});
  }
  return out;
}

nlohmann::json StripTimestamp(nlohmann::json report) {
  if (report.is_object()) report.erase(std::string(kTimestampField));
  return report;
}

}  // namespace fairaudit::cli
