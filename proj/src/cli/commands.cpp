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

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <sstream>

#include "CLI11.hpp"
#include "fairaudit/cli.hpp"
#include "fairaudit/digest.hpp"
#include "fairaudit/parallel.hpp"
#include "fairaudit/random.hpp"
#include "fairaudit/svg.hpp"
#include "fairaudit/synthlab.hpp"

namespace fairaudit::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Args {
  std::string data;
  std::string schema;
  std::string out;
  std::string protected_column;
  std::string reference;
  std::string threshold = "top_q:0.25";
  std::string gates;
  std::string config;
  std::uint64_t seed = 0;
  bool seed_given = false;
  double split = 0.75;
};

// Shared state of one subcommand run.
struct Run {
  Run(std::string name, Args parsed, std::ostream& stream)
      : command(std::move(name)), args(std::move(parsed)), out(stream) {}

  std::string command;
  Args args;
  std::ostream& out;
  json config = json::object();  // resolved configuration, recorded in the report
  json inputs = json::object();
  std::vector<std::string> warnings;
  std::vector<GateViolation> violations;
  std::optional<GateConfig> gates;
};

json LoadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBadConfig, fmt::format("{}: {}", path, e.what()));
  }
}

void WriteFile(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << bytes;
}

void WriteJson(const fs::path& path, const json& j) { WriteFile(path, j.dump(2) + "\n"); }

std::string Timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string FileSafe(std::string_view name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_';
    out += ok ? c : '_';
  }
  return out.empty() ? "_" : out;
}

std::string Fmt(const Rate& r) { return r ? fmt::format("{:.3f}", *r) : "undefined"; }

void Prepare(Run& run) {
  if (!run.args.config.empty()) {
    run.config = LoadJsonFile(run.args.config);
    if (!run.config.is_object()) throw Error(ErrorCode::kBadConfig, "config must be an object");
  }
  if (!run.args.gates.empty()) {
    run.gates = GateConfig::FromJson(LoadJsonFile(run.args.gates));
  }
  fs::create_directories(run.args.out);
}

struct Inputs {
  tabular::Schema schema;
  tabular::Dataset data;
};

Inputs LoadInputs(Run& run) {
  if (run.args.data.empty() || run.args.schema.empty()) {
    throw Error(ErrorCode::kBadConfig, "--data and --schema are required");
  }
  Inputs in;
  in.schema = tabular::Schema::LoadManifest(run.args.schema);
  in.data = tabular::LoadCsv(run.args.data, in.schema);
  const auto issues = tabular::Validate(in.data);
  if (!issues.empty()) {
    throw Error(ErrorCode::kBadCell,
                fmt::format("{} invalid values; first: {} in column {} row {}", issues.size(),
                            issues[0].code, issues[0].column, issues[0].row));
  }
  run.inputs["data_sha256"] = Sha256File(run.args.data);
  run.inputs["schema_sha256"] = Sha256File(run.args.schema);
  return in;
}

// Report envelope; the resolved config is recorded so its digest can be
// recomputed from the report alone.
json Envelope(const Run& run) {
  json inputs = run.inputs;
  inputs["config_sha256"] = Sha256Hex(run.config.dump());
  if (run.gates) inputs["gates_sha256"] = Sha256Hex(run.gates->ToJson().dump());
  json j = {{"schema_version", std::string(kSchemaVersion)},
            {"tool", {{"name", "fairaudit"}, {"version", std::string(kToolVersion)}}},
            {"command", run.command},
            {"seed", run.args.seed},
            {"config", run.config},
            {"inputs", std::move(inputs)},
            {"warnings", run.warnings},
            {std::string(kTimestampField), Timestamp()}};
  if (run.gates) {
    j["gates"] = {{"config", run.gates->ToJson()},
                  {"violations", ToJson(run.violations)},
                  {"passed", run.violations.empty()}};
  }
  return j;
}

int Finish(Run& run, json report, const std::string& name) {
  json envelope = Envelope(run);
  envelope.update(report);
  WriteJson(fs::path(run.args.out) / name, envelope);
  for (const auto& w : run.warnings) run.out << "warning: " << w << "\n";
  run.out << "report: " << (fs::path(run.args.out) / name).string() << "\n";
  if (!run.violations.empty()) {
    for (const auto& v : run.violations) {
      run.out << fmt::format("GATE VIOLATED: {} ({}): {:.4f} vs threshold {:.4f}\n", v.gate,
                             v.subject, v.value, v.threshold);
    }
    return kGateViolation;
  }
  if (run.gates) run.out << "gates: passed\n";
  return kOk;
}

forest::ForestConfig ForestFor(Run& run) {
  auto fc = forest::ForestConfig::FromJson(run.config.value("forest", json::object()));
  fc.seed = run.args.seed;
  run.config["forest"] = fc.ToJson();
  return fc;
}

forest::ThresholdRule RuleFor(Run& run) {
  const auto rule = forest::ThresholdRule::Parse(run.args.threshold);
  run.config["threshold"] = rule.ToString();
  return rule;
}

// Protected column and reference group, defaulting to the first protected
// column and its first category.
std::pair<std::size_t, std::string> ProtectedFor(Run& run, const tabular::Schema& schema) {
  std::size_t col = 0;
  if (!run.args.protected_column.empty()) {
    col = schema.IndexOf(run.args.protected_column);
  } else {
    const auto protected_cols = schema.ProtectedIndices();
    if (protected_cols.empty()) {
      throw Error(ErrorCode::kBadConfig, "--protected is required: the schema has none");
    }
    col = protected_cols.front();
  }
  const auto& spec = schema.column(col);
  if (!spec.IsCategorical() || spec.role == tabular::Role::kLabel) {
    throw Error(ErrorCode::kBadColumn, spec.name + " cannot be used as a protected column");
  }
  std::string reference = run.args.reference.empty() ? spec.categories.at(0) : run.args.reference;
  if (!schema.CategoryCode(col, reference)) {
    throw Error(ErrorCode::kUnknownGroup,
                fmt::format("'{}' is not a category of {}", reference, spec.name));
  }
  run.config["protected"] = spec.name;
  run.config["reference"] = reference;
  return {col, reference};
}

tabular::SplitPlan SplitFor(Run& run, const tabular::Dataset& ds) {
  std::optional<std::string> stratify;
  if (run.config.contains("stratify") && !run.config["stratify"].is_null()) {
    stratify = run.config["stratify"].get<std::string>();
  }
  run.config["split"] = run.args.split;
  return tabular::SplitRandom(ds, run.args.split, run.args.seed, stratify);
}

std::vector<double> ScoreRows(const forest::RandomForest& model, const tabular::FeatureMatrix& x,
                              std::span<const std::size_t> rows) {
  std::vector<double> scores(rows.size());
  const auto n = static_cast<std::int64_t>(rows.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    scores[static_cast<std::size_t>(i)] = model.Score(x.Row(rows[static_cast<std::size_t>(i)]));
  }
  return scores;
}

std::vector<std::int32_t> CodesAt(const tabular::Dataset& ds, std::size_t col,
                                  std::span<const std::size_t> rows) {
  const auto codes = ds.codes(col);
  std::vector<std::int32_t> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(codes[r]);
  return out;
}

void WarnGroups(Run& run, const metrics::GroupMetricsTable& table, std::string_view where) {
  for (const auto& g : table.absent_groups) {
    run.warnings.push_back(fmt::format("{}: group '{}' has no evaluated rows", where, g));
  }
  for (const auto& g : table.groups) {
    if (!g.balanced_accuracy || !g.fnr || !g.fpr) {
      run.warnings.push_back(
          fmt::format("{}: group '{}' has undefined error rates (single-class truth)", where,
                      g.group));
    }
  }
}

svg::Heatmap GridHeatmap(const subgroups::SubgroupGrid& grid, const tabular::Schema& schema) {
  svg::Heatmap h;
  h.title = fmt::format("Subgroup {}", subgroups::GridMetricName(grid.metric));
  const auto& last = schema.column(schema.IndexOf(grid.attributes.back())).categories;
  for (const auto& c : last) h.col_labels.push_back(fmt::format("{}={}", grid.attributes.back(), c));
  const std::size_t cols = last.size();
  for (std::size_t i = 0; i < grid.cells.size(); i += cols) {
    const auto& parts = grid.cells[i].key.parts;
    std::vector<std::string> head;
    for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
      head.push_back(fmt::format("{}={}", parts[k].first, parts[k].second));
    }
    h.row_labels.push_back(head.empty() ? "all" : fmt::format("{}", fmt::join(head, " & ")));
  }
  for (const auto& cell : grid.cells) h.values.push_back(cell.value);
  return h;
}

svg::Heatmap GroupMetricsHeatmap(const metrics::GroupMetricsTable& t) {
  svg::Heatmap h;
  h.title = "Per-group metrics";
  h.col_labels = {"base rate", "pred. positive", "TPR", "FNR", "FPR", "precision", "accuracy",
                  "balanced acc."};
  for (const auto& g : t.groups) {
    h.row_labels.push_back(g.group);
    for (const auto& v : {g.base_rate, g.pred_positive_rate, g.tpr, g.fnr, g.fpr, g.precision,
                          g.accuracy, g.balanced_accuracy}) {
      h.values.push_back(v);
    }
  }
  return h;
}

// ---------------------------------------------------------------- audit

int CmdAudit(Run& run) {
  Prepare(run);
  const auto in = LoadInputs(run);
  const auto& ds = in.data;
  const auto [pcol, reference] = ProtectedFor(run, in.schema);
  const auto rule = RuleFor(run);
  const auto fc = ForestFor(run);
  const auto plan = SplitFor(run, ds);

  const auto x = tabular::FeatureMatrix::FromDataset(ds);
  const auto labels = ds.Labels();
  const auto model = forest::TrainForest(x, labels, plan.train, fc);
  WriteFile(fs::path(run.args.out) / "model.json", model.Serialize() + "\n");

  const auto scores = ScoreRows(model, x, plan.eval);
  const auto yhat = forest::Classify(scores, rule);
  const auto y = ds.Labels(plan.eval);
  const auto codes = CodesAt(ds, pcol, plan.eval);
  const auto& pspec = in.schema.column(pcol);
  const metrics::GroupColumn groups{pspec.name, codes, pspec.categories};

  metrics::SufficiencyOptions so;
  so.bins = run.config.value("sufficiency_bins", so.bins);
  so.min_support = run.config.value("min_support_sufficiency", so.min_support);
  const auto fairness = metrics::MakeFairnessReport(y, yhat, scores, groups, reference, so);
  WarnGroups(run, fairness.per_group, "fairness");

  const auto confusion = metrics::Confusion(y, yhat);
  const std::uint8_t majority = confusion.positives() * 2 >= confusion.total() ? 1 : 0;
  const std::vector<std::uint8_t> constant(y.size(), majority);
  const auto baseline = metrics::Confusion(y, constant);

  // Subgroup grid over the protected attributes unless configured.
  std::vector<std::string> attributes;
  if (run.config.contains("subgroup_attributes")) {
    attributes = run.config["subgroup_attributes"].get<std::vector<std::string>>();
  } else {
    for (auto c : in.schema.ProtectedIndices()) attributes.push_back(in.schema.column(c).name);
  }
  run.config["subgroup_attributes"] = attributes;
  const auto metric =
      subgroups::ParseGridMetric(run.config.value("grid_metric", std::string("balanced_accuracy")));
  run.config["grid_metric"] = std::string(subgroups::GridMetricName(metric));
  const std::size_t min_support = run.config.value("min_support", std::size_t{50});
  run.config["min_support"] = min_support;
  const auto grid =
      subgroups::ComputeSubgroupGrid(ds, plan.eval, y, yhat, attributes, metric, min_support);
  std::size_t low = 0;
  for (const auto& c : grid.cells) low += c.low_support;
  if (low > 0) {
    run.warnings.push_back(
        fmt::format("subgroup grid: {} of {} cells have fewer than {} rows", low,
                    grid.cells.size(), min_support));
  }

  // Conformal sets: calibration rows are carved out of the eval split.
  const double alpha = run.config.value("conformal_alpha", 0.1);
  run.config["conformal_alpha"] = alpha;
  json conformal = nullptr;
  metrics::CoverageReport coverage;
  try {
    auto [cal_rows, test_rows] = tabular::SplitIndices(plan.eval, 0.5, DeriveSeed(run.args.seed, 1));
    std::vector<double> score_of(ds.n_rows(), 0.0);
    for (std::size_t i = 0; i < plan.eval.size(); ++i) score_of[plan.eval[i]] = scores[i];
    std::vector<double> s_cal, s_test;
    for (auto r : cal_rows) s_cal.push_back(score_of[r]);
    for (auto r : test_rows) s_test.push_back(score_of[r]);
    const auto cal = metrics::ConformalCalibrate(ds.Labels(cal_rows), s_cal, alpha, cal_rows);
    const auto sets = metrics::ConformalSets(cal, s_test, test_rows);
    const auto test_codes = CodesAt(ds, pcol, test_rows);
    coverage = metrics::ComputeGroupCoverage(ds.Labels(test_rows), sets,
                                             {pspec.name, test_codes, pspec.categories});
    conformal = ToJson(coverage);
    conformal["alpha"] = alpha;
    conformal["threshold"] = cal.threshold;
    conformal["n_calibration"] = cal.n_cal;
    conformal["n_test"] = test_rows.size();
    for (const auto& g : coverage.groups) {
      if (g.low_support) {
        run.warnings.push_back(
            fmt::format("conformal: group '{}' has only {} test rows", g.group, g.n));
      }
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kTooFewCalibration && e.code() != ErrorCode::kDegenerateSplit) throw;
    run.warnings.push_back(fmt::format("conformal section skipped: {}", e.what()));
  }

  if (run.gates) {
    run.violations = CheckFairness(*run.gates, fairness);
    auto cov = CheckCoverage(*run.gates, coverage);
    run.violations.insert(run.violations.end(), cov.begin(), cov.end());
  }

  const fs::path dir = run.args.out;
  WriteFile(dir / "subgroup_grid.svg", svg::EmitSvg(GridHeatmap(grid, in.schema)));
  if (!fairness.per_group.groups.empty()) {
    WriteFile(dir / "group_metrics.svg", svg::EmitSvg(GroupMetricsHeatmap(fairness.per_group)));
  }

  json report = {
      {"split", {{"n_train", plan.train.size()}, {"n_eval", plan.eval.size()}}},
      {"model", {{"hash", model.Hash()}, {"n_features", model.n_features()}}},
      {"overall",
       {{"confusion", ToJson(confusion)},
        {"accuracy", RateJson(metrics::Accuracy(confusion))},
        {"balanced_accuracy", RateJson(metrics::BalancedAccuracy(confusion))},
        {"baseline",
         {{"predicts", majority},
          {"accuracy", RateJson(metrics::Accuracy(baseline))},
          {"balanced_accuracy", RateJson(metrics::BalancedAccuracy(baseline))}}}}},
      {"fairness", ToJson(fairness)},
      {"subgroup_grid", ToJson(grid)},
      {"conformal", conformal}};

  run.out << fmt::format("audit: {} train / {} eval rows, rule {}\n", plan.train.size(),
                         plan.eval.size(), rule.ToString());
  run.out << fmt::format("balanced accuracy {} (majority baseline {})\n",
                         Fmt(metrics::BalancedAccuracy(confusion)),
                         Fmt(metrics::BalancedAccuracy(baseline)));
  for (const auto& d : fairness.comparisons) {
    run.out << fmt::format("{} vs {}: parity {}, FNR {}, base rate {}\n", d.group, reference,
                           Fmt(d.parity_difference), Fmt(d.fnr_difference),
                           Fmt(d.base_rate_difference));
  }
  if (const auto* lo = grid.Min()) {
    run.out << fmt::format("subgroups: {} cells, min {} at {}\n", grid.cells.size(),
                           Fmt(lo->value), lo->key.Label());
  }
  if (!conformal.is_null()) {
    run.out << fmt::format("conformal coverage {} at alpha {}\n", Fmt(coverage.marginal), alpha);
  }
  return Finish(run, std::move(report), "audit_report.json");
}

// ---------------------------------------------------------------- drift

int CmdDrift(Run& run) {
  Prepare(run);
  const auto in = LoadInputs(run);
  const auto [pcol, reference] = ProtectedFor(run, in.schema);
  drift::DriftProtocolConfig dc;
  dc.model = ForestFor(run);
  dc.rule = RuleFor(run);
  dc.protected_column = in.schema.column(pcol).name;
  dc.reference_group = reference;
  dc.train_window = run.config.value("train_window", dc.train_window);
  dc.eval_offset = run.config.value("eval_offset", dc.eval_offset);
  if (run.config.contains("comparison_group") && !run.config["comparison_group"].is_null()) {
    dc.comparison_group = run.config["comparison_group"].get<std::string>();
  }
  run.config["train_window"] = dc.train_window;
  run.config["eval_offset"] = dc.eval_offset;

  const auto series = drift::RunRollingProtocol(in.data, dc);
  drift::AlertThresholds at;
  const json alerts_cfg = run.config.value("alerts", json::object());
  at.max_abs_delta_ba = alerts_cfg.value("max_abs_delta_ba", at.max_abs_delta_ba);
  at.max_abs_parity = alerts_cfg.value("max_abs_parity", at.max_abs_parity);
  at.max_abs_fnr = alerts_cfg.value("max_abs_fnr", at.max_abs_fnr);
  at.min_group_ba = alerts_cfg.value("min_group_ba", at.min_group_ba);
  const auto alerts = drift::DetectAlerts(series, at);

  std::vector<double> periods, fnr;
  svg::LineChart chart;
  chart.title = "Performance change and fairness metrics over time";
  chart.x_label = "evaluation period";
  chart.y_label = "difference";
  chart.reference_line = 0.0;
  svg::Series s_ba{"change in balanced accuracy", {}, "#000000", false};
  svg::Series s_fnr{"FNR difference", {}, "#d62728", true};
  svg::Series s_par{"parity difference", {}, "#2ca02c", true};
  svg::Series s_base{"base rate difference", {}, "#7f7f7f", true};
  for (const auto& r : series.records) {
    chart.x_ticks.push_back(fmt::format("{}", r.eval_period));
    s_ba.values.push_back(r.delta_balanced_accuracy);
    s_fnr.values.push_back(r.fnr_difference);
    s_par.values.push_back(r.parity_difference);
    s_base.values.push_back(r.base_rate_difference);
    WarnGroups(run, r.per_group, fmt::format("period {}", r.eval_period));
    if (r.fnr_difference) {
      periods.push_back(static_cast<double>(r.eval_period));
      fnr.push_back(*r.fnr_difference);
    }
  }
  chart.series = {s_ba, s_fnr, s_par, s_base};
  const auto trend = drift::SpearmanCorrelation(periods, fnr);
  if (run.gates) run.violations = CheckDrift(*run.gates, series);
  WriteFile(fs::path(run.args.out) / "drift.svg", svg::EmitSvg(chart));

  json report = {{"drift", ToJson(series)},
                 {"alerts", ToJson(alerts)},
                 {"fnr_difference_trend_spearman", RateJson(trend)}};
  run.out << fmt::format("drift: {} evaluation periods, {} vs {}\n", series.records.size(),
                         series.comparison_group, series.reference_group);
  for (const auto& r : series.records) {
    run.out << fmt::format("  {}: BA {} (change {}), parity {}, FNR {}, base rate {}\n",
                           r.eval_period, Fmt(r.balanced_accuracy),
                           Fmt(r.delta_balanced_accuracy), Fmt(r.parity_difference),
                           Fmt(r.fnr_difference), Fmt(r.base_rate_difference));
  }
  run.out << fmt::format("FNR difference trend (Spearman): {}; {} alerts\n", Fmt(trend),
                         alerts.size());
  return Finish(run, std::move(report), "drift_report.json");
}

// ---------------------------------------------------------------- repro

int CmdRepro(Run& run) {
  Prepare(run);
  const auto in = LoadInputs(run);
  const auto& ds = in.data;
  const auto [pcol, reference] = ProtectedFor(run, in.schema);
  const auto rule = RuleFor(run);
  repro::VariantGrid grid;
  if (run.config.contains("variants")) {
    grid = repro::VariantGrid::FromJson(run.config);
  } else {
    grid = repro::VariantGrid::TreeCountNodeSizeGrid(
        forest::ForestConfig::FromJson(run.config.value("base", json::object())));
  }
  grid.base.seed = run.args.seed;
  run.config["base"] = grid.base.ToJson();
  run.config["variants"] = grid.ToJson()["variants"];
  const auto plan = SplitFor(run, ds);
  const auto x = tabular::FeatureMatrix::FromDataset(ds);
  const auto preds = repro::RunVariants(x, ds.Labels(), plan.train, plan.eval, grid, rule);
  const auto codes = CodesAt(ds, pcol, plan.eval);
  const auto& pspec = in.schema.column(pcol);
  const auto matrices = repro::PerGroupSimilarity(preds, {pspec.name, codes, pspec.categories});

  json variants = json::array();
  for (const auto& p : preds) {
    std::size_t positives = 0;
    for (auto v : p.predictions) positives += v;
    variants.push_back({{"name", p.name},
                        {"config", p.config.ToJson()},
                        {"model_hash", p.model_hash},
                        {"positives", positives}});
  }
  json mats = json::array();
  run.out << fmt::format("repro: {} variants on {} eval rows, rule {}\n", preds.size(),
                         plan.eval.size(), rule.ToString());
  for (const auto& m : matrices) {
    mats.push_back(ToJson(m));
    svg::Heatmap h;
    h.title = fmt::format("Jaccard similarity of predicted positives ({})", m.group);
    h.row_labels = m.variants;
    h.col_labels = m.variants;
    for (double v : m.values) h.values.push_back(v);
    WriteFile(fs::path(run.args.out) / fmt::format("similarity_{}.svg", FileSafe(m.group)),
              svg::EmitSvg(h));
    const auto lo = m.MinOffDiagonal();
    run.out << fmt::format("  {} (n={}): min Jaccard {:.3f} ({} vs {})\n", m.group, m.n_rows,
                           lo.value, m.variants[lo.i], m.variants[lo.j]);
    if (m.group != "all" && m.n_rows < 50) {
      run.warnings.push_back(fmt::format("repro: group '{}' has only {} rows", m.group, m.n_rows));
    }
  }
  json report = {{"split", {{"n_train", plan.train.size()}, {"n_eval", plan.eval.size()}}},
                 {"variants", std::move(variants)},
                 {"similarity", std::move(mats)}};
  return Finish(run, std::move(report), "repro_report.json");
}

// ---------------------------------------------------------------- explain

int CmdExplain(Run& run) {
  Prepare(run);
  const auto in = LoadInputs(run);
  const auto& ds = in.data;
  const auto [pcol, reference] = ProtectedFor(run, in.schema);
  const auto fc = ForestFor(run);
  auto sc = surrogate::SurrogateConfig::FromJson(run.config.value("surrogate", json::object()));
  sc.seed = run.args.seed;
  sc.filter.reset();
  run.config["surrogate"] = sc.ToJson();
  const auto plan = SplitFor(run, ds);
  const auto x = tabular::FeatureMatrix::FromDataset(ds);
  const auto model = forest::TrainForest(x, ds.Labels(), plan.train, fc);
  const auto blackbox = surrogate::BlackBox::FromForest(model);
  const auto& pspec = in.schema.column(pcol);

  json surrogates = json::array();
  run.out << fmt::format("explain: surrogates of depth <= {} on {} eval rows (target {})\n",
                         sc.max_depth, plan.eval.size(), surrogate::TargetName(sc.target));
  const auto emit = [&](const std::string& label, const surrogate::SurrogateConfig& config) {
    const auto result = surrogate::FitSurrogate(blackbox, ds, plan.eval, config);
    const auto by_group = surrogate::FidelityByGroup(result, ds, pspec.name);
    const auto rendered = surrogate::RenderTree(
        result.tree, result.features, fmt::format("Surrogate tree ({})", label));
    const fs::path dir = run.args.out;
    WriteFile(dir / fmt::format("surrogate_{}.svg", FileSafe(label)), rendered.svg);
    WriteFile(dir / fmt::format("surrogate_{}.txt", FileSafe(label)), rendered.text);
    json j = result.ToJson();
    j["group"] = label;
    j["fidelity_by_group"] = ToJson(by_group);
    j["outline"] = rendered.text;
    const auto& root = result.tree.nodes().front();
    j["root_feature"] =
        root.is_leaf() ? json(nullptr)
                       : json(result.features[static_cast<std::size_t>(root.feature)].name);
    surrogates.push_back(std::move(j));
    run.out << fmt::format("  {}: fidelity R2 {}, agreement {}, root {}\n", label,
                           Fmt(result.fidelity_r2), Fmt(result.agreement),
                           root.is_leaf() ? "leaf"
                                          : result.features[static_cast<std::size_t>(root.feature)].name);
    for (const auto& g : by_group) {
      if (g.low_support && g.n > 0) {
        run.warnings.push_back(fmt::format("explain ({}): group '{}' has only {} fidelity rows",
                                           label, g.group, g.n));
      }
    }
  };
  emit("all", sc);
  if (run.config.value("per_group", true)) {
    for (const auto& category : pspec.categories) {
      auto config = sc;
      config.filter = surrogate::RowFilter{pspec.name, category};
      try {
        emit(category, config);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kEmptyAfterFilter && e.code() != ErrorCode::kTooFewRows &&
            e.code() != ErrorCode::kDegenerateSplit) {
          throw;
        }
        run.warnings.push_back(fmt::format("explain: no surrogate for '{}': {}", category, e.what()));
      }
    }
  }
  json report = {{"model", {{"hash", model.Hash()}}}, {"surrogates", std::move(surrogates)}};
  return Finish(run, std::move(report), "explain_report.json");
}

// ---------------------------------------------------------------- heterogeneity

int CmdHeterogeneity(Run& run) {
  Prepare(run);
  const auto in = LoadInputs(run);
  const auto& ds = in.data;
  const auto rule = RuleFor(run);
  const auto fc = ForestFor(run);
  subgroups::HeterogeneityConfig hc;
  hc.delta = run.config.value("delta", 0.05);
  hc.alpha = run.config.value("alpha", hc.alpha);
  hc.split_fraction = run.config.value("split_fraction", hc.split_fraction);
  hc.max_depth = run.config.value("max_depth", hc.max_depth);
  hc.min_leaf = run.config.value("min_leaf", hc.min_leaf);
  hc.seed = run.args.seed;
  const auto kind =
      subgroups::ParseStatistic(run.config.value("statistic", std::string("error_indicator")));
  run.config["delta"] = hc.delta;
  run.config["alpha"] = hc.alpha;
  run.config["split_fraction"] = hc.split_fraction;
  run.config["max_depth"] = hc.max_depth;
  run.config["min_leaf"] = hc.min_leaf;
  run.config["statistic"] = std::string(subgroups::StatisticName(kind));

  const auto plan = SplitFor(run, ds);
  const auto x = tabular::FeatureMatrix::FromDataset(ds);
  const auto model = forest::TrainForest(x, ds.Labels(), plan.train, fc);
  const auto scores = ScoreRows(model, x, plan.eval);
  const auto y = ds.Labels(plan.eval);
  std::vector<double> stat;
  switch (kind) {
    case subgroups::Statistic::kErrorIndicator:
      stat = subgroups::ErrorIndicator(y, forest::Classify(scores, rule));
      break;
    case subgroups::Statistic::kResidual: stat = subgroups::Residual(y, scores); break;
    case subgroups::Statistic::kOutcome: stat.assign(y.begin(), y.end()); break;
  }
  const auto result = subgroups::FindHeterogeneity(ds, plan.eval, stat, hc, kind);
  const auto rendered = surrogate::RenderTree(result.tree, result.features, "Discovery tree");
  WriteFile(fs::path(run.args.out) / "heterogeneity_tree.svg", rendered.svg);

  run.out << fmt::format("heterogeneity: {} discovery / {} confirmation rows, {} candidates\n",
                         result.discovery_rows.size(), result.confirmation_rows.size(),
                         result.findings.size());
  for (const auto* f : result.Confirmed()) {
    run.out << fmt::format("  confirmed: {} (mean {:.3f} vs {:.3f}, adjusted p {:.2g})\n",
                           f->predicate, f->confirmation_mean, result.confirmation_global_mean,
                           f->adjusted_p);
  }
  json report = {{"model", {{"hash", model.Hash()}}}, {"heterogeneity", ToJson(result)}};
  return Finish(run, std::move(report), "heterogeneity_report.json");
}

// ---------------------------------------------------------------- synth

int CmdSynth(Run& run) {
  Prepare(run);
  if (run.args.config.empty()) throw Error(ErrorCode::kBadConfig, "--config is required");
  auto config = synthlab::SynthConfig::FromJson(run.config);
  if (run.args.seed_given) config.seed = run.args.seed;
  run.args.seed = config.seed;
  run.config = config.ToJson();
  const auto generated = synthlab::Generate(config);
  const fs::path dir = run.args.out;
  tabular::SaveCsv(generated.data, dir / "data.csv");
  WriteJson(dir / "schema.json", generated.data.schema().ToJson());
  {
    std::ostringstream truth;
    truth << "row_id,true_label,true_probability\n";
    const auto ids = generated.data.ids(0);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      truth << fmt::format("{},{},{}\n", ids[i], generated.truth.true_labels[i],
                           generated.truth.true_probability[i]);
    }
    WriteFile(dir / "truth.csv", truth.str());
  }
  run.inputs["data_sha256"] = Sha256File(dir / "data.csv");
  run.inputs["schema_sha256"] = Sha256File(dir / "schema.json");

  const auto labels = generated.data.Labels();
  json groups = json::array();
  for (std::size_t g = 0; g < config.groups.size(); ++g) {
    std::size_t n = 0, observed = 0, truth = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (generated.truth.groups[i] != static_cast<std::int32_t>(g)) continue;
      ++n;
      observed += labels[i];
      truth += generated.truth.true_labels[i];
    }
    groups.push_back({{"group", config.groups[g].name},
                      {"n", n},
                      {"observed_positive_rate", RateJson(SafeRatio(observed, n))},
                      {"true_positive_rate", RateJson(SafeRatio(truth, n))}});
  }
  run.out << fmt::format("synth: {} rows over {} periods written to {}\n",
                         generated.data.n_rows(), config.periods, dir.string());
  json report = {{"n_rows", generated.data.n_rows()}, {"groups", std::move(groups)}};
  return Finish(run, std::move(report), "synth_report.json");
}

// ---------------------------------------------------------------- bvlab

int CmdBvlab(Run& run) {
  Prepare(run);
  if (run.args.config.empty()) throw Error(ErrorCode::kBadConfig, "--config is required");
  auto synth = synthlab::SynthConfig::FromJson(run.config.at("synth"));
  synthlab::BiasVarianceOptions options;
  options.replications = run.config.value("replications", options.replications);
  options.n_train = run.config.value("n_train", options.n_train);
  options.n_noise_draws = run.config.value("n_noise_draws", options.n_noise_draws);
  options.seed = run.args.seed;

  const std::string learner_name = run.config.value("learner", std::string("forest"));
  synthlab::Learner learner;
  if (learner_name == "forest") {
    auto fc = forest::ForestConfig::FromJson(run.config.value("forest", json::object()));
    run.config["forest"] = fc.ToJson();
    learner = synthlab::ForestLearner(fc);
  } else if (learner_name == "constant_mean") {
    learner = synthlab::ConstantMeanLearner();
  } else if (learner_name == "constant") {
    learner = synthlab::ConstantLearner(run.config.value("constant", 0.5));
  } else {
    throw Error(ErrorCode::kBadConfig, "unknown learner " + learner_name);
  }

  std::vector<std::vector<double>> grid;
  if (run.config.contains("grid")) {
    grid = run.config["grid"].get<std::vector<std::vector<double>>>();
  } else {
    for (int k = -4; k <= 4; ++k) {
      std::vector<double> x0(synth.n_features, 0.0);
      x0[0] = 0.5 * k;
      grid.push_back(std::move(x0));
    }
  }
  run.config["synth"] = synth.ToJson();
  run.config["grid"] = grid;
  run.config["learner"] = learner_name;
  run.config["replications"] = options.replications;
  run.config["n_train"] = options.n_train;
  run.config["n_noise_draws"] = options.n_noise_draws;

  const auto bv = synthlab::DecomposeBiasVariance(learner, synth, grid, options);
  json points = json::array();
  svg::LineChart chart;
  chart.title = "Bias-variance decomposition of the expected squared prediction error";
  chart.x_label = "grid point";
  chart.y_label = "squared error";
  svg::Series s_espe{"ESPE", {}, "#000000", false};
  svg::Series s_noise{"noise", {}, "#7f7f7f", true};
  svg::Series s_bias{"bias^2", {}, "#d62728", true};
  svg::Series s_var{"variance", {}, "#1f77b4", true};
  for (std::size_t i = 0; i < bv.points.size(); ++i) {
    const auto& p = bv.points[i];
    points.push_back({{"x0", p.x0},
                      {"truth", p.truth},
                      {"noise", p.noise},
                      {"mean_prediction", p.mean_prediction},
                      {"bias2", p.bias2},
                      {"variance", p.variance},
                      {"espe", p.espe},
                      {"espe_se", p.espe_se},
                      {"bias2_se", p.bias2_se},
                      {"variance_se", p.variance_se},
                      {"residual", p.residual},
                      {"residual_se", p.residual_se},
                      {"identity_holds", p.identity_holds}});
    chart.x_ticks.push_back(fmt::format("{}", i));
    s_espe.values.push_back(p.espe);
    s_noise.values.push_back(p.noise);
    s_bias.values.push_back(p.bias2);
    s_var.values.push_back(p.variance);
  }
  chart.series = {s_espe, s_noise, s_bias, s_var};
  WriteFile(fs::path(run.args.out) / "bias_variance.svg", svg::EmitSvg(chart));
  run.out << fmt::format(
      "bvlab: {} grid points, M={}, mean bias^2 {:.4f}, mean variance {:.4f}, identity holds at "
      "{:.0f}% of points\n",
      bv.points.size(), bv.replications, bv.MeanBias2(), bv.MeanVariance(),
      100.0 * bv.IdentityPassRate());
  json report = {{"points", std::move(points)},
                 {"identity_pass_rate", bv.IdentityPassRate()},
                 {"mean_bias2", bv.MeanBias2()},
                 {"mean_variance", bv.MeanVariance()}};
  return Finish(run, std::move(report), "bvlab_report.json");
}

int ExitFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo:
    case ErrorCode::kBadConfig:
      return kUsage;
    default:
      return kValidation;
  }
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  ApplyThreadEnv();
  CLI::App app{"Fairness-aware quality audits for tree-ensemble classifiers"};
  app.require_subcommand(1);
  Args args;

  struct Command {
    std::string name;
    std::string help;
    std::function<int(Run&)> body;
    bool needs_data;
  };
  const std::vector<Command> commands = {
      {"audit", "Train, evaluate and report group and subgroup fairness", CmdAudit, true},
      {"drift", "Rolling train-on-period, evaluate-on-next protocol", CmdDrift, true},
      {"repro", "Per-group Jaccard similarity across forest variants", CmdRepro, true},
      {"explain", "Overall and group-conditioned surrogate trees", CmdExplain, true},
      {"heterogeneity", "Find and confirm error heterogeneity with data splitting",
       CmdHeterogeneity, true},
      {"synth", "Generate a synthetic dataset with injected bias mechanisms", CmdSynth, false},
      {"bvlab", "Monte-Carlo bias-variance decomposition", CmdBvlab, false},
  };
  std::vector<CLI::App*> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--out", args.out, "Output directory")->required();
    sub->add_option("--seed", args.seed, "Random seed");
    sub->add_option("--config", args.config, "Subcommand configuration (JSON)");
    if (c.needs_data) {
      sub->add_option("--data", args.data, "CSV data file")->required();
      sub->add_option("--schema", args.schema, "Column manifest (JSON)")->required();
      sub->add_option("--protected", args.protected_column, "Protected column");
      sub->add_option("--reference", args.reference, "Reference group");
      sub->add_option("--threshold", args.threshold, "fixed:T or top_q:Q");
      sub->add_option("--split", args.split, "Training fraction");
      sub->add_option("--gates", args.gates, "Fairness gate thresholds (JSON)");
    }
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    args.seed_given = subs[i]->count("--seed") > 0;
    Run run{commands[i].name, args, out};
    try {
      return commands[i].body(run);
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return ExitFor(e.code());
    } catch (const nlohmann::json::exception& e) {
      err << "error: invalid configuration: " << e.what() << "\n";
      return kUsage;
    } catch (const std::filesystem::filesystem_error& e) {
      err << "error: " << e.what() << "\n";
      return kUsage;
    }
  }
  return kUsage;
}

}  // namespace fairaudit::cli
