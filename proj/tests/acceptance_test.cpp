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

// Acceptance suite: one PASS/FAIL line per criterion. Every tolerance, seed
// list and runtime bound is fixed here; the exit status is non-zero when any
// criterion fails.

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "fairaudit/cli.hpp"
#include "fairaudit/drift.hpp"
#include "fairaudit/forest.hpp"
#include "fairaudit/metrics.hpp"
#include "fairaudit/repro.hpp"
#include "fairaudit/subgroups.hpp"
#include "fairaudit/surrogate.hpp"
#include "fairaudit/synthlab.hpp"
#include "fairaudit/tabular.hpp"

namespace {

using namespace fairaudit;
using Clock = std::chrono::steady_clock;
using tabular::ColumnSpec;
using tabular::Role;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

bool Near(const Rate& a, const Rate& b, double tol = 1e-12) {
  if (a.has_value() != b.has_value()) return false;
  return !a || std::abs(*a - *b) <= tol;
}

Rate Ratio(double num, double den) {
  if (den == 0.0) return std::nullopt;
  return num / den;
}

// ------------------------------------------------------------ criterion 1

// Brute-force recount of everything the metrics module reports.
struct OracleCounts {
  double tp = 0, fp = 0, tn = 0, fn = 0;
  double n() const { return tp + fp + tn + fn; }
};

OracleCounts Recount(const std::vector<std::uint8_t>& y, const std::vector<std::uint8_t>& yhat,
                     const std::function<bool(std::size_t)>& keep) {
  OracleCounts c;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!keep(i)) continue;
    if (y[i] == 1 && yhat[i] == 1) c.tp += 1;
    if (y[i] == 0 && yhat[i] == 1) c.fp += 1;
    if (y[i] == 0 && yhat[i] == 0) c.tn += 1;
    if (y[i] == 1 && yhat[i] == 0) c.fn += 1;
  }
  return c;
}

struct OracleRates {
  Rate tpr, fnr, fpr, tnr, precision, accuracy, base_rate, ppr, ba;
};

OracleRates RatesOf(const OracleCounts& c) {
  OracleRates r;
  r.tpr = Ratio(c.tp, c.tp + c.fn);
  r.fnr = Ratio(c.fn, c.tp + c.fn);
  r.fpr = Ratio(c.fp, c.fp + c.tn);
  r.tnr = Ratio(c.tn, c.fp + c.tn);
  r.precision = Ratio(c.tp, c.tp + c.fp);
  r.accuracy = Ratio(c.tp + c.tn, c.n());
  r.base_rate = Ratio(c.tp + c.fn, c.n());
  r.ppr = Ratio(c.tp + c.fp, c.n());
  if (r.tpr && r.tnr) r.ba = (*r.tpr + *r.tnr) / 2.0;
  return r;
}

Rate Diff(const Rate& a, const Rate& b) {
  if (!a || !b) return std::nullopt;
  return *a - *b;
}

Outcome Criterion1() {
  const auto start = Clock::now();
  std::mt19937_64 gen(20240601);
  const std::vector<std::string> cats = {"a", "b", "c"};
  std::size_t mismatches = 0, checks = 0;
  auto check = [&](bool ok) {
    ++checks;
    if (!ok) ++mismatches;
  };
  for (int instance = 0; instance < 1000; ++instance) {
    const std::size_t n = 1 + gen() % 50;
    const double p_y = std::uniform_real_distribution<double>(0, 1)(gen);
    const double p_hat = std::uniform_real_distribution<double>(0, 1)(gen);
    const std::size_t n_groups_used = 1 + gen() % 3;
    std::vector<std::uint8_t> y(n), yhat(n);
    std::vector<std::int32_t> codes(n);
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = std::uniform_real_distribution<double>(0, 1)(gen) < p_y;
      yhat[i] = std::uniform_real_distribution<double>(0, 1)(gen) < p_hat;
      codes[i] = static_cast<std::int32_t>(gen() % n_groups_used);
      scores[i] = std::uniform_real_distribution<double>(0, 1)(gen);
    }
    const metrics::GroupColumn groups{"g", codes, cats};

    // Overall confusion and rates.
    const auto all = Recount(y, yhat, [](std::size_t) { return true; });
    const auto c = metrics::Confusion(y, yhat);
    check(c.tp == all.tp && c.fp == all.fp && c.tn == all.tn && c.fn == all.fn);
    const auto r = RatesOf(all);
    check(Near(metrics::TruePositiveRate(c), r.tpr));
    check(Near(metrics::FalseNegativeRate(c), r.fnr));
    check(Near(metrics::FalsePositiveRate(c), r.fpr));
    check(Near(metrics::TrueNegativeRate(c), r.tnr));
    check(Near(metrics::Precision(c), r.precision));
    check(Near(metrics::Accuracy(c), r.accuracy));
    check(Near(metrics::BaseRate(c), r.base_rate));
    check(Near(metrics::PredictedPositiveRate(c), r.ppr));
    check(Near(metrics::BalancedAccuracy(c), r.ba));

    // Per-group table.
    std::map<std::int32_t, OracleRates> per_group;
    std::map<std::int32_t, OracleCounts> per_counts;
    for (std::int32_t g = 0; g < 3; ++g) {
      const auto gc = Recount(y, yhat, [&](std::size_t i) { return codes[i] == g; });
      if (gc.n() > 0) {
        per_group[g] = RatesOf(gc);
        per_counts[g] = gc;
      }
    }
    const auto table = metrics::ComputeGroupMetrics(y, yhat, groups);
    check(table.groups.size() == per_group.size());
    check(table.absent_groups.size() == 3 - per_group.size());
    for (const auto& gm : table.groups) {
      const auto it = per_group.find(gm.code);
      if (it == per_group.end()) {
        check(false);
        continue;
      }
      const auto& o = it->second;
      check(gm.n == per_counts[gm.code].n());
      check(Near(gm.base_rate, o.base_rate) && Near(gm.pred_positive_rate, o.ppr) &&
            Near(gm.tpr, o.tpr) && Near(gm.fnr, o.fnr) && Near(gm.fpr, o.fpr) &&
            Near(gm.precision, o.precision) && Near(gm.accuracy, o.accuracy) &&
            Near(gm.balanced_accuracy, o.ba));
    }

    // Fairness report against the group of row 0, with sufficiency bins.
    const std::int32_t ref = codes[0];
    metrics::SufficiencyOptions so;
    so.bins = 4;
    so.min_support = 2;
    const auto report = metrics::MakeFairnessReport(y, yhat, scores, groups, cats[ref], so);
    check(report.comparisons.size() == per_group.size() - 1);
    for (const auto& d : report.comparisons) {
      const auto code = static_cast<std::int32_t>(
          std::find(cats.begin(), cats.end(), d.group) - cats.begin());
      const auto& o = per_group[code];
      const auto& rr = per_group[ref];
      const Rate dfnr = Diff(o.fnr, rr.fnr), dfpr = Diff(o.fpr, rr.fpr);
      Rate eo;
      if (dfnr && dfpr) eo = std::max(std::abs(*dfnr), std::abs(*dfpr));
      check(Near(d.parity_difference, Diff(o.ppr, rr.ppr)) &&
            Near(d.base_rate_difference, Diff(o.base_rate, rr.base_rate)) &&
            Near(d.fnr_difference, dfnr) && Near(d.fpr_difference, dfpr) &&
            Near(d.equalized_odds_gap, eo));
    }
    // Sufficiency: equal-width bins over [0, 1], reference-relative gaps.
    if (per_group.size() >= 2) {
      std::vector<std::int32_t> present;
      for (const auto& [g, _] : per_group) present.push_back(g);
      Rate overall;
      check(report.sufficiency.bins.size() == so.bins);
      for (std::size_t b = 0; b < so.bins && b < report.sufficiency.bins.size(); ++b) {
        const auto& bin = report.sufficiency.bins[b];
        std::map<std::int32_t, std::pair<double, double>> cell;  // (n, positives)
        for (std::size_t i = 0; i < n; ++i) {
          std::size_t k = static_cast<std::size_t>(scores[i] * so.bins);
          if (k >= so.bins) k = so.bins - 1;
          if (k != b) continue;
          cell[codes[i]].first += 1;
          cell[codes[i]].second += y[i];
        }
        bool qualified = true;
        for (std::size_t j = 0; j < present.size(); ++j) {
          const auto& [cn, cp] = cell[present[j]];
          check(bin.support.at(j) == cn);
          check(Near(bin.positive_rate.at(j), Ratio(cp, cn)));
          if (cn < so.min_support) qualified = false;
        }
        Rate gap;
        if (cell[ref].first > 0) {
          const double ref_rate = cell[ref].second / cell[ref].first;
          for (auto g : present) {
            if (g == ref || cell[g].first == 0) continue;
            const double v = std::abs(cell[g].second / cell[g].first - ref_rate);
            gap = std::max(gap.value_or(0.0), v);
          }
        }
        check(Near(bin.gap, gap));
        const bool used = qualified && gap.has_value();
        check(bin.qualified == used);
        if (used) overall = std::max(overall.value_or(0.0), *gap);
      }
      check(Near(report.sufficiency_gap, overall));
    } else {
      check(report.sufficiency.bins.empty() && !report.sufficiency_gap);
    }

    // Split conformal: first half calibrates, second half is evaluated.
    if (n >= 4) {
      const std::size_t n_cal = n / 2;
      std::vector<std::size_t> cal_rows(n_cal), eval_rows(n - n_cal);
      std::iota(cal_rows.begin(), cal_rows.end(), 0);
      std::iota(eval_rows.begin(), eval_rows.end(), n_cal);
      const std::vector<std::uint8_t> y_cal(y.begin(), y.begin() + n_cal);
      const std::vector<double> s_cal(scores.begin(), scores.begin() + n_cal);
      const std::vector<double> s_eval(scores.begin() + n_cal, scores.end());
      const std::vector<std::uint8_t> y_eval(y.begin() + n_cal, y.end());
      const std::vector<std::int32_t> g_eval(codes.begin() + n_cal, codes.end());
      for (double alpha : {0.1, 0.25, 0.5}) {
        std::vector<double> conf;
        for (std::size_t i = 0; i < n_cal; ++i) {
          conf.push_back(1.0 - (y_cal[i] ? s_cal[i] : 1.0 - s_cal[i]));
        }
        std::sort(conf.begin(), conf.end());
        // Smallest k with k >= (n + 1)(1 - alpha), by enumeration.
        std::size_t k = 0;
        while (static_cast<double>(k) < (n_cal + 1) * (1.0 - alpha) - 1e-9) ++k;
        if (k > n_cal) {
          bool threw = false;
          try {
            metrics::ConformalCalibrate(y_cal, s_cal, alpha, cal_rows);
          } catch (const Error& e) {
            threw = e.code() == ErrorCode::kTooFewCalibration;
          }
          check(threw);
          continue;
        }
        const double q = conf[k - 1];
        const auto cal = metrics::ConformalCalibrate(y_cal, s_cal, alpha, cal_rows);
        check(cal.threshold == q);
        const auto sets = metrics::ConformalSets(cal, s_eval, eval_rows);
        std::map<std::int32_t, std::pair<double, double>> cov;  // (n, covered)
        std::map<std::int32_t, double> size_sum;
        double covered_all = 0;
        for (std::size_t i = 0; i < s_eval.size(); ++i) {
          const bool has0 = 1.0 - (1.0 - s_eval[i]) <= q;
          const bool has1 = 1.0 - s_eval[i] <= q;
          check(sets[i] == ((has0 ? 1 : 0) | (has1 ? 2 : 0)));
          const bool covered = y_eval[i] ? has1 : has0;
          cov[g_eval[i]].first += 1;
          cov[g_eval[i]].second += covered;
          size_sum[g_eval[i]] += has0 + has1;
          covered_all += covered;
        }
        const auto report_cov = metrics::ComputeGroupCoverage(y_eval, sets, {"g", g_eval, cats}, 3);
        check(Near(report_cov.marginal, Ratio(covered_all, static_cast<double>(s_eval.size()))));
        for (const auto& gc : report_cov.groups) {
          const auto code = static_cast<std::int32_t>(
              std::find(cats.begin(), cats.end(), gc.group) - cats.begin());
          const auto& [gn, gcov] = cov[code];
          check(gc.n == gn);
          check(Near(gc.coverage, Ratio(gcov, gn)));
          check(Near(gc.mean_set_size, Ratio(size_sum[code], gn)));
          check(gc.low_support == (gn < 3));
        }
      }
    }
  }
  const double secs = Seconds(start);
  return {mismatches == 0 && secs < 10.0,
          fmt::format("1000 instances, {} checks, {} mismatches (tol 1e-12), {:.1f}s (< 10s)",
                      checks, mismatches, secs)};
}

// ------------------------------------------------------------ criterion 2

Outcome Criterion2() {
  bool ok = true;
  std::string detail;
  for (std::uint8_t majority : {1, 0}) {
    std::vector<std::uint8_t> y(1000, majority);
    for (std::size_t i = 0; i < 100; ++i) y[i * 10] = 1 - majority;
    const std::vector<std::uint8_t> constant(y.size(), majority);
    const auto c = metrics::Confusion(y, constant);
    const auto acc = metrics::Accuracy(c);
    const auto ba = metrics::BalancedAccuracy(c);
    const bool pass = acc && std::abs(*acc - 0.9) <= 1e-12 && ba && *ba == 0.5;
    ok = ok && pass;
    detail += fmt::format("{}all-{}: accuracy {:.12f}, balanced accuracy {}", detail.empty() ? "" : "; ",
                          majority ? "positive" : "negative", acc.value_or(-1),
                          ba ? fmt::format("{}", *ba) : "undefined");
  }
  return {ok, detail + " (accuracy within 1e-12 of 0.9, BA exactly 0.5)"};
}

// ------------------------------------------------------------ criterion 3

synthlab::SynthConfig TwoGroupConfig(std::size_t n, double minority, std::uint64_t seed,
                                     double sigma = 1.0) {
  synthlab::SynthConfig c;
  c.n_per_period = n;
  c.n_features = 3;
  c.noise_sigma = sigma;
  c.seed = seed;
  c.groups = {{"A", 1.0 - minority, {1.0, 0.8, 0.0}, -0.5, {}, 0, 0, 0, {}},
              {"B", minority, {1.0, 0.8, 0.0}, -0.5, {0.0, 0.0, 1.0}, 0, 0, 0, {}}};
  return c;
}

Outcome Criterion3() {
  const auto gen = synthlab::Generate(TwoGroupConfig(300, 0.3, 77));
  const auto& ds = gen.data;
  const auto x = tabular::FeatureMatrix::FromDataset(ds);
  std::size_t eval_violations = 0, train_violations = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    const auto plan = tabular::SplitRandom(ds, 0.75, trial);
    forest::ForestConfig fc;
    fc.n_trees = 8;
    fc.seed = trial;
    const auto labels = ds.Labels();
    const auto base = forest::TrainForest(x, labels, plan.train, fc);
    const auto base_train_scores = [&](const forest::RandomForest& m) {
      std::vector<double> s;
      for (auto r : plan.train) s.push_back(m.Score(x.Row(r)));
      return s;
    };

    std::mt19937_64 gen_perm(1000 + trial);
    // Permute labels among evaluation rows only.
    auto eval_perm = labels;
    std::vector<std::uint8_t> eval_labels;
    for (auto r : plan.eval) eval_labels.push_back(labels[r]);
    std::shuffle(eval_labels.begin(), eval_labels.end(), gen_perm);
    for (std::size_t i = 0; i < plan.eval.size(); ++i) eval_perm[plan.eval[i]] = eval_labels[i];
    const auto plan_after = tabular::SplitRandom(ds, 0.75, trial);
    const auto m_eval = forest::TrainForest(x, eval_perm, plan_after.train, fc);
    if (plan_after.train != plan.train || m_eval.Hash() != base.Hash() ||
        m_eval.Serialize() != base.Serialize() ||
        base_train_scores(m_eval) != base_train_scores(base)) {
      ++eval_violations;
    }

    // Permute labels among training rows (a permutation that changes them).
    auto train_perm = labels;
    std::vector<std::uint8_t> train_labels;
    for (auto r : plan.train) train_labels.push_back(labels[r]);
    const auto original = train_labels;
    do {
      std::shuffle(train_labels.begin(), train_labels.end(), gen_perm);
    } while (train_labels == original);
    for (std::size_t i = 0; i < plan.train.size(); ++i) train_perm[plan.train[i]] = train_labels[i];
    const auto m_train = forest::TrainForest(x, train_perm, plan.train, fc);
    if (m_train.Hash() == base.Hash()) ++train_violations;
  }
  return {eval_violations == 0 && train_violations == 0,
          fmt::format("100 trials: eval-label permutations changing a training artifact {}, "
                      "train-label permutations leaving the hash unchanged {} (both must be 0)",
                      eval_violations, train_violations)};
}

// ------------------------------------------------------------ criterion 4

synthlab::SynthConfig DriftConfig(std::uint64_t seed) {
  synthlab::SynthConfig c;
  c.n_per_period = 5000;
  c.periods = 7;
  c.first_period = 2010;
  c.n_features = 3;
  c.group_column = "g";
  c.noise_sigma = 2.0;
  c.seed = seed;
  c.flip_direction = synthlab::FlipDirection::kPositiveToNegative;
  // Group B is visible to the model only through the proxy x3.
  c.groups = {{"A", 0.5, {1.0, 1.0, 0.0}, 3.0, {0, 0, 0}, 0, 0, 0, {}},
              {"B", 0.5, {1.0, 1.0, 0.0}, 2.0, {0, 0, 3.0}, 0, 0.25, 0, {}}};
  std::vector<double> ramp;
  for (int t = 0; t < 7; ++t) ramp.push_back(t / 6.0);  // flip rate 0 -> 0.25
  c.drift = {{"label_proxy_flip", ramp}};
  return c;
}

Outcome Criterion4() {
  const auto start = Clock::now();
  int passed = 0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto config = DriftConfig(seed);
    const auto gen = synthlab::Generate(config);
    drift::DriftProtocolConfig dc;
    dc.model.n_trees = 100;
    dc.model.min_node_size = 200;
    dc.model.mtry = 3;
    dc.model.seed = seed;
    dc.rule = forest::ThresholdRule::TopQ(0.25);
    dc.protected_column = "g";
    dc.reference_group = "A";
    const auto series = drift::RunRollingProtocol(gen.data, dc);
    std::vector<double> periods, fnr;
    double max_delta = 0.0;
    bool all_defined = series.records.size() == 6;
    int active = 0, dominated = 0;
    for (const auto& r : series.records) {
      if (!r.fnr_difference || !r.parity_difference || !r.base_rate_difference) {
        all_defined = false;
        continue;
      }
      periods.push_back(static_cast<double>(r.eval_period));
      fnr.push_back(*r.fnr_difference);
      if (r.delta_balanced_accuracy) {
        max_delta = std::max(max_delta, std::abs(*r.delta_balanced_accuracy));
      }
      const auto index = static_cast<std::size_t>(r.eval_period - config.first_period);
      if (config.Multiplier("label_proxy_flip", index) * 0.25 > 0.0) {
        ++active;
        dominated += std::abs(*r.parity_difference) >= std::abs(*r.base_rate_difference);
      }
    }
    const auto rho = drift::SpearmanCorrelation(periods, fnr);
    const bool ok = all_defined && rho && *rho >= 0.8 && max_delta <= 0.05 && active > 0 &&
                    dominated * 10 >= active * 8;
    passed += ok;
    per_seed += fmt::format(" s{}:{}(rho={:.2f},|dBA|max={:.3f},dom={}/{})", seed, ok ? "ok" : "x",
                            rho.value_or(-9), max_delta, dominated, active);
  }
  const double secs = Seconds(start);
  return {passed >= 8 && secs < 60.0,
          fmt::format("{}/10 seeds pass (need >= 8; rho >= 0.8, every |dBA| <= 0.05, "
                      "|parity| >= |base-rate| in >= 80% of active periods), {:.1f}s (< 60s);{}",
                      passed, secs, per_seed)};
}

// ------------------------------------------------------------ criterion 5

// Majority: strong signal with its base rate near the top-quarter cutoff, so
// its selection is stable. Minority: separated by the proxy x3 and carrying a
// weak signal, so its scores sit near the cutoff and flip between variants.
synthlab::SynthConfig NoisyMinorityConfig(std::uint64_t seed) {
  synthlab::SynthConfig c;
  c.n_per_period = 800;
  c.n_features = 3;
  c.noise_sigma = 1.0;
  c.seed = seed;
  c.groups = {{"A", 0.8, {3.0, 2.4, 0.0}, -2.6, {0, 0, 0}, 0, 0, 0, {}},
              {"B", 0.2, {0.3, 0.24, 0.0}, 0.0, {0, 0, 3.0}, 0, 0, 0, {}}};
  return c;
}

Outcome Criterion5() {
  const auto start = Clock::now();
  int minority_min = 0;
  bool structure_ok = true;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto gen = synthlab::Generate(NoisyMinorityConfig(500 + seed));
    const auto& ds = gen.data;
    const auto plan = tabular::SplitRandom(ds, 0.75, seed);
    const auto x = tabular::FeatureMatrix::FromDataset(ds);
    forest::ForestConfig base;
    base.seed = seed;
    const auto grid = repro::VariantGrid::TreeCountNodeSizeGrid(base);
    const auto preds = repro::RunVariants(x, ds.Labels(), plan.train, plan.eval, grid,
                                          forest::ThresholdRule::TopQ(0.25));
    std::vector<std::int32_t> codes;
    const auto all_codes = ds.codes("group");
    for (auto r : plan.eval) codes.push_back(all_codes[r]);
    const auto& cats = ds.schema().column(ds.schema().IndexOf("group")).categories;
    const auto matrices = repro::PerGroupSimilarity(preds, {"group", codes, cats});
    double lowest = 2.0;
    std::string lowest_group;
    for (const auto& m : matrices) {
      const std::size_t v = m.variants.size();
      for (std::size_t i = 0; i < v; ++i) {
        if (m.at(i, i) != 1.0) structure_ok = false;
        for (std::size_t j = 0; j < v; ++j) {
          if (m.at(i, j) != m.at(j, i)) structure_ok = false;
        }
      }
      if (m.group == "all") continue;
      const auto lo = m.MinOffDiagonal();
      if (lo.value < lowest) lowest = lo.value, lowest_group = m.group;
    }
    minority_min += lowest_group == "B";
  }

  // Identical configurations must agree exactly.
  const auto gen = synthlab::Generate(TwoGroupConfig(400, 0.2, 9, 1.5));
  const auto plan = tabular::SplitRandom(gen.data, 0.75, 9);
  const auto x = tabular::FeatureMatrix::FromDataset(gen.data);
  repro::VariantGrid twins;
  twins.base.n_trees = 50;
  twins.base.seed = 9;
  twins.variants = {{"RF1", 750, 1, {}, {}}, {"RF1-copy", 750, 1, {}, {}}};
  const auto tp = repro::RunVariants(x, gen.data.Labels(), plan.train, plan.eval, twins,
                                     forest::ThresholdRule::TopQ(0.25));
  std::vector<std::int32_t> codes;
  for (auto r : plan.eval) codes.push_back(gen.data.codes("group")[r]);
  const auto& cats = gen.data.schema().column(gen.data.schema().IndexOf("group")).categories;
  bool twins_ok = true;
  for (const auto& m : repro::PerGroupSimilarity(tp, {"group", codes, cats})) {
    for (double v : m.values) twins_ok = twins_ok && v == 1.0;
  }
  const double secs = Seconds(start);
  return {structure_ok && twins_ok && minority_min >= 12,
          fmt::format("RF1-RF4 (750/1, 250/1, 500/5, 500/15), top_q(0.25): symmetric unit-diagonal "
                      "{}, identical configs Jaccard 1.0 {}, minimum in minority matrix {}/20 "
                      "(need >= 12), {:.1f}s",
                      structure_ok ? "yes" : "NO", twins_ok ? "yes" : "NO", minority_min, secs)};
}

// ------------------------------------------------------------ criterion 6

tabular::Dataset GridDataset(const std::vector<std::vector<double>>& probs, std::size_t n,
                             std::uint64_t seed, std::vector<std::array<std::int32_t, 4>>& keys) {
  const std::vector<std::vector<std::string>> cats = {
      {"F", "M"}, {"DE", "nonDE"}, {"low", "mid", "high"}, {"18-29", "30-44", "45-59", "60+"}};
  const std::vector<std::string> names = {"sex", "cit", "edu", "age"};
  std::vector<ColumnSpec> cols;
  for (std::size_t a = 0; a < 4; ++a) cols.push_back({names[a], Role::kProtected, cats[a]});
  cols.push_back({"y", Role::kLabel, {"0", "1"}});
  std::mt19937_64 gen(seed);
  std::vector<std::vector<std::int32_t>> codes(4);
  std::vector<std::int32_t> y;
  keys.clear();
  for (std::size_t i = 0; i < n; ++i) {
    std::array<std::int32_t, 4> key{};
    for (std::size_t a = 0; a < 4; ++a) {
      std::discrete_distribution<std::int32_t> d(probs[a].begin(), probs[a].end());
      key[a] = d(gen);
      codes[a].push_back(key[a]);
    }
    keys.push_back(key);
    y.push_back(static_cast<std::int32_t>(gen() % 2));
  }
  std::vector<tabular::ColumnData> data;
  for (auto& c : codes) data.emplace_back(std::move(c));
  data.emplace_back(std::move(y));
  return tabular::Dataset(tabular::Schema(std::move(cols)), std::move(data));
}

Outcome Criterion6() {
  const std::vector<std::string> attrs = {"sex", "cit", "edu", "age"};
  std::vector<std::array<std::int32_t, 4>> keys;
  const auto uniform = GridDataset({{1, 1}, {1, 1}, {1, 1, 1}, {1, 1, 1, 1}}, 9600, 61, keys);
  const auto enumerated = subgroups::EnumerateIntersections(uniform.schema(), attrs);

  // Planted cell sex=M & cit=nonDE & edu=high & age=60+ gets flipped predictions;
  // elsewhere predictions are right 90% of the time.
  const std::array<std::int32_t, 4> planted = {1, 1, 2, 3};
  std::mt19937_64 gen(62);
  const auto y = uniform.Labels();
  std::vector<std::uint8_t> yhat(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const bool flip = keys[i] == planted || gen() % 10 == 0;
    yhat[i] = flip ? 1 - y[i] : y[i];
  }
  std::vector<std::size_t> rows(y.size());
  std::iota(rows.begin(), rows.end(), 0);
  const auto grid = subgroups::ComputeSubgroupGrid(uniform, rows, y, yhat, attrs,
                                                   subgroups::GridMetric::kBalancedAccuracy, 50);
  const auto* lo = grid.Min();
  const bool planted_min = lo && lo->key.codes == std::vector<std::int32_t>(planted.begin(), planted.end());

  // Skewed attributes leave some cells below 50 rows.
  const auto skewed = GridDataset({{0.9, 0.1}, {0.8, 0.2}, {1, 1, 1}, {4, 3, 2, 1}}, 4000, 63, keys);
  const auto ys = skewed.Labels();
  std::vector<std::size_t> rows_s(ys.size());
  std::iota(rows_s.begin(), rows_s.end(), 0);
  const auto grid_s = subgroups::ComputeSubgroupGrid(skewed, rows_s, ys, ys, attrs,
                                                     subgroups::GridMetric::kBalancedAccuracy, 50);
  std::size_t flags_ok = 0, flagged = 0, support = 0;
  for (const auto& c : grid_s.cells) {
    flags_ok += c.low_support == (c.support < 50);
    flagged += c.low_support;
    support += c.support;
  }
  const bool pass = enumerated.size() == 48 && grid.cells.size() == 48 && planted_min &&
                    grid_s.cells.size() == 48 && flags_ok == 48 && flagged > 0 &&
                    flagged < 48 && support == ys.size();
  return {pass, fmt::format("{} keys, {} cells; minimum at {} (BA {:.3f}); low-support flag "
                            "correct in {}/48 cells ({} flagged below 50), supports partition "
                            "rows: {}",
                            enumerated.size(), grid.cells.size(), lo ? lo->key.Label() : "none",
                            lo && lo->value ? *lo->value : -1.0, flags_ok, flagged,
                            support == ys.size() ? "yes" : "no")};
}

// ------------------------------------------------------------ criterion 7

tabular::Dataset NumericDataset(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  std::vector<double> x1(n), x2(n), x3(n);
  std::vector<std::int32_t> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = normal(gen);
    x2[i] = normal(gen);
    x3[i] = normal(gen);
    y[i] = static_cast<std::int32_t>(gen() % 2);
  }
  std::vector<ColumnSpec> cols = {{"x1", Role::kNumericFeature, {}},
                                  {"x2", Role::kNumericFeature, {}},
                                  {"x3", Role::kNumericFeature, {}},
                                  {"y", Role::kLabel, {"0", "1"}}};
  std::vector<tabular::ColumnData> data;
  data.emplace_back(std::move(x1));
  data.emplace_back(std::move(x2));
  data.emplace_back(std::move(x3));
  data.emplace_back(std::move(y));
  return tabular::Dataset(tabular::Schema(std::move(cols)), std::move(data));
}

Outcome Criterion7() {
  const auto start = Clock::now();
  constexpr double kAlpha = 0.05;
  int null_hits = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    const auto ds = NumericDataset(10000, 7000 + trial);
    std::mt19937_64 gen(8000 + trial);
    std::vector<double> stat(ds.n_rows());
    for (auto& s : stat) s = std::uniform_real_distribution<double>(0, 1)(gen) < 0.1 ? 1.0 : 0.0;
    std::vector<std::size_t> rows(ds.n_rows());
    std::iota(rows.begin(), rows.end(), 0);
    subgroups::HeterogeneityConfig hc;
    hc.delta = 0.02;  // small, so the tree proposes candidates and the test must reject them
    hc.alpha = kAlpha;
    hc.seed = trial;
    const auto result = subgroups::FindHeterogeneity(ds, rows, stat, hc);
    null_hits += !result.Confirmed().empty();
  }

  int recovered = 0;
  std::string overlaps;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto ds = NumericDataset(10000, 9000 + seed);
    std::mt19937_64 gen(9500 + seed);
    const auto x1 = ds.numeric(0);
    std::vector<double> stat(ds.n_rows());
    std::vector<std::size_t> planted;
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
      const bool in = x1[i] > 1.2816;  // upper 10% of a standard normal
      if (in) planted.push_back(i);
      stat[i] = std::uniform_real_distribution<double>(0, 1)(gen) < (in ? 0.4 : 0.1) ? 1.0 : 0.0;
    }
    std::vector<std::size_t> rows(ds.n_rows());
    std::iota(rows.begin(), rows.end(), 0);
    subgroups::HeterogeneityConfig hc;
    hc.delta = 0.15;
    hc.alpha = kAlpha;
    hc.seed = seed;
    const auto result = subgroups::FindHeterogeneity(ds, rows, stat, hc);
    double best = 0.0;
    for (const auto* f : result.Confirmed()) {
      const auto match = result.MatchingRows(ds, rows, *f);
      std::vector<std::size_t> both;
      std::set_intersection(match.begin(), match.end(), planted.begin(), planted.end(),
                            std::back_inserter(both));
      best = std::max(best, static_cast<double>(both.size()) / planted.size());
    }
    recovered += best >= 0.8;
    overlaps += fmt::format(" {:.2f}", best);
  }
  const double secs = Seconds(start);
  return {null_hits <= static_cast<int>(std::lround((kAlpha + 0.05) * 100)) && recovered >= 18,
          fmt::format("null: {}/100 trials with a confirmed finding (<= 10); planted: recovered "
                      "with >= 80% overlap in {}/20 seeds (need >= 18), overlaps{}; {:.1f}s",
                      null_hits, recovered, overlaps, secs)};
}

// ------------------------------------------------------------ criterion 8

Outcome Criterion8() {
  // Black box: depth-2 tree on half-integer grid features, so every midpoint
  // threshold the surrogate can choose separates the same points.
  std::mt19937_64 gen(808);
  const std::size_t n = 2000;
  std::vector<double> x1(n), x2(n), x3(n);
  std::vector<std::int32_t> y(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = static_cast<double>(static_cast<int>(gen() % 9) - 4) / 2.0;
    x2[i] = static_cast<double>(static_cast<int>(gen() % 9) - 4) / 2.0;
    x3[i] = static_cast<double>(static_cast<int>(gen() % 9) - 4) / 2.0;
  }
  std::vector<tabular::ColumnData> data;
  data.emplace_back(x1);
  data.emplace_back(x2);
  data.emplace_back(x3);
  data.emplace_back(y);
  const tabular::Dataset ds(tabular::Schema({{"x1", Role::kNumericFeature, {}},
                                             {"x2", Role::kNumericFeature, {}},
                                             {"x3", Role::kNumericFeature, {}},
                                             {"y", Role::kLabel, {"0", "1"}}}),
                            std::move(data));
  using forest::TreeNode;
  std::vector<TreeNode> nodes(7);
  nodes[0] = {0, 0.25, {}, 1, 4, 0, 0, 0};   // x1 <= 0.25
  nodes[1] = {1, 0.25, {}, 2, 3, 0, 0, 0};   //   x2 <= 0.25
  nodes[2] = {-1, 0, {}, -1, -1, 0.1, 0, 0};
  nodes[3] = {-1, 0, {}, -1, -1, 0.6, 0, 0};
  nodes[4] = {2, 0.25, {}, 5, 6, 0, 0, 0};   //   x3 <= 0.25
  nodes[5] = {-1, 0, {}, -1, -1, 0.7, 0, 0};
  nodes[6] = {-1, 0, {}, -1, -1, 0.95, 0, 0};
  const std::vector<tabular::FeatureInfo> feats = {{"x1", tabular::FeatureKind::kNumeric, {}},
                                                   {"x2", tabular::FeatureKind::kNumeric, {}},
                                                   {"x3", tabular::FeatureKind::kNumeric, {}}};
  const auto blackbox = surrogate::BlackBox::FromTree(
      forest::DecisionTree(forest::Criterion::kGini, nodes), feats);
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  surrogate::SurrogateConfig sc;
  sc.max_depth = 3;
  sc.target = surrogate::Target::kHardLabel;
  sc.seed = 8;
  const auto fit = surrogate::FitSurrogate(blackbox, ds, rows, sc);
  const bool exact = fit.agreement && *fit.agreement == 1.0;

  // Group-specific mechanisms: A driven by x1, B by x2; x3 is a group proxy.
  int differ = 0;
  std::string roots;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    synthlab::SynthConfig c;
    c.n_per_period = 3000;
    c.n_features = 3;
    c.noise_sigma = 0.5;
    c.seed = 800 + seed;
    c.groups = {{"A", 0.5, {2.0, 0.0, 0.0}, 0.0, {0, 0, 0}, 0, 0, 0, {}},
                {"B", 0.5, {0.0, 2.0, 0.0}, 0.0, {0, 0, 3.0}, 0, 0, 0, {}}};
    const auto gen_ds = synthlab::Generate(c);
    const auto& d = gen_ds.data;
    const auto plan = tabular::SplitRandom(d, 0.75, seed);
    const auto x = tabular::FeatureMatrix::FromDataset(d);
    forest::ForestConfig fc;
    fc.n_trees = 100;
    fc.min_node_size = 5;
    fc.seed = seed;
    const auto model = forest::TrainForest(x, d.Labels(), plan.train, fc);
    const auto bb = surrogate::BlackBox::FromForest(model);
    std::string root[2];
    for (int g = 0; g < 2; ++g) {
      surrogate::SurrogateConfig gc;
      gc.max_depth = 3;
      gc.seed = seed;
      gc.filter = surrogate::RowFilter{"group", g == 0 ? "A" : "B"};
      const auto res = surrogate::FitSurrogate(bb, d, plan.eval, gc);
      const auto& top = res.tree.nodes().front();
      root[g] = top.is_leaf() ? "leaf" : res.features[static_cast<std::size_t>(top.feature)].name;
    }
    differ += root[0] != root[1];
    roots += fmt::format(" {}/{}", root[0], root[1]);
  }
  return {exact && differ >= 18,
          fmt::format("depth-2 black box: agreement {} (must be 1.0); group surrogate roots differ "
                      "in {}/20 seeds (need >= 18):{}",
                      fit.agreement ? fmt::format("{}", *fit.agreement) : "undefined", differ,
                      roots)};
}

// ------------------------------------------------------------ criterion 9

Outcome Criterion9() {
  const auto start = Clock::now();
  synthlab::SynthConfig c;
  c.n_features = 2;
  c.noise_sigma = 1.0;
  c.groups = {{"all", 1.0, {1.5, -1.0}, 0.2, {}, 0, 0, 0, {}}};
  std::vector<std::vector<double>> grid;
  for (int i = 0; i < 20; ++i) {
    grid.push_back({-2.0 + 4.0 * i / 19.0, (i % 5) * 0.5 - 1.0});
  }
  synthlab::BiasVarianceOptions o;
  o.replications = 200;
  o.n_train = 500;
  o.n_noise_draws = 200;
  o.seed = 99;
  forest::ForestConfig fc;
  fc.n_trees = 25;
  fc.min_node_size = 5;
  const auto rf = synthlab::DecomposeBiasVariance(synthlab::ForestLearner(fc), c, grid, o);
  const auto constant = synthlab::DecomposeBiasVariance(synthlab::ConstantLearner(0.5), c, grid, o);
  bool zero_variance = true;
  for (const auto& p : constant.points) zero_variance = zero_variance && p.variance == 0.0;
  const double secs = Seconds(start);
  return {rf.IdentityPassRate() >= 0.95 && zero_variance && constant.IdentityPassRate() >= 0.95 &&
              secs < 120.0,
          fmt::format("forest: identity within 3 SE at {:.0f}% of 20 points (need >= 95%), mean "
                      "bias^2 {:.4f}, mean variance {:.4f}; constant learner variance exactly 0: "
                      "{}; M=200, n_train=500; {:.1f}s (< 120s)",
                      100 * rf.IdentityPassRate(), rf.MeanBias2(), rf.MeanVariance(),
                      zero_variance ? "yes" : "NO", secs)};
}

// ------------------------------------------------------------ criterion 10

Outcome Criterion10() {
  auto config = TwoGroupConfig(4000, 0.3, 1010, 1.0);
  const auto gen = synthlab::Generate(config);
  const auto& ds = gen.data;
  const auto plan = tabular::SplitRandom(ds, 0.5, 10);
  const auto x = tabular::FeatureMatrix::FromDataset(ds);
  forest::ForestConfig fc;
  fc.n_trees = 100;
  fc.min_node_size = 10;
  fc.seed = 10;
  const auto model = forest::TrainForest(x, ds.Labels(), plan.train, fc);
  std::vector<double> score_of(ds.n_rows());
  for (auto r : plan.eval) score_of[r] = model.Score(x.Row(r));
  const auto& cats = ds.schema().column(ds.schema().IndexOf("group")).categories;
  const auto codes_all = ds.codes("group");

  bool ok = true;
  std::string detail;
  for (double alpha : {0.05, 0.1, 0.2}) {
    double sum = 0.0;
    bool groups_reported = true;
    for (std::uint64_t r = 0; r < 200; ++r) {
      auto [cal, test] = tabular::SplitIndices(plan.eval, 0.5, 10000 + r);
      std::vector<double> s_cal, s_test;
      std::vector<std::int32_t> g_test;
      for (auto i : cal) s_cal.push_back(score_of[i]);
      for (auto i : test) s_test.push_back(score_of[i]), g_test.push_back(codes_all[i]);
      const auto calib = metrics::ConformalCalibrate(ds.Labels(cal), s_cal, alpha, cal);
      const auto sets = metrics::ConformalSets(calib, s_test, test);
      const auto cov = metrics::ComputeGroupCoverage(ds.Labels(test), sets, {"group", g_test, cats}, 20);
      sum += cov.marginal.value_or(0.0);
      std::map<std::string, std::size_t> support;
      for (auto g : g_test) ++support[cats[g]];
      for (const auto& [name, count] : support) {
        if (count < 20) continue;
        const auto it = std::find_if(cov.groups.begin(), cov.groups.end(),
                                     [&](const auto& gc) { return gc.group == name; });
        groups_reported = groups_reported && it != cov.groups.end() && it->coverage &&
                          !it->low_support;
      }
    }
    const double mean = sum / 200.0;
    const bool pass = mean >= 1.0 - alpha - 0.01 && groups_reported;
    ok = ok && pass;
    detail += fmt::format(" alpha={}: mean coverage {:.4f} (>= {:.2f}), groups reported {};", alpha,
                          mean, 1.0 - alpha - 0.01, groups_reported ? "yes" : "NO");
  }
  return {ok, "200 resamples each:" + detail};
}

// ------------------------------------------------------------ criterion 11

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int Cli(std::vector<std::string> args) {
  std::vector<const char*> argv = {"fairaudit"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli::RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome Criterion11(const std::filesystem::path& work) {
  namespace fs = std::filesystem;
  fs::remove_all(work);
  fs::create_directories(work);
  auto synth = TwoGroupConfig(600, 0.3, 1111, 1.0);
  synth.periods = 3;
  synth.first_period = 2014;
  synth.group_column = "cit";
  synth.groups[0].name = "DE";
  synth.groups[1].name = "nonDE";
  std::ofstream(work / "synth.json") << synth.ToJson().dump();
  std::ofstream(work / "config.json") << R"({"forest": {"n_trees": 30}, "surrogate": {"max_depth": 3}})";
  std::ofstream(work / "grid.json")
      << R"({"base": {"n_trees": 20}, "variants": [{"name": "RF1", "ntree": 60, "nodesize": 1},
           {"name": "RF2", "ntree": 20, "nodesize": 1}, {"name": "RF3", "ntree": 40, "nodesize": 5},
           {"name": "RF4", "ntree": 40, "nodesize": 15}]})";
  if (Cli({"synth", "--config", (work / "synth.json").string(), "--out", (work / "data").string()}) != 0) {
    return {false, "synth subcommand failed"};
  }
  const std::string data = (work / "data" / "data.csv").string();
  const std::string schema = (work / "data" / "schema.json").string();
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"audit", "config.json"}, {"drift", "config.json"}, {"repro", "grid.json"},
      {"explain", "config.json"}};
  std::size_t compared = 0;
  std::vector<std::string> differences;
  for (const auto& [cmd, cfg] : commands) {
    for (int run = 0; run < 2; ++run) {
      const int code = Cli({cmd, "--data", data, "--schema", schema, "--protected", "cit",
                            "--reference", "DE", "--seed", "7", "--threshold", "top_q:0.25",
                            "--config", (work / cfg).string(), "--out",
                            (work / fmt::format("{}{}", cmd, run)).string()});
      if (code != 0) return {false, fmt::format("{} exited with {}", cmd, code)};
    }
    for (const auto& entry : fs::directory_iterator(work / (cmd + "0"))) {
      const auto name = entry.path().filename();
      const auto other = work / (cmd + "1") / name;
      std::string a = Slurp(entry.path()), b = Slurp(other);
      if (name.extension() == ".json" && name.string().find("report") != std::string::npos) {
        a = cli::StripTimestamp(nlohmann::json::parse(a)).dump();
        b = cli::StripTimestamp(nlohmann::json::parse(b)).dump();
      }
      ++compared;
      if (a != b) differences.push_back(cmd + "/" + name.string());
    }
  }
  std::size_t svgs = 0;
  for (const auto& [cmd, cfg] : commands) {
    for (const auto& entry : fs::directory_iterator(work / (cmd + "0"))) {
      svgs += entry.path().extension() == ".svg";
    }
  }
  return {differences.empty() && svgs > 0,
          fmt::format("audit/drift/repro/explain run twice with --seed 7: {} artifacts compared "
                      "({} SVGs), {} differ{}",
                      compared, svgs, differences.size(),
                      differences.empty() ? "" : " (" + differences.front() + ")")};
}

}  // namespace

int main() {
  const auto start = Clock::now();
  const auto work = std::filesystem::temp_directory_path() / "fairaudit_acceptance";
  struct Item {
    int id;
    std::string title;
    std::function<Outcome()> run;
  };
  const std::vector<Item> items = {
      {1, "metric oracle equivalence", Criterion1},
      {2, "constant-classifier baseline", Criterion2},
      {3, "leakage guard", Criterion3},
      {4, "drift-pattern reproduction", Criterion4},
      {5, "reproducibility matrices", Criterion5},
      {6, "subgroup grid", Criterion6},
      {7, "heterogeneity finder calibration", Criterion7},
      {8, "surrogate fidelity", Criterion8},
      {9, "bias-variance identity", Criterion9},
      {10, "conformal coverage", Criterion10},
      {11, "end-to-end determinism", [&] { return Criterion11(work); }},
  };
  int failures = 0;
  for (const auto& item : items) {
    Outcome o;
    try {
      o = item.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("threw: {}", e.what())};
    }
    if (item.id == 11) {
      const double total = Seconds(start);
      o.pass = o.pass && total < 300.0;
      o.detail += fmt::format("; full suite {:.1f}s (< 300s)", total);
    }
    failures += !o.pass;
    fmt::print("{} criterion {:>2} ({}): {}\n", o.pass ? "PASS" : "FAIL", item.id, item.title,
               o.detail);
    std::fflush(stdout);
  }
  std::filesystem::remove_all(work);
  return failures == 0 ? 0 : 1;
}
