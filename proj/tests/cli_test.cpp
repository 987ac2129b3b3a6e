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

#include "fairaudit/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fairaudit/synthlab.hpp"
#include "test_util.hpp"

namespace fairaudit::cli {
namespace {

namespace fs = std::filesystem;
using testing::ExpectError;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result Cli(std::vector<std::string> args) {
  std::vector<const char*> argv = {"fairaudit"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

nlohmann::json ReadJson(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    work_ = fs::temp_directory_path() / "fairaudit_cli_test";
    fs::remove_all(work_);
    fs::create_directories(work_);
    synthlab::SynthConfig c;
    c.n_per_period = 500;
    c.n_features = 3;
    c.seed = 21;
    c.group_column = "cit";
    c.groups = {{"DE", 0.7, {1.0, 0.8, 0.0}, -0.5, {}, 0, 0, 0, {}},
                {"nonDE", 0.3, {1.0, 0.8, 0.0}, -0.5, {0.0, 0.0, 1.0}, 0, 0, 0, {}}};
    std::ofstream(work_ / "synth.json") << c.ToJson().dump();
    std::ofstream(work_ / "config.json") << R"({"forest": {"n_trees": 15}})";
    const auto r = Cli({"synth", "--config", (work_ / "synth.json").string(), "--out",
                        (work_ / "data").string()});
    ASSERT_EQ(r.code, kOk) << r.err;
  }

  static std::vector<std::string> DataArgs(const std::string& cmd, const std::string& out) {
    return {cmd,           "--data",     (work_ / "data" / "data.csv").string(),
            "--schema",    (work_ / "data" / "schema.json").string(),
            "--protected", "cit",        "--reference",
            "DE",          "--seed",     "3",
            "--config",    (work_ / "config.json").string(),
            "--out",       (work_ / out).string()};
  }

  static fs::path work_;
};

fs::path CliTest::work_;

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(Cli({}).code, kUsage);
  EXPECT_EQ(Cli({"nosuchcommand"}).code, kUsage);
  EXPECT_EQ(Cli({"audit", "--data", "x.csv"}).code, kUsage);
  auto args = DataArgs("audit", "bad_config");
  args[12] = (work_ / "missing.json").string();
  EXPECT_EQ(Cli(args).code, kUsage);
}

TEST_F(CliTest, ValidationErrors) {
  auto args = DataArgs("audit", "bad_column");
  args[6] = "nope";
  const auto r = Cli(args);
  EXPECT_EQ(r.code, kValidation);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
  args = DataArgs("audit", "bad_group");
  args[8] = "FR";
  EXPECT_EQ(Cli(args).code, kValidation);
}

TEST_F(CliTest, AuditReportContents) {
  const auto r = Cli(DataArgs("audit", "audit"));
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto j = ReadJson(work_ / "audit" / "audit_report.json");
  EXPECT_EQ(j["schema_version"], std::string(kSchemaVersion));
  EXPECT_EQ(j["command"], "audit");
  EXPECT_EQ(j["seed"], 3);
  EXPECT_TRUE(j.contains(std::string(kTimestampField)));
  const auto& cmp = j["fairness"]["comparisons"];
  ASSERT_EQ(cmp.size(), 1u);
  EXPECT_EQ(cmp[0]["group"], "nonDE");
  EXPECT_TRUE(cmp[0].contains("parity_difference"));
  EXPECT_TRUE(cmp[0].contains("fnr_difference"));
  EXPECT_EQ(j["fairness"]["reference_group"], "DE");
  EXPECT_TRUE(fs::exists(work_ / "audit" / "subgroup_grid.svg"));
  EXPECT_NE(r.out.find("parity"), std::string::npos);
}

TEST_F(CliTest, GateViolationExitCode) {
  std::ofstream(work_ / "strict.json") << R"({"max_abs_parity_difference": 0.0})";
  std::ofstream(work_ / "lenient.json") << R"({"max_abs_parity_difference": 1.0})";
  auto args = DataArgs("audit", "gated");
  args.push_back("--gates");
  args.push_back((work_ / "strict.json").string());
  const auto strict = Cli(args);
  EXPECT_EQ(strict.code, kGateViolation);
  EXPECT_NE(strict.out.find("GATE VIOLATED"), std::string::npos);
  const auto j = ReadJson(work_ / "gated" / "audit_report.json");
  EXPECT_FALSE(j["gates"]["passed"].get<bool>());
  args.back() = (work_ / "lenient.json").string();
  EXPECT_EQ(Cli(args).code, kOk);
}

TEST_F(CliTest, ReproWritesPerGroupHeatmaps) {
  const auto r = Cli(DataArgs("repro", "repro"));
  ASSERT_EQ(r.code, kOk) << r.err;
  std::size_t svgs = 0;
  for (const auto& e : fs::directory_iterator(work_ / "repro")) {
    svgs += e.path().extension() == ".svg";
  }
  EXPECT_EQ(svgs, 3u);  // one per group plus the pooled matrix
  const auto j = ReadJson(work_ / "repro" / "repro_report.json");
  EXPECT_EQ(j["similarity"].size(), 3u);
}

TEST_F(CliTest, SameSeedSameReport) {
  ASSERT_EQ(Cli(DataArgs("audit", "det0")).code, kOk);
  ASSERT_EQ(Cli(DataArgs("audit", "det1")).code, kOk);
  EXPECT_EQ(StripTimestamp(ReadJson(work_ / "det0" / "audit_report.json")),
            StripTimestamp(ReadJson(work_ / "det1" / "audit_report.json")));
}

TEST(GateConfigTest, FromJson) {
  const auto g = GateConfig::FromJson({{"max_abs_fnr_difference", 0.1}});
  EXPECT_EQ(g.max_abs_fnr_difference, 0.1);
  EXPECT_FALSE(g.max_abs_parity_difference);
  EXPECT_EQ(GateConfig::FromJson(g.ToJson()).ToJson(), g.ToJson());
  ExpectError(ErrorCode::kBadConfig, [] { GateConfig::FromJson({{"max_fun", 0.1}}); });
  ExpectError(ErrorCode::kBadConfig,
              [] { GateConfig::FromJson({{"min_group_coverage", 1.5}}); });
}

TEST(GateConfigTest, UndefinedMetricsNeverViolate) {
  metrics::FairnessReport report;
  report.comparisons.push_back({});
  report.comparisons.back().group = "B";
  GateConfig g;
  g.max_abs_parity_difference = 0.0;
  g.max_abs_fnr_difference = 0.0;
  EXPECT_TRUE(CheckFairness(g, report).empty());
  report.comparisons.back().parity_difference = -0.2;
  const auto v = CheckFairness(g, report);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].gate, "max_abs_parity_difference");
  EXPECT_DOUBLE_EQ(v[0].value, -0.2);
}

TEST(ReportJsonTest, StripTimestampAndRates) {
  const nlohmann::json j = {{std::string(kTimestampField), "now"}, {"a", 1}};
  EXPECT_EQ(StripTimestamp(j), (nlohmann::json{{"a", 1}}));
  EXPECT_EQ(RateJson(std::nullopt), "undefined");
  EXPECT_EQ(RateJson(0.25), 0.25);
}

}  // namespace
}  // namespace fairaudit::cli
