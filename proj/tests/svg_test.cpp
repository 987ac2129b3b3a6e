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

#include "fairaudit/svg.hpp"

#include <gtest/gtest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <sstream>

#include "test_util.hpp"

namespace fairaudit::svg {
namespace {

using testing::ExpectError;
namespace pt = boost::property_tree;

// Parses the document (throws on malformed XML) and returns the root <svg>.
pt::ptree Parse(const std::string& doc) {
  std::istringstream in(doc);
  pt::ptree tree;
  pt::read_xml(in, tree);
  return tree.get_child("svg");
}

// Counts elements named `tag` with class `cls` anywhere below `node`.
std::size_t Count(const pt::ptree& node, const std::string& tag, const std::string& cls) {
  std::size_t n = 0;
  for (const auto& [name, child] : node) {
    if (name == tag && child.get("<xmlattr>.class", "") == cls) ++n;
    n += Count(child, tag, cls);
  }
  return n;
}

TEST(LineChartTest, OnePointHasOneMarker) {
  LineChart c;
  c.title = "t";
  c.x_ticks = {"2011"};
  c.series = {{"ba", {0.7}, "#000000", false}};
  const auto root = Parse(EmitSvg(c));
  EXPECT_EQ(Count(root, "circle", "marker"), 1u);
}

TEST(LineChartTest, UndefinedPointsAreSkipped) {
  LineChart c;
  c.x_ticks = {"a", "b", "c"};
  c.series = {{"s", {0.1, std::nullopt, 0.3}, "#ff0000", true}};
  c.reference_line = 0.0;
  EXPECT_EQ(Count(Parse(EmitSvg(c)), "circle", "marker"), 2u);
  c.series[0].values.pop_back();
  ExpectError(ErrorCode::kLengthMismatch, [&] { EmitSvg(c); });
  ExpectError(ErrorCode::kEmptySpec, [] { EmitSvg(LineChart{}); });
}

TEST(HeatmapTest, FortyEightCells) {
  Heatmap h;
  h.title = "subgroups <BA> & more";
  for (int r = 0; r < 4; ++r) h.row_labels.push_back("r" + std::to_string(r));
  for (int c = 0; c < 12; ++c) h.col_labels.push_back("c" + std::to_string(c));
  for (int i = 0; i < 48; ++i) {
    h.values.push_back(i == 5 ? std::nullopt : std::optional<double>(i / 47.0));
  }
  const std::string doc = EmitSvg(h);
  const auto root = Parse(doc);
  EXPECT_EQ(Count(root, "rect", "cell"), 48u);
  EXPECT_NE(doc.find("subgroups &lt;BA&gt; &amp; more"), std::string::npos);
  h.values.pop_back();
  ExpectError(ErrorCode::kLengthMismatch, [&] { EmitSvg(h); });
}

TEST(TreePlotTest, LeavesAndSplits) {
  TreePlot t;
  t.nodes = {{"x <= 1", 1, 2}, {"leaf a", -1, -1}, {"leaf b", -1, -1}};
  const std::string doc = EmitSvg(t);
  const auto root = Parse(doc);
  EXPECT_EQ(Count(root, "rect", "split"), 1u);
  EXPECT_EQ(Count(root, "rect", "leaf"), 2u);
  EXPECT_NE(doc.find(">true<"), std::string::npos);
  EXPECT_NE(doc.find(">false<"), std::string::npos);
}

TEST(SvgTest, Deterministic) {
  Heatmap h{"m", {"a", "b"}, {"a", "b"}, {1.0, 0.5, 0.5, 1.0}, 0.0, 1.0, true};
  EXPECT_EQ(EmitSvg(h), EmitSvg(h));
}

TEST(SvgTest, Escape) {
  EXPECT_EQ(XmlEscape("a<b>&\"c'"), "a&lt;b&gt;&amp;&quot;c&apos;");
}

}  // namespace
}  // namespace fairaudit::svg
