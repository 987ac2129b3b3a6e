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

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace fairaudit::svg {

struct Series {
  std::string name;
  // Undefined points leave a gap in the line.
  std::vector<std::optional<double>> values;
  std::string color = "#1f77b4";
  bool dashed = false;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<std::string> x_ticks;
  std::vector<Series> series;
  // Draws a horizontal reference line at this y value.
  std::optional<double> reference_line;
};

struct Heatmap {
  std::string title;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  // Row-major; undefined cells are drawn grey.
  std::vector<std::optional<double>> values;
  double lo = 0.0;
  double hi = 1.0;
  bool annotate = true;
};

struct TreePlotNode {
  std::string label;
  int left = -1;  // child taken when the condition holds
  int right = -1;
};

// Nodes in pre-order; node 0 is the root.
struct TreePlot {
  std::string title;
  std::vector<TreePlotNode> nodes;
};

using PlotSpec = std::variant<LineChart, Heatmap, TreePlot>;

// Standalone SVG 1.1 document. Identical specs give identical bytes.
// Throws EmptySpec (nothing to draw) or LengthMismatch.
std::string EmitSvg(const PlotSpec& spec);

// Escapes &, <, >, " and ' for XML text and attributes.
std::string XmlEscape(std::string_view text);

}  // namespace fairaudit::svg
