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

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "fairaudit/common.hpp"

namespace fairaudit::svg {

namespace {

constexpr double kMargin = 60.0;

std::string Header(double width, double height) {
  return fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{:.0f}\" "
      "height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\" font-family=\"sans-serif\" "
      "font-size=\"12\">\n"
      "<rect x=\"0\" y=\"0\" width=\"{:.0f}\" height=\"{:.0f}\" fill=\"#ffffff\"/>\n",
      width, height, width, height, width, height);
}

std::string Text(double x, double y, std::string_view text, std::string_view anchor = "middle",
                 std::string_view extra = "") {
  return fmt::format("<text x=\"{:.3f}\" y=\"{:.3f}\" text-anchor=\"{}\"{}>{}</text>\n", x, y,
                     anchor, extra, XmlEscape(text));
}

std::string Title(double width, std::string_view title) {
  return title.empty() ? std::string()
                       : Text(width / 2.0, 24.0, title, "middle", " font-size=\"16\"");
}

// White to dark blue.
std::string Shade(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const auto channel = [t](double from, double to) {
    return static_cast<int>(std::lround(from + (to - from) * t));
  };
  return fmt::format("#{:02x}{:02x}{:02x}", channel(255, 8), channel(255, 48), channel(255, 107));
}

std::string EmitLine(const LineChart& c) {
  std::size_t n = c.x_ticks.size();
  bool any = false;
  for (const auto& s : c.series) {
    n = std::max(n, s.values.size());
    for (const auto& v : s.values) any = any || v.has_value();
  }
  if (c.series.empty() || n == 0 || !any) {
    throw Error(ErrorCode::kEmptySpec, "line chart has no defined points");
  }
  for (const auto& s : c.series) {
    if (s.values.size() != c.x_ticks.size()) {
      throw Error(ErrorCode::kLengthMismatch,
                  fmt::format("series '{}' has {} values for {} ticks", s.name, s.values.size(),
                              c.x_ticks.size()));
    }
  }
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& s : c.series) {
    for (const auto& v : s.values) {
      if (v) lo = std::min(lo, *v), hi = std::max(hi, *v);
    }
  }
  if (c.reference_line) lo = std::min(lo, *c.reference_line), hi = std::max(hi, *c.reference_line);
  if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  const double width = 720.0, height = 420.0, legend = 160.0;
  const double plot_w = width - 2 * kMargin - legend, plot_h = height - 2 * kMargin;
  const auto px = [&](std::size_t i) {
    return kMargin + (n == 1 ? plot_w / 2.0 : plot_w * static_cast<double>(i) / (n - 1.0));
  };
  const auto py = [&](double v) { return kMargin + plot_h * (hi - v) / (hi - lo); };

  std::string out = Header(width, height) + Title(width, c.title);
  out += fmt::format(
      "<rect x=\"{:.3f}\" y=\"{:.3f}\" width=\"{:.3f}\" height=\"{:.3f}\" fill=\"none\" "
      "stroke=\"#000000\"/>\n",
      kMargin, kMargin, plot_w, plot_h);
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    out += Text(kMargin - 6.0, py(v) + 4.0, fmt::format("{:.3f}", v), "end");
  }
  for (std::size_t i = 0; i < c.x_ticks.size(); ++i) {
    out += Text(px(i), kMargin + plot_h + 16.0, c.x_ticks[i]);
  }
  out += Text(kMargin + plot_w / 2.0, height - 12.0, c.x_label);
  out += fmt::format(
      "<text x=\"16\" y=\"{:.3f}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.3f})\">{}"
      "</text>\n",
      kMargin + plot_h / 2.0, kMargin + plot_h / 2.0, XmlEscape(c.y_label));
  if (c.reference_line) {
    out += fmt::format(
        "<line x1=\"{:.3f}\" y1=\"{:.3f}\" x2=\"{:.3f}\" y2=\"{:.3f}\" stroke=\"#888888\" "
        "stroke-dasharray=\"2,2\"/>\n",
        kMargin, py(*c.reference_line), kMargin + plot_w, py(*c.reference_line));
  }
  for (std::size_t si = 0; si < c.series.size(); ++si) {
    const Series& s = c.series[si];
    const std::string dash = s.dashed ? " stroke-dasharray=\"6,4\"" : "";
    std::string points;
    const auto flush = [&] {
      if (!points.empty()) {
        out += fmt::format(
            "<polyline class=\"series\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"{} "
            "points=\"{}\"/>\n",
            s.color, dash, points);
      }
      points.clear();
    };
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      if (!s.values[i]) {
        flush();
        continue;
      }
      if (!points.empty()) points += ' ';
      points += fmt::format("{:.3f},{:.3f}", px(i), py(*s.values[i]));
    }
    flush();
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      if (s.values[i]) {
        out += fmt::format(
            "<circle class=\"marker\" cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"3\" fill=\"{}\"/>\n", px(i),
            py(*s.values[i]), s.color);
      }
    }
    const double ly = kMargin + 10.0 + 20.0 * static_cast<double>(si);
    const double lx = width - legend - kMargin / 2.0;
    out += fmt::format(
        "<line x1=\"{:.3f}\" y1=\"{:.3f}\" x2=\"{:.3f}\" y2=\"{:.3f}\" stroke=\"{}\" "
        "stroke-width=\"2\"{}/>\n",
        lx, ly, lx + 24.0, ly, s.color, dash);
    out += Text(lx + 30.0, ly + 4.0, s.name, "start");
  }
  return out + "</svg>\n";
}

std::string EmitHeatmap(const Heatmap& h) {
  const std::size_t rows = h.row_labels.size(), cols = h.col_labels.size();
  if (rows == 0 || cols == 0) throw Error(ErrorCode::kEmptySpec, "heatmap has no cells");
  if (h.values.size() != rows * cols) {
    throw Error(ErrorCode::kLengthMismatch,
                fmt::format("heatmap has {} values for {}x{} cells", h.values.size(), rows, cols));
  }
  const double cell = 48.0, left = 180.0, top = 60.0;
  const double width = left + cell * static_cast<double>(cols) + 40.0;
  const double height = top + cell * static_cast<double>(rows) + 120.0;
  const double span = h.hi - h.lo;
  std::string out = Header(width, height) + Title(width, h.title);
  for (std::size_t r = 0; r < rows; ++r) {
    const double y = top + cell * static_cast<double>(r);
    out += Text(left - 6.0, y + cell / 2.0 + 4.0, h.row_labels[r], "end");
    for (std::size_t c = 0; c < cols; ++c) {
      const double x = left + cell * static_cast<double>(c);
      const auto& v = h.values[r * cols + c];
      const double t = v ? (span > 0.0 ? (*v - h.lo) / span : 0.5) : 0.0;
      out += fmt::format(
          "<rect class=\"cell\" x=\"{:.3f}\" y=\"{:.3f}\" width=\"{:.3f}\" height=\"{:.3f}\" "
          "fill=\"{}\" stroke=\"#ffffff\"/>\n",
          x, y, cell, cell, v ? Shade(t) : std::string("#cccccc"));
      if (h.annotate) {
        out += Text(x + cell / 2.0, y + cell / 2.0 + 4.0,
                    v ? fmt::format("{:.2f}", *v) : std::string("n/a"), "middle",
                    fmt::format(" font-size=\"10\" fill=\"{}\"",
                                v && t > 0.55 ? "#ffffff" : "#000000"));
      }
    }
  }
  const double base = top + cell * static_cast<double>(rows);
  for (std::size_t c = 0; c < cols; ++c) {
    const double x = left + cell * (static_cast<double>(c) + 0.5);
    out += fmt::format(
        "<text x=\"{:.3f}\" y=\"{:.3f}\" text-anchor=\"end\" transform=\"rotate(-60 {:.3f} "
        "{:.3f})\">{}</text>\n",
        x, base + 12.0, x, base + 12.0, XmlEscape(h.col_labels[c]));
  }
  return out + "</svg>\n";
}

std::string EmitTree(const TreePlot& t) {
  if (t.nodes.empty()) throw Error(ErrorCode::kEmptySpec, "tree has no nodes");
  const auto n = static_cast<int>(t.nodes.size());
  std::vector<double> slot(t.nodes.size());
  std::vector<int> depth(t.nodes.size(), 0);
  int leaves = 0, max_depth = 0;
  // In-order leaf positions; an internal node sits above its children.
  std::function<void(int, int)> layout = [&](int i, int d) {
    if (i < 0 || i >= n) throw Error(ErrorCode::kLengthMismatch, "tree link out of range");
    depth[i] = d;
    max_depth = std::max(max_depth, d);
    const auto& node = t.nodes[i];
    if (node.left < 0 || node.right < 0) {
      slot[i] = leaves++;
      return;
    }
    layout(node.left, d + 1);
    layout(node.right, d + 1);
    slot[i] = (slot[node.left] + slot[node.right]) / 2.0;
  };
  layout(0, 0);
  const double box_w = 150.0, box_h = 36.0, dx = 170.0, dy = 90.0;
  const double width = std::max(320.0, dx * leaves + 40.0);
  const double height = 70.0 + dy * max_depth + box_h + 30.0;
  const auto cx = [&](int i) { return 20.0 + dx * (slot[i] + 0.5); };
  const auto cy = [&](int i) { return 50.0 + dy * depth[i]; };

  std::string out = Header(width, height) + Title(width, t.title);
  for (int i = 0; i < n; ++i) {
    const auto& node = t.nodes[i];
    if (depth[i] == 0 && i != 0) continue;  // unreachable node
    if (node.left < 0 || node.right < 0) continue;
    for (const auto& [child, tag] : {std::pair{node.left, "true"}, std::pair{node.right, "false"}}) {
      out += fmt::format(
          "<line x1=\"{:.3f}\" y1=\"{:.3f}\" x2=\"{:.3f}\" y2=\"{:.3f}\" stroke=\"#555555\"/>\n",
          cx(i), cy(i) + box_h, cx(child), cy(child));
      out += Text((cx(i) + cx(child)) / 2.0, (cy(i) + box_h + cy(child)) / 2.0, tag, "middle",
                  " font-size=\"10\" fill=\"#555555\"");
    }
  }
  for (int i = 0; i < n; ++i) {
    if (depth[i] == 0 && i != 0) continue;
    const bool leaf = t.nodes[i].left < 0 || t.nodes[i].right < 0;
    out += fmt::format(
        "<rect class=\"{}\" x=\"{:.3f}\" y=\"{:.3f}\" width=\"{:.3f}\" height=\"{:.3f}\" "
        "rx=\"4\" fill=\"{}\" stroke=\"#333333\"/>\n",
        leaf ? "leaf" : "split", cx(i) - box_w / 2.0, cy(i), box_w, box_h,
        leaf ? "#e8f0fa" : "#fdf3e1");
    out += Text(cx(i), cy(i) + box_h / 2.0 + 4.0, t.nodes[i].label, "middle",
                " font-size=\"11\"");
  }
  return out + "</svg>\n";
}

}  // namespace

std::string XmlEscape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string EmitSvg(const PlotSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LineChart>) {
          return EmitLine(s);
        } else if constexpr (std::is_same_v<T, Heatmap>) {
          return EmitHeatmap(s);
        } else {
          return EmitTree(s);
        }
      },
      spec);
}

}  // namespace fairaudit::svg
