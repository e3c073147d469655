#pragma once

// SPDX-License-Identifier: Apache-2.0

/**
 * @file report.hpp
 * @brief Aggregation of result rows and chart rendering.
 *
 * Per (algorithm, budget, metric) the report takes the median and the
 * interquartile band over seeds, writes a plain-text summary and an
 * aggregate CSV, and renders one SVG line chart per metric with the budget
 * axis on a log2 scale.
 */

#include "adpo/common.hpp"
#include "adpo/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace adpo {

inline const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = {
      "max_logit_error", "mean_logit_error", "error_rate"};
  return names;
}

struct AggregateRow {
  std::string algorithm;
  int budget = 0;
  std::string metric;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  int n_seeds = 0;
};

namespace detail {

/// Linear-interpolation quantile of a sorted sample.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double idx = p * (static_cast<double>(sorted.size()) - 1.0);
  const auto lo = static_cast<size_t>(std::floor(idx));
  const auto hi = static_cast<size_t>(std::ceil(idx));
  const double frac = idx - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline double metric_of(const ResultRow& row, const std::string& metric) {
  if (metric == "max_logit_error") return row.max_logit_error;
  if (metric == "mean_logit_error") return row.mean_logit_error;
  if (metric == "error_rate") return row.error_rate;
  throw InvalidInput("unknown metric: " + metric);
}

}  // namespace detail

/// Median and interquartile band over seeds, one row per
/// (algorithm, budget, metric), in algorithm/budget/metric order.
inline std::vector<AggregateRow> aggregate_results(
    const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw InvalidInput("aggregate_results: no rows");
  std::map<std::pair<std::string, int>, std::vector<const ResultRow*>> cells;
  for (const auto& row : rows)
    cells[{row.algorithm, row.budget}].push_back(&row);

  std::vector<AggregateRow> out;
  for (const auto& [key, cell] : cells) {
    for (const auto& metric : metric_names()) {
      std::vector<double> values;
      values.reserve(cell.size());
      for (const ResultRow* row : cell)
        values.push_back(detail::metric_of(*row, metric));
      std::sort(values.begin(), values.end());
      out.push_back({key.first, key.second, metric,
                     detail::quantile_sorted(values, 0.5),
                     detail::quantile_sorted(values, 0.25),
                     detail::quantile_sorted(values, 0.75),
                     static_cast<int>(values.size())});
    }
  }
  return out;
}

inline void write_aggregate_csv(const std::string& path,
                                const std::vector<AggregateRow>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot open for writing: " + path);
  out << "# adpo-aggregate-schema 1\n"
      << "algorithm,budget,metric,median,q25,q75,n_seeds\n";
  for (const auto& r : rows)
    out << r.algorithm << ',' << r.budget << ',' << r.metric << ','
        << detail::format_double(r.median) << ','
        << detail::format_double(r.q25) << ',' << detail::format_double(r.q75)
        << ',' << r.n_seeds << '\n';
  if (!out) throw InvalidInput("write failed: " + path);
}

inline void write_summary_text(const std::string& path,
                               const std::vector<AggregateRow>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot open for writing: " + path);
  for (const auto& metric : metric_names()) {
    out << metric << "\n";
    for (const auto& r : rows) {
      if (r.metric != metric) continue;
      out << "  " << r.algorithm << " n=" << r.budget
          << " median=" << detail::format_double(r.median) << " iqr=["
          << detail::format_double(r.q25) << ", "
          << detail::format_double(r.q75) << "] seeds=" << r.n_seeds << "\n";
    }
  }
  if (!out) throw InvalidInput("write failed: " + path);
}

// ============================================================================
// SVG chart
// ============================================================================

namespace detail {

inline std::string algorithm_color(const std::string& algorithm) {
  if (algorithm == "adpo") return "#1f77b4";
  if (algorithm == "adpo_plus") return "#d62728";
  if (algorithm == "uniform") return "#7f7f7f";
  if (algorithm == "apo") return "#2ca02c";
  if (algorithm == "pmc") return "#9467bd";
  return "#17becf";
}

inline std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

}  // namespace detail

/// Renders one metric as an SVG line chart: median line per algorithm plus
/// a translucent interquartile band, budgets on a log2 x-axis.
inline void write_metric_chart_svg(const std::string& path,
                                   const std::vector<AggregateRow>& rows,
                                   const std::string& metric) {
  std::vector<const AggregateRow*> selected;
  for (const auto& r : rows)
    if (r.metric == metric) selected.push_back(&r);
  if (selected.empty())
    throw InvalidInput("write_metric_chart_svg: no rows for " + metric);

  std::set<std::string> algorithms;
  double x_min = 1e300, x_max = -1e300, y_min = 0.0, y_max = -1e300;
  for (const auto* r : selected) {
    algorithms.insert(r->algorithm);
    const double x = std::log2(static_cast<double>(r->budget));
    x_min = std::min(x_min, x);
    x_max = std::max(x_max, x);
    y_max = std::max(y_max, r->q75);
  }
  if (x_max <= x_min) x_max = x_min + 1.0;
  if (y_max <= y_min) y_max = y_min + 1.0;
  y_max *= 1.05;

  const double width = 640.0, height = 420.0;
  const double left = 64.0, right = 24.0, top = 40.0, bottom = 48.0;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  auto sx = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
  auto sy = [&](double y) { return top + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h; };

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot open for writing: " + path);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">"
      << detail::svg_escape(metric) << "</text>\n";

  // Axes.
  out << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\""
      << left + plot_w << "\" y2=\"" << top + plot_h
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
      << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";

  // x ticks at the observed budgets (log2 positions).
  std::set<int> budgets;
  for (const auto* r : selected) budgets.insert(r->budget);
  for (int budget : budgets) {
    const double x = sx(std::log2(static_cast<double>(budget)));
    out << "<line x1=\"" << x << "\" y1=\"" << top + plot_h << "\" x2=\"" << x
        << "\" y2=\"" << top + plot_h + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << x << "\" y=\"" << top + plot_h + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << budget << "</text>\n";
  }
  out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 8
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">budget n (log2 axis)</text>\n";

  // y ticks.
  for (int k = 0; k <= 4; ++k) {
    const double value = y_min + (y_max - y_min) * k / 4.0;
    const double y = sy(value);
    out << "<line x1=\"" << left - 5 << "\" y1=\"" << y << "\" x2=\"" << left
        << "\" y2=\"" << y << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << left - 9 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << detail::format_double(value) << "</text>\n";
  }

  // Bands first so the median lines draw on top.
  for (const auto& algorithm : algorithms) {
    std::vector<const AggregateRow*> series;
    for (const auto* r : selected)
      if (r->algorithm == algorithm) series.push_back(r);
    std::sort(series.begin(), series.end(),
              [](const AggregateRow* a, const AggregateRow* b) {
                return a->budget < b->budget;
              });
    const std::string color = detail::algorithm_color(algorithm);

    out << "<polygon fill=\"" << color << "\" opacity=\"0.15\" points=\"";
    for (const auto* r : series)
      out << sx(std::log2(static_cast<double>(r->budget))) << ","
          << sy(r->q75) << " ";
    for (auto it = series.rbegin(); it != series.rend(); ++it)
      out << sx(std::log2(static_cast<double>((*it)->budget))) << ","
          << sy((*it)->q25) << " ";
    out << "\"/>\n";

    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" points=\"";
    for (const auto* r : series)
      out << sx(std::log2(static_cast<double>(r->budget))) << ","
          << sy(r->median) << " ";
    out << "\"/>\n";
  }

  // Legend.
  double legend_y = top + 8.0;
  for (const auto& algorithm : algorithms) {
    const std::string color = detail::algorithm_color(algorithm);
    out << "<line x1=\"" << left + plot_w - 130 << "\" y1=\"" << legend_y
        << "\" x2=\"" << left + plot_w - 106 << "\" y2=\"" << legend_y
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << left + plot_w - 100 << "\" y=\"" << legend_y + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">"
        << detail::svg_escape(algorithm) << "</text>\n";
    legend_y += 16.0;
  }

  out << "</svg>\n";
  if (!out) throw InvalidInput("write failed: " + path);
}

/// Full report: aggregate CSV, text summary, one chart per metric.
/// Returns the aggregate rows for further inspection.
inline std::vector<AggregateRow> write_report(
    const std::string& out_dir, const std::vector<ResultRow>& rows) {
  const auto aggregated = aggregate_results(rows);
  write_aggregate_csv(out_dir + "/aggregate.csv", aggregated);
  write_summary_text(out_dir + "/summary.txt", aggregated);
  for (const auto& metric : metric_names())
    write_metric_chart_svg(out_dir + "/" + metric + ".svg", aggregated, metric);
  return aggregated;
}

}  // namespace adpo
