#pragma once

// ResultTable persistence: CSV (canonical output), JSON metadata sidecar, minimal SVG plots.

#include "ldo/csv.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace ldo::harness {

using Cell = std::variant<double, long long, std::string>;

inline std::string cell_text(const Cell& c) {
  if (auto* d = std::get_if<double>(&c)) return format_double(*d);
  if (auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

inline double cell_number(const Cell& c) {
  if (auto* d = std::get_if<double>(&c)) return *d;
  if (auto* i = std::get_if<long long>(&c)) return static_cast<double>(*i);
  throw std::invalid_argument("cell is not numeric: " + std::get<std::string>(c));
}

/// Total order: numbers before strings, numbers by value (NaN last), strings lexicographically.
inline bool cell_less(const Cell& a, const Cell& b) {
  const bool as = std::holds_alternative<std::string>(a);
  const bool bs = std::holds_alternative<std::string>(b);
  if (as != bs) return !as;
  if (as) return std::get<std::string>(a) < std::get<std::string>(b);
  const double x = cell_number(a);
  const double y = cell_number(b);
  if (std::isnan(x) || std::isnan(y)) return !std::isnan(x) && std::isnan(y);
  return x < y;
}

struct ResultTable {
  std::string kind;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();

  std::size_t column(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw std::invalid_argument("no column '" + name + "' in " + kind + " table");
    return static_cast<std::size_t>(it - columns.begin());
  }

  void add_row(std::vector<Cell> row) {
    if (row.size() != columns.size())
      throw std::invalid_argument("row width " + std::to_string(row.size()) + " != " +
                                  std::to_string(columns.size()) + " columns");
    rows.push_back(std::move(row));
  }

  /// Canonical order: lexicographic over the columns left to right.
  void sort_canonical() {
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      for (std::size_t k = 0; k < a.size(); ++k) {
        if (cell_less(a[k], b[k])) return true;
        if (cell_less(b[k], a[k])) return false;
      }
      return false;
    });
  }
};

inline void write_csv(const ResultTable& t, std::ostream& os) {
  write_csv_row(os, t.columns);
  for (const auto& r : t.rows) {
    std::vector<std::string> fields;
    fields.reserve(r.size());
    for (const auto& c : r) fields.push_back(cell_text(c));
    write_csv_row(os, fields);
  }
}

inline void write_csv(const ResultTable& t, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write CSV to " + path);
  write_csv(t, os);
  if (!os) throw std::runtime_error("write failed: " + path);
}

/// Reads a CSV written by write_csv; numeric-looking fields become doubles.
inline ResultTable read_csv_table(std::istream& in) {
  ResultTable t;
  auto records = read_csv_records(in);
  if (records.empty()) return t;
  for (const auto& f : records[0]) t.columns.push_back(f.text);
  for (std::size_t r = 1; r < records.size(); ++r) {
    std::vector<Cell> row;
    for (const auto& f : records[r]) {
      try {
        row.emplace_back(parse_double(f));
      } catch (const ParseError&) {
        if (f.text == "nan") row.emplace_back(std::nan(""));
        else row.emplace_back(f.text);
      }
    }
    if (row.size() != t.columns.size())
      throw ParseError("row has " + std::to_string(row.size()) + " fields", records[r][0].line, 1);
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline ResultTable read_csv_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_csv_table(in);
}

inline void write_metadata(const ResultTable& t, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write metadata to " + path);
  os << t.metadata.dump(2) << "\n";
}

// ---------------------------------------------------------------------------------------------
// SVG

struct SvgOptions {
  bool log_y = false;
  double log_floor = 1e-12;
  std::vector<std::string> group_by;  // one polyline per (group, y-column)
  std::string title;
  int width = 720;
  int height = 440;
};

struct SvgInfo {
  int clamped = 0;  // values raised to the log floor
  int series = 0;
};

inline std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else if (c == '"') out += "&quot;";
    else out += c;
  }
  return out;
}

inline SvgInfo write_svg_lines(const ResultTable& t, const std::string& x_col, const std::vector<std::string>& y_cols,
                               const std::string& path, const SvgOptions& opt = {}) {
  struct Series {
    std::string label;
    std::vector<std::pair<double, double>> pts;
  };
  SvgInfo info;
  std::map<std::string, Series> series;
  const std::size_t xi = t.column(x_col);
  for (const auto& row : t.rows) {
    std::string group;
    for (const auto& g : opt.group_by) group += (group.empty() ? "" : " ") + g + "=" + cell_text(row[t.column(g)]);
    for (const auto& yc : y_cols) {
      const std::string label = group.empty() ? yc : group + " " + yc;
      double x, y;
      try {
        x = cell_number(row[xi]);
        y = cell_number(row[t.column(yc)]);
      } catch (const std::invalid_argument&) {
        continue;
      }
      if (!std::isfinite(x) || std::isnan(y)) continue;
      if (opt.log_y && !(y >= opt.log_floor)) {
        y = opt.log_floor;
        ++info.clamped;
      }
      auto& s = series[label];
      s.label = label;
      s.pts.emplace_back(x, y);
    }
  }
  double xmin = kInf, xmax = -kInf, ymin = kInf, ymax = -kInf;
  auto ty = [&](double y) { return opt.log_y ? std::log10(y) : y; };
  for (auto& [k, s] : series) {
    std::sort(s.pts.begin(), s.pts.end());
    for (auto [x, y] : s.pts) {
      if (!std::isfinite(y)) continue;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, ty(y));
      ymax = std::max(ymax, ty(y));
    }
  }
  if (!(xmin < xmax)) {
    xmin = std::isfinite(xmin) ? xmin - 1 : 0;
    xmax = std::isfinite(xmax) ? xmax + 1 : 1;
  }
  if (!(ymin < ymax)) {
    ymin = std::isfinite(ymin) ? ymin - 1 : 0;
    ymax = std::isfinite(ymax) ? ymax + 1 : 1;
  }
  const double left = 70, right = 200, top = 30, bottom = 50;
  const double pw = opt.width - left - right, ph = opt.height - top - bottom;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + (1.0 - (ty(y) - ymin) / (ymax - ymin)) * ph; };
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write SVG to " + path);
  char buf[128];
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\"" << opt.height
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!opt.title.empty())
    os << "<text x=\"" << left << "\" y=\"18\" font-size=\"13\">" << svg_escape(opt.title) << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = xmin + (xmax - xmin) * k / 4.0;
    const double gy = ymin + (ymax - ymin) * k / 4.0;
    std::snprintf(buf, sizeof buf, "%.4g", fx);
    os << "<text x=\"" << px(fx) << "\" y=\"" << top + ph + 15 << "\" text-anchor=\"middle\">" << buf << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.3g", opt.log_y ? std::pow(10.0, gy) : gy);
    const double yy = top + (1.0 - (gy - ymin) / (ymax - ymin)) * ph;
    os << "<text x=\"" << left - 5 << "\" y=\"" << yy + 4 << "\" text-anchor=\"end\">" << buf << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << opt.height - 12 << "\" text-anchor=\"middle\">"
     << svg_escape(x_col) << "</text>\n";
  std::string ylabel;
  for (const auto& y : y_cols) ylabel += (ylabel.empty() ? "" : ", ") + y;
  if (opt.log_y) ylabel += " (log)";
  os << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << svg_escape(ylabel) << "</text>\n";
  int idx = 0;
  for (const auto& [k, s] : series) {
    const char* color = colors[idx % 10];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (auto [x, y] : s.pts) {
      if (!std::isfinite(y)) continue;
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(x), py(y));
      os << buf;
    }
    os << "\"/>\n";
    const double ly = top + 12 + 16 * idx;
    os << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << left + pw + 30 << "\" y2=\""
       << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << left + pw + 35 << "\" y=\"" << ly << "\">" << svg_escape(s.label) << "</text>\n";
    ++idx;
  }
  os << "</svg>\n";
  info.series = idx;
  return info;
}

}  // namespace ldo::harness
