#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "pss/errors.hpp"

namespace pss {

struct RateFit {
  bool ok = false;            // false: too few usable points
  double slope = 0.0;         // s in error ~ n^{-s}
  double half_width = 0.0;    // 1.96 * standard error of the slope
  double r_squared = 0.0;
  bool algebraic = false;     // r_squared >= 0.98 over the fit window
};

/// Least-squares slope of log(error) against log(n) over points with error
/// above the floor; needs at least five of them.
inline RateFit fit_rate(const std::vector<double>& ns, const std::vector<double>& errors,
                        double floor = 1e-12) {
  if (ns.size() != errors.size()) throw malformed_input("fit_rate: mismatched columns");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (errors[i] > floor && ns[i] > 0) {
      xs.push_back(std::log(ns[i]));
      ys.push_back(std::log(errors[i]));
    }
  }
  RateFit fit;
  if (xs.size() < 5) return fit;
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (!(denom > 0)) return fit;
  const double b = (n * sxy - sx * sy) / denom;  // log error = a + b log n
  const double a = (sy - b * sx) / n;
  double ss_res = 0.0, ss_tot = 0.0;
  const double mean_y = sy / n;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double r = ys[i] - (a + b * xs[i]);
    ss_res += r * r;
    ss_tot += (ys[i] - mean_y) * (ys[i] - mean_y);
  }
  fit.ok = true;
  fit.slope = -b;
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  double se = xs.size() > 2 ? std::sqrt(ss_res / (n - 2.0) / (denom / n)) : 0.0;
  fit.half_width = 1.96 * se;
  fit.algebraic = fit.r_squared >= 0.98;
  return fit;
}

/// One CSV table: '#'-prefixed metadata lines, a header row, then rows
/// rendered with fixed scientific precision so identical runs are
/// byte-identical.
class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> columns, std::string label_column = "")
      : columns_(std::move(columns)), label_column_(std::move(label_column)) {}

  void set_meta(const std::string& key, const std::string& value) { meta_[key] = value; }

  void add_row(const std::vector<double>& row) {
    if (row.size() != columns_.size()) throw malformed_input("CsvTable: row width mismatch");
    rows_.push_back(row);
    if (!label_column_.empty()) labels_.emplace_back();
  }

  void add_row(const std::string& label, const std::vector<double>& row) {
    if (label_column_.empty()) throw malformed_input("CsvTable: table has no label column");
    if (row.size() != columns_.size()) throw malformed_input("CsvTable: row width mismatch");
    labels_.push_back(label);
    rows_.push_back(row);
  }

  const std::vector<std::vector<double>>& rows() const { return rows_; }
  const std::vector<std::string>& columns() const { return columns_; }

  std::string render() const {
    std::string out;
    for (const auto& [k, v] : meta_) out += "# " + k + ": " + v + "\n";
    if (!label_column_.empty()) out += label_column_ + ",";
    for (std::size_t c = 0; c < columns_.size(); ++c)
      out += columns_[c] + (c + 1 < columns_.size() ? "," : "\n");
    char buf[40];
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      if (!label_column_.empty()) out += "\"" + labels_[r] + "\",";
      for (std::size_t c = 0; c < rows_[r].size(); ++c) {
        std::snprintf(buf, sizeof(buf), "%.12e", rows_[r][c]);
        out += buf;
        out += c + 1 < rows_[r].size() ? "," : "\n";
      }
    }
    return out;
  }

  void write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw configuration_error("CsvTable: cannot open " + path);
    f << render();
  }

private:
  std::vector<std::string> columns_;
  std::string label_column_;
  std::vector<std::string> labels_;
  std::map<std::string, std::string> meta_;
  std::vector<std::vector<double>> rows_;
};

/// FNV-1a over the canonical config dump; stamped into the CSV metadata.
inline std::string content_hash(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) h = (h ^ c) * 1099511628211ull;
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Companion gnuplot script referencing the CSV columns by name.
inline void write_plot_script(const std::string& path, const std::string& csv_name,
                              const std::string& x_col, const std::vector<std::string>& y_cols,
                              const std::vector<std::string>& columns) {
  auto col_index = [&](const std::string& name) {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return static_cast<int>(i) + 1;
    throw malformed_input("write_plot_script: unknown column " + name);
  };
  std::ofstream f(path);
  if (!f) throw configuration_error("write_plot_script: cannot open " + path);
  f << "set datafile separator ','\n";
  f << "set logscale xy\n";
  f << "set xlabel '" << x_col << "'\n";
  f << "set key left bottom\n";
  f << "plot ";
  for (std::size_t i = 0; i < y_cols.size(); ++i) {
    f << "'" << csv_name << "' using " << col_index(x_col) << ":" << col_index(y_cols[i])
      << " with linespoints title '" << y_cols[i] << "'";
    f << (i + 1 < y_cols.size() ? ", \\\n     " : "\n");
  }
}

}  // namespace pss
