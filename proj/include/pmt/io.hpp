#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pmt/grid.hpp"

namespace pmt {

/// Node field file: a text header ending in `end_header\n`, then raw little-endian values,
/// x fastest. Layout in docs/formats.md.
struct FieldHeader {
  int version = 1;
  std::string name;
  std::string units;
  std::string dtype;  // "f64" or "u8"
  int n = 0;
  double h = 0.0;
  double L_box = 0.0;
};

struct FieldFile {
  FieldHeader header;
  std::vector<double> values;  // u8 data is widened
};

void write_field(const std::string& path, const std::string& name, const std::string& units, const GridSpec& spec,
                 const Field& values);
void write_mask(const std::string& path, const std::string& name, const GridSpec& spec, const Mask& mask);
/// Throws std::runtime_error on a malformed or truncated file.
FieldFile read_field(const std::string& path);

/// Comma-separated table. Column names carry units in brackets, e.g. `m_adm [L]`. Cells never
/// contain commas or newlines (write_csv replaces them).
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 if absent
};

void write_csv(std::ostream& out, const CsvTable& table);
CsvTable read_csv(std::istream& in);

/// Shortest round-trip decimal form, "nan" for NaN.
std::string format_number(double v);
std::optional<double> parse_number(const std::string& s);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotLine {
  // y = exp(intercept) x^slope on log-log axes, or y = intercept + slope x on linear axes
  double slope = 0.0;
  double intercept = 0.0;
  std::optional<double> band_lo_slope;  // confidence band drawn between the two slopes
  std::optional<double> band_hi_slope;
  double pivot_x = 1.0;  // band lines pass through the fit at this x
  std::string label;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = true;
  bool log_y = true;
  std::vector<PlotSeries> series;
  std::vector<PlotLine> lines;
};

/// Self-contained SVG: axes, markers, fit lines and the plotted data as a table below the chart.
/// Points that cannot be shown on a log axis (<= 0) are listed in the table and counted in a note.
void write_svg(std::ostream& out, const Plot& plot);

}  // namespace pmt
