#include "pmt/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace pmt {

static_assert(std::endian::native == std::endian::little, "field files are written little-endian");

namespace {

void write_header(std::ostream& out, const FieldHeader& hd) {
  out << "PMTFIELD " << hd.version << "\n"
      << "name = " << hd.name << "\n"
      << "units = " << hd.units << "\n"
      << "dtype = " << hd.dtype << "\n"
      << "n = " << hd.n << "\n"
      << "h = " << format_number(hd.h) << "\n"
      << "L_box = " << format_number(hd.L_box) << "\n"
      << "order = x-fastest\n"
      << "endian = little\n"
      << "end_header\n";
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

std::string xml_escape(const std::string& s) {
  std::string r;
  for (char c : s) {
    switch (c) {
      case '<': r += "&lt;"; break;
      case '>': r += "&gt;"; break;
      case '&': r += "&amp;"; break;
      case '"': r += "&quot;"; break;
      default: r += c;
    }
  }
  return r;
}

std::string short_number(double v) {
  std::ostringstream s;
  s << std::setprecision(4) << v;
  return s.str();
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::optional<double> parse_number(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) return std::nullopt;
  return v;
}

void write_field(const std::string& path, const std::string& name, const std::string& units, const GridSpec& spec,
                 const Field& values) {
  if (values.size() != spec.size()) throw std::invalid_argument("write_field: size does not match grid");
  std::ofstream out = open_out(path);
  write_header(out, {1, name, units, "f64", spec.n(), spec.h(), spec.half_extent()});
  out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_mask(const std::string& path, const std::string& name, const GridSpec& spec, const Mask& mask) {
  if (mask.size() != spec.size()) throw std::invalid_argument("write_mask: size does not match grid");
  std::ofstream out = open_out(path);
  write_header(out, {1, name, "1", "u8", spec.n(), spec.h(), spec.half_extent()});
  out.write(reinterpret_cast<const char*>(mask.data()), static_cast<std::streamsize>(mask.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

FieldFile read_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  auto fail = [&](const std::string& why) { throw std::runtime_error(path + ": " + why); };
  std::string line;
  if (!std::getline(in, line) || line.rfind("PMTFIELD ", 0) != 0) fail("missing PMTFIELD magic");
  FieldFile f;
  f.header.version = std::stoi(line.substr(9));
  if (f.header.version != 1) fail("unsupported version " + line.substr(9));
  std::map<std::string, std::string> kv;
  bool ended = false;
  while (std::getline(in, line)) {
    if (line == "end_header") {
      ended = true;
      break;
    }
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) fail("malformed header line `" + line + "`");
    kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  if (!ended) fail("header not terminated");
  for (const char* k : {"name", "units", "dtype", "n", "h", "L_box", "order", "endian"})
    if (!kv.count(k)) fail(std::string("header lacks ") + k);
  if (kv["order"] != "x-fastest" || kv["endian"] != "little") fail("unsupported layout");
  f.header.name = kv["name"];
  f.header.units = kv["units"];
  f.header.dtype = kv["dtype"];
  f.header.n = std::stoi(kv["n"]);
  f.header.h = parse_number(kv["h"]).value_or(0.0);
  f.header.L_box = parse_number(kv["L_box"]).value_or(0.0);
  if (f.header.n < 2) fail("bad n");
  const std::size_t count = static_cast<std::size_t>(f.header.n) * f.header.n * f.header.n;
  f.values.resize(count);
  if (f.header.dtype == "f64") {
    in.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(count * sizeof(double)));
  } else if (f.header.dtype == "u8") {
    std::vector<std::uint8_t> raw(count);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count));
    std::copy(raw.begin(), raw.end(), f.values.begin());
  } else {
    fail("unknown dtype " + f.header.dtype);
  }
  if (!in) fail("truncated data");
  return f;
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

void write_csv(std::ostream& out, const CsvTable& table) {
  auto cell = [](std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
  };
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << cell(table.columns[i]);
  out << "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) throw std::invalid_argument("write_csv: ragged row");
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << cell(row[i]);
    out << "\n";
  }
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(s);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty input");
  t.columns = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split(line);
    if (row.size() != t.columns.size()) throw std::runtime_error("csv: row has " + std::to_string(row.size()) +
                                                                 " cells, header has " +
                                                                 std::to_string(t.columns.size()));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_svg(std::ostream& out, const Plot& plot) {
  const double W = 640, H = 400, left = 80, right = 20, top = 40, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;
  auto tx = [&](double v) { return plot.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return plot.log_y ? std::log10(v) : v; };
  auto shown = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!plot.log_x || x > 0.0) && (!plot.log_y || y > 0.0);
  };

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  std::size_t hidden = 0;
  for (const auto& s : plot.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!shown(s.x[i], s.y[i])) {
        ++hidden;
        continue;
      }
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  const bool empty = !(x0 <= x1);
  if (empty) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  auto pad = [](double& lo, double& hi) {
    const double span = hi - lo;
    const double p = span > 0.0 ? 0.08 * span : std::max(0.5, 0.1 * std::abs(lo));
    lo -= p;
    hi += p;
  };
  pad(x0, x1);
  pad(y0, y1);
  auto px = [&](double v) { return left + (v - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return top + ph - (v - y0) / (y1 - y0) * ph; };

  std::size_t table_rows = 0;
  for (const auto& s : plot.series) table_rows += s.x.size();
  const double table_h = 30 + 16.0 * static_cast<double>(table_rows + plot.lines.size());
  const double total_h = H + table_h;

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  out << std::setprecision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << total_h << "\" viewBox=\"0 0 "
      << W << " " << total_h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<title>" << xml_escape(plot.title) << "</title>\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << total_h << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(plot.title)
      << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  // ticks: five evenly spaced positions in the (possibly log) axis coordinate
  for (int i = 0; i <= 4; ++i) {
    const double vx = x0 + (x1 - x0) * i / 4.0, vy = y0 + (y1 - y0) * i / 4.0;
    const double lx = plot.log_x ? std::pow(10.0, vx) : vx, ly = plot.log_y ? std::pow(10.0, vy) : vy;
    out << "<line x1=\"" << px(vx) << "\" y1=\"" << top + ph << "\" x2=\"" << px(vx) << "\" y2=\"" << top + ph + 5
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << px(vx) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << short_number(lx)
        << "</text>\n";
    out << "<line x1=\"" << left - 5 << "\" y1=\"" << py(vy) << "\" x2=\"" << left << "\" y2=\"" << py(vy)
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << left - 8 << "\" y=\"" << py(vy) + 4 << "\" text-anchor=\"end\">" << short_number(ly)
        << "</text>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">"
      << xml_escape(plot.x_label + (plot.log_x ? " (log)" : "")) << "</text>\n";
  out << "<text x=\"16\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << top + ph / 2 << ")\">" << xml_escape(plot.y_label + (plot.log_y ? " (log)" : "")) << "</text>\n";

  out << "<clipPath id=\"chart\"><rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\""
      << ph << "\"/></clipPath>\n<g clip-path=\"url(#chart)\">\n";
  for (const auto& ln : plot.lines) {
    auto fit = [&](double axis_x) {  // axis coordinate in, axis coordinate out
      if (plot.log_x && plot.log_y) return (ln.intercept + ln.slope * axis_x * std::log(10.0)) / std::log(10.0);
      return ln.intercept + ln.slope * axis_x;
    };
    if (ln.band_lo_slope && ln.band_hi_slope && plot.log_x && plot.log_y) {
      const double pv = std::log10(ln.pivot_x), fy = fit(pv);
      auto band = [&](double s, double axis_x) { return fy + s * (axis_x - pv); };
      out << "<polygon fill=\"#999\" fill-opacity=\"0.25\" stroke=\"none\" points=\"";
      out << px(x0) << "," << py(band(*ln.band_lo_slope, x0)) << " " << px(x1) << "," << py(band(*ln.band_lo_slope, x1))
          << " " << px(x1) << "," << py(band(*ln.band_hi_slope, x1)) << " " << px(x0) << ","
          << py(band(*ln.band_hi_slope, x0)) << "\"/>\n";
    }
    out << "<line x1=\"" << px(x0) << "\" y1=\"" << py(fit(x0)) << "\" x2=\"" << px(x1) << "\" y2=\"" << py(fit(x1))
        << "\" stroke=\"#444\" stroke-dasharray=\"6 4\"/>\n";
  }
  for (std::size_t si = 0; si < plot.series.size(); ++si) {
    const auto& s = plot.series[si];
    const char* col = colors[si % 6];
    std::string path;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!shown(s.x[i], s.y[i])) continue;
      const double cx = px(tx(s.x[i])), cy = py(ty(s.y[i]));
      path += (path.empty() ? "M" : " L") + short_number(cx) + " " + short_number(cy);
      out << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"4\" fill=\"" << col << "\"/>\n";
    }
    if (!path.empty()) out << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << col << "\"/>\n";
  }
  out << "</g>\n";

  // legend
  double ly = top + 16;
  for (std::size_t si = 0; si < plot.series.size(); ++si) {
    out << "<circle cx=\"" << left + 12 << "\" cy=\"" << ly - 4 << "\" r=\"4\" fill=\"" << colors[si % 6] << "\"/>\n";
    out << "<text x=\"" << left + 22 << "\" y=\"" << ly << "\">" << xml_escape(plot.series[si].label) << "</text>\n";
    ly += 16;
  }
  for (const auto& ln : plot.lines) {
    out << "<text x=\"" << left + 22 << "\" y=\"" << ly << "\">" << xml_escape(ln.label) << "</text>\n";
    ly += 16;
  }
  if (empty) out << "<text x=\"" << left + pw / 2 << "\" y=\"" << top + ph / 2
                 << "\" text-anchor=\"middle\">no points on these axes</text>\n";

  // data table
  double row_y = H + 10;
  out << "<text x=\"" << left << "\" y=\"" << row_y << "\" font-weight=\"bold\">data (series, x, y)";
  if (hidden) out << "; " << hidden << " point(s) not drawn: nonpositive on a log axis";
  out << "</text>\n";
  row_y += 18;
  for (const auto& s : plot.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out << "<text x=\"" << left << "\" y=\"" << row_y << "\" font-family=\"monospace\">" << xml_escape(s.label)
          << ", " << format_number(s.x[i]) << ", " << format_number(s.y[i]) << "</text>\n";
      row_y += 16;
    }
  for (const auto& ln : plot.lines) {
    out << "<text x=\"" << left << "\" y=\"" << row_y << "\" font-family=\"monospace\">fit: slope "
        << format_number(ln.slope) << ", intercept " << format_number(ln.intercept);
    if (ln.band_lo_slope && ln.band_hi_slope)
      out << ", 95% slope band [" << format_number(*ln.band_lo_slope) << ", " << format_number(*ln.band_hi_slope)
          << "]";
    out << "</text>\n";
    row_y += 16;
  }
  out << "</svg>\n";
}

}  // namespace pmt
