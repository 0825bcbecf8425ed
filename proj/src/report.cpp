#include "bayes_epi/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "bayes_epi/error.hpp"
#include "bayes_epi/kernels.hpp"

namespace bayes_epi {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string quote_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

bool parse_number(const std::string& s, double& v) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  return ec == std::errc() && ptr == end;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  void finish() {
    if (!(lo <= hi)) lo = 0.0, hi = 1.0;
    if (lo == hi) lo -= 0.5, hi += 0.5;
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

class Canvas {
 public:
  Canvas(const PlotSpec& spec, Range xr, Range yr) : spec_(spec), xr_(xr), yr_(yr) {
    os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
        << escape_xml(spec.title) << "</text>\n";
  }

  double px(double x) const { return kLeft + (x - xr_.lo) / (xr_.hi - xr_.lo) * plot_w(); }
  double py(double y) const { return kTop + (yr_.hi - y) / (yr_.hi - yr_.lo) * plot_h(); }
  static double plot_w() { return kWidth - kLeft - kRight; }
  static double plot_h() { return kHeight - kTop - kBottom; }

  void axes(bool numeric_x) {
    os_ << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w()
        << "\" height=\"" << plot_h() << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
      const double yv = yr_.lo + (yr_.hi - yr_.lo) * k / 4.0;
      text(kLeft - 6, py(yv) + 4, format_value(yv), "end");
      if (numeric_x) {
        const double xv = xr_.lo + (xr_.hi - xr_.lo) * k / 4.0;
        text(px(xv), kHeight - kBottom + 16, format_value(xv), "middle");
      }
    }
    text(kLeft + plot_w() / 2, kHeight - 12, spec_.x_label.empty() ? spec_.x : spec_.x_label,
         "middle");
    os_ << "<text transform=\"translate(16," << kTop + plot_h() / 2
        << ") rotate(-90)\" text-anchor=\"middle\">"
        << escape_xml(spec_.y_label.empty() ? spec_.y : spec_.y_label) << "</text>\n";
    if (spec_.diagonal) {
      const double a = std::max(xr_.lo, yr_.lo), b = std::min(xr_.hi, yr_.hi);
      if (a < b) line(px(a), py(a), px(b), py(b), "#999999", true);
    }
  }

  void text(double x, double y, const std::string& s, const char* anchor) {
    os_ << "<text x=\"" << x << "\" y=\"" << y << "\" text-anchor=\"" << anchor << "\">"
        << escape_xml(s) << "</text>\n";
  }
  void line(double x1, double y1, double x2, double y2, const std::string& colour, bool dashed) {
    os_ << "<line x1=\"" << x1 << "\" y1=\"" << y1 << "\" x2=\"" << x2 << "\" y2=\"" << y2
        << "\" stroke=\"" << colour << "\"" << (dashed ? " stroke-dasharray=\"4,3\"" : "")
        << "/>\n";
  }
  void circle(double x, double y, const std::string& colour) {
    os_ << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"3\" fill=\"" << colour << "\"/>\n";
  }
  void rect(double x, double y, double w, double h, const std::string& colour) {
    os_ << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w << "\" height=\"" << h
        << "\" fill=\"" << colour << "\" fill-opacity=\"0.35\" stroke=\"" << colour << "\"/>\n";
  }
  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& colour) {
    os_ << "<polyline fill=\"none\" stroke=\"" << colour << "\" points=\"";
    for (const auto& [x, y] : pts) os_ << px(x) << ',' << py(y) << ' ';
    os_ << "\"/>\n";
  }
  void legend(const std::vector<std::string>& names) {
    for (std::size_t k = 0; k < names.size(); ++k) {
      const double y = kTop + 14 + 14.0 * static_cast<double>(k);
      rect(kWidth - kRight - 120, y - 8, 10, 10, kPalette[k % 8]);
      text(kWidth - kRight - 105, y + 1, names[k], "start");
    }
  }

  std::string finish() {
    os_ << "</svg>\n";
    return os_.str();
  }

 private:
  const PlotSpec& spec_;
  Range xr_, yr_;
  std::ostringstream os_;
};

std::vector<std::string> groups_in_order(const std::vector<std::string>& col) {
  std::vector<std::string> out;
  for (const auto& g : col) {
    if (std::find(out.begin(), out.end(), g) == out.end()) out.push_back(g);
  }
  return out;
}

std::vector<std::string> text_column(const CsvTable& t, const std::string& name) {
  const std::size_t j = t.column(name);
  std::vector<std::string> out;
  for (const auto& r : t.rows) out.push_back(r[j]);
  return out;
}

std::string gradient(double t) {
  const int r = static_cast<int>(std::lround(40 + 200 * t));
  const int b = static_cast<int>(std::lround(220 - 200 * t));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x40%02x", r, b);
  return buf;
}

std::string render_boxplot(const CsvTable& data, const PlotSpec& spec) {
  const auto groups = text_column(data, spec.x);
  const auto ys = data.numeric_column(spec.y);
  const auto names = groups_in_order(groups);
  Range yr;
  for (double v : ys) yr.add(v);
  yr.finish();
  Range xr{0.0, static_cast<double>(names.size())};
  Canvas c(spec, xr, yr);
  c.axes(false);
  for (std::size_t g = 0; g < names.size(); ++g) {
    std::vector<double> v;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      if (groups[i] == names[g] && std::isfinite(ys[i])) v.push_back(ys[i]);
    }
    const double centre = c.px(static_cast<double>(g) + 0.5);
    c.text(centre, kHeight - kBottom + 16, names[g], "middle");
    if (v.empty()) continue;
    std::sort(v.begin(), v.end());
    const double q1 = kernels::sorted_quantile(v, 0.25);
    const double med = kernels::sorted_quantile(v, 0.5);
    const double q3 = kernels::sorted_quantile(v, 0.75);
    const double half = 0.25 * Canvas::plot_w() / static_cast<double>(names.size());
    const std::string col = kPalette[g % 8];
    c.line(centre, c.py(v.front()), centre, c.py(q1), col, false);
    c.line(centre, c.py(q3), centre, c.py(v.back()), col, false);
    c.rect(centre - half, c.py(q3), 2 * half, std::max(c.py(q1) - c.py(q3), 0.5), col);
    c.line(centre - half, c.py(med), centre + half, c.py(med), "black", false);
  }
  return c.finish();
}

std::string render_xy(const CsvTable& data, const PlotSpec& spec) {
  const auto xs = data.numeric_column(spec.x);
  const auto ys = data.numeric_column(spec.y);
  Range xr, yr;
  for (double v : xs) xr.add(v);
  for (double v : ys) yr.add(v);
  if (spec.diagonal) {
    xr.add(0.0), xr.add(1.0), yr.add(0.0), yr.add(1.0);
  }
  xr.finish();
  yr.finish();
  Canvas c(spec, xr, yr);
  c.axes(true);

  std::vector<std::string> series(xs.size());
  std::vector<double> shade;
  bool numeric_series = false;
  if (!spec.series.empty()) {
    series = text_column(data, spec.series);
    numeric_series = spec.kind == PlotKind::kScatter;
    for (const auto& s : series) {
      double v;
      numeric_series = numeric_series && parse_number(s, v);
      shade.push_back(numeric_series ? v : 0.0);
    }
  }
  const auto names = groups_in_order(series);
  auto colour_of = [&](std::size_t i) -> std::string {
    if (numeric_series) {
      const auto [lo, hi] = std::minmax_element(shade.begin(), shade.end());
      return gradient(*hi > *lo ? (shade[i] - *lo) / (*hi - *lo) : 0.5);
    }
    const auto k = static_cast<std::size_t>(std::find(names.begin(), names.end(), series[i]) - names.begin());
    return kPalette[k % 8];
  };

  if (spec.kind == PlotKind::kLine) {
    for (std::size_t k = 0; k < names.size(); ++k) {
      std::vector<std::pair<double, double>> pts;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (series[i] == names[k] && std::isfinite(xs[i]) && std::isfinite(ys[i])) {
          pts.emplace_back(xs[i], ys[i]);
        }
      }
      c.polyline(pts, kPalette[k % 8]);
    }
  } else if (spec.kind == PlotKind::kBar) {
    const double w = 0.8 * Canvas::plot_w() / std::max<double>(1.0, static_cast<double>(xs.size()));
    const double base = c.py(std::clamp(0.0, yr.lo, yr.hi));
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) continue;
      const double top = c.py(ys[i]);
      c.rect(c.px(xs[i]) - w / 2, std::min(top, base), w, std::fabs(base - top), colour_of(i));
    }
  } else {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (std::isfinite(xs[i]) && std::isfinite(ys[i])) c.circle(c.px(xs[i]), c.py(ys[i]), colour_of(i));
    }
  }
  if (!numeric_series && names.size() > 1) c.legend(names);
  return c.finish();
}

}  // namespace

std::string format_value(double v) {
  if (std::isnan(v)) return "NA";
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "CSV row width differs from header");
  }
  rows.push_back(std::move(row));
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw Error(ErrorCode::kInvalidConfig, "no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const {
  const std::size_t j = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    double v;
    out.push_back(parse_number(r[j], v) ? v : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

std::string CsvTable::to_string() const {
  std::string out;
  auto emit = [&](const std::vector<std::string>& r) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) out += ',';
      out += quote_cell(r[j]);
    }
    out += '\n';
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kInvalidConfig, "cannot write " + path.string());
  f << to_string();
}

std::string render_svg(const CsvTable& data, const PlotSpec& spec) {
  return spec.kind == PlotKind::kBoxplot ? render_boxplot(data, spec) : render_xy(data, spec);
}

void write_figure(const std::filesystem::path& dir, const std::string& name, const CsvTable& data,
                  const PlotSpec& spec) {
  data.write(dir / (name + ".csv"));
  std::ofstream f(dir / (name + ".svg"), std::ios::binary);
  if (!f) throw Error(ErrorCode::kInvalidConfig, "cannot write " + (dir / name).string());
  f << render_svg(data, spec);
}

}  // namespace bayes_epi
