#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace bayes_epi {

/// Six significant digits, "." decimal; NaN prints as NA.
std::string format_value(double v);

/// In-memory CSV: every cell is already a formatted string, so tables and the
/// figure files derived from them carry identical text.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::size_t column(const std::string& name) const;
  std::vector<double> numeric_column(const std::string& name) const;
  std::string to_string() const;
  void write(const std::filesystem::path& path) const;
};

enum class PlotKind { kBoxplot, kScatter, kLine, kBar };

/// Columns of the figure CSV used by the renderer. For boxplots `x` names the
/// grouping column; `series` (optional) splits lines or colours points.
struct PlotSpec {
  PlotKind kind = PlotKind::kScatter;
  std::string title;
  std::string x;
  std::string y;
  std::string series;
  std::string x_label;
  std::string y_label;
  bool diagonal = false;  // draw y = x (ROC, calibration)
};

std::string render_svg(const CsvTable& data, const PlotSpec& spec);

/// Writes `<dir>/<name>.csv` and `<dir>/<name>.svg`.
void write_figure(const std::filesystem::path& dir, const std::string& name, const CsvTable& data,
                  const PlotSpec& spec);

}  // namespace bayes_epi
