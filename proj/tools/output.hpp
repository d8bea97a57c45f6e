#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace stosym::cli {

/// %.17g, so every double round-trips.
std::string format_double(double v);

/// Comma-separated table with a header row; cells are preformatted strings.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add_row(std::vector<std::string> cells);
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

void write_text(const std::filesystem::path& path, const std::string& content);
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_axes = false;  // base-2 logarithms on both axes
};

/// Standalone SVG 1.1 line chart: axes, ticks, one polyline per series, legend.
std::string render_svg(const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace stosym::cli
