#pragma once

// Self-contained SVG log-log plots of study CSV files.

#include <iosfwd>
#include <string>
#include <vector>

namespace hmdd {

struct CsvTable
{
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a named column, or -1.
  int column(const std::string& name) const;
};

CsvTable read_csv(std::istream& is);

struct PlotSeries
{
  std::string label;
  std::vector<double> x, y;
  bool dashed = false;
  /// Annotate the least-squares slope with a triangle ("%.2f").
  bool fit_slope = true;
};

struct PlotSpec
{
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  /// Slopes of reference triangles drawn in the lower right corner.
  std::vector<double> reference_slopes;
};

/// Deterministic SVG text for a log-log plot. Nonpositive and non-finite points are skipped.
std::string render_svg(const PlotSpec& spec);

/// Writes error-vs-h plots (one per error column, one series per (q, tau)), a combined
/// mu plot, and error-vs-tau plots when the CSV holds more than one tau. Returns the files.
std::vector<std::string> emit_plots(const std::string& csv_path, const std::string& out_dir);

} // namespace hmdd
