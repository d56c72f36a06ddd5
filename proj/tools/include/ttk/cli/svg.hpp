#pragma once

#include <optional>
#include <span>
#include <string>

namespace ttk::cli {

struct ScatterSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 480;
  int height = 360;
};

struct LeastSquaresLine {
  double intercept = 0.0;
  double slope = 0.0;
};

/// Fitted line for the scatter, or nullopt when fewer than 3 points or
/// constant x.
std::optional<LeastSquaresLine> fit_line(std::span<const double> x, std::span<const double> y);

/// Static SVG scatter plot with axes, 5 ticks per axis, axis labels, title
/// and the least-squares line. Non-finite points are dropped.
std::string render_scatter(std::span<const double> x, std::span<const double> y, const ScatterSpec& spec);

}  // namespace ttk::cli
