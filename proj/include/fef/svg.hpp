// Minimal SVG output: line plots with axes, and curve snapshots.
#pragma once

#include "fef/curve.hpp"

#include <string>
#include <vector>

namespace fef::svg {

struct Line {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  int width = 640;
  int height = 420;
};

/// Non-finite points, and non-positive ones on log axes, are skipped.
std::string line_plot(const std::vector<Line>& lines, const PlotOptions& options);

struct Snapshot {
  std::string label;
  Curve curve;
};

/// Closed polylines on equal axes.
std::string curve_plot(const std::vector<Snapshot>& curves, const std::string& title, int size = 480);

}  // namespace fef::svg
