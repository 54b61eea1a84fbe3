#pragma once

// Minimal polyline plots with axes and ticks, written as standalone SVG.

#include <string>
#include <vector>

namespace softwrist {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  int width = 720;
  int height = 420;
  // Longer series are thinned per pixel column (min and max kept).
  int max_points = 4000;
};

std::string render_svg(const PlotSpec& spec);
void write_svg(const PlotSpec& spec, const std::string& path);

// Round-numbered tick positions inside [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int target_count = 6);

}  // namespace softwrist
