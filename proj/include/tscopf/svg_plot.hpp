#pragma once

#include <string>
#include <vector>

namespace tscopf {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  int width = 800;
  int height = 480;
};

/// Line chart as a standalone SVG document. The output depends only on the
/// input, so repeated runs produce identical files.
std::string render_svg(const PlotSpec& spec);

}  // namespace tscopf
