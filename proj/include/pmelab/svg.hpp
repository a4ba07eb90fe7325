#pragma once

#include <optional>
#include <string>
#include <vector>

namespace pmelab {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  std::optional<double> reference_y;  ///< dashed horizontal guide
  double width = 640;
  double height = 400;
};

/// Axis-to-pixel mapping used by the renderer (exposed for tests).
struct PlotFrame {
  double x_lo, x_hi, y_lo, y_hi;
  double left, right, top, bottom;
  double px(double x) const;
  double py(double y) const;
};

PlotFrame plot_frame(const PlotSpec& spec);
/// Throws SeriesError "need >= 2 points" for short or empty series.
std::string render_svg(const PlotSpec& spec);
void write_svg(const std::string& path, const PlotSpec& spec);

}  // namespace pmelab
