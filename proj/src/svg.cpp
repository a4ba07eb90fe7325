#include "pmelab/svg.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "pmelab/errors.hpp"
#include "pmelab/field_io.hpp"

namespace pmelab {

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

double PlotFrame::px(double x) const { return left + (x - x_lo) / (x_hi - x_lo) * (right - left); }
double PlotFrame::py(double y) const { return bottom - (y - y_lo) / (y_hi - y_lo) * (bottom - top); }

PlotFrame plot_frame(const PlotSpec& spec) {
  if (spec.series.empty()) throw SeriesError("need >= 2 points");
  double xl = INFINITY, xh = -INFINITY, yl = INFINITY, yh = -INFINITY;
  for (const auto& s : spec.series) {
    if (s.x.size() != s.y.size()) throw SeriesError("series '" + s.name + "' has mismatched x and y");
    std::size_t finite = 0;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      ++finite;
      xl = std::min(xl, s.x[i]);
      xh = std::max(xh, s.x[i]);
      yl = std::min(yl, s.y[i]);
      yh = std::max(yh, s.y[i]);
    }
    if (finite < 2) throw SeriesError("need >= 2 points");
  }
  if (spec.reference_y) {
    yl = std::min(yl, *spec.reference_y);
    yh = std::max(yh, *spec.reference_y);
  }
  if (xh == xl) {
    xl -= 0.5;
    xh += 0.5;
  }
  const double pad = yh > yl ? 0.05 * (yh - yl) : std::max(0.5, 0.05 * std::abs(yh));
  return {xl, xh, yl - pad, yh + pad, 70.0, spec.width - 20.0, 40.0, spec.height - 50.0};
}

std::string render_svg(const PlotSpec& spec) {
  const PlotFrame f = plot_frame(spec);
  std::string out;
  out += fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n",
      spec.width, spec.height);
  out += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n", spec.width, spec.height);
  out += fmt::format("<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n", spec.width / 2,
                     escape(spec.title));
  // axes box and ticks
  out += fmt::format(
      "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" stroke=\"black\"/>\n", f.left,
      f.top, f.right - f.left, f.bottom - f.top);
  for (int k = 0; k <= 4; ++k) {
    const double xv = f.x_lo + (f.x_hi - f.x_lo) * k / 4.0;
    const double yv = f.y_lo + (f.y_hi - f.y_lo) * k / 4.0;
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\" font-size=\"11\">{:.4g}</text>\n",
                       f.px(xv), f.bottom + 16, xv);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\" font-size=\"11\">{:.4g}</text>\n",
                       f.left - 4, f.py(yv) + 4, yv);
  }
  out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\" font-size=\"12\">{}</text>\n",
                     0.5 * (f.left + f.right), spec.height - 12, escape(spec.x_label));
  out += fmt::format(
      "<text x=\"16\" y=\"{:.2f}\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 {:.2f})\">{}</text>\n",
      0.5 * (f.top + f.bottom), 0.5 * (f.top + f.bottom), escape(spec.y_label));
  if (spec.reference_y) {
    const double y = f.py(*spec.reference_y);
    out += fmt::format(
        "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n",
        f.left, y, f.right, y);
  }
  std::size_t ci = 0;
  for (const auto& s : spec.series) {
    const char* color = kColors[ci++ % std::size(kColors)];
    std::string d;
    bool pen_down = false;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        pen_down = false;
        continue;
      }
      d += fmt::format("{}{:.2f} {:.2f} ", pen_down ? "L" : "M", f.px(s.x[i]), f.py(s.y[i]));
      pen_down = true;
    }
    if (!d.empty()) d.pop_back();
    out += fmt::format("<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"><title>{}</title></path>\n", d,
                       color, escape(s.name));
  }
  // legend
  double ly = f.top + 14;
  ci = 0;
  for (const auto& s : spec.series) {
    const char* color = kColors[ci++ % std::size(kColors)];
    out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                       f.right - 150, ly - 4, f.right - 130, ly - 4, color);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"11\">{}</text>\n", f.right - 125, ly,
                       escape(s.name));
    ly += 15;
  }
  out += "</svg>\n";
  return out;
}

void write_svg(const std::string& path, const PlotSpec& spec) { write_text_file(path, render_svg(spec)); }

}  // namespace pmelab
