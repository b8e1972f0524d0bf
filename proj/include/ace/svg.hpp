#pragma once

#include <string>
#include <vector>

namespace ace {

/// One plotted line with an optional confidence band (lo/hi may be empty).
struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> lo;
    std::vector<double> hi;
};

/// Self-contained SVG line chart with CI bands, axes, ticks and a legend.
void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<SvgSeries>& series);

}  // namespace ace
