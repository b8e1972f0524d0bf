#include "ace/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ace/errors.hpp"
#include "ace/strings.hpp"

namespace ace {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;

const char* kPalette[] = {"#1f6fb2", "#d0592c", "#3a8f5d", "#8c5fa8", "#b0a32e"};

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
}

std::string tick_label(double v) {
    std::ostringstream ss;
    ss.precision(4);
    ss << v;
    return ss.str();
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace

void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<SvgSeries>& series) {
    if (series.empty()) throw ValidationError("no series to plot");

    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -xmin;
    double ymin = xmin;
    double ymax = -xmin;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size() || s.x.empty())
            throw ValidationError("series '" + s.label + "' has inconsistent lengths");
        bool banded = !s.lo.empty();
        if (banded && (s.lo.size() != s.x.size() || s.hi.size() != s.x.size()))
            throw ValidationError("series '" + s.label + "' band lengths differ");
        for (size_t i = 0; i < s.x.size(); ++i) {
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            double lo = banded ? s.lo[i] : s.y[i];
            double hi = banded ? s.hi[i] : s.y[i];
            ymin = std::min(ymin, lo);
            ymax = std::max(ymax, hi);
        }
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) {
        ymax += 0.5;
        ymin -= 0.5;
    }
    double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * plot_w; };
    auto py = [&](double y) { return kTop + (1.0 - (y - ymin) / (ymax - ymin)) * plot_h; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight
        << "\">\n";
    svg << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << escape_xml(title)
        << "</text>\n";

    const int ticks = 5;
    for (int t = 0; t <= ticks; ++t) {
        double fx = xmin + (xmax - xmin) * t / ticks;
        double fy = ymin + (ymax - ymin) * t / ticks;
        svg << "<line x1=\"" << fmt(px(fx)) << "\" y1=\"" << fmt(kTop) << "\" x2=\""
            << fmt(px(fx)) << "\" y2=\"" << fmt(kTop + plot_h)
            << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(py(fy)) << "\" x2=\""
            << fmt(kLeft + plot_w) << "\" y2=\"" << fmt(py(fy))
            << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg << "<text x=\"" << fmt(px(fx)) << "\" y=\"" << fmt(kTop + plot_h + 18)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << tick_label(fx) << "</text>\n";
        svg << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(py(fy) + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << tick_label(fy) << "</text>\n";
    }

    svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w
        << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#444444\"/>\n";
    svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 14
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << escape_xml(x_label) << "</text>\n";
    svg << "<text x=\"18\" y=\"" << kTop + plot_h / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 18 " << kTop + plot_h / 2 << ")\">"
        << escape_xml(y_label) << "</text>\n";

    for (size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
        if (!s.lo.empty()) {
            svg << "<polygon fill=\"" << color << "\" fill-opacity=\"0.18\" "
                << "stroke=\"none\" points=\"";
            for (size_t i = 0; i < s.x.size(); ++i)
                svg << fmt(px(s.x[i])) << "," << fmt(py(s.hi[i])) << " ";
            for (size_t i = s.x.size(); i-- > 0;)
                svg << fmt(px(s.x[i])) << "," << fmt(py(s.lo[i])) << " ";
            svg << "\"/>\n";
        }
        svg << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"2\" points=\"";
        for (size_t i = 0; i < s.x.size(); ++i)
            svg << fmt(px(s.x[i])) << "," << fmt(py(s.y[i])) << " ";
        svg << "\"/>\n";

        double ly = kTop + 16 + 18 * static_cast<double>(si);
        svg << "<line x1=\"" << kLeft + plot_w - 120 << "\" y1=\"" << ly << "\" x2=\""
            << kLeft + plot_w - 96 << "\" y2=\"" << ly << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << kLeft + plot_w - 90 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape_xml(s.label)
            << "</text>\n";
    }
    svg << "</svg>\n";

    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << svg.str();
    if (!out.good()) throw Error("write failed for " + path);
}

}  // namespace ace
