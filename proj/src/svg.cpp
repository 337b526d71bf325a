#include "dsbm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dsbm {

namespace {

constexpr int kMarginLeft = 64;
constexpr int kMarginRight = 16;
constexpr int kMarginTop = 32;
constexpr int kMarginBottom = 48;

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
}

void axis_range(const std::vector<double>& values, double& lo, double& hi) {
    lo = 1e300;
    hi = -1e300;
    for (double v : values) {
        if (!std::isfinite(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo > hi) {
        lo = 0.0;
        hi = 1.0;
    }
    if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    }
    double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
}

// Piecewise-linear dark-blue -> teal -> yellow map on [0,1].
std::string colormap(double u) {
    u = std::clamp(u, 0.0, 1.0);
    struct Stop { double u; int r, g, b; };
    static const Stop stops[] = {
        {0.0, 68, 1, 84}, {0.33, 49, 104, 142}, {0.66, 53, 183, 121}, {1.0, 253, 231, 37}};
    const Stop* lo = &stops[0];
    const Stop* hi = &stops[3];
    for (int i = 0; i < 3; ++i)
        if (u >= stops[i].u && u <= stops[i + 1].u) {
            lo = &stops[i];
            hi = &stops[i + 1];
            break;
        }
    double w = (u - lo->u) / (hi->u - lo->u);
    auto mix = [w](int a, int b) { return static_cast<int>(std::lround(a + w * (b - a))); };
    std::ostringstream ss;
    ss << "rgb(" << mix(lo->r, hi->r) << ',' << mix(lo->g, hi->g) << ',' << mix(lo->b, hi->b)
       << ')';
    return ss.str();
}

void open_svg(std::ostringstream& ss, int width, int height, const std::string& title) {
    ss << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
       << title << "</text>\n";
}

void draw_axes(std::ostringstream& ss, int width, int height, const std::string& x_label,
               const std::string& y_label, double x_lo, double x_hi, double y_lo, double y_hi) {
    int x0 = kMarginLeft, x1 = width - kMarginRight;
    int y0 = height - kMarginBottom, y1 = kMarginTop;
    ss << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0
       << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
       << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        double fx = x_lo + (x_hi - x_lo) * i / 4.0;
        double fy = y_lo + (y_hi - y_lo) * i / 4.0;
        int px = x0 + (x1 - x0) * i / 4;
        int py = y0 - (y0 - y1) * i / 4;
        ss << "<text x=\"" << px << "\" y=\"" << y0 + 16
           << "\" text-anchor=\"middle\" font-size=\"10\">" << fmt(fx) << "</text>\n"
           << "<text x=\"" << x0 - 6 << "\" y=\"" << py + 3
           << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(fy) << "</text>\n";
    }
    ss << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << height - 10
       << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n"
       << "<text x=\"14\" y=\"" << (y0 + y1) / 2
       << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 "
       << (y0 + y1) / 2 << ")\">" << y_label << "</text>\n";
}

}  // namespace

std::string LinePlot::render(int width, int height) const {
    std::vector<double> all_x, all_y;
    for (const auto& s : series) {
        all_x.insert(all_x.end(), s.x.begin(), s.x.end());
        all_y.insert(all_y.end(), s.y.begin(), s.y.end());
    }
    double x_lo, x_hi, y_lo, y_hi;
    axis_range(all_x, x_lo, x_hi);
    axis_range(all_y, y_lo, y_hi);

    int x0 = kMarginLeft, x1 = width - kMarginRight;
    int y0 = height - kMarginBottom, y1 = kMarginTop;
    auto sx = [&](double v) { return x0 + (v - x_lo) / (x_hi - x_lo) * (x1 - x0); };
    auto sy = [&](double v) { return y0 - (v - y_lo) / (y_hi - y_lo) * (y0 - y1); };

    std::ostringstream ss;
    open_svg(ss, width, height, title);
    draw_axes(ss, width, height, x_label, y_label, x_lo, x_hi, y_lo, y_hi);
    int legend_y = kMarginTop + 6;
    for (const auto& s : series) {
        if (s.line && s.x.size() > 1) {
            ss << "<polyline fill=\"none\" stroke=\"" << s.color << "\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.y[i])) continue;
                ss << fmt(sx(s.x[i])) << ',' << fmt(sy(s.y[i])) << ' ';
            }
            ss << "\"/>\n";
        }
        if (s.points) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.y[i])) continue;
                ss << "<circle cx=\"" << fmt(sx(s.x[i])) << "\" cy=\"" << fmt(sy(s.y[i]))
                   << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
            }
        }
        if (!s.label.empty()) {
            ss << "<rect x=\"" << x1 - 130 << "\" y=\"" << legend_y - 8
               << "\" width=\"10\" height=\"10\" fill=\"" << s.color << "\"/>\n"
               << "<text x=\"" << x1 - 116 << "\" y=\"" << legend_y + 1
               << "\" font-size=\"10\">" << s.label << "</text>\n";
            legend_y += 14;
        }
    }
    ss << "</svg>\n";
    return ss.str();
}

std::string HeatMap::render(int width, int height) const {
    if (values.empty() || x_ticks.empty() || y_ticks.empty())
        throw std::invalid_argument("heatmap needs ticks and values");
    std::size_t rows = y_ticks.size(), cols = x_ticks.size();

    double v_lo = 1e300, v_hi = -1e300;
    for (const auto& row : values)
        for (double v : row) {
            if (!std::isfinite(v)) continue;
            v_lo = std::min(v_lo, v);
            v_hi = std::max(v_hi, v);
        }
    if (v_lo > v_hi) {
        v_lo = 0.0;
        v_hi = 1.0;
    }
    if (v_hi - v_lo < 1e-12) v_hi = v_lo + 1.0;

    int x0 = kMarginLeft, x1 = width - kMarginRight - 56;  // room for the color bar
    int y0 = height - kMarginBottom, y1 = kMarginTop;
    double cell_w = static_cast<double>(x1 - x0) / cols;
    double cell_h = static_cast<double>(y0 - y1) / rows;

    std::ostringstream ss;
    open_svg(ss, width, height, title);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            double v = values[r][c];
            if (!std::isfinite(v)) continue;
            double u = (v - v_lo) / (v_hi - v_lo);
            // row 0 at the bottom
            double px = x0 + c * cell_w;
            double py = y0 - (r + 1) * cell_h;
            ss << "<rect x=\"" << fmt(px) << "\" y=\"" << fmt(py) << "\" width=\""
               << fmt(cell_w + 0.5) << "\" height=\"" << fmt(cell_h + 0.5) << "\" fill=\""
               << colormap(u) << "\"/>\n";
        }
    }
    // Tick labels at the extremes.
    ss << "<text x=\"" << x0 << "\" y=\"" << y0 + 16 << "\" font-size=\"10\">"
       << fmt(x_ticks.front()) << "</text>\n"
       << "<text x=\"" << x1 << "\" y=\"" << y0 + 16
       << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(x_ticks.back()) << "</text>\n"
       << "<text x=\"" << x0 - 6 << "\" y=\"" << y0 << "\" text-anchor=\"end\" font-size=\"10\">"
       << fmt(y_ticks.front()) << "</text>\n"
       << "<text x=\"" << x0 - 6 << "\" y=\"" << y1 + 8
       << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(y_ticks.back()) << "</text>\n"
       << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << height - 10
       << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n"
       << "<text x=\"14\" y=\"" << (y0 + y1) / 2
       << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 " << (y0 + y1) / 2
       << ")\">" << y_label << "</text>\n";
    // Color bar.
    int bar_x = width - kMarginRight - 40;
    for (int i = 0; i < 64; ++i) {
        double u = 1.0 - i / 63.0;
        double py = y1 + (y0 - y1) * i / 64.0;
        ss << "<rect x=\"" << bar_x << "\" y=\"" << fmt(py) << "\" width=\"14\" height=\""
           << fmt((y0 - y1) / 64.0 + 0.5) << "\" fill=\"" << colormap(u) << "\"/>\n";
    }
    ss << "<text x=\"" << bar_x + 18 << "\" y=\"" << y1 + 8 << "\" font-size=\"10\">" << fmt(v_hi)
       << "</text>\n"
       << "<text x=\"" << bar_x + 18 << "\" y=\"" << y0 << "\" font-size=\"10\">" << fmt(v_lo)
       << "</text>\n";
    ss << "</svg>\n";
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << content;
}

}  // namespace dsbm
