#pragma once
// Minimal SVG rendering: line/scatter series on labeled axes, and square
// heatmaps. CSV stays the authoritative output; these are quick-look views.

#include <string>
#include <vector>

namespace dsbm {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    bool points = true;
    bool line = true;
};

struct LinePlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;

    std::string render(int width = 640, int height = 440) const;
};

struct HeatMap {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<double> x_ticks;       // column coordinates, ascending
    std::vector<double> y_ticks;       // row coordinates, ascending
    std::vector<std::vector<double>> values;  // [row][col], NaN cells skipped

    std::string render(int width = 560, int height = 480) const;
};

void write_text_file(const std::string& path, const std::string& content);

}  // namespace dsbm
