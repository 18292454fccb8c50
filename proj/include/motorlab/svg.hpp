#pragma once

#include <string>
#include <vector>

namespace motorlab::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
    bool markers = false;
};

struct Bar {
    std::string label;
    double value = 0.0;
};

/// One set of axes: line series, or a bar chart when `bars` is nonempty.
struct Panel {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    std::vector<Bar> bars;
    bool log_x = false;
    bool log_y = false;
};

struct Figure {
    std::string title;
    std::vector<std::string> legend;  ///< metadata lines, e.g. sigma and N
    std::vector<Panel> panels;
    int columns = 1;
    bool timestamp = true;
};

/// Standalone SVG document. Non-finite points break a polyline; points outside a log axis are dropped.
std::string render(const Figure& figure);

}  // namespace motorlab::svg
