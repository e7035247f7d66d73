#pragma once

#include <string>
#include <vector>

/// Minimal self-contained SVG line/scatter charts for the CLI's --svg flag.
namespace cdrflow::plot {

struct Trace {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    bool scatter = false;
};

struct Figure {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Trace> traces;
};

[[nodiscard]] std::string render_svg(const Figure& figure, int width = 900, int height = 420);

}  // namespace cdrflow::plot
