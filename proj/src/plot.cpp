#include "cdrflow/plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace cdrflow::plot {

namespace {

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_svg(const Figure& fig, int width, int height) {
    constexpr double left = 70, right = 20, top = 40, bottom = 50;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& t : fig.traces) {
        for (std::size_t i = 0; i < t.x.size() && i < t.y.size(); ++i) {
            if (!std::isfinite(t.x[i]) || !std::isfinite(t.y[i])) continue;
            xmin = std::min(xmin, t.x[i]);
            xmax = std::max(xmax, t.x[i]);
            ymin = std::min(ymin, t.y[i]);
            ymax = std::max(ymax, t.y[i]);
        }
    }
    if (!std::isfinite(xmin)) {
        xmin = 0; xmax = 1; ymin = 0; ymax = 1;
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    const double pw = width - left - right;
    const double ph = height - top - bottom;
    const auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    const auto sy = [&](double y) { return top + ph - (y - ymin) / (ymax - ymin) * ph; };

    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
        "viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"12\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        width, height, width, height);
    out += fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                       width / 2, escape(fig.title));
    out += fmt::format(
        "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" "
        "stroke=\"#444\"/>\n",
        left, top, pw, ph);
    for (int i = 0; i <= 4; ++i) {
        const double yv = ymin + (ymax - ymin) * i / 4.0;
        const double xv = xmin + (xmax - xmin) * i / 4.0;
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.4g}</text>\n",
                           left - 6, sy(yv) + 4, yv);
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.4g}</text>\n",
                           sx(xv), top + ph + 18, xv);
    }
    out += fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                       left + pw / 2, height - 8, escape(fig.x_label));
    out += fmt::format(
        "<text x=\"16\" y=\"{:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1f})\">{}"
        "</text>\n",
        top + ph / 2, top + ph / 2, escape(fig.y_label));

    double legend_y = top + 14;
    for (const auto& t : fig.traces) {
        if (t.scatter) {
            for (std::size_t i = 0; i < t.x.size() && i < t.y.size(); ++i) {
                if (!std::isfinite(t.y[i])) continue;
                out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3.5\" fill=\"{}\"/>\n",
                                   sx(t.x[i]), sy(t.y[i]), t.color);
            }
        } else {
            std::string points;
            for (std::size_t i = 0; i < t.x.size() && i < t.y.size(); ++i) {
                if (!std::isfinite(t.y[i])) continue;
                points += fmt::format("{:.2f},{:.2f} ", sx(t.x[i]), sy(t.y[i]));
            }
            out += fmt::format(
                "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                t.color, points);
        }
        if (!t.label.empty()) {
            out += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n",
                               left + pw - 150, legend_y - 9, t.color);
            out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n", left + pw - 135,
                               legend_y, escape(t.label));
            legend_y += 16;
        }
    }
    out += "</svg>\n";
    return out;
}

}  // namespace cdrflow::plot
