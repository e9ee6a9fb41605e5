#include "unrestcast/cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace unrestcast::cli {

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

std::string line_chart_svg(const std::string& title, const std::vector<std::string>& x_labels,
                           std::span<const SvgSeries> series) {
    constexpr double kWidth = 900, kHeight = 420, kLeft = 60, kRight = 160, kTop = 40, kBottom = 60;
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;

    double hi = 0.0;
    for (const auto& s : series) {
        for (double v : s.values) {
            if (std::isfinite(v)) hi = std::max(hi, v);
        }
    }
    if (hi <= 0.0) hi = 1.0;
    const std::size_t n = x_labels.size();
    auto x_at = [&](std::size_t k) { return kLeft + (n > 1 ? plot_w * static_cast<double>(k) / (n - 1) : plot_w / 2); };
    auto y_at = [&](double v) { return kTop + plot_h * (1.0 - v / hi); };

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        "<text x=\"{2}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">{3}</text>\n",
        kWidth, kHeight, kLeft, escape(title));
    svg += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", kLeft, kTop,
                       kTop + plot_h);
    svg += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", kLeft, kTop + plot_h,
                       kLeft + plot_w);
    for (int tick = 0; tick <= 4; ++tick) {
        const double v = hi * tick / 4.0;
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"10\" "
                           "text-anchor=\"end\">{:.1f}</text>\n",
                           kLeft - 6, y_at(v) + 3, v);
    }
    const std::size_t step = std::max<std::size_t>(1, n / 8);
    for (std::size_t k = 0; k < n; k += step) {
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"10\" "
                           "text-anchor=\"middle\">{}</text>\n",
                           x_at(k), kTop + plot_h + 16, escape(x_labels[k]));
    }
    for (std::size_t s = 0; s < series.size(); ++s) {
        std::string path;
        bool pen_down = false;
        for (std::size_t k = 0; k < series[s].values.size() && k < n; ++k) {
            const double v = series[s].values[k];
            if (!std::isfinite(v)) {
                pen_down = false;
                continue;
            }
            path += fmt::format("{}{:.2f},{:.2f} ", pen_down ? "L" : "M", x_at(k), y_at(std::min(v, hi)));
            pen_down = true;
        }
        svg += fmt::format("<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n", path,
                           escape(series[s].color));
        const double ly = kTop + 14.0 * static_cast<double>(s);
        svg += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" stroke=\"{3}\" "
                           "stroke-width=\"2\"/>\n",
                           kLeft + plot_w + 12, ly, kLeft + plot_w + 32, escape(series[s].color));
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
                           kLeft + plot_w + 36, ly + 4, escape(series[s].name));
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace unrestcast::cli
