#pragma once

#include <span>
#include <string>
#include <vector>

namespace unrestcast::cli {

struct SvgSeries {
    std::string name;
    std::string color;
    /// NaN leaves a gap.
    std::vector<double> values;
};

/// Minimal standalone line chart; every series shares the x labels.
std::string line_chart_svg(const std::string& title, const std::vector<std::string>& x_labels,
                           std::span<const SvgSeries> series);

}  // namespace unrestcast::cli
