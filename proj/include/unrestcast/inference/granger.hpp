#pragma once

#include <span>

namespace unrestcast::inference {

struct GrangerResult {
    int lag_order = 0;
    double f_stat = 0.0;
    double p_value = 1.0;
    int df1 = 0;
    int df2 = 0;
    /// The unrestricted model fits exactly; p is reported as 0 (or 1 when the
    /// autoregression alone is already exact).
    bool degenerate = false;
};

/// Nested-F test of whether `order` lags of x improve an intercept plus
/// `order`-lag autoregression of y. Throws SingularDesign for collinear
/// designs and std::invalid_argument when fewer than one residual degree of
/// freedom remains.
GrangerResult granger_test(std::span<const double> y, std::span<const double> x, int order);

}  // namespace unrestcast::inference
