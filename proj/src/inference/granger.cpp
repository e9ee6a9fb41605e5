#include "unrestcast/inference/granger.hpp"

#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "unrestcast/inference/f_distribution.hpp"
#include "unrestcast/inference/ols.hpp"

namespace unrestcast::inference {

namespace {

// Residual sums below this fraction of the centred total count as exact fits.
constexpr double kExactFit = 1e-12;

}  // namespace

GrangerResult granger_test(std::span<const double> y, std::span<const double> x, int order) {
    if (order < 1) throw std::invalid_argument("Granger lag order must be at least 1");
    if (y.size() != x.size()) throw std::invalid_argument("Granger series must be aligned");
    const auto n = static_cast<Eigen::Index>(y.size());
    const Eigen::Index rows = n - order;
    const Eigen::Index df_u = rows - (1 + 2 * order);
    if (df_u < 1) {
        throw std::invalid_argument(fmt::format("series of length {} too short for lag order {}", n, order));
    }

    Eigen::MatrixXd restricted(rows, 1 + order);
    Eigen::MatrixXd unrestricted(rows, 1 + 2 * order);
    Eigen::VectorXd response(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Eigen::Index t = r + order;
        response(r) = y[static_cast<std::size_t>(t)];
        restricted(r, 0) = 1.0;
        unrestricted(r, 0) = 1.0;
        for (int k = 1; k <= order; ++k) {
            const double y_lag = y[static_cast<std::size_t>(t - k)];
            restricted(r, k) = y_lag;
            unrestricted(r, k) = y_lag;
            unrestricted(r, order + k) = x[static_cast<std::size_t>(t - k)];
        }
    }

    const OlsFit fit_r = ols_fit(restricted, response);
    const OlsFit fit_u = ols_fit(unrestricted, response);

    GrangerResult out;
    out.lag_order = order;
    out.df1 = order;
    out.df2 = static_cast<int>(df_u);

    const double tss = (response.array() - response.mean()).square().sum();
    const double floor = kExactFit * tss;
    if (fit_u.rss <= floor) {
        out.degenerate = true;
        if (fit_r.rss <= floor) {
            out.f_stat = 0.0;
            out.p_value = 1.0;
        } else {
            out.f_stat = std::numeric_limits<double>::infinity();
            out.p_value = 0.0;
        }
        return out;
    }
    const double gain = std::max(fit_r.rss - fit_u.rss, 0.0);
    out.f_stat = (gain / order) / (fit_u.rss / static_cast<double>(df_u));
    out.p_value = f_sf(out.f_stat, order, static_cast<double>(df_u));
    return out;
}

}  // namespace unrestcast::inference
