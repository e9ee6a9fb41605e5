#pragma once

#include <cstddef>
#include <stdexcept>

#include <Eigen/Dense>

namespace unrestcast::inference {

/// Raised when a design matrix does not have full column rank.
class SingularDesign : public std::runtime_error {
public:
    SingularDesign() : std::runtime_error("singular design") {}
};

struct OlsFit {
    Eigen::VectorXd coefficients;
    double rss = 0.0;
    std::ptrdiff_t df_residual = 0;
    std::ptrdiff_t n = 0;
};

/// Least squares by column-pivoted Householder QR. `design` carries its own
/// intercept column when one is wanted.
OlsFit ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& response);

/// Relative pivot threshold below which a design is treated as rank deficient.
inline constexpr double kRankTolerance = 1e-10;

}  // namespace unrestcast::inference
