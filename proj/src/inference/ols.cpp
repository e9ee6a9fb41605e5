#include "unrestcast/inference/ols.hpp"

#include <fmt/format.h>

namespace unrestcast::inference {

OlsFit ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& response) {
    if (design.rows() != response.size()) {
        throw std::invalid_argument(fmt::format("design has {} rows but response has {}", design.rows(), response.size()));
    }
    if (design.cols() == 0 || design.rows() < design.cols()) throw SingularDesign();

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(kRankTolerance);
    if (qr.rank() < design.cols()) throw SingularDesign();

    OlsFit fit;
    fit.coefficients = qr.solve(response);
    fit.rss = (response - design * fit.coefficients).squaredNorm();
    fit.n = design.rows();
    fit.df_residual = design.rows() - design.cols();
    return fit;
}

}  // namespace unrestcast::inference
