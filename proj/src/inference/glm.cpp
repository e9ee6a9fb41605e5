#include "unrestcast/inference/glm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "unrestcast/inference/ols.hpp"

namespace unrestcast::inference {

namespace {

void check_response(std::span<const double> y, GlmFamily family) {
    for (double v : y) {
        if (family == GlmFamily::logistic && v != 0.0 && v != 1.0) {
            throw std::invalid_argument(fmt::format("logistic response must be 0 or 1, got {}", v));
        }
        if (family == GlmFamily::poisson && !(v >= 0.0 && v == std::floor(v))) {
            throw std::invalid_argument(fmt::format("Poisson response must be a non-negative integer, got {}", v));
        }
    }
}

double inverse_link(GlmFamily family, double eta) {
    return family == GlmFamily::logistic ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta);
}

// log(1 + e^eta) without overflow.
double softplus(double eta) { return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

double log_likelihood(GlmFamily family, const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (family == GlmFamily::logistic) {
            ll += y(i) * eta(i) - softplus(eta(i));
        } else {
            ll += y(i) * eta(i) - std::exp(eta(i)) - std::lgamma(y(i) + 1.0);
        }
    }
    return ll;
}

double deviance(GlmFamily family, const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
    if (family == GlmFamily::logistic) return -2.0 * log_likelihood(family, y, eta);
    double dev = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double mu = std::exp(eta(i));
        if (y(i) > 0.0) dev += y(i) * (std::log(y(i)) - eta(i));
        dev -= y(i) - mu;
    }
    return 2.0 * dev;
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& predictors) {
    Eigen::MatrixXd design(predictors.rows(), predictors.cols() + 1);
    design.col(0).setOnes();
    design.rightCols(predictors.cols()) = predictors;
    return design;
}

}  // namespace

std::string_view to_string(GlmFamily family) { return family == GlmFamily::logistic ? "logistic" : "poisson"; }

GlmFit glm_fit(const Eigen::MatrixXd& predictors, std::span<const double> y_in, GlmFamily family,
               std::vector<std::string> names, const IrlsOptions& options) {
    if (predictors.rows() != static_cast<Eigen::Index>(y_in.size())) {
        throw std::invalid_argument("predictor rows and response length differ");
    }
    if (names.empty()) {
        for (Eigen::Index j = 0; j < predictors.cols(); ++j) names.push_back(fmt::format("x{}", j + 1));
    }
    if (static_cast<Eigen::Index>(names.size()) != predictors.cols()) {
        throw std::invalid_argument("one name per predictor column required");
    }
    check_response(y_in, family);

    const Eigen::MatrixXd design = with_intercept(predictors);
    const Eigen::Map<const Eigen::VectorXd> y(y_in.data(), static_cast<Eigen::Index>(y_in.size()));
    if (design.rows() < design.cols()) throw SingularDesign();

    const double limit = options.eta_limit;
    auto clamp = [limit](Eigen::VectorXd eta) { return eta.cwiseMax(-limit).cwiseMin(limit).eval(); };

    Eigen::VectorXd mu(y.size());
    Eigen::VectorXd eta(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (family == GlmFamily::logistic) {
            mu(i) = (y(i) + 0.5) / 2.0;
            eta(i) = std::log(mu(i) / (1.0 - mu(i)));
        } else {
            mu(i) = y(i) + 0.1;
            eta(i) = std::log(mu(i));
        }
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(design.cols());
    double dev_old = deviance(family, y, eta);
    bool settled = false;
    int iter = 0;
    for (iter = 1; iter <= options.max_iterations; ++iter) {
        Eigen::VectorXd w(y.size());
        Eigen::VectorXd z(y.size());
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double variance = family == GlmFamily::logistic ? mu(i) * (1.0 - mu(i)) : mu(i);
            w(i) = std::sqrt(variance);
            z(i) = eta(i) + (y(i) - mu(i)) / variance;
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(w.asDiagonal() * design);
        qr.setThreshold(kRankTolerance);
        if (qr.rank() < design.cols()) {
            if (iter == 1) throw SingularDesign();
            break;
        }
        beta = qr.solve((w.array() * z.array()).matrix());
        eta = clamp(design * beta);
        for (Eigen::Index i = 0; i < y.size(); ++i) mu(i) = inverse_link(family, eta(i));
        const double dev = deviance(family, y, eta);
        if (std::fabs(dev - dev_old) / (std::fabs(dev) + 0.1) < options.tolerance) {
            settled = true;
            break;
        }
        dev_old = dev;
    }

    GlmFit fit;
    fit.family = family;
    fit.iterations = std::min(iter, options.max_iterations);
    const bool hit_limit = ((design * beta).array().abs() >= limit).any();
    fit.converged = settled && !hit_limit;
    if (!fit.converged) {
        // Shrink toward zero until no training row passes the clamp; the
        // direction (and so any separating hyperplane) is kept.
        const double largest = (design * beta).cwiseAbs().maxCoeff();
        if (largest > limit) beta *= limit / largest;
    }
    fit.coefficients = beta;
    fit.selected_terms = std::move(names);

    const Eigen::VectorXd final_eta = clamp(design * beta);
    fit.log_likelihood = log_likelihood(family, y, final_eta);
    fit.deviance = deviance(family, y, final_eta);
    fit.aic = aic(fit);
    return fit;
}

double aic(const GlmFit& fit) {
    return -2.0 * fit.log_likelihood + 2.0 * static_cast<double>(fit.coefficients.size());
}

std::vector<double> glm_predict(const GlmFit& fit, const Eigen::MatrixXd& predictors) {
    if (predictors.cols() != static_cast<Eigen::Index>(fit.selected_terms.size()) ||
        fit.coefficients.size() != predictors.cols() + 1) {
        throw std::invalid_argument(fmt::format("expected {} predictor columns, got {}", fit.selected_terms.size(),
                                                predictors.cols()));
    }
    std::vector<double> out(static_cast<std::size_t>(predictors.rows()));
    for (Eigen::Index r = 0; r < predictors.rows(); ++r) {
        double eta = fit.coefficients(0);
        for (Eigen::Index j = 0; j < predictors.cols(); ++j) eta += fit.coefficients(j + 1) * predictors(r, j);
        eta = std::clamp(eta, -IrlsOptions{}.eta_limit, IrlsOptions{}.eta_limit);
        out[static_cast<std::size_t>(r)] = inverse_link(fit.family, eta);
    }
    return out;
}

}  // namespace unrestcast::inference
