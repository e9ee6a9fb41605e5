#pragma once

// Random problem generators shared by the unit and acceptance suites.

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "unrestcast/inference/glm.hpp"
#include "unrestcast/inference/ols.hpp"

namespace generators {

using unrestcast::inference::GlmFamily;

inline std::vector<std::vector<double>> rows_of(const Eigen::MatrixXd& x) {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (Eigen::Index c = 0; c < x.cols(); ++c) out[static_cast<std::size_t>(r)].push_back(x(r, c));
    }
    return out;
}

/// Gradient of the log-likelihood at the fitted coefficients.
inline Eigen::VectorXd score(const unrestcast::inference::GlmFit& fit, const Eigen::MatrixXd& x,
                             const std::vector<double>& y) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(x.cols() + 1);
    const auto mu = unrestcast::inference::glm_predict(fit, x);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double resid = y[static_cast<std::size_t>(r)] - mu[static_cast<std::size_t>(r)];
        g(0) += resid;
        for (Eigen::Index c = 0; c < x.cols(); ++c) g(c + 1) += resid * x(r, c);
    }
    return g;
}

struct GlmInstance {
    Eigen::MatrixXd x;
    std::vector<double> y;
};

/// A random problem with 12..30 rows and 0..2 predictors whose maximum
/// likelihood estimate exists (no separation, no zero groups).
inline GlmInstance random_glm_instance(std::mt19937_64& rng, GlmFamily family) {
    std::uniform_int_distribution<int> n_dist(12, 30);
    std::uniform_int_distribution<int> p_dist(0, 2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    while (true) {
        const int n = n_dist(rng);
        const int p = p_dist(rng);
        GlmInstance inst{Eigen::MatrixXd(n, p), std::vector<double>(static_cast<std::size_t>(n))};
        std::vector<double> beta{u(rng) * 0.8};
        for (int j = 0; j < p; ++j) beta.push_back(u(rng) * 1.5);
        for (int r = 0; r < n; ++r) {
            double eta = beta[0];
            for (int j = 0; j < p; ++j) {
                inst.x(r, j) = u(rng);
                eta += beta[static_cast<std::size_t>(j + 1)] * inst.x(r, j);
            }
            if (family == GlmFamily::logistic) {
                inst.y[static_cast<std::size_t>(r)] = std::bernoulli_distribution(1.0 / (1.0 + std::exp(-eta)))(rng);
            } else {
                inst.y[static_cast<std::size_t>(r)] = std::poisson_distribution<int>(std::exp(eta + 1.0))(rng);
            }
        }
        try {
            if (unrestcast::inference::glm_fit(inst.x, inst.y, family).converged) return inst;
        } catch (const unrestcast::inference::SingularDesign&) {
        }
    }
}

}  // namespace generators
