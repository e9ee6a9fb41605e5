#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace unrestcast::inference {

enum class GlmFamily { logistic, poisson };

std::string_view to_string(GlmFamily family);

struct GlmFit {
    GlmFamily family = GlmFamily::logistic;
    /// Intercept first, then one coefficient per selected term.
    Eigen::VectorXd coefficients;
    std::vector<std::string> selected_terms;
    double deviance = 0.0;
    double log_likelihood = 0.0;
    double aic = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// IRLS settings. Convergence uses |dev - dev_old| / (|dev| + 0.1).
struct IrlsOptions {
    double tolerance = 1e-8;
    int max_iterations = 25;
    /// Bound on |linear predictor|. Fits that fail to converge are scaled so
    /// no training row exceeds it.
    double eta_limit = 30.0;
};

/// Maximum-likelihood GLM with canonical link. `predictors` excludes the
/// intercept, which is always added. Column names default to x1..xp.
///
/// A fit whose linear predictor hits the clamp (complete separation, all-zero
/// Poisson groups) or that runs out of iterations is returned with
/// converged = false and its coefficients scaled down so the training linear
/// predictor stays within the clamp. Throws SingularDesign when the initial weighted design is
/// rank deficient and std::invalid_argument for responses outside the family's
/// support.
GlmFit glm_fit(const Eigen::MatrixXd& predictors, std::span<const double> y, GlmFamily family,
               std::vector<std::string> names = {}, const IrlsOptions& options = {});

/// -2 log-likelihood + 2 * number of coefficients.
double aic(const GlmFit& fit);

/// Mean response for new rows whose columns follow fit.selected_terms:
/// probabilities for logistic, expected counts for Poisson.
std::vector<double> glm_predict(const GlmFit& fit, const Eigen::MatrixXd& predictors);

}  // namespace unrestcast::inference
