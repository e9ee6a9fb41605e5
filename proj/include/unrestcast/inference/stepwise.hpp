#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "unrestcast/inference/glm.hpp"

namespace unrestcast::inference {

/// Bidirectional stepwise AIC search starting from the full candidate model.
/// Each step applies the single add or drop with the lowest AIC and stops
/// once no move lowers it. Singular subsets are never fitted: a rank-deficient
/// full model starts from its leading independent columns instead. The result
/// is never worse than the intercept-only model.
GlmFit stepwise_aic(const Eigen::MatrixXd& candidates, std::span<const double> y, GlmFamily family,
                    const std::vector<std::string>& names);

}  // namespace unrestcast::inference
