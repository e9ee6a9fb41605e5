#include "unrestcast/inference/stepwise.hpp"

#include <optional>
#include <stdexcept>

#include "unrestcast/inference/ols.hpp"

namespace unrestcast::inference {

namespace {

class SubsetFitter {
public:
    SubsetFitter(const Eigen::MatrixXd& candidates, std::span<const double> y, GlmFamily family,
                 const std::vector<std::string>& names)
        : candidates_(candidates), y_(y), family_(family), names_(names) {}

    std::optional<GlmFit> fit(const std::vector<bool>& members) const {
        std::vector<Eigen::Index> cols;
        std::vector<std::string> names;
        for (std::size_t j = 0; j < members.size(); ++j) {
            if (!members[j]) continue;
            cols.push_back(static_cast<Eigen::Index>(j));
            names.push_back(names_[j]);
        }
        try {
            return glm_fit(candidates_(Eigen::all, cols), y_, family_, std::move(names));
        } catch (const SingularDesign&) {
            return std::nullopt;
        }
    }

    // Leading columns that keep [1, X_S] at full rank.
    std::vector<bool> independent_prefix() const {
        std::vector<bool> members(names_.size(), false);
        Eigen::MatrixXd design = Eigen::MatrixXd::Ones(candidates_.rows(), 1);
        for (std::size_t j = 0; j < names_.size(); ++j) {
            Eigen::MatrixXd trial(design.rows(), design.cols() + 1);
            trial << design, candidates_.col(static_cast<Eigen::Index>(j));
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(trial);
            qr.setThreshold(kRankTolerance);
            if (trial.rows() >= trial.cols() && qr.rank() == trial.cols()) {
                design = std::move(trial);
                members[j] = true;
            }
        }
        return members;
    }

private:
    const Eigen::MatrixXd& candidates_;
    std::span<const double> y_;
    GlmFamily family_;
    const std::vector<std::string>& names_;
};

}  // namespace

GlmFit stepwise_aic(const Eigen::MatrixXd& candidates, std::span<const double> y, GlmFamily family,
                    const std::vector<std::string>& names) {
    if (static_cast<Eigen::Index>(names.size()) != candidates.cols()) {
        throw std::invalid_argument("one name per candidate column required");
    }
    const GlmFit null_fit = glm_fit(Eigen::MatrixXd(candidates.rows(), 0), y, family);
    if (candidates.cols() == 0) return null_fit;

    const SubsetFitter fitter(candidates, y, family, names);
    std::vector<bool> members(names.size(), true);
    std::optional<GlmFit> current = fitter.fit(members);
    if (!current) {
        members = fitter.independent_prefix();
        current = fitter.fit(members);
    }
    if (!current) return null_fit;

    const std::size_t max_steps = 4 * names.size() + 4;
    for (std::size_t step = 0; step < max_steps; ++step) {
        std::optional<GlmFit> best;
        std::size_t best_move = 0;
        for (std::size_t j = 0; j < names.size(); ++j) {
            std::vector<bool> trial = members;
            trial[j] = !trial[j];
            auto candidate = fitter.fit(trial);
            if (candidate && candidate->aic < (best ? best->aic : current->aic)) {
                best = std::move(candidate);
                best_move = j;
            }
        }
        if (!best) break;
        members[best_move] = !members[best_move];
        current = std::move(best);
    }
    return null_fit.aic < current->aic ? null_fit : *current;
}

}  // namespace unrestcast::inference
