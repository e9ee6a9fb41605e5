#include "unrestcast/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "unrestcast/forest.hpp"
#include "unrestcast/inference/granger.hpp"
#include "unrestcast/inference/ols.hpp"
#include "unrestcast/inference/stepwise.hpp"

namespace unrestcast::harness {

namespace {

std::uint64_t window_seed(std::uint64_t seed, int window) {
    std::uint64_t x = seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(window + 1));
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Lagged design: row r holds predictors at week (first + r - lag).
Eigen::MatrixXd lagged_design(const FeatureFrame& data, const std::vector<std::string>& features, WeekIndex first,
                              WeekIndex last, int lag) {
    const auto rows = static_cast<Eigen::Index>(last - first + 1);
    Eigen::MatrixXd x(rows, static_cast<Eigen::Index>(features.size()));
    for (std::size_t j = 0; j < features.size(); ++j) {
        const auto col = data.predictor(features[j]);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const WeekIndex source = first + static_cast<int>(r) - lag;
            x(r, static_cast<Eigen::Index>(j)) = col[static_cast<std::size_t>(source - data.first_week())];
        }
    }
    return x;
}

std::vector<double> outcome_values(const std::vector<double>& outcome, const FeatureFrame& data, WeekIndex first,
                                   WeekIndex last) {
    const auto lo = static_cast<std::ptrdiff_t>(first - data.first_week());
    const auto hi = static_cast<std::ptrdiff_t>(last - data.first_week()) + 1;
    return {outcome.begin() + lo, outcome.begin() + hi};
}

class WindowModel {
public:
    WindowModel(const ExperimentPlan& plan, const std::vector<double>& outcome) : plan_(plan), outcome_(outcome) {}

    // Returns forecasts for [first, last], or nullopt when the window cannot
    // be fitted.
    std::optional<std::vector<double>> forecast(const FeatureFrame& dataset, const FeatureFrame& window,
                                                int window_index, WeekIndex first, WeekIndex last,
                                                std::vector<std::string>& selected) const {
        const int h = plan_.horizon;
        const WeekIndex train_first = window.first_week() + h;
        const WeekIndex train_last = window.last_week();
        const auto y = outcome_values(outcome_, dataset, train_first, train_last);

        if (plan_.model == Model::glm) {
            selected = select_features_glm(window, h);
            const auto family = plan_.outcome == Outcome::binary ? inference::GlmFamily::logistic
                                                                 : inference::GlmFamily::poisson;
            try {
                const auto fit = inference::stepwise_aic(lagged_design(dataset, selected, train_first, train_last, h),
                                                         y, family, selected);
                auto pred = inference::glm_predict(fit, lagged_design(dataset, fit.selected_terms, first, last, h));
                for (auto& p : pred) p = finish(p);
                return pred;
            } catch (const inference::SingularDesign&) {
                return std::nullopt;
            }
        }

        selected = select_features_rf(window, h);
        if (selected.empty()) return std::nullopt;
        const bool classify = plan_.outcome == Outcome::binary && plan_.rf_binary_mode == RfBinaryMode::classification;
        forest::ForestOptions options;
        options.n_trees = plan_.n_trees;
        options.threads = plan_.forest_threads;
        const auto rf = forest::fit_forest(lagged_design(dataset, selected, train_first, train_last, h), y, selected,
                                           classify ? forest::Task::classification : forest::Task::regression,
                                           window_seed(plan_.seed, window_index), options);
        auto pred = forest::forest_predict(rf, lagged_design(dataset, selected, first, last, h), selected);
        for (auto& p : pred) p = finish(p);
        return pred;
    }

private:
    double finish(double p) const {
        if (plan_.outcome == Outcome::binary) return p > kBinaryCutoff ? 1.0 : 0.0;
        return plan_.round_counts ? std::round(p) : p;
    }

    const ExperimentPlan& plan_;
    const std::vector<double>& outcome_;
};

}  // namespace

std::string_view to_string(Outcome outcome) { return outcome == Outcome::binary ? "binary" : "count"; }

std::string_view to_string(Model model) {
    switch (model) {
        case Model::glm: return "glm";
        case Model::random_forest: return "random_forest";
        case Model::naive: return "naive";
    }
    return "naive";
}

std::string_view to_string(RfBinaryMode mode) {
    return mode == RfBinaryMode::classification ? "classification" : "thresholded_regression";
}

std::optional<Outcome> parse_outcome(std::string_view text) {
    if (text == "binary") return Outcome::binary;
    if (text == "count") return Outcome::count;
    return std::nullopt;
}

std::optional<Model> parse_model(std::string_view text) {
    if (text == "glm") return Model::glm;
    if (text == "random_forest") return Model::random_forest;
    if (text == "naive") return Model::naive;
    return std::nullopt;
}

std::optional<RfBinaryMode> parse_rf_binary_mode(std::string_view text) {
    if (text == "classification") return RfBinaryMode::classification;
    if (text == "thresholded_regression") return RfBinaryMode::thresholded_regression;
    return std::nullopt;
}

WeeklySeries BinarySeries::as_series(std::string region) const {
    return {std::move(region), "high_protest", first_week, values};
}

BinarySeries binarize(const WeeklySeries& target) {
    if (target.values.empty()) throw std::invalid_argument("cannot binarize an empty series");
    BinarySeries out{target.first_week, {}, quantile(target.values, 0.75)};
    out.values.reserve(target.size());
    for (double v : target.values) out.values.push_back(v > out.threshold ? 1.0 : 0.0);
    return out;
}

std::vector<RankedPredictor> rank_predictors(const FeatureFrame& train, int lag) {
    std::vector<RankedPredictor> ranked;
    for (std::size_t k = 0; k < train.n_predictors(); ++k) {
        try {
            const auto r = inference::granger_test(train.target(), train.predictor(k), lag);
            ranked.push_back({train.predictor_names()[k], r.p_value});
        } catch (const inference::SingularDesign&) {
        } catch (const std::invalid_argument&) {
        }
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.p_value != b.p_value ? a.p_value < b.p_value : a.name < b.name;
    });
    return ranked;
}

std::vector<std::string> select_features_glm(const FeatureFrame& train, int lag) {
    const auto ranked = rank_predictors(train, lag);
    std::vector<std::string> out;
    for (std::size_t k = 0; k < ranked.size() && k < static_cast<std::size_t>(kGlmFeatureCount); ++k) {
        out.push_back(ranked[k].name);
    }
    return out;
}

std::vector<std::string> select_features_rf(const FeatureFrame& train, int lag) {
    const auto ranked = rank_predictors(train, lag);
    std::vector<std::string> out;
    for (std::size_t k = 0; k < ranked.size(); ++k) {
        if (ranked[k].p_value < kRfSignificance || k < static_cast<std::size_t>(kRfMinFeatureCount)) {
            out.push_back(ranked[k].name);
        }
    }
    return out;
}

ForecastTrack naive_forecast(const WeeklySeries& target, int horizon, Outcome outcome,
                             std::optional<WeekRange> test_weeks) {
    if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
    WeeklySeries series = target;
    ForecastTrack track;
    track.plan.region = target.region;
    track.plan.horizon = horizon;
    track.plan.outcome = outcome;
    track.plan.model = Model::naive;
    track.binary_threshold = std::numeric_limits<double>::quiet_NaN();
    if (outcome == Outcome::binary) {
        const auto b = binarize(target);
        series.values = b.values;
        track.binary_threshold = b.threshold;
    }
    const WeekRange weeks = test_weeks.value_or(WeekRange{target.first_week + horizon, target.last_week()});
    if (weeks.size() == 0) return track;
    if (weeks.first - horizon < target.first_week || weeks.last > target.last_week()) {
        throw std::invalid_argument("naive forecast needs the target to cover the test weeks and the horizon before them");
    }
    track.plan.test_end = weeks.last;
    track.plan.initial_train_end = weeks.first - 1;
    for (WeekIndex t = weeks.first; t <= weeks.last; t = t + 1) {
        track.entries.push_back({t, series.at(t), series.at(t - horizon), (t - weeks.first) / horizon, false});
    }
    return track;
}

ForecastTrack rolling_forecast(const FeatureFrame& dataset, const ExperimentPlan& plan,
                               const SelectionObserver& observer) {
    const int h = plan.horizon;
    if (h < 1 || h > 3) throw std::invalid_argument("horizon must be 1, 2 or 3");
    if (plan.initial_train_end < dataset.first_week() ||
        static_cast<std::size_t>(plan.initial_train_end - dataset.first_week() + 1) < kMinTrainWeeks) {
        throw std::invalid_argument(fmt::format("training window for {} shorter than {} weeks", dataset.region(),
                                                kMinTrainWeeks));
    }
    if (plan.test_end <= plan.initial_train_end) throw std::invalid_argument("test_end must follow initial_train_end");
    if (plan.test_end > dataset.last_week()) {
        throw std::invalid_argument(fmt::format("dataset for {} ends before the test period", dataset.region()));
    }

    const WeekRange test{plan.initial_train_end + 1, plan.test_end};
    const WeeklySeries counts = dataset.target_series();

    if (plan.model == Model::naive) {
        auto track = naive_forecast(counts, h, plan.outcome, test);
        track.plan = plan;
        return track;
    }

    ForecastTrack track;
    track.plan = plan;
    track.binary_threshold = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> outcome(dataset.target().begin(), dataset.target().end());
    if (plan.outcome == Outcome::binary) {
        const auto b = binarize(counts);
        outcome = b.values;
        track.binary_threshold = b.threshold;
    }
    const auto naive = naive_forecast(counts, h, plan.outcome, test);
    const WindowModel model(plan, outcome);

    const auto length = plan.initial_train_end - dataset.first_week();
    for (int j = 0;; ++j) {
        const WeekRange train{dataset.first_week() + j * h, dataset.first_week() + j * h + length};
        const WeekIndex first = train.last + 1;
        if (first > test.last) break;
        const WeekIndex last = std::min(train.last + h, test.last);

        const FeatureFrame window = dataset.slice(train);
        if (window.last_week() >= first) throw std::logic_error("training window overlaps forecast weeks");
        if (observer) observer(j, window);

        SelectionRecord selection{j, train, {}};
        std::optional<std::vector<double>> pred;
        try {
            pred = model.forecast(dataset, window, j, first, last, selection.features);
        } catch (const std::invalid_argument&) {
            pred.reset();
        }
        track.selections.push_back(selection);
        for (WeekIndex t = first; t <= last; t = t + 1) {
            const auto k = static_cast<std::size_t>(t - test.first);
            ForecastEntry e{t, naive.entries[k].y_true, naive.entries[k].y_pred, j, true};
            if (pred) {
                e.y_pred = (*pred)[static_cast<std::size_t>(t - first)];
                e.fallback = false;
            }
            track.entries.push_back(e);
        }
    }
    return track;
}

}  // namespace unrestcast::harness
