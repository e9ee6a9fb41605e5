#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "unrestcast/timeseries.hpp"

namespace unrestcast::harness {

enum class Outcome { binary, count };
enum class Model { glm, random_forest, naive };
/// How the random forest produces a binary forecast.
enum class RfBinaryMode { classification, thresholded_regression };

std::string_view to_string(Outcome outcome);
std::string_view to_string(Model model);
std::string_view to_string(RfBinaryMode mode);
std::optional<Outcome> parse_outcome(std::string_view text);
std::optional<Model> parse_model(std::string_view text);
std::optional<RfBinaryMode> parse_rf_binary_mode(std::string_view text);

inline constexpr int kGlmFeatureCount = 8;
inline constexpr int kRfMinFeatureCount = 9;
inline constexpr double kRfSignificance = 0.05;
inline constexpr double kBinaryCutoff = 0.5;
inline constexpr std::size_t kMinTrainWeeks = 20;

/// High-protest indicator: 1 where the count exceeds the third quartile of
/// the whole series.
struct BinarySeries {
    WeekIndex first_week;
    std::vector<double> values;
    double threshold = 0.0;

    WeeklySeries as_series(std::string region) const;
};

BinarySeries binarize(const WeeklySeries& target);

struct ExperimentPlan {
    std::string region;
    int horizon = 1;
    Outcome outcome = Outcome::count;
    Model model = Model::naive;
    WeekIndex initial_train_end;
    WeekIndex test_end;
    std::uint64_t seed = 0;
    bool round_counts = false;
    RfBinaryMode rf_binary_mode = RfBinaryMode::classification;
    int n_trees = 500;
    unsigned forest_threads = 1;
};

struct ForecastEntry {
    WeekIndex week;
    double y_true = 0.0;
    double y_pred = 0.0;
    int window_index = 0;
    /// The window could not be fitted and the naive forecast stands in.
    bool fallback = false;
};

struct SelectionRecord {
    int window_index = 0;
    WeekRange train_weeks;
    std::vector<std::string> features;
};

struct ForecastTrack {
    ExperimentPlan plan;
    std::vector<ForecastEntry> entries;
    std::vector<SelectionRecord> selections;
    /// Q3 cutoff behind binary truth; NaN for count tracks.
    double binary_threshold = 0.0;
};

struct RankedPredictor {
    std::string name;
    double p_value = 1.0;
};

/// Granger p-value of every predictor against the target at `lag`, ascending
/// by p then name. Predictors whose test cannot be computed are omitted.
std::vector<RankedPredictor> rank_predictors(const FeatureFrame& train, int lag);

/// The eight lowest-p predictors. Empty means intercept-only.
std::vector<std::string> select_features_glm(const FeatureFrame& train, int lag);

/// All predictors with p < 0.05, or the nine lowest-p ones when fewer qualify.
std::vector<std::string> select_features_rf(const FeatureFrame& train, int lag);

/// Observes each window's feature-selection input.
using SelectionObserver = std::function<void(int window_index, const FeatureFrame& selection_input)>;

/// Rolling-origin forecast. Window j trains on
/// [first_week + j*h, initial_train_end + j*h] with predictors lagged h weeks
/// and forecasts the following h weeks, until test_end is covered.
ForecastTrack rolling_forecast(const FeatureFrame& dataset, const ExperimentPlan& plan,
                               const SelectionObserver& observer = {});

/// F_t = Y_{t-h}, on the binarized target for binary outcomes. Covers
/// `test_weeks` when given, otherwise every week with a value h weeks earlier.
ForecastTrack naive_forecast(const WeeklySeries& target, int horizon, Outcome outcome,
                             std::optional<WeekRange> test_weeks = std::nullopt);

}  // namespace unrestcast::harness
