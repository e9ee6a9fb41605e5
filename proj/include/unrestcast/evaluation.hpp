#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "unrestcast/harness.hpp"
#include "unrestcast/timeseries.hpp"

namespace unrestcast::evaluation {

/// Undefined rates (no positives or no negatives in truth) are nullopt.
struct BinaryMetrics {
    std::optional<double> tpr;
    std::optional<double> tnr;
    std::optional<double> bac;
    int tp = 0;
    int fp = 0;
    int tn = 0;
    int fn = 0;
};

struct CountMetrics {
    std::optional<double> r2_shift0;
    std::optional<double> r2_shift1;
    std::optional<double> r2_shift2;
    std::optional<double> mase;
    double mae = 0.0;
    double naive_mae = 0.0;
};

BinaryMetrics confusion_rates(const harness::ForecastTrack& track);

/// Squared Pearson correlation between F_t and Y_{t-shift} over the track's
/// weeks. Undefined with fewer than 3 pairs or a constant side.
std::optional<double> pearson_r2(const harness::ForecastTrack& track, int shift);

/// Mean absolute error of the track divided by that of the naive track over
/// the same weeks. Undefined when the naive error is 0.
std::optional<double> mase(const harness::ForecastTrack& track, const harness::ForecastTrack& naive);

/// Same, with the naive h-step reference rebuilt from `truth`.
std::optional<double> mase(const harness::ForecastTrack& track, const WeeklySeries& truth, int horizon);

CountMetrics count_metrics(const harness::ForecastTrack& track, const harness::ForecastTrack& naive);

struct ReportRow {
    std::string region;
    int horizon = 0;
    harness::Outcome outcome = harness::Outcome::count;
    harness::Model model = harness::Model::naive;
    std::string metric;
    std::optional<double> value;
};

/// Metric rows for every track: tpr/tnr/bac for binary tracks,
/// r2_s0/r2_s1/r2_s2/mase for count tracks. Every (region, horizon, outcome)
/// needs a naive track over the identical weeks. Rows are ordered by region,
/// outcome, horizon, model, metric.
std::vector<ReportRow> build_report(std::span<const harness::ForecastTrack> tracks);

}  // namespace unrestcast::evaluation
