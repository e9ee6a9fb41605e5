#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "unrestcast/harness.hpp"
#include "unrestcast/timeseries.hpp"

namespace unrestcast::cli {

/// File-name-safe form of a region id.
std::string file_stem(const std::string& region);

/// `week_start,protests,<predictors...>`, one row per week.
void write_dataset(std::ostream& out, const FeatureFrame& frame);
FeatureFrame read_dataset(std::istream& in, const std::string& source, const std::string& region);

/// forecasts.csv:
/// `region,horizon,outcome,model,week_start,y_true,y_pred,window_index,fallback_flag`
void write_forecasts(std::ostream& out, std::span<const harness::ForecastTrack> tracks);
/// Regroups rows into tracks in order of first appearance.
std::vector<harness::ForecastTrack> read_forecasts(std::istream& in, const std::string& source);

/// `region,horizon,outcome,model,window_index,selected_features` with features
/// separated by ';'.
void write_selection_log(std::ostream& out, std::span<const harness::ForecastTrack> tracks);

}  // namespace unrestcast::cli
