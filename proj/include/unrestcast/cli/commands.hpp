#pragma once

#include <ostream>
#include <string_view>

#include "unrestcast/cli/config.hpp"

namespace unrestcast::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitInput = 2;

/// Parses the raw streams and writes datasets/<region>.csv plus
/// datasets/manifest.json under the output directory.
int cmd_ingest(const RunConfig& config, std::ostream& log);

/// Full-period Granger tests at lags 1-4: granger.csv (every test) and
/// granger_min_p.csv (each predictor's minimum-p lag with significance).
int cmd_explore(const RunConfig& config, std::ostream& log);

/// Runs every (region, horizon, outcome, model) plan plus naive baselines:
/// forecasts.csv, selection.csv and run_metadata.json. Plans fail
/// independently; any failure gives exit code 1.
int cmd_forecast(const RunConfig& config, std::ostream& log);

/// Scores forecasts.csv into metrics.csv, plus plots/*.svg with config.svg.
int cmd_report(const RunConfig& config, std::ostream& log);

/// Dispatches by subcommand name and maps input errors to exit code 2.
int run_command(std::string_view name, const RunConfig& config, std::ostream& log);

}  // namespace unrestcast::cli
