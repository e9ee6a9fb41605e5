#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "unrestcast/harness.hpp"
#include "unrestcast/ingest.hpp"

namespace unrestcast::cli {

/// Invalid or unreadable configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DataPaths {
    std::filesystem::path events;
    std::filesystem::path policy;
    std::filesystem::path trends;
    std::filesystem::path groupings;
    std::filesystem::path regions;
};

struct RunConfig {
    DataPaths data;
    /// Empty selects every region in the regions file.
    std::vector<std::string> regions;
    std::vector<int> horizons{1, 2, 3};
    std::vector<harness::Outcome> outcomes{harness::Outcome::binary, harness::Outcome::count};
    std::vector<harness::Model> models{harness::Model::glm, harness::Model::random_forest};
    std::optional<ingest::StudyWindow> window;
    Date initial_train_end{std::chrono::year{2020} / 10 / 31};
    Date test_end{std::chrono::year{2021} / 7 / 31};
    std::uint64_t seed = 20211016;
    std::filesystem::path output_dir = "unrestcast_out";
    bool round_counts = false;
    harness::RfBinaryMode rf_binary_mode = harness::RfBinaryMode::classification;
    int n_trees = 500;
    /// Plan-level worker threads; 0 uses every hardware thread.
    unsigned workers = 0;
    bool svg = false;
};

/// Flag values that take precedence over the config file.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::vector<std::string>> regions;
    std::optional<std::vector<int>> horizons;
    bool svg = false;
    bool round_counts = false;
    /// Value of UNRESTCAST_OUT, when set.
    std::optional<std::string> output_dir;
};

/// Parses a JSON config. Relative paths resolve against `base_dir`.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);
void apply_overrides(RunConfig& config, const Overrides& overrides);
void validate(const RunConfig& config);

/// Every knob that shapes results, for the run-metadata sidecar.
nlohmann::json describe(const RunConfig& config);

}  // namespace unrestcast::cli
