#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "unrestcast/cli/commands.hpp"

namespace {

std::vector<std::string> split(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace unrestcast::cli;

    CLI::App app{"unrestcast: weekly protest forecasting from event, policy and search-trend streams"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::uint64_t seed = 0;
    std::string regions;
    std::string horizons;
    bool svg = false;
    bool round_counts = false;

    const std::pair<const char*, const char*> commands[] = {
        {"ingest", "parse raw inputs into one weekly dataset per region"},
        {"explore", "Granger tests of every predictor at lags 1-4"},
        {"forecast", "rolling-origin forecasts for every region, horizon, outcome and model"},
        {"report", "metrics table and optional plots from forecasts.csv"},
    };
    for (const auto& [name, about] : commands) {
        auto* sub = app.add_subcommand(name, about);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--seed", seed, "master random seed");
        sub->add_option("--regions", regions, "comma-separated region ids");
        sub->add_option("--horizons", horizons, "comma-separated horizons from 1,2,3");
        sub->add_flag("--svg", svg, "write SVG forecast plots (report)");
        sub->add_flag("--round-counts", round_counts, "round count forecasts to integers");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitInput;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    const auto* sub = app.get_subcommands().front();
    try {
        RunConfig config = load_config(config_path);
        Overrides o;
        if (sub->count("--seed")) o.seed = seed;
        if (sub->count("--regions")) o.regions = split(regions);
        if (sub->count("--horizons")) {
            std::vector<int> hs;
            for (const auto& h : split(horizons)) hs.push_back(std::stoi(h));
            o.horizons = hs;
        }
        o.svg = svg;
        o.round_counts = round_counts;
        if (const char* env = std::getenv("UNRESTCAST_OUT")) o.output_dir = env;
        apply_overrides(config, o);
        return run_command(command, config, std::cerr);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
}
