#include "unrestcast/cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <fmt/format.h>

namespace unrestcast::cli {

namespace {

Date date_field(const nlohmann::json& j, const char* key) {
    const auto text = j.at(key).get<std::string>();
    auto d = parse_date(text);
    if (!d) throw ConfigError(fmt::format("config: '{}' is not an ISO date: {}", key, text));
    return *d;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

}  // namespace

RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
    RunConfig c;
    try {
        const auto& data = doc.at("data");
        c.data.events = resolve(base_dir, data.at("events").get<std::string>());
        c.data.policy = resolve(base_dir, data.at("policy").get<std::string>());
        c.data.trends = resolve(base_dir, data.at("trends").get<std::string>());
        c.data.groupings = resolve(base_dir, data.at("groupings").get<std::string>());
        c.data.regions = resolve(base_dir, data.at("regions").get<std::string>());

        if (doc.contains("regions")) c.regions = doc["regions"].get<std::vector<std::string>>();
        if (doc.contains("horizons")) c.horizons = doc["horizons"].get<std::vector<int>>();
        if (doc.contains("outcomes")) {
            c.outcomes.clear();
            for (const auto& o : doc["outcomes"]) {
                auto v = harness::parse_outcome(o.get<std::string>());
                if (!v) throw ConfigError(fmt::format("config: unknown outcome {}", o.dump()));
                c.outcomes.push_back(*v);
            }
        }
        if (doc.contains("models")) {
            c.models.clear();
            for (const auto& m : doc["models"]) {
                auto v = harness::parse_model(m.get<std::string>());
                if (!v || *v == harness::Model::naive) {
                    throw ConfigError(fmt::format("config: unknown model {} (naive always runs)", m.dump()));
                }
                c.models.push_back(*v);
            }
        }
        if (doc.contains("study_window")) {
            c.window = ingest::StudyWindow{date_field(doc["study_window"], "start"),
                                           date_field(doc["study_window"], "end")};
        }
        if (doc.contains("initial_train_end")) c.initial_train_end = date_field(doc, "initial_train_end");
        if (doc.contains("test_end")) c.test_end = date_field(doc, "test_end");
        if (doc.contains("seed")) c.seed = doc["seed"].get<std::uint64_t>();
        if (doc.contains("output_dir")) c.output_dir = resolve(base_dir, doc["output_dir"].get<std::string>());
        if (doc.contains("n_trees")) c.n_trees = doc["n_trees"].get<int>();
        if (doc.contains("workers")) c.workers = doc["workers"].get<unsigned>();
        if (doc.contains("flags")) {
            const auto& f = doc["flags"];
            if (f.contains("round_counts")) c.round_counts = f["round_counts"].get<bool>();
            if (f.contains("svg")) c.svg = f["svg"].get<bool>();
            if (f.contains("rf_binary_mode")) {
                auto m = harness::parse_rf_binary_mode(f["rf_binary_mode"].get<std::string>());
                if (!m) throw ConfigError("config: rf_binary_mode must be classification or thresholded_regression");
                c.rf_binary_mode = *m;
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(fmt::format("config: {}", e.what()));
    }
    validate(c);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open config file {}", path.string()));
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
    return parse_config(doc, path.parent_path());
}

void apply_overrides(RunConfig& config, const Overrides& o) {
    if (o.seed) config.seed = *o.seed;
    if (o.regions) config.regions = *o.regions;
    if (o.horizons) config.horizons = *o.horizons;
    if (o.svg) config.svg = true;
    if (o.round_counts) config.round_counts = true;
    if (o.output_dir && !o.output_dir->empty()) config.output_dir = *o.output_dir;
    validate(config);
}

void validate(const RunConfig& c) {
    if (c.horizons.empty()) throw ConfigError("config: horizons must not be empty");
    std::set<int> seen;
    for (int h : c.horizons) {
        if (h < 1 || h > 3) throw ConfigError(fmt::format("config: horizon {} outside 1..3", h));
        if (!seen.insert(h).second) throw ConfigError(fmt::format("config: horizon {} repeated", h));
    }
    if (c.outcomes.empty()) throw ConfigError("config: outcomes must not be empty");
    if (c.window && c.window->end < c.window->start) throw ConfigError("config: study window ends before it starts");
    if (c.test_end <= c.initial_train_end) throw ConfigError("config: test_end must follow initial_train_end");
    if (c.n_trees < 1) throw ConfigError("config: n_trees must be positive");
}

nlohmann::json describe(const RunConfig& c) {
    nlohmann::json j;
    j["seed"] = c.seed;
    j["regions"] = c.regions;
    j["horizons"] = c.horizons;
    for (auto o : c.outcomes) j["outcomes"].push_back(harness::to_string(o));
    for (auto m : c.models) j["models"].push_back(harness::to_string(m));
    if (c.window) {
        j["study_window"] = {{"start", format_date(c.window->start)}, {"end", format_date(c.window->end)}};
    }
    j["initial_train_end"] = format_date(c.initial_train_end);
    j["test_end"] = format_date(c.test_end);
    j["n_trees"] = c.n_trees;
    j["mtry"] = "floor(sqrt(#selected predictors)), min 1";
    j["min_node_size"] = {{"classification", 1}, {"regression", 5}};
    j["round_counts"] = c.round_counts;
    j["rf_binary_mode"] = harness::to_string(c.rf_binary_mode);
    j["week_anchor"] = "Sunday-Saturday weeks, ordinal 0 = 2020-01-05";
    j["quantile"] = "Hyndman-Fan type 7";
    j["binary_threshold"] = "Q3 of the full-period weekly counts (strict >); spans train and test weeks";
    j["glm_probability_cutoff"] = harness::kBinaryCutoff;
    j["glm_feature_count"] = harness::kGlmFeatureCount;
    j["rf_feature_rule"] = "p < 0.05, else the 9 lowest p";
    j["feature_selection_target"] = "weekly counts, Granger F test on the training window at lag = horizon";
    j["irls"] = {{"tolerance", 1e-8}, {"max_iterations", 25}, {"eta_limit", 30}};
    j["stepwise"] = "bidirectional AIC from the full model";
    j["mase_denominator"] = "mean |Y_t - Y_{t-h}| over the test weeks";
    j["undefined_metric_token"] = "NA";
    return j;
}

}  // namespace unrestcast::cli
