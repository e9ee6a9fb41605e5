#include "unrestcast/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "unrestcast/cli/dataset_io.hpp"
#include "unrestcast/cli/svg.hpp"
#include "unrestcast/csv.hpp"
#include "unrestcast/evaluation.hpp"
#include "unrestcast/inference/granger.hpp"
#include "unrestcast/inference/ols.hpp"
#include "unrestcast/parallel.hpp"

namespace unrestcast::cli {

namespace fs = std::filesystem;

namespace {

constexpr int kMaxExploreLag = 4;
constexpr double kAlpha = 0.05;

std::ifstream open_input(const fs::path& path, std::string_view what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("cannot open {} file {}", what, path.string()));
    return in;
}

std::ofstream open_output(const fs::path& path) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    return out;
}

fs::path datasets_dir(const RunConfig& c) { return c.output_dir / "datasets"; }

std::vector<std::string> selected_regions(const RunConfig& c, const std::vector<std::string>& available) {
    if (c.regions.empty()) return available;
    for (const auto& r : c.regions) {
        if (std::find(available.begin(), available.end(), r) == available.end()) {
            throw ConfigError(fmt::format("region {} not available", r));
        }
    }
    return c.regions;
}

struct LoadedDataset {
    std::string region;
    FeatureFrame frame;
};

std::vector<LoadedDataset> load_datasets(const RunConfig& c) {
    const auto manifest_path = datasets_dir(c) / "manifest.json";
    auto in = open_input(manifest_path, "dataset manifest (run ingest first)");
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(fmt::format("{}: {}", manifest_path.string(), e.what()));
    }
    std::vector<std::string> available;
    std::map<std::string, std::string> files;
    for (const auto& r : manifest.at("regions")) {
        available.push_back(r.at("region").get<std::string>());
        files[available.back()] = r.at("file").get<std::string>();
    }
    std::vector<LoadedDataset> out;
    for (const auto& region : selected_regions(c, available)) {
        const auto path = datasets_dir(c) / files.at(region);
        auto file = open_input(path, "dataset");
        out.push_back({region, read_dataset(file, path.string(), region)});
    }
    return out;
}

std::vector<harness::ForecastTrack> load_forecasts(const RunConfig& c) {
    const auto path = c.output_dir / "forecasts.csv";
    auto in = open_input(path, "forecasts (run forecast first)");
    return read_forecasts(in, path.string());
}

std::string status_of(const inference::GrangerResult& r) { return r.degenerate ? "perfect_fit" : "ok"; }

}  // namespace

int cmd_ingest(const RunConfig& c, std::ostream& log) {
    auto regions_in = open_input(c.data.regions, "regions");
    auto groupings_in = open_input(c.data.groupings, "groupings");
    auto events_in = open_input(c.data.events, "events");
    auto policy_in = open_input(c.data.policy, "policy");
    auto trends_in = open_input(c.data.trends, "trends");

    const auto regions = ingest::parse_regions(regions_in, c.data.regions.string());
    const auto grouping = ingest::parse_groupings(groupings_in, c.data.groupings.string());
    const auto events = ingest::parse_events(events_in, c.data.events.string(), c.window);
    const auto policy = ingest::parse_policy(policy_in, c.data.policy.string(), c.window);
    auto trends = ingest::parse_trends(trends_in, c.data.trends.string());
    std::size_t trends_dropped = 0;
    if (c.window) {
        const auto weeks = c.window->weeks();
        const auto before = trends.size();
        std::erase_if(trends, [&](const auto& t) { return !weeks.contains(WeekIndex::containing(t.week_start)); });
        trends_dropped = before - trends.size();
    }

    std::set<std::string> unassigned;
    for (const auto& e : events.records) {
        if (!regions.find(e.region)) unassigned.insert(e.region);
    }
    for (const auto& p : policy.records) {
        if (!regions.find(p.region)) unassigned.insert(p.region);
    }
    for (const auto& t : trends) {
        if (!regions.find(t.region)) unassigned.insert(t.region);
    }

    const ingest::IngestInputs inputs{events.records, policy.records, trends, &grouping, &regions, c.window};
    const auto covid = ingest::filter_covid(events.records);

    nlohmann::json manifest;
    manifest["inputs"] = {
        {"events", {{"rows_kept", events.records.size()},
                    {"dropped_outside_window", events.dropped_outside_window},
                    {"covid_related", covid.size()},
                    {"dropped_not_covid", events.records.size() - covid.size()}}},
        {"policy", {{"rows_kept", policy.records.size()}, {"dropped_outside_window", policy.dropped_outside_window}}},
        {"trends", {{"rows_kept", trends.size()}, {"dropped_outside_window", trends_dropped}}},
    };
    manifest["unassigned_subregions"] = std::vector<std::string>(unassigned.begin(), unassigned.end());
    manifest["regions"] = nlohmann::json::array();

    for (const auto& region : selected_regions(c, regions.regions())) {
        const auto ds = ingest::build_region_dataset(inputs, region);
        const auto file = file_stem(region) + ".csv";
        auto out = open_output(datasets_dir(c) / file);
        write_dataset(out, ds.frame);
        double total = 0.0;
        for (double v : ds.target.values) total += v;
        manifest["regions"].push_back({{"region", region},
                                       {"file", file},
                                       {"weeks", ds.frame.n_weeks()},
                                       {"first_week", format_date(ds.frame.first_week().start_date())},
                                       {"last_week", format_date(ds.frame.last_week().start_date())},
                                       {"covid_protests", total}});
        log << fmt::format("ingest: {} -> {} weeks from {}\n", region, ds.frame.n_weeks(),
                           format_date(ds.frame.first_week().start_date()));
    }
    auto out = open_output(datasets_dir(c) / "manifest.json");
    out << manifest.dump(2) << '\n';
    return kExitOk;
}

int cmd_explore(const RunConfig& c, std::ostream& log) {
    const auto datasets = load_datasets(c);
    auto all = open_output(c.output_dir / "granger.csv");
    auto best = open_output(c.output_dir / "granger_min_p.csv");
    write_csv_row(all, {"region", "predictor", "lag", "f_stat", "p_value", "df1", "df2", "status"});
    write_csv_row(best, {"region", "predictor", "min_p_lag", "p_value", "significant"});
    for (const auto& ds : datasets) {
        const auto& frame = ds.frame;
        for (std::size_t k = 0; k < frame.n_predictors(); ++k) {
            const auto& name = frame.predictor_names()[k];
            std::optional<inference::GrangerResult> min_p;
            for (int lag = 1; lag <= kMaxExploreLag; ++lag) {
                try {
                    const auto r = inference::granger_test(frame.target(), frame.predictor(k), lag);
                    write_csv_row(all, {ds.region, name, std::to_string(lag), format_number(r.f_stat),
                                        format_number(r.p_value), std::to_string(r.df1), std::to_string(r.df2),
                                        status_of(r)});
                    if (!min_p || r.p_value < min_p->p_value) min_p = r;
                } catch (const std::exception& e) {
                    write_csv_row(all, {ds.region, name, std::to_string(lag), "NA", "NA", "NA", "NA", "degenerate"});
                    log << fmt::format("explore: {} {} lag {} degenerate ({})\n", ds.region, name, lag, e.what());
                }
            }
            if (min_p) {
                write_csv_row(best, {ds.region, name, std::to_string(min_p->lag_order), format_number(min_p->p_value),
                                     min_p->p_value < kAlpha ? "true" : "false"});
            }
        }
    }
    return kExitOk;
}

int cmd_forecast(const RunConfig& c, std::ostream& log) {
    const auto datasets = load_datasets(c);
    std::vector<harness::Model> models = c.models;
    models.push_back(harness::Model::naive);

    struct Job {
        const LoadedDataset* dataset;
        harness::ExperimentPlan plan;
    };
    std::vector<Job> jobs;
    for (const auto& ds : datasets) {
        for (auto outcome : c.outcomes) {
            for (int h : c.horizons) {
                for (auto model : models) {
                    harness::ExperimentPlan p;
                    p.region = ds.region;
                    p.horizon = h;
                    p.outcome = outcome;
                    p.model = model;
                    p.initial_train_end = WeekIndex::containing(c.initial_train_end);
                    p.test_end = std::min(WeekIndex::containing(c.test_end), ds.frame.last_week());
                    p.seed = c.seed;
                    p.round_counts = c.round_counts;
                    p.rf_binary_mode = c.rf_binary_mode;
                    p.n_trees = c.n_trees;
                    jobs.push_back({&ds, p});
                }
            }
        }
    }

    std::vector<std::optional<harness::ForecastTrack>> results(jobs.size());
    std::vector<std::string> failures(jobs.size());
    parallel_for(jobs.size(), c.workers, [&](std::size_t k) {
        try {
            results[k] = harness::rolling_forecast(jobs[k].dataset->frame, jobs[k].plan);
        } catch (const std::exception& e) {
            failures[k] = e.what();
        }
    });

    std::vector<harness::ForecastTrack> tracks;
    nlohmann::json thresholds = nlohmann::json::object();
    int failed = 0;
    for (std::size_t k = 0; k < jobs.size(); ++k) {
        const auto& p = jobs[k].plan;
        if (!results[k]) {
            ++failed;
            log << fmt::format("forecast: FAILED {} h={} {} {}: {}\n", p.region, p.horizon, harness::to_string(p.outcome),
                               harness::to_string(p.model), failures[k]);
            continue;
        }
        const auto fallbacks = std::count_if(results[k]->entries.begin(), results[k]->entries.end(),
                                             [](const auto& e) { return e.fallback; });
        if (fallbacks > 0) {
            log << fmt::format("forecast: {} h={} {} {}: {} weeks used the naive fallback\n", p.region, p.horizon,
                               harness::to_string(p.outcome), harness::to_string(p.model), fallbacks);
        }
        if (p.outcome == harness::Outcome::binary && !std::isnan(results[k]->binary_threshold)) {
            thresholds[p.region] = results[k]->binary_threshold;
        }
        tracks.push_back(std::move(*results[k]));
    }

    {
        auto out = open_output(c.output_dir / "forecasts.csv");
        write_forecasts(out, tracks);
    }
    {
        auto out = open_output(c.output_dir / "selection.csv");
        write_selection_log(out, tracks);
    }
    {
        auto meta = describe(c);
        meta["binary_thresholds"] = thresholds;
        meta["plans"] = jobs.size();
        meta["failed_plans"] = failed;
        auto out = open_output(c.output_dir / "run_metadata.json");
        out << meta.dump(2) << '\n';
    }
    log << fmt::format("forecast: {} of {} plans completed\n", jobs.size() - static_cast<std::size_t>(failed),
                       jobs.size());
    return failed ? kExitPartial : kExitOk;
}

int cmd_report(const RunConfig& c, std::ostream& log) {
    const auto tracks = load_forecasts(c);
    std::vector<evaluation::ReportRow> rows;
    try {
        rows = evaluation::build_report(tracks);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(fmt::format("report: {}", e.what()));
    }
    {
        auto out = open_output(c.output_dir / "metrics.csv");
        write_csv_row(out, {"region", "horizon", "outcome", "model", "metric", "value"});
        for (const auto& r : rows) {
            write_csv_row(out, {r.region, std::to_string(r.horizon), std::string(harness::to_string(r.outcome)),
                                std::string(harness::to_string(r.model)), r.metric, format_number(r.value)});
        }
    }
    log << fmt::format("report: {} metric rows\n", rows.size());
    if (!c.svg) return kExitOk;

    std::map<std::pair<std::string, int>, std::vector<const harness::ForecastTrack*>> groups;
    for (const auto& t : tracks) {
        if (t.plan.outcome == harness::Outcome::count) groups[{t.plan.region, t.plan.horizon}].push_back(&t);
    }
    for (const auto& [key, members] : groups) {
        const auto* naive = *std::find_if(members.begin(), members.end(),
                                          [](auto* t) { return t->plan.model == harness::Model::naive; });
        std::vector<std::string> labels;
        std::vector<SvgSeries> series{{"observed", "black", {}}};
        for (const auto& e : naive->entries) {
            labels.push_back(format_date(e.week.start_date()));
            series[0].values.push_back(e.y_true);
        }
        const std::map<harness::Model, std::string> colors{
            {harness::Model::glm, "#d62728"}, {harness::Model::random_forest, "#1f77b4"}, {harness::Model::naive, "#7f7f7f"}};
        for (const auto* t : members) {
            SvgSeries s{std::string(harness::to_string(t->plan.model)), colors.at(t->plan.model), {}};
            for (const auto& e : t->entries) s.values.push_back(e.y_pred);
            series.push_back(std::move(s));
        }
        const auto title = fmt::format("{}: {}-week count forecasts", key.first, key.second);
        auto out = open_output(c.output_dir / "plots" / fmt::format("{}_h{}.svg", file_stem(key.first), key.second));
        out << line_chart_svg(title, labels, series);
    }
    log << fmt::format("report: {} plots\n", groups.size());
    return kExitOk;
}

int run_command(std::string_view name, const RunConfig& config, std::ostream& log) {
    try {
        if (name == "ingest") return cmd_ingest(config, log);
        if (name == "explore") return cmd_explore(config, log);
        if (name == "forecast") return cmd_forecast(config, log);
        if (name == "report") return cmd_report(config, log);
        log << fmt::format("unknown command {}\n", name);
        return kExitInput;
    } catch (const ConfigError& e) {
        log << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const DataError& e) {
        log << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        log << "error: " << e.what() << '\n';
        return kExitInput;
    }
}

}  // namespace unrestcast::cli
