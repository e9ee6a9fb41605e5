#include "unrestcast/cli/dataset_io.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <map>
#include <tuple>

#include <fmt/format.h>

#include "unrestcast/csv.hpp"
#include "unrestcast/ingest.hpp"

namespace unrestcast::cli {

std::string file_stem(const std::string& region) {
    std::string out = region;
    for (auto& c : out) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
    }
    return out;
}

void write_dataset(std::ostream& out, const FeatureFrame& frame) {
    std::vector<std::string> row{"week_start", frame.target_name()};
    for (const auto& n : frame.predictor_names()) row.push_back(n);
    write_csv_row(out, row);
    for (std::size_t t = 0; t < frame.n_weeks(); ++t) {
        row.clear();
        row.push_back(format_date((frame.first_week() + static_cast<int>(t)).start_date()));
        row.push_back(format_number(frame.target()[t]));
        for (std::size_t k = 0; k < frame.n_predictors(); ++k) row.push_back(format_number(frame.predictor(k)[t]));
        write_csv_row(out, row);
    }
}

FeatureFrame read_dataset(std::istream& in, const std::string& source, const std::string& region) {
    CsvTable table(in, source);
    const auto& header = table.header();
    if (header.size() < 2 || header[0] != "week_start") table.fail("dataset must start with week_start");
    const std::string target_name = header[1];
    std::vector<std::string> names(header.begin() + 2, header.end());
    std::vector<double> target;
    std::vector<std::vector<double>> cols(names.size());
    std::optional<WeekIndex> first;
    std::vector<std::string> f;
    while (table.next(f)) {
        auto d = parse_date(f[0]);
        if (!d) table.fail(fmt::format("malformed date '{}'", f[0]));
        const auto w = WeekIndex::containing(*d);
        if (!first) first = w;
        if (w != *first + static_cast<int>(target.size())) table.fail("dataset weeks must be consecutive");
        for (std::size_t k = 1; k < f.size(); ++k) {
            auto v = parse_number(f[k]);
            if (!v) table.fail(fmt::format("malformed value '{}'", f[k]));
            (k == 1 ? target : cols[k - 2]).push_back(*v);
        }
    }
    if (!first) table.fail("dataset has no rows");
    return {region, *first, target_name, std::move(target), std::move(names), std::move(cols)};
}

void write_forecasts(std::ostream& out, std::span<const harness::ForecastTrack> tracks) {
    write_csv_row(out, {"region", "horizon", "outcome", "model", "week_start", "y_true", "y_pred", "window_index",
                        "fallback_flag"});
    for (const auto& t : tracks) {
        for (const auto& e : t.entries) {
            write_csv_row(out, {t.plan.region, std::to_string(t.plan.horizon), std::string(harness::to_string(t.plan.outcome)),
                                std::string(harness::to_string(t.plan.model)), format_date(e.week.start_date()),
                                format_number(e.y_true), format_number(e.y_pred), std::to_string(e.window_index),
                                e.fallback ? "1" : "0"});
        }
    }
}

std::vector<harness::ForecastTrack> read_forecasts(std::istream& in, const std::string& source) {
    CsvTable table(in, source);
    const auto c_region = table.require("region");
    const auto c_h = table.require("horizon");
    const auto c_outcome = table.require("outcome");
    const auto c_model = table.require("model");
    const auto c_week = table.require("week_start");
    const auto c_true = table.require("y_true");
    const auto c_pred = table.require("y_pred");
    const auto c_window = table.require("window_index");
    const auto c_fallback = table.require("fallback_flag");

    std::vector<harness::ForecastTrack> tracks;
    std::map<std::tuple<std::string, int, int, int>, std::size_t> index;
    std::vector<std::string> f;
    while (table.next(f)) {
        auto h = parse_number(f[c_h]);
        auto outcome = harness::parse_outcome(f[c_outcome]);
        auto model = harness::parse_model(f[c_model]);
        auto date = parse_date(f[c_week]);
        auto y_true = parse_number(f[c_true]);
        auto y_pred = parse_number(f[c_pred]);
        auto window = parse_number(f[c_window]);
        if (!h || !outcome || !model || !date || !y_true || !y_pred || !window) table.fail("malformed forecast row");
        const auto key = std::tuple(f[c_region], static_cast<int>(*h), static_cast<int>(*outcome), static_cast<int>(*model));
        auto [it, inserted] = index.emplace(key, tracks.size());
        if (inserted) {
            harness::ForecastTrack t;
            t.plan.region = f[c_region];
            t.plan.horizon = static_cast<int>(*h);
            t.plan.outcome = *outcome;
            t.plan.model = *model;
            t.binary_threshold = std::numeric_limits<double>::quiet_NaN();
            tracks.push_back(std::move(t));
        }
        auto& track = tracks[it->second];
        const auto week = WeekIndex::containing(*date);
        if (!track.entries.empty() && week != track.entries.back().week + 1) {
            table.fail("forecast weeks within a track must be consecutive");
        }
        track.entries.push_back({week, *y_true, *y_pred, static_cast<int>(*window), f[c_fallback] == "1"});
    }
    for (auto& t : tracks) {
        t.plan.initial_train_end = t.entries.front().week - 1;
        t.plan.test_end = t.entries.back().week;
    }
    return tracks;
}

void write_selection_log(std::ostream& out, std::span<const harness::ForecastTrack> tracks) {
    write_csv_row(out, {"region", "horizon", "outcome", "model", "window_index", "selected_features"});
    for (const auto& t : tracks) {
        for (const auto& s : t.selections) {
            std::string joined;
            for (const auto& name : s.features) {
                if (!joined.empty()) joined += ';';
                joined += name;
            }
            write_csv_row(out, {t.plan.region, std::to_string(t.plan.horizon), std::string(harness::to_string(t.plan.outcome)),
                                std::string(harness::to_string(t.plan.model)), std::to_string(s.window_index), joined});
        }
    }
}

}  // namespace unrestcast::cli
