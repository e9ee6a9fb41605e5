#include "unrestcast/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "unrestcast/csv.hpp"

namespace unrestcast::ingest {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string trim(std::string s) {
    s.erase(0, s.find_first_not_of(" \t"));
    s.erase(s.find_last_not_of(" \t") + 1);
    return s;
}

Date require_date(const CsvTable& table, const std::string& text) {
    auto d = parse_date(trim(text));
    if (!d) table.fail(fmt::format("malformed date '{}'", text));
    return *d;
}

// Blank means missing, which the policy rules turn into 0.
double policy_value(const CsvTable& table, const std::string& text, std::string_view column, double max) {
    if (trim(text).empty()) return 0.0;
    auto v = parse_number(text);
    if (!v || !std::isfinite(*v)) table.fail(fmt::format("malformed {} value '{}'", column, text));
    if (*v < 0.0 || *v > max) table.fail(fmt::format("{} value {} outside [0, {}]", column, *v, max));
    return *v;
}

std::vector<DatedValue> dated(std::span<const PolicyRecord* const> rows, auto&& pick) {
    std::vector<DatedValue> out;
    out.reserve(rows.size());
    for (const auto* r : rows) out.push_back({r->date, pick(*r)});
    return out;
}

WeekRange span_of(std::span<const PolicyRecord* const> rows) {
    auto [lo, hi] = std::minmax_element(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->date < b->date; });
    return {WeekIndex::containing((*lo)->date), WeekIndex::containing((*hi)->date)};
}

// Slices every member series to the weeks all of them cover.
std::vector<WeeklySeries> common_span(std::vector<WeeklySeries> parts) {
    std::optional<WeekRange> r = parts.front().range();
    for (const auto& p : parts) {
        r = intersect(*r, p.range());
        if (!r) throw std::invalid_argument(fmt::format("member series for {} do not overlap", p.variable));
    }
    for (auto& p : parts) p = p.slice(*r);
    return parts;
}

}  // namespace

const std::vector<std::string>& predictor_roster() {
    static const std::vector<std::string> roster = [] {
        std::vector<std::string> names{"cases", "deaths"};
        for (auto n : kIndicators) names.emplace_back(n);
        for (auto n : kIndices) names.emplace_back(n);
        for (auto g : kTrendsGroups) names.push_back(trends_column(g));
        std::sort(names.begin(), names.end());
        return names;
    }();
    return roster;
}

std::string trends_column(std::string_view group) { return fmt::format("trends_{}", group); }

ParsedEvents parse_events(std::istream& in, const std::string& source, const std::optional<StudyWindow>& window) {
    CsvTable table(in, source);
    const auto c_date = table.require("date");
    const auto c_region = table.require("region");
    const auto c_type = table.require("event_type");
    const auto c_desc = table.require("description");
    ParsedEvents out;
    std::vector<std::string> f;
    while (table.next(f)) {
        EventRecord r{require_date(table, f[c_date]), trim(f[c_region]), f[c_type], f[c_desc]};
        if (r.region.empty()) table.fail("empty region");
        if (window && !window->contains(r.date)) {
            ++out.dropped_outside_window;
            continue;
        }
        out.records.push_back(std::move(r));
    }
    return out;
}

std::vector<EventRecord> filter_covid(std::span<const EventRecord> events) {
    std::vector<EventRecord> out;
    for (const auto& e : events) {
        const auto d = lower(e.description);
        if (d.find("coronavirus") != std::string::npos || d.find("covid") != std::string::npos) out.push_back(e);
    }
    return out;
}

ParsedPolicy parse_policy(std::istream& in, const std::string& source, const std::optional<StudyWindow>& window) {
    CsvTable table(in, source);
    const auto c_date = table.require("date");
    const auto c_region = table.require("region");
    std::array<std::size_t, 16> c_ind{};
    std::array<std::size_t, 4> c_idx{};
    for (std::size_t i = 0; i < kIndicators.size(); ++i) c_ind[i] = table.require(kIndicators[i]);
    for (std::size_t i = 0; i < kIndices.size(); ++i) c_idx[i] = table.require(kIndices[i]);
    const auto c_cases = table.require("cases");
    const auto c_deaths = table.require("deaths");

    constexpr double kUnbounded = std::numeric_limits<double>::infinity();
    ParsedPolicy out;
    std::vector<std::string> f;
    while (table.next(f)) {
        PolicyRecord r;
        r.date = require_date(table, f[c_date]);
        r.region = trim(f[c_region]);
        if (r.region.empty()) table.fail("empty region");
        if (window && !window->contains(r.date)) {
            ++out.dropped_outside_window;
            continue;
        }
        for (std::size_t i = 0; i < c_ind.size(); ++i) {
            r.indicators[i] = policy_value(table, f[c_ind[i]], kIndicators[i], kIndicatorMax[i]);
        }
        for (std::size_t i = 0; i < c_idx.size(); ++i) r.indices[i] = policy_value(table, f[c_idx[i]], kIndices[i], 100.0);
        r.cases = policy_value(table, f[c_cases], "cases", kUnbounded);
        r.deaths = policy_value(table, f[c_deaths], "deaths", kUnbounded);
        if (r.cases != std::floor(r.cases) || r.deaths != std::floor(r.deaths)) {
            table.fail("cases and deaths must be whole counts");
        }
        out.records.push_back(std::move(r));
    }
    return out;
}

std::vector<TrendsRecord> parse_trends(std::istream& in, const std::string& source) {
    CsvTable table(in, source);
    const auto c_week = table.require("week_start");
    const auto c_region = table.require("region");
    const auto c_term = table.require("term");
    const auto c_volume = table.require("volume");
    std::vector<TrendsRecord> out;
    std::vector<std::string> f;
    while (table.next(f)) {
        TrendsRecord r{require_date(table, f[c_week]), trim(f[c_region]), trim(f[c_term]), 0.0};
        if (std::chrono::weekday{r.week_start} != std::chrono::Sunday) {
            table.fail(fmt::format("week_start {} is not a Sunday", format_date(r.week_start)));
        }
        auto v = parse_number(f[c_volume]);
        if (!v || !(*v >= 0.0 && *v <= 100.0)) table.fail(fmt::format("volume '{}' outside [0, 100]", f[c_volume]));
        r.volume = *v;
        out.push_back(std::move(r));
    }
    return out;
}

GroupingMap parse_groupings(std::istream& in, const std::string& source) {
    CsvTable table(in, source);
    const auto c_term = table.require("term");
    const auto c_group = table.require("group");
    GroupingMap out;
    std::vector<std::string> f;
    while (table.next(f)) {
        auto term = trim(f[c_term]);
        auto group = lower(trim(f[c_group]));
        if (std::find(kTrendsGroups.begin(), kTrendsGroups.end(), group) == kTrendsGroups.end()) {
            table.fail(fmt::format("unknown group '{}'", group));
        }
        if (!out.emplace(term, group).second) table.fail(fmt::format("term '{}' assigned twice", term));
    }
    return out;
}

RegionsConfig::RegionsConfig(std::vector<Subregion> subregions) : subregions_(std::move(subregions)) {}

std::vector<std::string> RegionsConfig::regions() const {
    std::set<std::string> names;
    for (const auto& s : subregions_) names.insert(s.region);
    return {names.begin(), names.end()};
}

std::vector<Subregion> RegionsConfig::members(std::string_view region) const {
    std::vector<Subregion> out;
    for (const auto& s : subregions_) {
        if (s.region == region) out.push_back(s);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    return out;
}

const Subregion* RegionsConfig::find(std::string_view subregion) const {
    for (const auto& s : subregions_) {
        if (s.name == subregion) return &s;
    }
    return nullptr;
}

RegionsConfig parse_regions(std::istream& in, const std::string& source) {
    CsvTable table(in, source);
    const auto c_sub = table.require("subregion");
    const auto c_region = table.require("region");
    const auto c_pop = table.require("population");
    std::vector<Subregion> subs;
    std::set<std::string> seen;
    std::vector<std::string> f;
    while (table.next(f)) {
        Subregion s{trim(f[c_sub]), trim(f[c_region]), 0.0};
        if (s.name.empty() || s.region.empty()) table.fail("empty subregion or region");
        auto pop = parse_number(f[c_pop]);
        if (!pop) table.fail(fmt::format("missing population for {}", s.name));
        if (!(*pop > 0.0)) table.fail(fmt::format("population for {} must be positive", s.name));
        s.population = *pop;
        if (!seen.insert(s.name).second) table.fail(fmt::format("subregion {} listed twice", s.name));
        subs.push_back(std::move(s));
    }
    return RegionsConfig(std::move(subs));
}

std::vector<WeeklySeries> build_trends_groups(std::span<const TrendsRecord> records, const GroupingMap& grouping,
                                              const std::string& region, std::optional<WeekRange> cover) {
    std::set<std::string> unknown;
    for (const auto& r : records) {
        if (!grouping.contains(r.term)) unknown.insert(r.term);
    }
    if (!unknown.empty()) {
        throw std::invalid_argument(fmt::format("trends terms missing from grouping map: {}", fmt::join(unknown, ", ")));
    }
    WeekRange weeks;
    if (cover) {
        weeks = *cover;
    } else {
        if (records.empty()) throw std::invalid_argument(fmt::format("no trends records for {}", region));
        auto [lo, hi] = std::minmax_element(records.begin(), records.end(),
                                            [](const auto& a, const auto& b) { return a.week_start < b.week_start; });
        weeks = {WeekIndex::containing(lo->week_start), WeekIndex::containing(hi->week_start)};
    }

    const std::size_t n = weeks.size();
    std::vector<std::vector<double>> sums(kTrendsGroups.size(), std::vector<double>(n, 0.0));
    std::vector<std::vector<int>> counts(kTrendsGroups.size(), std::vector<int>(n, 0));
    std::set<std::pair<int, std::string>> seen;
    for (const auto& r : records) {
        const auto w = WeekIndex::containing(r.week_start);
        if (!weeks.contains(w)) continue;
        if (!seen.emplace(w.ordinal(), r.term).second) {
            throw std::invalid_argument(
                fmt::format("duplicate trends value for '{}' in week {} ({})", r.term, format_date(r.week_start), region));
        }
        const auto& group = grouping.find(r.term)->second;
        const auto g = static_cast<std::size_t>(std::find(kTrendsGroups.begin(), kTrendsGroups.end(), group) -
                                                kTrendsGroups.begin());
        const auto k = static_cast<std::size_t>(w - weeks.first);
        sums[g][k] += r.volume;
        ++counts[g][k];
    }

    std::vector<WeeklySeries> out;
    for (std::size_t g = 0; g < kTrendsGroups.size(); ++g) {
        WeeklySeries s{region, trends_column(kTrendsGroups[g]), weeks.first, std::vector<double>(n, 0.0)};
        for (std::size_t k = 0; k < n; ++k) {
            if (counts[g][k] > 0) s.values[k] = sums[g][k] / counts[g][k];
        }
        out.push_back(std::move(s));
    }
    return out;
}

RegionDataset build_region_dataset(const IngestInputs& inputs, const std::string& region) {
    if (!inputs.grouping || !inputs.regions) throw std::invalid_argument("grouping map and regions config required");
    const auto members = inputs.regions->members(region);
    if (members.empty()) throw std::invalid_argument(fmt::format("region {} has no subregions in regions config", region));

    std::vector<double> pops;
    for (const auto& m : members) {
        if (!(m.population > 0.0)) throw std::invalid_argument(fmt::format("missing population for {}", m.name));
        pops.push_back(m.population);
    }

    // Per-member predictor streams; each name maps to one series per member.
    std::map<std::string, std::vector<WeeklySeries>> member_series;
    for (const auto& m : members) {
        std::vector<const PolicyRecord*> rows;
        for (const auto& p : inputs.policy) {
            if (p.region == m.name) rows.push_back(&p);
        }
        if (rows.empty()) throw std::invalid_argument(fmt::format("no policy records for {}", m.name));
        std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->date < b->date; });
        const WeekRange policy_weeks = span_of(rows);

        member_series["cases"].push_back(
            weekly_sum(dated(rows, [](const PolicyRecord& r) { return r.cases; }), m.name, "cases", policy_weeks));
        member_series["deaths"].push_back(
            weekly_sum(dated(rows, [](const PolicyRecord& r) { return r.deaths; }), m.name, "deaths", policy_weeks));
        for (std::size_t i = 0; i < kIndicators.size(); ++i) {
            member_series[std::string(kIndicators[i])].push_back(
                weekly_mean(dated(rows, [i](const PolicyRecord& r) { return r.indicators[i]; }), m.name,
                            std::string(kIndicators[i]), policy_weeks));
        }
        for (std::size_t i = 0; i < kIndices.size(); ++i) {
            member_series[std::string(kIndices[i])].push_back(
                weekly_mean(dated(rows, [i](const PolicyRecord& r) { return r.indices[i]; }), m.name,
                            std::string(kIndices[i]), policy_weeks));
        }

        std::vector<TrendsRecord> trends;
        for (const auto& t : inputs.trends) {
            if (t.region == m.name) trends.push_back(t);
        }
        if (trends.empty()) throw std::invalid_argument(fmt::format("no trends records for {}", m.name));
        for (auto& s : build_trends_groups(trends, *inputs.grouping, m.name)) {
            member_series[s.variable].push_back(std::move(s));
        }
    }

    std::vector<WeeklySeries> predictors;
    for (auto& [name, parts] : member_series) {
        auto aligned = common_span(std::move(parts));
        if (name == "cases" || name == "deaths") {
            predictors.push_back(sum_aligned(aligned, region));
        } else {
            predictors.push_back(pop_weighted_aggregate(aligned, pops, region));
        }
    }

    std::vector<std::string> names;
    for (const auto& p : predictors) names.push_back(p.variable);
    std::sort(names.begin(), names.end());
    if (names != predictor_roster()) {
        throw std::invalid_argument(fmt::format("predictor roster for {} incomplete: have {}", region, fmt::join(names, ",")));
    }

    std::vector<DatedValue> events;
    for (const auto& e : filter_covid(inputs.events)) {
        if (std::any_of(members.begin(), members.end(), [&](const auto& m) { return m.name == e.region; })) {
            events.push_back({e.date, 1.0});
        }
    }
    if (events.empty()) throw std::invalid_argument(fmt::format("no COVID-related protests for {}", region));

    WeekRange cover = predictors.front().range();
    for (const auto& p : predictors) {
        cover.first = std::min(cover.first, p.first_week);
        cover.last = std::max(cover.last, p.last_week());
    }
    if (inputs.window) {
        cover.first = std::min(cover.first, inputs.window->weeks().first);
        cover.last = std::max(cover.last, inputs.window->weeks().last);
    }
    for (const auto& e : events) {
        const auto w = WeekIndex::containing(e.date);
        cover.first = std::min(cover.first, w);
        cover.last = std::max(cover.last, w);
    }
    auto target = weekly_sum(events, region, std::string(kTargetName), cover);

    FeatureFrame frame = align(target, predictors);
    const auto t = frame.target();
    const auto first = std::find_if(t.begin(), t.end(), [](double v) { return v > 0.0; });
    if (first == t.end()) {
        throw std::invalid_argument(fmt::format("no COVID-related protests for {} within predictor coverage", region));
    }
    frame = frame.slice({frame.first_week() + static_cast<int>(first - t.begin()), frame.last_week()});
    return {region, std::move(target), std::move(frame)};
}

}  // namespace unrestcast::ingest
