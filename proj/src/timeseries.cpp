#include "unrestcast/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace unrestcast {

namespace {

bool parse_int(std::string_view text, int& out) {
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

int floor_div(int a, int b) {
    int q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

WeekRange extent(std::span<const DatedValue> daily) {
    auto [lo, hi] = std::minmax_element(daily.begin(), daily.end(),
                                        [](const DatedValue& a, const DatedValue& b) { return a.date < b.date; });
    return {WeekIndex::containing(lo->date), WeekIndex::containing(hi->date)};
}

WeekRange resolve_cover(std::span<const DatedValue> daily, const std::optional<WeekRange>& cover) {
    if (!cover) {
        if (daily.empty()) throw std::invalid_argument("empty series");
        return extent(daily);
    }
    if (cover->size() == 0) throw std::invalid_argument("empty series");
    for (const auto& d : daily) {
        if (!cover->contains(WeekIndex::containing(d.date))) {
            throw std::invalid_argument(fmt::format("date {} outside covered weeks", format_date(d.date)));
        }
    }
    return *cover;
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y = 0, m = 0, d = 0;
    if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) || !parse_int(text.substr(8, 2), d)) {
        return std::nullopt;
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return Date{ymd};
}

std::string format_date(Date date) {
    const std::chrono::year_month_day ymd{date};
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                       static_cast<unsigned>(ymd.day()));
}

WeekIndex WeekIndex::containing(Date date) {
    const int days = static_cast<int>((date - kEpoch).count());
    return WeekIndex(floor_div(days, 7));
}

WeekIndex WeekIndex::from_start(Date sunday) {
    if (std::chrono::weekday{sunday} != std::chrono::Sunday) {
        throw std::invalid_argument(fmt::format("{} is not a Sunday", format_date(sunday)));
    }
    return containing(sunday);
}

Date WeekIndex::start_date() const { return kEpoch + std::chrono::days{7 * ordinal_}; }

std::optional<WeekRange> intersect(WeekRange a, WeekRange b) {
    WeekRange r{std::max(a.first, b.first), std::min(a.last, b.last)};
    if (r.last < r.first) return std::nullopt;
    return r;
}

double WeeklySeries::at(WeekIndex week) const {
    if (!range().contains(week) || values.empty()) {
        throw std::out_of_range(fmt::format("week {} not in series {}", format_date(week.start_date()), variable));
    }
    return values[static_cast<std::size_t>(week - first_week)];
}

WeeklySeries WeeklySeries::slice(WeekRange weeks) const {
    if (weeks.size() == 0 || !range().contains(weeks.first) || !range().contains(weeks.last)) {
        throw std::out_of_range(fmt::format("slice outside series {}", variable));
    }
    const auto offset = static_cast<std::size_t>(weeks.first - first_week);
    return {region, variable, weeks.first,
            std::vector<double>(values.begin() + static_cast<std::ptrdiff_t>(offset),
                                values.begin() + static_cast<std::ptrdiff_t>(offset + weeks.size()))};
}

WeeklySeries weekly_sum(std::span<const DatedValue> daily, std::string region, std::string variable,
                        std::optional<WeekRange> cover) {
    const WeekRange weeks = resolve_cover(daily, cover);
    WeeklySeries out{std::move(region), std::move(variable), weeks.first, std::vector<double>(weeks.size(), 0.0)};
    for (const auto& d : daily) {
        out.values[static_cast<std::size_t>(WeekIndex::containing(d.date) - weeks.first)] += d.value;
    }
    return out;
}

WeeklySeries weekly_mean(std::span<const DatedValue> daily, std::string region, std::string variable,
                         std::optional<WeekRange> cover) {
    const WeekRange weeks = resolve_cover(daily, cover);
    std::vector<double> sums(weeks.size(), 0.0);
    std::vector<int> counts(weeks.size(), 0);
    for (const auto& d : daily) {
        if (std::isnan(d.value)) continue;
        const auto k = static_cast<std::size_t>(WeekIndex::containing(d.date) - weeks.first);
        sums[k] += d.value;
        ++counts[k];
    }
    WeeklySeries out{std::move(region), std::move(variable), weeks.first, std::vector<double>(weeks.size(), 0.0)};
    for (std::size_t k = 0; k < sums.size(); ++k) {
        if (counts[k] > 0) out.values[k] = sums[k] / counts[k];
    }
    return out;
}

WeeklySeries pop_weighted_aggregate(std::span<const WeeklySeries> subregions, std::span<const double> populations,
                                    std::string region) {
    if (subregions.empty()) throw std::invalid_argument("no subregion series");
    if (subregions.size() != populations.size()) {
        throw std::invalid_argument("populations must match subregion series one-to-one");
    }
    const WeekRange weeks = subregions.front().range();
    double total = 0.0;
    for (std::size_t s = 0; s < subregions.size(); ++s) {
        if (subregions[s].range() != weeks || subregions[s].size() != subregions.front().size()) {
            throw std::invalid_argument(
                fmt::format("mismatched week ranges for {}", subregions[s].variable));
        }
        if (!(populations[s] > 0.0)) {
            throw std::invalid_argument(fmt::format("population for {} must be positive", subregions[s].region));
        }
        total += populations[s];
    }
    WeeklySeries out{std::move(region), subregions.front().variable, weeks.first,
                     std::vector<double>(subregions.front().size(), 0.0)};
    for (std::size_t t = 0; t < out.values.size(); ++t) {
        double acc = 0.0;
        for (std::size_t s = 0; s < subregions.size(); ++s) acc += populations[s] * subregions[s].values[t];
        out.values[t] = acc / total;
    }
    return out;
}

WeeklySeries sum_aligned(std::span<const WeeklySeries> parts, std::string region) {
    if (parts.empty()) throw std::invalid_argument("no series to sum");
    WeeklySeries out{std::move(region), parts.front().variable, parts.front().first_week,
                     std::vector<double>(parts.front().size(), 0.0)};
    for (const auto& p : parts) {
        if (p.range() != out.range() || p.size() != out.size()) {
            throw std::invalid_argument(fmt::format("mismatched week ranges for {}", p.variable));
        }
        for (std::size_t t = 0; t < p.size(); ++t) out.values[t] += p.values[t];
    }
    return out;
}

WeeklySeries lag(const WeeklySeries& series, int k) {
    if (k < 1) throw std::invalid_argument("lag must be at least one week");
    if (static_cast<std::size_t>(k) >= series.size()) {
        throw std::invalid_argument(fmt::format("lag {} too long for series of length {}", k, series.size()));
    }
    return {series.region, series.variable, series.first_week + k,
            std::vector<double>(series.values.begin(), series.values.end() - k)};
}

double quantile(std::span<const double> values, double p) {
    if (values.empty()) throw std::invalid_argument("quantile of empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile probability outside [0, 1]");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

FeatureFrame::FeatureFrame(std::string region, WeekIndex first_week, std::string target_name,
                           std::vector<double> target, std::vector<std::string> predictor_names,
                           std::vector<std::vector<double>> predictors)
    : region_(std::move(region)),
      target_name_(std::move(target_name)),
      first_week_(first_week),
      target_(std::move(target)),
      names_(std::move(predictor_names)),
      columns_(std::move(predictors)) {
    if (names_.size() != columns_.size()) throw std::invalid_argument("predictor names and columns differ in count");
    for (const auto& c : columns_) {
        if (c.size() != target_.size()) throw std::invalid_argument("predictor column length differs from target");
    }
    std::vector<std::string> sorted = names_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw std::invalid_argument("duplicate predictor name");
    }
}

std::optional<std::size_t> FeatureFrame::index_of(std::string_view name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
}

std::span<const double> FeatureFrame::predictor(std::string_view name) const {
    auto idx = index_of(name);
    if (!idx) throw std::out_of_range(fmt::format("unknown predictor {}", name));
    return columns_[*idx];
}

WeeklySeries FeatureFrame::target_series() const { return {region_, target_name_, first_week_, target_}; }

WeeklySeries FeatureFrame::predictor_series(std::size_t index) const {
    return {region_, names_.at(index), first_week_, columns_.at(index)};
}

FeatureFrame FeatureFrame::slice(WeekRange weeks) const {
    if (weeks.size() == 0 || !this->weeks().contains(weeks.first) || !this->weeks().contains(weeks.last)) {
        throw std::out_of_range("frame slice outside frame weeks");
    }
    const auto lo = static_cast<std::ptrdiff_t>(weeks.first - first_week_);
    const auto hi = lo + static_cast<std::ptrdiff_t>(weeks.size());
    std::vector<std::vector<double>> cols;
    cols.reserve(columns_.size());
    for (const auto& c : columns_) cols.emplace_back(c.begin() + lo, c.begin() + hi);
    return {region_, weeks.first, target_name_, std::vector<double>(target_.begin() + lo, target_.begin() + hi),
            names_, std::move(cols)};
}

FeatureFrame align(const WeeklySeries& target, std::span<const WeeklySeries> predictors) {
    std::optional<WeekRange> common = target.range();
    if (target.size() == 0) throw std::invalid_argument("empty target series");
    for (const auto& p : predictors) {
        if (p.region != target.region) {
            throw std::invalid_argument(fmt::format("series {} belongs to region {}, expected {}", p.variable,
                                                    p.region, target.region));
        }
        if (p.size() == 0) throw std::invalid_argument(fmt::format("empty series {}", p.variable));
        common = intersect(*common, p.range());
        if (!common) throw std::invalid_argument("series week ranges do not overlap");
    }
    std::vector<const WeeklySeries*> order;
    for (const auto& p : predictors) order.push_back(&p);
    std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->variable < b->variable; });

    std::vector<std::string> names;
    std::vector<std::vector<double>> cols;
    for (const auto* p : order) {
        names.push_back(p->variable);
        cols.push_back(p->slice(*common).values);
    }
    return {target.region, common->first, target.variable, target.slice(*common).values, std::move(names),
            std::move(cols)};
}

}  // namespace unrestcast
