#pragma once

#include <chrono>
#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace unrestcast {

using Date = std::chrono::sys_days;

/// Parses a strict ISO-8601 calendar date (YYYY-MM-DD). Returns nullopt for
/// malformed text or impossible dates such as 2020-13-01.
std::optional<Date> parse_date(std::string_view text);
std::string format_date(Date date);

/// A Sunday-anchored week. Ordinal 0 is the week starting 2020-01-05.
class WeekIndex {
public:
    static constexpr Date kEpoch = Date{std::chrono::year{2020} / 1 / 5};

    constexpr WeekIndex() = default;
    explicit constexpr WeekIndex(int ordinal) : ordinal_(ordinal) {}

    /// The week whose Sunday..Saturday span contains `date`.
    static WeekIndex containing(Date date);
    /// Throws std::invalid_argument unless `sunday` is a Sunday.
    static WeekIndex from_start(Date sunday);

    constexpr int ordinal() const { return ordinal_; }
    Date start_date() const;
    Date end_date() const { return start_date() + std::chrono::days{6}; }

    constexpr WeekIndex operator+(int weeks) const { return WeekIndex(ordinal_ + weeks); }
    constexpr WeekIndex operator-(int weeks) const { return WeekIndex(ordinal_ - weeks); }
    constexpr int operator-(WeekIndex other) const { return ordinal_ - other.ordinal_; }
    constexpr auto operator<=>(const WeekIndex&) const = default;

private:
    int ordinal_ = 0;
};

/// Inclusive range of weeks.
struct WeekRange {
    WeekIndex first;
    WeekIndex last;

    constexpr std::size_t size() const {
        return last < first ? 0 : static_cast<std::size_t>(last - first + 1);
    }
    constexpr bool contains(WeekIndex w) const { return first <= w && w <= last; }
    constexpr bool operator==(const WeekRange&) const = default;
};

std::optional<WeekRange> intersect(WeekRange a, WeekRange b);

struct WeeklySeries {
    std::string region;
    std::string variable;
    WeekIndex first_week;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    WeekIndex last_week() const { return first_week + static_cast<int>(values.size()) - 1; }
    WeekRange range() const { return {first_week, last_week()}; }
    double at(WeekIndex week) const;
    /// Restriction to `weeks`, which must lie inside range().
    WeeklySeries slice(WeekRange weeks) const;
};

/// One observation on a calendar day. A NaN value marks a missing reading.
struct DatedValue {
    Date date;
    double value = 0.0;
};

/// Sums daily values into Sunday..Saturday bins. Weeks without records are 0.
/// When `cover` is given the output spans exactly that range and every input
/// date must fall inside it; otherwise the span runs from the first to the last
/// observed week.
WeeklySeries weekly_sum(std::span<const DatedValue> daily, std::string region, std::string variable,
                        std::optional<WeekRange> cover = std::nullopt);

/// Mean of the non-missing daily values in each week; weeks with no usable
/// value become 0.
WeeklySeries weekly_mean(std::span<const DatedValue> daily, std::string region, std::string variable,
                         std::optional<WeekRange> cover = std::nullopt);

/// Population-weighted mean across subregions. All series must share one week
/// range and every population must be strictly positive.
WeeklySeries pop_weighted_aggregate(std::span<const WeeklySeries> subregions, std::span<const double> populations,
                                    std::string region);

/// Element-wise sum of aligned series (used for count streams rolled up from
/// states to a region).
WeeklySeries sum_aligned(std::span<const WeeklySeries> parts, std::string region);

/// Value at week t becomes the input value at week t-k.
WeeklySeries lag(const WeeklySeries& series, int k);

/// Hyndman-Fan type 7 sample quantile.
double quantile(std::span<const double> values, double p);

class FeatureFrame {
public:
    FeatureFrame() = default;
    FeatureFrame(std::string region, WeekIndex first_week, std::string target_name, std::vector<double> target,
                 std::vector<std::string> predictor_names, std::vector<std::vector<double>> predictors);

    const std::string& region() const { return region_; }
    const std::string& target_name() const { return target_name_; }
    WeekIndex first_week() const { return first_week_; }
    WeekIndex last_week() const { return first_week_ + static_cast<int>(target_.size()) - 1; }
    WeekRange weeks() const { return {first_week_, last_week()}; }
    std::size_t n_weeks() const { return target_.size(); }
    std::size_t n_predictors() const { return names_.size(); }

    std::span<const double> target() const { return target_; }
    const std::vector<std::string>& predictor_names() const { return names_; }
    std::span<const double> predictor(std::size_t index) const { return columns_.at(index); }
    std::span<const double> predictor(std::string_view name) const;
    std::optional<std::size_t> index_of(std::string_view name) const;

    WeeklySeries target_series() const;
    WeeklySeries predictor_series(std::size_t index) const;

    /// Copy restricted to `weeks`, which must lie inside weeks().
    FeatureFrame slice(WeekRange weeks) const;

private:
    std::string region_;
    std::string target_name_;
    WeekIndex first_week_;
    std::vector<double> target_;
    std::vector<std::string> names_;
    std::vector<std::vector<double>> columns_;
};

/// Restricts target and predictors to their common week range. Predictor
/// columns are ordered by variable name.
FeatureFrame align(const WeeklySeries& target, std::span<const WeeklySeries> predictors);

}  // namespace unrestcast
