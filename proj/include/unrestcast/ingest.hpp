#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "unrestcast/timeseries.hpp"

namespace unrestcast::ingest {

/// Ordinal policy indicators kept as predictors, with their codebook maxima.
inline constexpr std::array<std::string_view, 16> kIndicators = {"C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8",
                                                                 "E1", "E2", "H1", "H2", "H3", "H6", "H7", "H8"};
inline constexpr std::array<int, 16> kIndicatorMax = {3, 3, 2, 4, 2, 3, 2, 4, 2, 2, 2, 3, 2, 4, 5, 3};
inline constexpr std::array<std::string_view, 4> kIndices = {"stringency", "gov_response", "containment_health",
                                                             "econ_support"};
inline constexpr std::array<std::string_view, 7> kTrendsGroups = {"general", "covid",   "lockdown", "school",
                                                                  "mask",    "vaccine", "economic"};
inline constexpr std::string_view kTargetName = "protests";
inline constexpr std::size_t kPredictorCount = 29;

/// The 29 predictor names in the column order used by every FeatureFrame.
const std::vector<std::string>& predictor_roster();
std::string trends_column(std::string_view group);

struct StudyWindow {
    Date start;
    Date end;

    bool contains(Date d) const { return start <= d && d <= end; }
    WeekRange weeks() const { return {WeekIndex::containing(start), WeekIndex::containing(end)}; }
};

struct EventRecord {
    Date date;
    std::string region;
    std::string event_type;
    std::string description;
};

struct ParsedEvents {
    std::vector<EventRecord> records;
    std::size_t dropped_outside_window = 0;
};

/// Reads `date,region,event_type,description`. Rows outside `window` are
/// dropped and counted. Malformed rows throw DataError with the line number.
ParsedEvents parse_events(std::istream& in, const std::string& source,
                          const std::optional<StudyWindow>& window = std::nullopt);

/// Keeps events whose description mentions "coronavirus" or "covid" in any case.
std::vector<EventRecord> filter_covid(std::span<const EventRecord> events);

/// One day of policy data for one subregion. Daily new cases and deaths ride
/// along in the same file.
struct PolicyRecord {
    Date date;
    std::string region;
    std::array<double, 16> indicators{};
    std::array<double, 4> indices{};
    double cases = 0.0;
    double deaths = 0.0;
};

struct ParsedPolicy {
    std::vector<PolicyRecord> records;
    std::size_t dropped_outside_window = 0;
};

/// Reads the policy table by header name. Blank cells are missing and become
/// 0; columns outside the roster (USD indicators, vaccine module, scope flags)
/// are ignored.
ParsedPolicy parse_policy(std::istream& in, const std::string& source,
                          const std::optional<StudyWindow>& window = std::nullopt);

struct TrendsRecord {
    Date week_start;
    std::string region;
    std::string term;
    double volume = 0.0;
};

std::vector<TrendsRecord> parse_trends(std::istream& in, const std::string& source);

/// term -> conceptual group
using GroupingMap = std::map<std::string, std::string, std::less<>>;
GroupingMap parse_groupings(std::istream& in, const std::string& source);

struct Subregion {
    std::string name;
    std::string region;
    double population = 0.0;
};

class RegionsConfig {
public:
    RegionsConfig() = default;
    explicit RegionsConfig(std::vector<Subregion> subregions);

    std::vector<std::string> regions() const;
    std::vector<Subregion> members(std::string_view region) const;
    const Subregion* find(std::string_view subregion) const;

private:
    std::vector<Subregion> subregions_;
};

RegionsConfig parse_regions(std::istream& in, const std::string& source);

/// Seven `trends_<group>` series for one subregion. Each week's value is the
/// mean over that group's terms observed that week; a group with no observed
/// term in a week is 0. Throws if a term is missing from the grouping map.
std::vector<WeeklySeries> build_trends_groups(std::span<const TrendsRecord> records, const GroupingMap& grouping,
                                              const std::string& region,
                                              std::optional<WeekRange> cover = std::nullopt);

struct RegionDataset {
    std::string region;
    /// Weekly COVID protest counts over the full covered span, before trimming.
    WeeklySeries target;
    /// Target plus the 29 predictors, starting at the first protest week.
    FeatureFrame frame;
};

struct IngestInputs {
    std::span<const EventRecord> events;
    std::span<const PolicyRecord> policy;
    std::span<const TrendsRecord> trends;
    const GroupingMap* grouping = nullptr;
    const RegionsConfig* regions = nullptr;
    std::optional<StudyWindow> window;
};

/// Assembles one region: filters COVID events, rolls member subregions up to
/// the region (sums for counts, population-weighted means otherwise), aligns
/// every stream and trims the frame to begin at the first protest week.
RegionDataset build_region_dataset(const IngestInputs& inputs, const std::string& region);

}  // namespace unrestcast::ingest
