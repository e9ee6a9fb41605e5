#pragma once

// Helpers shared by the unit tests and the acceptance runner: temporary
// directories, seeded generators and a synthetic raw-input bundle.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <fmt/format.h>

#include "unrestcast/timeseries.hpp"

namespace testing_support {

namespace fs = std::filesystem;
using unrestcast::Date;

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                fmt::format("unrestcast_{}_{}_{}", tag, static_cast<long>(::getpid()), counter++);
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline Date ymd(int y, unsigned m, unsigned d) {
    return Date{std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d}};
}

inline std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) out.push_back(line);
    return out;
}

/// Deterministic stand-in for the raw inputs: one single-country region and
/// one two-state region, optionally with a third region whose protest counts
/// follow the "face mask" search volume two weeks earlier.
struct Bundle {
    fs::path dir;
    fs::path config;
    int weeks = 82;
    /// Weekly COVID protest totals per region, as written to events.csv.
    std::map<std::string, std::vector<int>> protests;
    /// Planted driver (weekly "face mask" volume) for region PLN.
    std::vector<double> driver;
};

struct BundleOptions {
    std::uint64_t seed = 7;
    bool two_regions = true;
    bool planted = false;
    int weeks = 82;
    std::vector<int> horizons{1, 2, 3};
    std::vector<std::string> outcomes{"binary", "count"};
    std::vector<std::string> models{"glm", "random_forest"};
    int n_trees = 500;
    /// Week (0-based) of each region's first COVID protest.
    int first_protest_week = 0;
};

inline const std::vector<std::pair<std::string, std::string>>& fixture_terms() {
    static const std::vector<std::pair<std::string, std::string>> terms{
        {"news", "general"},           {"government", "general"},     {"coronavirus", "covid"},
        {"covid test", "covid"},       {"lockdown", "lockdown"},      {"stay at home", "lockdown"},
        {"school closure", "school"},  {"online school", "school"},   {"face mask", "mask"},
        {"mask mandate", "mask"},      {"vaccine", "vaccine"},        {"vaccination", "vaccine"},
        {"unemployment", "economic"},  {"stimulus", "economic"},
    };
    return terms;
}

inline Bundle write_bundle(const fs::path& dir, const BundleOptions& opt = {}) {
    Bundle b;
    b.dir = dir;
    b.weeks = opt.weeks;
    fs::create_directories(dir);
    std::mt19937_64 rng(opt.seed);
    auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

    struct Sub {
        std::string name, region;
        double pop;
    };
    std::vector<Sub> subs;
    if (opt.two_regions) {
        subs.push_back({"DNK", "DNK", 5.8e6});
        subs.push_back({"CA", "US_West", 3.95e7});
        subs.push_back({"OR", "US_West", 4.2e6});
    }
    if (opt.planted) subs.push_back({"PLN", "PLN", 1.0e7});

    const Date start = ymd(2020, 1, 5);
    const int days = opt.weeks * 7;

    std::ostringstream regions, groupings, events, policy, trends;
    regions << "subregion,region,population\n";
    for (const auto& s : subs) regions << fmt::format("{},{},{}\n", s.name, s.region, s.pop);
    groupings << "term,group\n";
    for (const auto& [t, g] : fixture_terms()) groupings << t << ',' << g << '\n';

    if (opt.planted) {
        for (int w = 0; w < opt.weeks; ++w) b.driver.push_back(std::round(uni(10.0, 90.0)));
    }

    events << "date,region,event_type,description\n";
    policy << "date,region,C1,C2,C3,C4,C5,C6,C7,C8,E1,E2,H1,H2,H3,H6,H7,H8,"
              "stringency,gov_response,containment_health,econ_support,cases,deaths,E3,V1\n";
    trends << "week_start,region,term,volume\n";
    const int maxima[16] = {3, 3, 2, 4, 2, 3, 2, 4, 2, 2, 2, 3, 2, 4, 5, 3};

    for (const auto& s : subs) {
        auto& totals = b.protests[s.region];
        totals.resize(static_cast<std::size_t>(opt.weeks), 0);
        for (int w = 0; w < opt.weeks; ++w) {
            int count = 0;
            if (s.name == "PLN") {
                if (w >= 2) {
                    const double mean = std::exp(0.5 + 0.03 * b.driver[static_cast<std::size_t>(w - 2)]);
                    count = static_cast<int>(std::lround(mean)) + pick(-1, 1);
                    count = std::max(count, 1);
                } else {
                    count = 3;
                }
            } else if (w >= opt.first_protest_week) {
                count = pick(0, 9);
                if (w == opt.first_protest_week) count = std::max(count, 2);
            }
            totals[static_cast<std::size_t>(w)] += count;
            for (int k = 0; k < count; ++k) {
                const Date d = start + std::chrono::days{w * 7 + pick(0, 6)};
                const char* text = (k % 3 == 0) ? "Protest against COVID-19 curfew"
                                                : (k % 3 == 1 ? "anti-Coronavirus-measures rally"
                                                              : "\"Rally, \"\"covid\"\" passes\"");
                events << fmt::format("{},{},Protests,{}\n", unrestcast::format_date(d), s.name, text);
            }
            // Unrelated protests never reach the target.
            if (pick(0, 2) == 0) {
                const Date d = start + std::chrono::days{w * 7 + pick(0, 6)};
                events << fmt::format("{},{},Protests,march over climate policy\n", unrestcast::format_date(d),
                                      s.name);
            }
        }

        // Policy levels hold for a week, with occasional mid-week changes.
        std::vector<int> level(16, 0);
        double idx[4] = {0, 0, 0, 0};
        for (int day = 0; day < days; ++day) {
            if (day % 7 == 0 || pick(0, 9) == 0) {
                for (int k = 0; k < 16; ++k) level[static_cast<std::size_t>(k)] = pick(0, maxima[k]);
                for (double& v : idx) v = std::round(uni(0.0, 100.0) * 100.0) / 100.0;
            }
            const Date d = start + std::chrono::days{day};
            policy << unrestcast::format_date(d) << ',' << s.name;
            for (int k = 0; k < 16; ++k) {
                if (pick(0, 40) == 0) {
                    policy << ',';  // missing cell
                } else {
                    policy << ',' << level[static_cast<std::size_t>(k)];
                }
            }
            for (double v : idx) policy << ',' << v;
            policy << ',' << pick(0, 500) << ',' << pick(0, 20) << ",1000," << pick(0, 3) << '\n';
        }

        for (int w = 0; w < opt.weeks; ++w) {
            const Date d = start + std::chrono::days{w * 7};
            for (const auto& [term, group] : fixture_terms()) {
                double v = std::round(uni(0.0, 100.0));
                if (s.name == "PLN" && term == "face mask") v = b.driver[static_cast<std::size_t>(w)];
                if (s.name == "PLN" && term == "mask mandate") continue;
                trends << fmt::format("{},{},{},{}\n", unrestcast::format_date(d), s.name, term, v);
            }
        }
    }

    spit(dir / "regions.csv", regions.str());
    spit(dir / "groupings.csv", groupings.str());
    spit(dir / "events.csv", events.str());
    spit(dir / "policy.csv", policy.str());
    spit(dir / "trends.csv", trends.str());

    auto quoted = [](const std::vector<std::string>& v) {
        std::string s = "[";
        for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ",\"" : "\"") + v[k] + "\"";
        return s + "]";
    };
    std::string hs = "[";
    for (std::size_t k = 0; k < opt.horizons.size(); ++k) hs += (k ? "," : "") + std::to_string(opt.horizons[k]);
    hs += "]";
    b.config = dir / "config.json";
    spit(b.config, fmt::format(R"({{
  "data": {{"events": "events.csv", "policy": "policy.csv", "trends": "trends.csv",
            "groupings": "groupings.csv", "regions": "regions.csv"}},
  "horizons": {},
  "outcomes": {},
  "models": {},
  "initial_train_end": "2020-10-31",
  "test_end": "2021-07-31",
  "seed": {},
  "output_dir": "out",
  "n_trees": {},
  "workers": 1
}}
)",
                               hs, quoted(opt.outcomes), quoted(opt.models), opt.seed, opt.n_trees));
    return b;
}

}  // namespace testing_support
