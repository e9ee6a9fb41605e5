#include <doctest.h>

#include <numeric>
#include <sstream>

#include "support.hpp"
#include "unrestcast/csv.hpp"
#include "unrestcast/ingest.hpp"

using namespace unrestcast;
using namespace unrestcast::ingest;
using testing_support::ymd;

namespace {

std::string policy_header() {
    return "date,region,C1,C2,C3,C4,C5,C6,C7,C8,E1,E2,H1,H2,H3,H6,H7,H8,"
           "stringency,gov_response,containment_health,econ_support,cases,deaths\n";
}

// Daily policy rows for `days` days from `first`, every indicator at `level`.
std::string policy_rows(const std::string& region, Date first, int days, int level, double index, int cases) {
    std::string out;
    for (int k = 0; k < days; ++k) {
        out += format_date(first + std::chrono::days{k}) + "," + region;
        for (int i = 0; i < 16; ++i) out += "," + std::to_string(std::min(level, kIndicatorMax[static_cast<std::size_t>(i)]));
        for (int i = 0; i < 4; ++i) out += "," + format_number(index);
        out += "," + std::to_string(cases) + ",0\n";
    }
    return out;
}

std::string trends_rows(const std::string& region, Date first, int weeks, double volume) {
    std::string out;
    for (int w = 0; w < weeks; ++w) {
        for (const auto& [term, group] : testing_support::fixture_terms()) {
            out += format_date(first + std::chrono::days{7 * w}) + "," + region + "," + term + "," +
                   format_number(volume) + "\n";
        }
    }
    return out;
}

GroupingMap fixture_grouping() {
    std::string text = "term,group\n";
    for (const auto& [t, g] : testing_support::fixture_terms()) text += t + "," + g + "\n";
    std::istringstream in(text);
    return parse_groupings(in, "groupings.csv");
}

}  // namespace

TEST_CASE("csv reader handles quoting, CRLF and BOM") {
    std::istringstream in("\xEF\xBB\xBF" "a,b\r\n\"x, y\",\"say \"\"hi\"\"\"\r\n\"multi\nline\",2\n");
    CsvReader r(in, "t.csv");
    std::vector<std::string> f;
    REQUIRE(r.next(f));
    CHECK(f == std::vector<std::string>{"a", "b"});
    REQUIRE(r.next(f));
    CHECK(f == std::vector<std::string>{"x, y", "say \"hi\""});
    CHECK(r.line() == 2);
    REQUIRE(r.next(f));
    CHECK(f == std::vector<std::string>{"multi\nline", "2"});
    CHECK_FALSE(r.next(f));

    std::ostringstream out;
    write_csv_row(out, {"plain", "with,comma", "q\"uote", ""});
    CHECK(out.str() == "plain,\"with,comma\",\"q\"\"uote\",\n");
}

TEST_CASE("number formatting round-trips and marks missing values") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(5.25) == "5.25");
    CHECK(format_number(std::nan("")) == "NA");
    CHECK(format_number(std::optional<double>{}) == "NA");
    CHECK(parse_number(format_number(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(parse_number(" 2.5 ") == 2.5);
    CHECK_FALSE(parse_number("2.5x"));
    CHECK_FALSE(parse_number(""));
}

TEST_CASE("parse_events") {
    SUBCASE("well-formed rows") {
        std::istringstream in(
            "date,region,event_type,description\n"
            "2020-03-01,DNK,Protests,Protest against COVID-19 curfew\n"
            "2020-03-02,DNK,Protests,\"march, over climate policy\"\n"
            "2020-03-09,DNK,Riots,anti-Coronavirus-measures rally\n");
        const auto parsed = parse_events(in, "events.csv");
        REQUIRE(parsed.records.size() == 3);
        CHECK(parsed.records[1].description == "march, over climate policy");
        CHECK(parsed.records[2].date == ymd(2020, 3, 9));
    }
    SUBCASE("bad month names the line") {
        std::istringstream in(
            "date,region,event_type,description\n"
            "2020-03-01,DNK,Protests,x\n"
            "2020-13-01,DNK,Protests,y\n");
        try {
            parse_events(in, "events.csv");
            FAIL("expected a parse error");
        } catch (const DataError& e) {
            CHECK(e.line() == 3);
            CHECK(std::string(e.what()).find("events.csv:3") != std::string::npos);
        }
    }
    SUBCASE("header only") {
        std::istringstream in("date,region,event_type,description\n");
        CHECK(parse_events(in, "events.csv").records.empty());
    }
    SUBCASE("window drops and counts") {
        std::istringstream in(
            "date,region,event_type,description\n"
            "2019-12-31,DNK,Protests,covid\n"
            "2020-03-01,DNK,Protests,covid\n"
            "2022-01-01,DNK,Protests,covid\n");
        const auto parsed = parse_events(in, "events.csv", StudyWindow{ymd(2020, 1, 1), ymd(2021, 12, 31)});
        CHECK(parsed.records.size() == 1);
        CHECK(parsed.dropped_outside_window == 2);
    }
    SUBCASE("missing column") {
        std::istringstream in("date,region,description\n2020-03-01,DNK,x\n");
        CHECK_THROWS_AS(parse_events(in, "events.csv"), DataError);
    }
}

TEST_CASE("filter_covid matches case-insensitive substrings") {
    const std::vector<EventRecord> events{
        {ymd(2020, 3, 1), "A", "Protests", "Protest against COVID-19 curfew"},
        {ymd(2020, 3, 1), "A", "Protests", "march over climate policy"},
        {ymd(2020, 3, 1), "A", "Protests", "anti-Coronavirus-measures rally"},
        {ymd(2020, 3, 1), "A", "Protests", "CoViD passes"},
        {ymd(2020, 3, 1), "A", "Protests", "corona virus"},
    };
    const auto kept = filter_covid(events);
    REQUIRE(kept.size() == 3);
    CHECK(kept[0].description == events[0].description);
    CHECK(kept[1].description == events[2].description);
    CHECK(kept[2].description == events[3].description);
}

TEST_CASE("parse_policy reads by header and treats blanks as zero") {
    std::string text = "V1,date,region,C1,C2,C3,C4,C5,C6,C7,C8,E1,E2,E3,H1,H2,H3,H6,H7,H8,"
                       "stringency,gov_response,containment_health,econ_support,cases,deaths\n";
    text += "9,2020-03-01,DNK,3,,2,4,2,3,2,4,2,2,500,2,3,2,4,5,3,55.5,40,41.25,100,12,1\n";
    std::istringstream in(text);
    const auto p = parse_policy(in, "policy.csv");
    REQUIRE(p.records.size() == 1);
    const auto& r = p.records[0];
    CHECK(r.indicators[0] == 3.0);
    CHECK(r.indicators[1] == 0.0);
    CHECK(r.indicators[14] == 5.0);
    CHECK(r.indices[0] == 55.5);
    CHECK(r.indices[2] == 41.25);
    CHECK(r.cases == 12.0);

    SUBCASE("indicator out of range") {
        std::istringstream bad(policy_header() + "2020-03-01,DNK,4,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,1,1,1,1,0,0\n");
        CHECK_THROWS_AS(parse_policy(bad, "policy.csv"), DataError);
    }
    SUBCASE("index above 100") {
        std::istringstream bad(policy_header() + "2020-03-01,DNK,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,101,1,1,1,0,0\n");
        CHECK_THROWS_AS(parse_policy(bad, "policy.csv"), DataError);
    }
    SUBCASE("missing indicator column") {
        std::istringstream bad("date,region,C1\n2020-03-01,DNK,1\n");
        CHECK_THROWS_AS(parse_policy(bad, "policy.csv"), DataError);
    }
}

TEST_CASE("parse_trends and groupings validate their ranges") {
    std::istringstream ok("week_start,region,term,volume\n2020-01-05,DNK,lockdown,55\n");
    CHECK(parse_trends(ok, "trends.csv").at(0).volume == 55.0);
    std::istringstream high("week_start,region,term,volume\n2020-01-05,DNK,lockdown,101\n");
    CHECK_THROWS_AS(parse_trends(high, "trends.csv"), DataError);
    std::istringstream monday("week_start,region,term,volume\n2020-01-06,DNK,lockdown,1\n");
    CHECK_THROWS_AS(parse_trends(monday, "trends.csv"), DataError);

    std::istringstream bad_group("term,group\nlockdown,sports\n");
    CHECK_THROWS_AS(parse_groupings(bad_group, "groupings.csv"), DataError);
    std::istringstream twice("term,group\nlockdown,lockdown\nlockdown,covid\n");
    CHECK_THROWS_AS(parse_groupings(twice, "groupings.csv"), DataError);
}

TEST_CASE("parse_regions requires positive populations") {
    std::istringstream ok("subregion,region,population\nCA,US_West,39500000\nOR,US_West,4200000\nDNK,DNK,5800000\n");
    const auto r = parse_regions(ok, "regions.csv");
    CHECK(r.regions() == std::vector<std::string>{"DNK", "US_West"});
    CHECK(r.members("US_West").size() == 2);
    CHECK(r.find("OR")->population == 4200000.0);

    std::istringstream missing("subregion,region,population\nCA,US_West,\n");
    CHECK_THROWS_AS(parse_regions(missing, "regions.csv"), DataError);
    std::istringstream zero("subregion,region,population\nCA,US_West,0\n");
    CHECK_THROWS_AS(parse_regions(zero, "regions.csv"), DataError);
}

TEST_CASE("build_trends_groups averages available terms") {
    const auto grouping = fixture_grouping();
    const Date w0 = ymd(2020, 1, 5);
    std::vector<TrendsRecord> recs{
        {w0, "DNK", "lockdown", 10.0},
        {w0, "DNK", "stay at home", 30.0},
        {w0, "DNK", "face mask", 42.0},
        {w0 + std::chrono::days{7}, "DNK", "lockdown", 8.0},
    };
    const auto groups = build_trends_groups(recs, grouping, "DNK");
    REQUIRE(groups.size() == 7);
    auto find = [&](const std::string& name) {
        for (const auto& g : groups) {
            if (g.variable == name) return g;
        }
        FAIL("missing group " << name);
        return groups[0];
    };
    CHECK(find("trends_lockdown").values == std::vector<double>{20.0, 8.0});
    CHECK(find("trends_mask").values == std::vector<double>{42.0, 0.0});
    CHECK(find("trends_school").values == std::vector<double>{0.0, 0.0});

    recs.push_back({w0, "DNK", "quarantini", 3.0});
    CHECK_THROWS_WITH_AS(build_trends_groups(recs, grouping, "DNK"),
                         doctest::Contains("quarantini"), std::invalid_argument);
}

TEST_CASE("predictor roster has 29 sorted names") {
    const auto& roster = predictor_roster();
    CHECK(roster.size() == kPredictorCount);
    CHECK(std::is_sorted(roster.begin(), roster.end()));
    CHECK(std::find(roster.begin(), roster.end(), "trends_economic") != roster.end());
    CHECK(std::find(roster.begin(), roster.end(), "E3") == roster.end());
}

TEST_CASE("build_region_dataset rolls states up to a region") {
    const Date start = ymd(2020, 1, 5);
    const int weeks = 20;
    std::istringstream regions_in("subregion,region,population\nAA,R,1\nBB,R,3\nCC,S,2\n");
    const auto regions = parse_regions(regions_in, "regions.csv");
    const auto grouping = fixture_grouping();

    std::istringstream policy_in(policy_header() + policy_rows("AA", start, 7 * weeks, 4, 20.0, 5) +
                                 policy_rows("BB", start, 7 * weeks, 8, 60.0, 1) +
                                 policy_rows("CC", start, 7 * weeks, 1, 50.0, 2));
    const auto policy = parse_policy(policy_in, "policy.csv");
    std::istringstream trends_in("week_start,region,term,volume\n" + trends_rows("AA", start, weeks, 40.0) +
                                 trends_rows("BB", start, weeks, 80.0) + trends_rows("CC", start, weeks, 5.0));
    const auto trends = parse_trends(trends_in, "trends.csv");

    // First COVID protest lands in week 10; a non-COVID event earlier is ignored.
    std::string ev = "date,region,event_type,description\n";
    ev += format_date(start + std::chrono::days{7 * 3 + 2}) + ",AA,Protests,climate march\n";
    int expected_total = 0;
    for (int w = 10; w < weeks; ++w) {
        for (int k = 0; k < w % 4; ++k) {
            ev += format_date(start + std::chrono::days{7 * w + k}) + "," + (k % 2 ? "AA" : "BB") +
                  ",Protests,COVID rules protest\n";
            ++expected_total;
        }
        if (w == 10) {
            ev += format_date(start + std::chrono::days{7 * w + 6}) + ",AA,Protests,covid\n";
            ++expected_total;
        }
    }
    ev += format_date(start + std::chrono::days{7 * 12}) + ",CC,Protests,covid\n";
    std::istringstream events_in(ev);
    const auto events = parse_events(events_in, "events.csv");

    const IngestInputs inputs{events.records, policy.records, trends, &grouping, &regions, std::nullopt};
    const auto ds = build_region_dataset(inputs, "R");

    CHECK(ds.frame.n_predictors() == 29);
    CHECK(ds.frame.predictor_names() == predictor_roster());
    CHECK(ds.frame.first_week() == WeekIndex(10));
    CHECK(ds.frame.last_week() == WeekIndex(weeks - 1));
    CHECK(ds.frame.target()[0] == 3.0);
    CHECK(std::accumulate(ds.target.values.begin(), ds.target.values.end(), 0.0) == expected_total);

    // Weighted means with populations 1 and 3.
    CHECK(ds.frame.predictor("C1")[0] == doctest::Approx((3.0 + 3 * 3.0) / 4.0));
    CHECK(ds.frame.predictor("C4")[0] == doctest::Approx((4.0 + 3 * 4.0) / 4.0));
    CHECK(ds.frame.predictor("H7")[0] == doctest::Approx((4.0 + 3 * 5.0) / 4.0));
    CHECK(ds.frame.predictor("stringency")[0] == doctest::Approx(50.0));
    CHECK(ds.frame.predictor("trends_mask")[3] == doctest::Approx(70.0));
    // Case counts add across states: 7 * (5 + 1).
    CHECK(ds.frame.predictor("cases")[0] == 42.0);

    for (const auto& name : predictor_roster()) {
        if (name.starts_with("trends_") || name == "stringency" || name == "gov_response" ||
            name == "containment_health" || name == "econ_support") {
            for (double v : ds.frame.predictor(name)) {
                CHECK(v >= 0.0);
                CHECK(v <= 100.0);
            }
        }
    }

    const auto single = build_region_dataset(inputs, "S");
    CHECK(single.frame.first_week() == WeekIndex(12));
    CHECK(single.frame.predictor("C1")[0] == 1.0);
    CHECK(single.frame.predictor("trends_general")[0] == 5.0);
}

TEST_CASE("build_region_dataset reports missing pieces") {
    const Date start = ymd(2020, 1, 5);
    std::istringstream regions_in("subregion,region,population\nAA,R,1\nBB,R,3\n");
    const auto regions = parse_regions(regions_in, "regions.csv");
    const auto grouping = fixture_grouping();
    std::istringstream policy_in(policy_header() + policy_rows("AA", start, 70, 1, 1.0, 0));
    const auto policy = parse_policy(policy_in, "policy.csv");
    std::istringstream trends_in("week_start,region,term,volume\n" + trends_rows("AA", start, 10, 1.0));
    const auto trends = parse_trends(trends_in, "trends.csv");
    std::istringstream events_in("date,region,event_type,description\n2020-01-06,AA,Protests,covid\n");
    const auto events = parse_events(events_in, "events.csv");
    const IngestInputs inputs{events.records, policy.records, trends, &grouping, &regions, std::nullopt};
    CHECK_THROWS_WITH_AS(build_region_dataset(inputs, "R"), doctest::Contains("BB"), std::invalid_argument);
    CHECK_THROWS_AS(build_region_dataset(inputs, "nowhere"), std::invalid_argument);
}
