#include <gtest/gtest.h>

#include <map>
#include <set>

#include "navnet/ingest.hpp"
#include "support.hpp"

using namespace navnet;
using navnet::testing::TempDir;

namespace {

std::vector<TrafficRecord> random_records(Rng& rng, std::size_t n, int domains, std::int64_t max_views) {
    std::vector<TrafficRecord> out;
    while (out.size() < n) {
        const auto a = rng.below(static_cast<std::uint64_t>(domains));
        const auto b = rng.below(static_cast<std::uint64_t>(domains));
        if (a == b) continue;
        const Month m{2022, 10 + static_cast<int>(rng.below(3))};
        out.push_back({m, "d" + std::to_string(a) + ".example", "d" + std::to_string(b) + ".example",
                       1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(max_views)))});
    }
    return out;
}

// Survivors by removing one violating domain at a time.
std::set<Domain> floor_survivors_oracle(const std::vector<TrafficRecord>& records, std::int64_t floor) {
    std::set<Domain> alive;
    for (const auto& r : records) {
        alive.insert(r.referrer);
        alive.insert(r.target);
    }
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& d : alive) {
            std::int64_t total = 0;
            for (const auto& r : records)
                if (alive.count(r.referrer) && alive.count(r.target) && (r.referrer == d || r.target == d))
                    total += r.page_views;
            if (total <= floor) {
                alive.erase(d);
                changed = true;
                break;
            }
        }
    }
    return alive;
}

}  // namespace

TEST(Month, ParsesAndFormats) {
    EXPECT_EQ(Month::parse("2022-10")->str(), "2022-10");
    EXPECT_EQ(Month::parse("2023-01")->month, 1);
    EXPECT_FALSE(Month::parse("2022-13"));
    EXPECT_FALSE(Month::parse("2022/10"));
    EXPECT_FALSE(Month::parse("22-10"));
    EXPECT_LT(*Month::parse("2022-12"), *Month::parse("2023-01"));
    EXPECT_THROW(Month::parse_or_throw("bad"), Error);
}

TEST(Canonicalize, StripsSchemePathPortAndCase) {
    EXPECT_EQ(canonicalize_domain("https://WWW.Example.COM:443/a/b?q=1"), "www.example.com");
    EXPECT_EQ(canonicalize_domain("  example.org. "), "example.org");
    EXPECT_EQ(canonicalize_domain("user@host.net/x"), "host.net");
    EXPECT_EQ(canonicalize_domain("bad domain"), "");
    AliasTable aliases{{"www.rt.com", "rt.com"}};
    EXPECT_EQ(canonicalize_domain("http://www.rt.com/news", aliases), "rt.com");
}

TEST(ParseLog, CsvSkipsAndCountsMalformedRows) {
    TempDir dir;
    write_file(dir.file("log.csv"),
               "month,referrer,target,page_views\n"
               "2022-10,google.com,a.example,100\n"
               "2022-10,a.example,a.example,5\n"      // self loop
               "2022-10,b.example,a.example,-3\n"     // negative views
               "2022-13,b.example,a.example,3\n"      // bad month
               "2022-10,b.example,a.example\n"        // short row
               "2022-11,HTTPS://B.example/x,a.example,7\n");
    const auto r = parse_log(dir.file("log.csv"), LogFormat::csv);
    ASSERT_EQ(r.records.size(), 2u);
    EXPECT_EQ(r.malformed, 4u);
    EXPECT_EQ(r.records[1].referrer, "b.example");
    EXPECT_EQ(r.records[1].month.str(), "2022-11");
}

TEST(ParseLog, CsvTimestampColumnBucketsByMonth) {
    TempDir dir;
    write_file(dir.file("log.csv"), "timestamp,referrer,target,page_views\n2022-10-31T23:59:59Z,x.example,y.example,4\n");
    const auto r = parse_log(dir.file("log.csv"), LogFormat::csv);
    ASSERT_EQ(r.records.size(), 1u);
    EXPECT_EQ(r.records[0].month.str(), "2022-10");
}

TEST(ParseLog, JsonlAcceptsStringOrIntegerViews) {
    TempDir dir;
    write_file(dir.file("log.jsonl"),
               "{\"month\":\"2022-10\",\"referrer\":\"x.example\",\"target\":\"y.example\",\"page_views\":4}\n"
               "{\"timestamp\":\"2022-11-02\",\"referrer\":\"x.example\",\"target\":\"y.example\",\"page_views\":\"9\"}\n"
               "not json\n"
               "{\"month\":\"2022-10\",\"referrer\":\"x.example\"}\n");
    const auto r = parse_log(dir.file("log.jsonl"), LogFormat::jsonl);
    EXPECT_EQ(r.records.size(), 2u);
    EXPECT_EQ(r.malformed, 2u);
}

TEST(ParseLog, EmptyOrAllMalformedIsEmptyInput) {
    TempDir dir;
    write_file(dir.file("empty.csv"), "");
    write_file(dir.file("bad.csv"), "month,referrer,target,page_views\n2022-10,a.example,a.example,1\n");
    try {
        parse_log(dir.file("empty.csv"), LogFormat::csv);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::empty_input);
    }
    EXPECT_THROW(parse_log(dir.file("bad.csv"), LogFormat::csv), Error);
}

TEST(ParseLog, MissingHeaderColumnIsParseError) {
    TempDir dir;
    write_file(dir.file("log.csv"), "month,referrer,views\n2022-10,a.example,1\n");
    try {
        parse_log(dir.file("log.csv"), LogFormat::csv);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::parse);
    }
}

TEST(Aggregate, MatchesNaiveSumAndIsOrderIndependent) {
    Rng rng(11);
    auto records = random_records(rng, 2000, 30, 500);
    std::map<std::tuple<Month, Domain, Domain>, std::int64_t> oracle;
    for (const auto& r : records) oracle[{r.month, r.referrer, r.target}] += r.page_views;

    const auto monthly = aggregate_month(records);
    std::size_t rows = 0;
    for (const auto& [month, list] : monthly) {
        for (const auto& r : list) {
            EXPECT_EQ(r.month, month);
            EXPECT_EQ(r.page_views, (oracle.at({month, r.referrer, r.target})));
            ++rows;
        }
    }
    EXPECT_EQ(rows, oracle.size());

    rng.shuffle(records);
    EXPECT_EQ(aggregate_month(records), monthly);
}

TEST(PrivacyFloor, IsStrictAndCascades) {
    const Month m{2022, 10};
    // c's only traffic is 10 views with b; dropping c pushes b to exactly 100.
    std::vector<TrafficRecord> rows{{m, "a.example", "b.example", 100}, {m, "b.example", "c.example", 10},
                                    {m, "a.example", "d.example", 500}};
    const auto kept = apply_privacy_floor(rows, 100);
    ASSERT_EQ(kept.size(), 1u);
    EXPECT_EQ(kept[0].target, "d.example");
    EXPECT_THROW(apply_privacy_floor(rows, 0), Error);
}

TEST(PrivacyFloor, MatchesOracleAndIsIdempotent) {
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        auto records = aggregate_month(random_records(rng, 60, 25, 400)).begin()->second;
        const std::int64_t floor = 200 + static_cast<std::int64_t>(rng.below(600));
        const auto kept = apply_privacy_floor(records, floor);
        const auto alive = floor_survivors_oracle(records, floor);
        std::size_t expected = 0;
        for (const auto& r : records) expected += alive.count(r.referrer) && alive.count(r.target);
        EXPECT_EQ(kept.size(), expected);
        for (const auto& r : kept) {
            EXPECT_TRUE(alive.count(r.referrer));
            EXPECT_TRUE(alive.count(r.target));
        }
        EXPECT_EQ(apply_privacy_floor(kept, floor), kept);
    }
}

TEST(RecordsCsv, RoundTripsThroughParser) {
    TempDir dir;
    Rng rng(3);
    const auto monthly = aggregate_month(random_records(rng, 300, 20, 1000));
    write_file(dir.file("r.csv"), records_to_csv(monthly));
    EXPECT_EQ(aggregate_month(parse_log(dir.file("r.csv"), LogFormat::csv).records), monthly);
}

TEST(Aliases, LoadsAndRejectsBadRows) {
    TempDir dir;
    write_file(dir.file("a.csv"), "from_host,to_host\nwww.rt.com,rt.com\n# comment\n");
    EXPECT_EQ(load_aliases(dir.file("a.csv")).at("www.rt.com"), "rt.com");
    write_file(dir.file("b.csv"), "from_host,to_host\nonly-one-field\n");
    EXPECT_THROW(load_aliases(dir.file("b.csv")), Error);
}
