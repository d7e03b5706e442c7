#include <gtest/gtest.h>

#include <cmath>

#include "navnet/features.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace navnet;
using navnet::testing::g1;
using navnet::testing::g1_store;
using navnet::testing::TempDir;

namespace {

void expect_near_all(const FeatureVector& got, const FeatureVector& want, FeatureMode mode, double tol) {
    const auto a = got.values(mode), b = want.values(mode);
    const auto names = traffic_feature_names(mode);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << names[i];
}

LabelStore random_labels(Rng& rng, const NavigationGraph& g) {
    LabelStore s;
    for (const auto& d : g.nodes()) {
        const double u = rng.uniform();
        if (u < 0.25) s.merge({d, DomainClass::misinformation, rng.bernoulli(0.3), "t", ""});
        else if (u < 0.5) s.merge({d, DomainClass::authoritative, false, "t", ""});
    }
    return s;
}

}  // namespace

TEST(Features, G1DomainA) {
    const auto f = extract_features(g1(), g1_store(), default_registry(), "a.example");
    EXPECT_DOUBLE_EQ(f.to_misinformation, 0.625);
    EXPECT_DOUBLE_EQ(f.to_authoritative, 0.0);
    EXPECT_DOUBLE_EQ(f.from_misinformation, 4000.0 / 13500.0);
    EXPECT_DOUBLE_EQ(f.from_google, 6000.0 / 13500.0);
    EXPECT_DOUBLE_EQ(f.from_social, 3500.0 / 13500.0);
    EXPECT_DOUBLE_EQ(f.from_bing, 0.0);
    EXPECT_DOUBLE_EQ(f.inbound_traffic_log, std::log10(13501.0));
    EXPECT_DOUBLE_EQ(f.outbound_traffic_log, std::log10(8001.0));
    EXPECT_DOUBLE_EQ(f.inbound_egonets, 1.0);   // a refers to b
    EXPECT_DOUBLE_EQ(f.outbound_egonets, 1.0);  // b refers to a
}

TEST(Features, G1DomainsCAndB) {
    const auto c = extract_features(g1(), g1_store(), default_registry(), "c.example");
    EXPECT_DOUBLE_EQ(c.from_misinformation, 1.0);
    EXPECT_DOUBLE_EQ(c.inbound_egonets, 0.0);
    EXPECT_DOUBLE_EQ(c.outbound_egonets, 1.0);
    EXPECT_DOUBLE_EQ(c.outbound_traffic_log, 0.0);
    EXPECT_DOUBLE_EQ(c.to_misinformation, 0.0);  // no outbound traffic: shares are zero
    const auto b = extract_features(g1(), g1_store(), default_registry(), "b.example");
    EXPECT_DOUBLE_EQ(b.outbound_egonets, 1.0);
    EXPECT_DOUBLE_EQ(b.to_misinformation, 1.0);
}

TEST(Features, MatchOracleOnG1) {
    const auto g = g1();
    const auto store = g1_store();
    const auto reg = default_registry();
    for (const auto& d : g.nodes())
        expect_near_all(extract_features(g, store, reg, d), oracle::features(g, store, reg, d), FeatureMode::multiclass,
                        1e-12);
}

TEST(Features, MatchOracleOnRandomGraphs) {
    Rng rng(23);
    CategoryRegistry reg = default_registry();
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<Edge> edges;
        std::vector<Domain> names{"google.com", "bing.com", "duckduckgo.com", "t.me", "msn.com", "gmail.com"};
        const std::size_t n = 8 + rng.below(20);
        for (std::size_t i = 0; i < n; ++i) names.push_back("n" + std::to_string(i) + ".example");
        for (const auto& a : names)
            for (const auto& b : names)
                if (a != b && rng.bernoulli(0.15)) edges.push_back({a, b, 3000 + static_cast<std::int64_t>(rng.below(50000))});
        const auto g = NavigationGraph::from_parts({2022, 10}, names, edges);
        const auto store = random_labels(rng, g);
        const auto m = extract_matrix(g, store, reg, g.nodes(), {FeatureMode::multiclass, false, nullptr});
        for (const auto& d : g.nodes()) {
            const auto want = oracle::features(g, store, reg, d).values(FeatureMode::multiclass);
            const auto row = m.values.row(*m.row_of(d));
            for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(row[i], want[i], 1e-12) << d << " col " << i;
        }
    }
}

TEST(Features, SharesAreBoundedAndPartitionWhenDisjoint) {
    Rng rng(8);
    const auto g = navnet::testing::random_graph(rng, 30, 0.2);
    LabelStore store;
    for (std::size_t i = 0; i < g.node_count(); i += 2)
        store.merge({g.name(static_cast<NodeId>(i)), i % 4 ? DomainClass::misinformation : DomainClass::authoritative, false, "t", ""});
    for (const auto& d : g.nodes()) {
        const auto f = extract_features(g, store, default_registry(), d);
        for (const double v : f.values(FeatureMode::binary)) EXPECT_GE(v, 0.0);
        EXPECT_LE(f.to_misinformation + f.to_authoritative, 1.0 + 1e-12);
        EXPECT_LE(f.from_misinformation + f.from_authoritative, 1.0 + 1e-12);
    }
}

TEST(Features, SchemaColumnsPerMode) {
    const auto b = feature_schema(FeatureMode::binary);
    const auto m = feature_schema(FeatureMode::multiclass);
    EXPECT_EQ(b.columns.size(), 20u);
    EXPECT_EQ(m.columns.size(), 22u);
    EXPECT_FALSE(b.index_of("to_propaganda"));
    EXPECT_EQ(m.index_of("to_propaganda"), 4u);
    EXPECT_EQ(b.columns.front(), "inbound_traffic_log");
    EXPECT_EQ(b.columns.back(), "outbound_egonets");
    EXPECT_NE(b.version, m.version);
    EXPECT_EQ(FeatureVector{}.values(FeatureMode::binary).size(), b.columns.size());
}

TEST(ExtractMatrix, RowsSortedAndMissingReportedOrZeroFilled) {
    const auto g = g1();
    const std::vector<Domain> want{"c.example", "ghost.example", "a.example", "a.example"};
    const auto m = extract_matrix(g, g1_store(), default_registry(), want);
    EXPECT_EQ(m.domains, (std::vector<Domain>{"a.example", "c.example"}));
    EXPECT_EQ(m.missing, (std::vector<Domain>{"ghost.example"}));
    EXPECT_EQ(m.month, "2022-10");

    const auto z = extract_matrix(g, g1_store(), default_registry(), want, {FeatureMode::binary, true, nullptr});
    ASSERT_EQ(z.domains.size(), 3u);
    EXPECT_EQ(z.zero_filled, (std::vector<Domain>{"ghost.example"}));
    for (const double v : z.values.row(*z.row_of("ghost.example"))) EXPECT_EQ(v, 0.0);
}

TEST(ExtractMatrix, AgreesWithSingleDomainExtraction) {
    Rng rng(2);
    const auto g = navnet::testing::random_graph(rng, 50, 0.1);
    const auto store = random_labels(rng, g);
    const auto m = extract_matrix(g, store, default_registry(), g.nodes(), {FeatureMode::multiclass, false, nullptr});
    for (const auto& d : g.nodes()) {
        const auto one = extract_features(g, store, default_registry(), d).values(FeatureMode::multiclass);
        const auto row = m.values.row(*m.row_of(d));
        EXPECT_TRUE(std::equal(one.begin(), one.end(), row.begin()));
    }
}

TEST(HostBlock, OneHotEncodesTopValuesOtherAndUnknown) {
    HostTable table{{"a.example", {"godaddy", "2020", "US", "yes"}},
                    {"b.example", {"godaddy", "2019", "RU", ""}},
                    {"c.example", {"namecheap", "2020", "US", "no"}}};
    const auto enc = HostEncoder::fit(table, 1);
    // Top value per field, plus <other> and <unknown>.
    EXPECT_EQ(enc.width(), 12u);
    std::vector<double> row;
    enc.encode(&table.at("c.example"), row);
    EXPECT_EQ(row, (std::vector<double>{0, 1, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0}));
    row.clear();
    enc.encode(nullptr, row);
    for (std::size_t f = 0; f < 4; ++f) EXPECT_EQ(row[f * 3 + 2], 1.0);

    HostBlock block{table, enc};
    const auto m = extract_matrix(g1(), g1_store(), default_registry(), {"a.example"}, {FeatureMode::binary, false, &block});
    EXPECT_EQ(m.schema.columns.size(), 32u);
    EXPECT_NE(m.schema.version.find("+host"), std::string::npos);
}

TEST(FeatureCsv, RoundTripsExactly) {
    TempDir dir;
    Rng rng(9);
    const auto g = navnet::testing::random_graph(rng, 25, 0.15);
    const auto store = random_labels(rng, g);
    const auto m = extract_matrix(g, store, default_registry(), g.nodes());
    write_file(dir.file("f.csv"), feature_matrix_to_csv(m));
    const auto back = feature_matrix_from_csv(dir.file("f.csv"));
    EXPECT_EQ(back.schema, m.schema);
    EXPECT_EQ(back.month, m.month);
    EXPECT_EQ(back.domains, m.domains);
    EXPECT_EQ(back.values, m.values);
    const auto text = read_lines(dir.file("f.csv"));
    EXPECT_EQ(text[0], "# schema: navnet-features/1/binary");
    EXPECT_EQ(text[1], "# month: 2022-10");
}
