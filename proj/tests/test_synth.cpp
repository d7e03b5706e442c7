#include <gtest/gtest.h>

#include <fstream>

#include "navnet/pipeline.hpp"
#include "navnet/synth.hpp"
#include "support.hpp"

using namespace navnet;

namespace {

SynthConfig small_config() {
    SynthConfig c;
    c.n_misinformation = 50;
    c.n_propaganda = 10;
    c.n_authoritative = 200;
    c.n_unlabeled_misinfo = 20;
    c.n_unlabeled_propaganda = 4;
    c.n_benign_unlabeled = 500;
    return c;
}

}  // namespace

TEST(Synth, ShipsExactlyTheConfiguredClassCounts) {
    const auto data = generate(small_config());
    const auto counts = data.label_store().counts();
    EXPECT_EQ(counts.misinformation, 50u);
    EXPECT_EQ(counts.propaganda, 10u);
    EXPECT_EQ(counts.authoritative, 200u);
    std::size_t planted = 0, planted_prop = 0, unlabeled_benign = 0;
    for (const auto& s : data.sites) {
        planted += s.kind == SiteKind::planted;
        planted_prop += s.kind == SiteKind::planted && s.propaganda;
        unlabeled_benign += s.kind == SiteKind::benign || s.kind == SiteKind::fringe;
    }
    EXPECT_EQ(planted, 20u);
    EXPECT_EQ(planted_prop, 4u);
    EXPECT_EQ(unlabeled_benign, 500u);
    EXPECT_TRUE(std::is_sorted(data.sites.begin(), data.sites.end(),
                               [](const auto& a, const auto& b) { return a.domain < b.domain; }));
}

TEST(Synth, SameSeedIsByteIdenticalDifferentSeedIsNot) {
    auto c = small_config();
    const auto a = generate(c), b = generate(c);
    EXPECT_EQ(records_to_csv(a.records), records_to_csv(b.records));
    EXPECT_EQ(labels_to_csv(a.labels), labels_to_csv(b.labels));
    EXPECT_EQ(truth_to_csv(a.sites), truth_to_csv(b.sites));
    c.seed = 8;
    EXPECT_NE(records_to_csv(generate(c).records), records_to_csv(a.records));
}

TEST(Synth, RecordsAreValidAndBuildIntoGraphs) {
    auto c = small_config();
    c.months = 4;
    c.first_month = "2022-11";
    const auto data = generate(c);
    ASSERT_EQ(data.records.size(), 4u);
    EXPECT_EQ(data.records.rbegin()->first.str(), "2023-02");
    for (const auto& [month, rows] : data.records) {
        for (const auto& r : rows) {
            EXPECT_EQ(r.month, month);
            EXPECT_NE(r.referrer, r.target);
            EXPECT_GE(r.page_views, 1);
            EXPECT_EQ(canonicalize_domain(r.referrer), r.referrer);
        }
        EXPECT_EQ(aggregate_month(rows).at(month), rows);  // already aggregated
    }
    const auto graphs = build_graphs(data.records, 3000);
    for (const auto& [m, g] : graphs) EXPECT_GT(g.edge_count(), 0u);
}

TEST(Synth, MisinformationSitesSendTrafficToEachOther) {
    SynthConfig c;  // default config
    const auto data = generate(c);
    const auto store = data.label_store();
    const auto graphs = build_graphs(data.records, 3000);
    const auto& g = graphs.begin()->second;
    const auto fm = extract_matrix(g, store, default_registry(), keys_of(store.labels()));
    const auto col = *fm.schema.index_of("to_misinformation");
    double mis = 0, auth = 0;
    std::size_t n_mis = 0, n_auth = 0;
    for (std::size_t r = 0; r < fm.domains.size(); ++r) {
        if (store.is_misinformation(fm.domains[r])) {
            mis += fm.values(r, col);
            ++n_mis;
        } else {
            auth += fm.values(r, col);
            ++n_auth;
        }
    }
    EXPECT_GE(mis / static_cast<double>(n_mis), 0.5);
    EXPECT_LE(auth / static_cast<double>(n_auth), 0.05);
}

TEST(Synth, ConfigValidationAndJsonRoundTrip) {
    auto c = small_config();
    c.intra_misinfo_share = 0.7;
    const auto back = SynthConfig::from_json(c.to_json());
    EXPECT_EQ(back.to_json(), c.to_json());
    auto bad = c;
    bad.n_propaganda = 60;
    EXPECT_THROW(bad.validate(), Error);
    bad = c;
    bad.intra_misinfo_share = 1.5;
    EXPECT_THROW(bad.validate(), Error);
    bad = c;
    bad.n_authoritative = -1;
    EXPECT_THROW(bad.validate(), Error);
    EXPECT_THROW(SynthConfig::from_json({{"version", 2}}), Error);
}

TEST(Synth, ShippedBenchmarkConfigsLoad) {
    for (const char* name : {"binary.json", "multiclass.json", "deploy.json"}) {
        const auto path = std::string(NAVNET_SOURCE_DIR) + "/data/bench/" + name;
        std::ifstream in(path);
        ASSERT_TRUE(in) << path;
        EXPECT_NO_THROW(SynthConfig::from_json(nlohmann::json::parse(in))) << name;
    }
}
