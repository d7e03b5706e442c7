#include <gtest/gtest.h>

#include <set>

#include "navnet/deploy.hpp"
#include "navnet/ml/evaluation.hpp"
#include "navnet/pipeline.hpp"
#include "navnet/synth.hpp"
#include "support.hpp"

using namespace navnet;
using navnet::testing::g1;

namespace {

GraphSet g1_set() {
    GraphSet s;
    s.emplace(Month{2022, 10}, g1());
    return s;
}

// Every assignment of {unlabeled, misinformation, authoritative, propaganda}
// to the G1 nodes.
std::vector<LabelStore> all_g1_labelings() {
    const auto nodes = g1().nodes();
    std::vector<LabelStore> out;
    std::size_t total = 1;
    for (std::size_t i = 0; i < nodes.size(); ++i) total *= 4;
    for (std::size_t code = 0; code < total; ++code) {
        LabelStore s;
        std::size_t c = code;
        for (const auto& d : nodes) {
            switch (c % 4) {
                case 1: s.merge({d, DomainClass::misinformation, false, "t", ""}); break;
                case 2: s.merge({d, DomainClass::authoritative, false, "t", ""}); break;
                case 3: s.merge({d, DomainClass::misinformation, true, "t", ""}); break;
                default: break;
            }
            c /= 4;
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<Domain> candidates_or_empty(const GraphSet& g, const LabelStore& s, const DeploymentStrategy& st) {
    const bool has_seed = st.seeds == SeedSet::propaganda_only ? !s.propaganda_domains().empty()
                                                               : !s.misinformation_domains().empty();
    return has_seed ? select_candidates(g, s, default_registry(), st) : std::vector<Domain>{};
}

}  // namespace

TEST(CandidateProperties, ExclusionsHoldForEveryG1Labeling) {
    const auto graphs = g1_set();
    const auto reg = default_registry();
    for (const auto& store : all_g1_labelings()) {
        for (const auto kind : {StrategyKind::one_hop_egonet, StrategyKind::two_hop_egonet}) {
            DeploymentStrategy st;
            st.kind = kind;
            for (const auto& d : candidates_or_empty(graphs, store, st)) {
                EXPECT_FALSE(store.is_labeled(d));
                EXPECT_FALSE(reg.contains(d));
                const auto t = node_totals(graphs.begin()->second, d);
                EXPECT_GE(t.inbound + t.outbound, st.traffic_floor);
            }
        }
    }
}

TEST(CandidateProperties, GrowingTheLabelSetOnlyGrowsCandidates) {
    // Labeling one more domain as misinformation keeps every previous
    // candidate except the newly labeled domain itself.
    const auto graphs = g1_set();
    const auto nodes = g1().nodes();
    for (const auto& store : all_g1_labelings()) {
        for (const auto seeds : {SeedSet::all_misinformation, SeedSet::propaganda_only}) {
            DeploymentStrategy st;
            st.seeds = seeds;
            const auto before = candidates_or_empty(graphs, store, st);
            for (const auto& d : nodes) {
                if (store.is_labeled(d)) continue;
                auto grown = store;
                grown.merge({d, DomainClass::misinformation, seeds == SeedSet::propaganda_only, "t", ""});
                const auto after = candidates_or_empty(graphs, grown, st);
                const std::set<Domain> after_set(after.begin(), after.end());
                for (const auto& c : before)
                    if (c != d) { EXPECT_TRUE(after_set.count(c)) << c << " lost after labeling " << d; }
            }
        }
    }
}

TEST(CandidateProperties, OneHopIsSubsetOfTwoHopOnRandomGraphs) {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = navnet::testing::random_graph(rng, 60, 0.04, 10000);
        GraphSet gs;
        gs.emplace(g.month(), g);
        LabelStore store;
        for (int i = 0; i < 5; ++i)
            store.merge({g.name(static_cast<NodeId>(rng.below(g.node_count()))), DomainClass::misinformation, false, "t", ""});
        DeploymentStrategy one, two;
        two.kind = StrategyKind::two_hop_egonet;
        const auto a = select_candidates(gs, store, default_registry(), one);
        const auto b = select_candidates(gs, store, default_registry(), two);
        EXPECT_TRUE(std::includes(b.begin(), b.end(), a.begin(), a.end()));
    }
}

TEST(PositiveRuleProperties, ExhaustiveOverConfidenceGrid) {
    const std::vector<double> grid{0.0, 0.25, 0.4999999, 0.5, 0.5000001, 0.75, 1.0};
    for (const double a : grid)
        for (const double b : grid)
            for (const double c : grid) {
                const std::vector<double> v{a, b, c};
                EXPECT_EQ(is_positive(v), a > 0.5 && b > 0.5 && c > 0.5);
            }
}

TEST(SynthProperties, FeatureMatricesAreDeterministic) {
    SynthConfig c;
    c.n_misinformation = 80;
    c.n_propaganda = 8;
    c.n_authoritative = 120;
    c.n_unlabeled_misinfo = 10;
    c.n_unlabeled_propaganda = 2;
    c.n_benign_unlabeled = 300;
    const auto run_once = [&] {
        const auto data = generate(c);
        const auto store = data.label_store();
        const auto graphs = build_graphs(data.records, 3000);
        const auto labels = labeled_classes(graphs, store, FeatureMode::binary);
        std::string all;
        for (const auto& [m, fm] : monthly_features(graphs, store, default_registry(), keys_of(labels), FeatureMode::binary))
            all += feature_matrix_to_csv(fm);
        return all;
    };
    EXPECT_EQ(run_once(), run_once());
}

TEST(SynthProperties, OneHopCandidatesAreASmallFractionOfUnlabeled) {
    SynthConfig c;
    c.n_misinformation = 100;
    c.n_propaganda = 10;
    c.n_authoritative = 300;
    c.n_unlabeled_misinfo = 30;
    c.n_unlabeled_propaganda = 3;
    c.n_benign_unlabeled = 3000;
    const auto data = generate(c);
    const auto store = data.label_store();
    const auto graphs = build_graphs(data.records, 3000);
    std::set<Domain> unlabeled;
    for (const auto& [m, g] : graphs)
        for (const auto& d : g.nodes())
            if (!store.is_labeled(d) && !default_registry().contains(d)) unlabeled.insert(d);
    const auto cands = select_candidates(graphs, store, default_registry(), {});
    EXPECT_LT(cands.size(), unlabeled.size());
}

TEST(SynthProperties, IntraCommunityShareDoesNotLowerForestPrecision) {
    // Benchmark forest precision, averaged over months, for three knob values.
    std::vector<double> precision;
    for (const double intra : {0.3, 0.5, 0.7}) {
        SynthConfig c;
        c.intra_misinfo_share = intra;
        const auto data = generate(c);
        const auto store = data.label_store();
        const auto graphs = build_graphs(data.records, 3000);
        const auto labels = labeled_classes(graphs, store, FeatureMode::binary);
        const auto features = monthly_features(graphs, store, default_registry(), keys_of(labels), FeatureMode::binary);
        ml::ModelConfig mc;
        mc.seed = 7;
        const auto cv = ml::cross_validate(mc, features, labels, features.begin()->first);
        double sum = 0;
        for (const auto& m : cv.months) sum += m.precision.value_or(0.0);
        precision.push_back(sum / static_cast<double>(cv.months.size()));
    }
    EXPECT_LE(precision[0], precision[1] + 1e-12);
    EXPECT_LE(precision[1], precision[2] + 1e-12);
}
