#include <gtest/gtest.h>

#include <set>

#include "navnet/graph.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace navnet;
using navnet::testing::g1;
using navnet::testing::random_graph;
using navnet::testing::TempDir;


TEST(BuildGraph, AppliesThresholdAndSumsDuplicates) {
    const Month m{2022, 10};
    const std::vector<TrafficRecord> rows{{m, "a.example", "b.example", 2000}, {m, "a.example", "b.example", 1000},
                                          {m, "b.example", "c.example", 2999}, {m, "c.example", "c.example", 9000}};
    const auto g = build_graph(rows, 3000);
    ASSERT_EQ(g.edge_count(), 1u);
    EXPECT_EQ(g.edges()[0], (Edge{"a.example", "b.example", 3000}));
    EXPECT_FALSE(g.contains("c.example"));
    EXPECT_EQ(g.edge_threshold(), 3000);
}

TEST(BuildGraph, RejectsEmptyAndMixedMonths) {
    try {
        build_graph({}, 3000);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::empty_input);
    }
    EXPECT_THROW(build_graph({{{2022, 10}, "a.x", "b.x", 5000}, {{2022, 11}, "a.x", "b.x", 5000}}, 3000), Error);
    EXPECT_THROW(build_graph({{{2022, 10}, "a.x", "b.x", 5000}}, 0), Error);
}

TEST(NavigationGraph, AdjacencyOfG1) {
    const auto g = g1();
    EXPECT_EQ(g.node_count(), 5u);
    EXPECT_EQ(g.edge_count(), 5u);
    const auto a = g.id_of("a.example");
    EXPECT_EQ(g.successors(a).size(), 2u);
    EXPECT_EQ(g.predecessors(a).size(), 3u);
    EXPECT_EQ(*g.weight(a, g.id_of("b.example")), 5000);
    EXPECT_FALSE(g.weight(g.id_of("c.example"), a));
    EXPECT_EQ(node_totals(g, "a.example"), (NodeTotals{13500, 8000}));
    EXPECT_THROW(g.id_of("zzz.example"), Error);
}

TEST(NavigationGraph, RejectsDuplicateAndSubThresholdEdges) {
    EXPECT_THROW(NavigationGraph::from_parts({2022, 10}, {}, {{"a.x", "b.x", 5}, {"a.x", "b.x", 6}}), Error);
    EXPECT_THROW(NavigationGraph::from_parts({2022, 10}, {}, {{"a.x", "b.x", 5}}, 10), Error);
}

TEST(Egonet, G1Neighbourhoods) {
    const auto g = g1();
    const auto out = egonet(g, "a.example", 1, Direction::outbound);
    EXPECT_EQ(out.nodes, (std::vector<Domain>{"a.example", "b.example", "c.example"}));
    const auto in = egonet(g, "a.example", 1, Direction::inbound);
    EXPECT_EQ(in.nodes, (std::vector<Domain>{"a.example", "b.example", "facebook.com", "google.com"}));
    const auto both = egonet(g, "a.example", 1, Direction::both);
    EXPECT_EQ(both.nodes.size(), 5u);
    EXPECT_EQ(both.edges.size(), 5u);
    // c has no outbound arcs: its outbound egonet is just itself.
    EXPECT_EQ(egonet(g, "c.example", 3, Direction::outbound).nodes, (std::vector<Domain>{"c.example"}));
    // Two inbound hops from c reach everything upstream of a.
    EXPECT_EQ(egonet(g, "c.example", 2, Direction::inbound).nodes.size(), 5u);
    EXPECT_THROW(egonet(g, "a.example", 0, Direction::both), Error);
}

TEST(Egonet, InducedEdgesOnlyJoinMembers) {
    const auto g = g1();
    const auto ego = egonet(g, "c.example", 1, Direction::inbound);
    EXPECT_EQ(ego.nodes, (std::vector<Domain>{"a.example", "c.example"}));
    ASSERT_EQ(ego.edges.size(), 1u);
    EXPECT_EQ(ego.edges[0], (Edge{"a.example", "c.example", 3000}));
}

TEST(Egonet, MatchesReachabilityOracleOnRandomGraphs) {
    Rng rng(17);
    for (int trial = 0; trial < 60; ++trial) {
        const auto g = random_graph(rng, 5 + rng.below(20), 0.02 + 0.2 * rng.uniform());
        const auto& center = g.nodes()[rng.below(g.node_count())];
        const int k = 1 + static_cast<int>(rng.below(3));
        for (const auto dir : {Direction::inbound, Direction::outbound, Direction::both}) {
            const auto ego = egonet(g, center, k, dir);
            const std::set<Domain> got(ego.nodes.begin(), ego.nodes.end());
            EXPECT_EQ(got, oracle::egonet(g, center, k, dir)) << "trial " << trial << " k=" << k;
        }
    }
}

TEST(Egonet, BothIsUnionOfDirections) {
    Rng rng(4);
    const auto g = random_graph(rng, 40, 0.05);
    for (const auto& c : g.nodes()) {
        const auto in = egonet(g, c, 2, Direction::inbound).nodes;
        const auto out = egonet(g, c, 2, Direction::outbound).nodes;
        std::set<Domain> u(in.begin(), in.end());
        u.insert(out.begin(), out.end());
        const auto both = egonet(g, c, 2, Direction::both).nodes;
        EXPECT_EQ(std::set<Domain>(both.begin(), both.end()), u);
    }
}

TEST(GraphCsv, RoundTripsMultipleMonths) {
    TempDir dir;
    const auto a = g1({2022, 10});
    const auto b = g1({2022, 11});
    const auto csv_b = graph_to_csv(b);
    write_file(dir.file("g.csv"), graph_to_csv(a) + csv_b.substr(csv_b.find('\n') + 1));
    const auto graphs = graphs_from_csv(dir.file("g.csv"));
    ASSERT_EQ(graphs.size(), 2u);
    EXPECT_EQ(graphs.at({2022, 10}).edges(), a.edges());
    EXPECT_EQ(graphs.at({2022, 11}).edges(), b.edges());
}

TEST(GraphCsv, RejectsBadHeaderAndRows) {
    TempDir dir;
    write_file(dir.file("a.csv"), "referrer,target\n");
    EXPECT_THROW(graphs_from_csv(dir.file("a.csv")), Error);
    write_file(dir.file("b.csv"), "month,referrer,target,weight\n2022-10,a.x,b.x,many\n");
    EXPECT_THROW(graphs_from_csv(dir.file("b.csv")), Error);
}
