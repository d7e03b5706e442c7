#pragma once

// Monthly navigation graph: nodes are domains, edge referrer -> target carries
// the month's referred page views. Adjacency is kept in both directions so
// inbound and outbound egonets cost time proportional to their own size.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "navnet/error.hpp"
#include "navnet/ingest.hpp"
#include "navnet/util.hpp"

namespace navnet {

using NodeId = std::uint32_t;

struct Arc {
    NodeId node;
    std::int64_t weight;
};

struct Edge {
    Domain referrer;
    Domain target;
    std::int64_t weight;

    bool operator==(const Edge&) const = default;
};

enum class Direction { inbound, outbound, both };

inline std::optional<Direction> parse_direction(std::string_view s) {
    if (s == "inbound") return Direction::inbound;
    if (s == "outbound") return Direction::outbound;
    if (s == "both") return Direction::both;
    return std::nullopt;
}

struct Egonet {
    Domain center;
    int k = 1;
    Direction direction = Direction::both;
    std::vector<Domain> nodes;  // sorted
    std::vector<Edge> edges;    // induced, sorted by (referrer, target)
};

class NavigationGraph {
public:
    NavigationGraph() = default;

    /// Builds a graph from explicit parts. Endpoints of `edges` are added to
    /// the node set; `nodes` may list extra isolated domains.
    static NavigationGraph from_parts(Month month, const std::vector<Domain>& nodes,
                                      const std::vector<Edge>& edges, std::int64_t edge_threshold = 1) {
        NavigationGraph g;
        g.month_ = month;
        g.edge_threshold_ = edge_threshold;
        std::vector<Domain> names = nodes;
        for (const auto& e : edges) {
            names.push_back(e.referrer);
            names.push_back(e.target);
        }
        std::sort(names.begin(), names.end());
        names.erase(std::unique(names.begin(), names.end()), names.end());
        g.names_ = std::move(names);
        g.index_.reserve(g.names_.size());
        for (NodeId i = 0; i < g.names_.size(); ++i) g.index_.emplace(g.names_[i], i);
        g.out_.resize(g.names_.size());
        g.in_.resize(g.names_.size());
        for (const auto& e : edges) {
            if (e.referrer == e.target) continue;
            if (e.weight < edge_threshold) {
                fail(ErrorCode::invalid_argument, "edge " + e.referrer + "->" + e.target + " below threshold");
            }
            const NodeId from = g.index_.at(e.referrer);
            const NodeId to = g.index_.at(e.target);
            g.out_[from].push_back({to, e.weight});
            g.in_[to].push_back({from, e.weight});
        }
        const auto by_node = [](const Arc& a, const Arc& b) { return a.node < b.node; };
        for (auto& list : g.out_) std::sort(list.begin(), list.end(), by_node);
        for (auto& list : g.in_) std::sort(list.begin(), list.end(), by_node);
        for (NodeId i = 0; i < g.names_.size(); ++i) {
            for (std::size_t j = 1; j < g.out_[i].size(); ++j) {
                if (g.out_[i][j].node == g.out_[i][j - 1].node) {
                    fail(ErrorCode::invalid_argument, "duplicate edge " + g.names_[i] + "->" +
                                                          g.names_[g.out_[i][j].node]);
                }
            }
        }
        for (const auto& list : g.out_) g.edge_count_ += list.size();
        return g;
    }

    Month month() const { return month_; }
    std::int64_t edge_threshold() const { return edge_threshold_; }
    std::size_t node_count() const { return names_.size(); }
    std::size_t edge_count() const { return edge_count_; }

    const std::vector<Domain>& nodes() const { return names_; }
    const Domain& name(NodeId id) const { return names_[id]; }

    std::optional<NodeId> find(std::string_view domain) const {
        auto it = index_.find(std::string(domain));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    bool contains(std::string_view domain) const { return find(domain).has_value(); }

    NodeId id_of(std::string_view domain) const {
        auto id = find(domain);
        if (!id) fail(ErrorCode::not_found, "domain '" + std::string(domain) + "' not in graph " + month_.str());
        return *id;
    }

    const std::vector<Arc>& successors(NodeId id) const { return out_[id]; }
    const std::vector<Arc>& predecessors(NodeId id) const { return in_[id]; }

    std::optional<std::int64_t> weight(NodeId from, NodeId to) const {
        const auto& list = out_[from];
        auto it = std::lower_bound(list.begin(), list.end(), to,
                                   [](const Arc& a, NodeId n) { return a.node < n; });
        if (it == list.end() || it->node != to) return std::nullopt;
        return it->weight;
    }

    /// All edges sorted by (referrer, target).
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        out.reserve(edge_count_);
        for (NodeId i = 0; i < names_.size(); ++i)
            for (const auto& a : out_[i]) out.push_back({names_[i], names_[a.node], a.weight});
        return out;
    }

private:
    Month month_;
    std::int64_t edge_threshold_ = 1;
    std::vector<Domain> names_;
    std::unordered_map<Domain, NodeId> index_;
    std::vector<std::vector<Arc>> out_;
    std::vector<std::vector<Arc>> in_;
    std::size_t edge_count_ = 0;
};

/// Edge i->j exists iff aggregated views(i->j) >= edge_threshold. Input rows
/// for the same pair are summed, so unaggregated input is accepted too.
inline NavigationGraph build_graph(const std::vector<TrafficRecord>& records, std::int64_t edge_threshold) {
    if (edge_threshold < 1) fail(ErrorCode::invalid_argument, "edge threshold must be >= 1");
    if (records.empty()) fail(ErrorCode::empty_input, "no records to build a graph from");
    const Month month = records.front().month;
    std::map<std::pair<std::string_view, std::string_view>, std::int64_t> sums;
    for (const auto& r : records) {
        if (r.month != month) {
            fail(ErrorCode::invalid_argument, "mixed months in graph input: " + month.str() + " and " + r.month.str());
        }
        if (r.referrer == r.target) continue;
        sums[{r.referrer, r.target}] += r.page_views;
    }
    std::vector<Edge> edges;
    for (const auto& [pair, views] : sums)
        if (views >= edge_threshold) edges.push_back({Domain(pair.first), Domain(pair.second), views});
    return NavigationGraph::from_parts(month, {}, edges, edge_threshold);
}

namespace detail {

/// Nodes within k hops following successor (outbound) or predecessor
/// (inbound) arcs, center included.
inline void collect_hops(const NavigationGraph& g, NodeId center, int k, bool outbound,
                         std::unordered_set<NodeId>& seen) {
    std::vector<NodeId> frontier{center};
    seen.insert(center);
    std::unordered_set<NodeId> local{center};
    for (int hop = 0; hop < k && !frontier.empty(); ++hop) {
        std::vector<NodeId> next;
        for (const NodeId u : frontier) {
            const auto& arcs = outbound ? g.successors(u) : g.predecessors(u);
            for (const auto& a : arcs) {
                if (local.insert(a.node).second) {
                    next.push_back(a.node);
                    seen.insert(a.node);
                }
            }
        }
        frontier = std::move(next);
    }
}

}  // namespace detail

/// Node ids of the k-hop egonet, sorted ascending (= lexicographic by domain).
inline std::vector<NodeId> egonet_ids(const NavigationGraph& g, NodeId center, int k, Direction direction) {
    if (k < 1) fail(ErrorCode::invalid_argument, "egonet hop count must be >= 1");
    std::unordered_set<NodeId> seen;
    if (direction != Direction::inbound) detail::collect_hops(g, center, k, true, seen);
    if (direction != Direction::outbound) detail::collect_hops(g, center, k, false, seen);
    std::vector<NodeId> ids(seen.begin(), seen.end());
    std::sort(ids.begin(), ids.end());
    return ids;
}

inline Egonet egonet(const NavigationGraph& g, std::string_view center, int k, Direction direction) {
    const NodeId c = g.id_of(center);
    const auto ids = egonet_ids(g, c, k, direction);
    const std::unordered_set<NodeId> members(ids.begin(), ids.end());
    Egonet ego;
    ego.center = g.name(c);
    ego.k = k;
    ego.direction = direction;
    ego.nodes.reserve(ids.size());
    for (const NodeId id : ids) {
        ego.nodes.push_back(g.name(id));
        for (const auto& a : g.successors(id))
            if (members.count(a.node)) ego.edges.push_back({g.name(id), g.name(a.node), a.weight});
    }
    return ego;
}

struct NodeTotals {
    std::int64_t inbound = 0;
    std::int64_t outbound = 0;

    bool operator==(const NodeTotals&) const = default;
};

inline NodeTotals node_totals(const NavigationGraph& g, NodeId id) {
    NodeTotals t;
    for (const auto& a : g.predecessors(id)) t.inbound += a.weight;
    for (const auto& a : g.successors(id)) t.outbound += a.weight;
    return t;
}

inline NodeTotals node_totals(const NavigationGraph& g, std::string_view domain) {
    return node_totals(g, g.id_of(domain));
}

// ---------------------------------------------------------------------------
// Edge-list CSV: month,referrer,target,weight

inline std::string graph_to_csv(const NavigationGraph& g) {
    std::string out = "month,referrer,target,weight\n";
    const auto month = g.month().str();
    for (const auto& e : g.edges()) {
        out += month;
        out += ',';
        out += e.referrer;
        out += ',';
        out += e.target;
        out += ',';
        out += std::to_string(e.weight);
        out += '\n';
    }
    return out;
}

/// Reads one or more months of edge-list CSV into per-month graphs.
inline std::map<Month, NavigationGraph> graphs_from_csv(const std::string& path, std::int64_t edge_threshold = 1) {
    const auto lines = read_lines(path);
    if (lines.empty() || trim(lines[0]) != "month,referrer,target,weight") {
        fail(ErrorCode::parse, "'" + path + "': expected header month,referrer,target,weight");
    }
    std::map<Month, std::vector<Edge>> by_month;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const auto f = split_csv(lines[i]);
        const auto where = path + ":" + std::to_string(i + 1);
        if (f.size() != 4) fail(ErrorCode::parse, where + ": expected 4 fields");
        const auto month = Month::parse(f[0]);
        const auto weight = parse_int<std::int64_t>(f[3]);
        if (!month || !weight || f[1].empty() || f[2].empty()) fail(ErrorCode::parse, where + ": malformed row");
        by_month[*month].push_back({f[1], f[2], *weight});
    }
    if (by_month.empty()) fail(ErrorCode::empty_input, "'" + path + "' has no edges");
    std::map<Month, NavigationGraph> graphs;
    for (const auto& [month, edges] : by_month)
        graphs.emplace(month, NavigationGraph::from_parts(month, {}, edges, edge_threshold));
    return graphs;
}

}  // namespace navnet
