// Acceptance runner. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Tolerances and time budgets are fixed here.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "navnet/app/cli.hpp"
#include "navnet/deploy.hpp"
#include "navnet/ml/evaluation.hpp"
#include "navnet/pipeline.hpp"
#include "navnet/synth.hpp"
#include "oracles.hpp"

#ifndef NAVNET_SOURCE_DIR
#define NAVNET_SOURCE_DIR "."
#endif

using namespace navnet;

namespace {

constexpr double kFeatureTolerance = 1e-12;
constexpr double kGradientRelTolerance = 1e-5;
constexpr double kBenchPrecision = 0.95;
constexpr double kBenchRecall = 0.85;
constexpr double kGbtGap = 0.03;
constexpr double kMonthSpread = 0.05;
constexpr double kImportanceSumTolerance = 1e-9;
constexpr double kCandidateFraction = 0.10;
constexpr double kPlantedCoverage = 0.90;
constexpr double kPropagandaMetric = 0.9;

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string bench(const char* name) { return std::string(NAVNET_SOURCE_DIR) + "/data/bench/" + name; }

SynthConfig load_synth(const char* name) {
    std::ifstream in(bench(name));
    if (!in) fail(ErrorCode::not_found, "missing benchmark config " + bench(name));
    return SynthConfig::from_json(nlohmann::json::parse(in));
}

std::string fmt(double v) { return format_fixed(v, 4); }

// Everything a criterion needs from one synthetic dataset.
struct Prepared {
    SynthData data;
    LabelStore store;
    GraphSet graphs;
    std::map<Domain, int> labels;
    std::map<std::string, FeatureMatrix> features;
    std::string train_month;
};

Prepared prepare(const SynthConfig& config, FeatureMode mode) {
    Prepared p;
    p.data = generate(config);
    p.store = p.data.label_store();
    p.graphs = build_graphs(p.data.records, 3000);
    p.labels = labeled_classes(p.graphs, p.store, mode);
    p.features = monthly_features(p.graphs, p.store, default_registry(), keys_of(p.labels), mode);
    p.train_month = p.features.begin()->first;
    return p;
}

ml::ModelConfig model_config(ml::Algorithm a, FeatureMode mode) {
    ml::ModelConfig c;
    c.algorithm = a;
    c.mode = mode;
    c.seed = 7;
    return c;
}

// Random graph with at most `max_nodes` nodes and `max_edges` distinct edges.
NavigationGraph small_random_graph(Rng& rng, std::size_t max_nodes, std::size_t max_edges,
                                   const std::vector<Domain>& extra_names = {}) {
    std::vector<Domain> names = extra_names;
    const std::size_t n = 1 + rng.below(max_nodes - extra_names.size());
    for (std::size_t i = 0; i < n; ++i) names.push_back("n" + std::to_string(i) + ".example");
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < names.size(); ++i)
        for (std::size_t j = 0; j < names.size(); ++j)
            if (i != j) pairs.push_back({i, j});
    rng.shuffle(pairs);
    pairs.resize(std::min<std::size_t>(pairs.size(), rng.below(max_edges + 1)));
    std::vector<Edge> edges;
    for (const auto& [i, j] : pairs) edges.push_back({names[i], names[j], 1 + static_cast<std::int64_t>(rng.below(20000))});
    return NavigationGraph::from_parts({2022, 10}, names, edges);
}

Outcome egonet_oracle() {
    Rng rng(1001);
    std::size_t queries = 0, mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto g = small_random_graph(rng, 50, 400);
        for (const auto& center : g.nodes()) {
            // One BFS each way answers every hop count.
            const auto fwd = oracle::bfs_distances(g, center, true), rev = oracle::bfs_distances(g, center, false);
            for (int k = 1; k <= 3; ++k)
                for (const auto dir : {Direction::inbound, Direction::outbound, Direction::both}) {
                    ++queries;
                    const auto got = egonet(g, center, k, dir);
                    std::set<Domain> want;
                    if (dir != Direction::inbound)
                        for (const auto& [d, hops] : fwd)
                            if (hops <= k) want.insert(d);
                    if (dir != Direction::outbound)
                        for (const auto& [d, hops] : rev)
                            if (hops <= k) want.insert(d);
                    std::vector<Edge> want_edges;
                    for (const auto& e : g.edges())
                        if (want.count(e.referrer) && want.count(e.target)) want_edges.push_back(e);
                    const bool same_nodes = std::vector<Domain>(want.begin(), want.end()) == got.nodes;
                    bool same_edges = want_edges.size() == got.edges.size();
                    for (std::size_t i = 0; same_edges && i < want_edges.size(); ++i)
                        same_edges = want_edges[i].referrer == got.edges[i].referrer &&
                                     want_edges[i].target == got.edges[i].target &&
                                     want_edges[i].weight == got.edges[i].weight;
                    if (!same_nodes || !same_edges) ++mismatches;
                }
        }
    }
    return {mismatches == 0, std::to_string(queries) + " queries, " + std::to_string(mismatches) + " mismatches"};
}

LabelStore random_store(Rng& rng, const NavigationGraph& g) {
    LabelStore s;
    for (const auto& d : g.nodes()) {
        switch (rng.below(4)) {
            case 1: s.merge({d, DomainClass::misinformation, false, "t", ""}); break;
            case 2: s.merge({d, DomainClass::authoritative, false, "t", ""}); break;
            case 3: s.merge({d, DomainClass::misinformation, true, "t", ""}); break;
            default: break;
        }
    }
    return s;
}

Outcome feature_oracle() {
    const auto reg = default_registry();
    const auto names = traffic_feature_names(FeatureMode::multiclass);
    std::size_t rows = 0, bad_value = 0, bad_share = 0, bad_zero = 0;

    const auto check_graph = [&](const NavigationGraph& g, const LabelStore& store) {
        for (const auto& d : g.nodes()) {
            ++rows;
            const auto got = extract_features(g, store, reg, d).values(FeatureMode::multiclass);
            const auto want = oracle::features(g, store, reg, d).values(FeatureMode::multiclass);
            const auto totals = node_totals(g, d);
            for (std::size_t i = 0; i < names.size(); ++i) {
                if (!(std::abs(got[i] - want[i]) <= kFeatureTolerance)) ++bad_value;
                const bool to_share = names[i].rfind("to_", 0) == 0, from_share = names[i].rfind("from_", 0) == 0;
                if ((to_share || from_share) && !(got[i] >= 0.0 && got[i] <= 1.0)) ++bad_share;
                if ((to_share && totals.outbound == 0) || (from_share && totals.inbound == 0))
                    if (got[i] != 0.0) ++bad_zero;
            }
        }
    };

    auto g1 = NavigationGraph::from_parts({2022, 10}, {"lonely.example"},
                                          {{"a.example", "b.example", 5000},
                                           {"b.example", "a.example", 4000},
                                           {"google.com", "a.example", 6000},
                                           {"facebook.com", "a.example", 3500},
                                           {"a.example", "c.example", 3000}});
    LabelStore g1_labels;
    g1_labels.merge({"a.example", DomainClass::misinformation, false, "t", ""});
    g1_labels.merge({"b.example", DomainClass::misinformation, false, "t", ""});
    check_graph(g1, g1_labels);

    Rng rng(2002);
    const std::vector<Domain> hosts{"google.com", "bing.com", "duckduckgo.com", "facebook.com", "msn.com", "gmail.com"};
    for (int trial = 0; trial < 100; ++trial) {
        const auto g = small_random_graph(rng, 30, 120, hosts);
        check_graph(g, random_store(rng, g));
    }
    const bool pass = bad_value == 0 && bad_share == 0 && bad_zero == 0;
    return {pass, std::to_string(rows) + " rows; mismatched values " + std::to_string(bad_value) + ", shares outside [0,1] " +
                      std::to_string(bad_share) + ", nonzero zero-denominator shares " + std::to_string(bad_zero)};
}

double brute_best_gain(const Matrix& x, const std::vector<int>& y, int classes) {
    const auto gini = [&](const std::vector<std::size_t>& idx) {
        if (idx.empty()) return 0.0;
        std::vector<double> c(static_cast<std::size_t>(classes), 0.0);
        for (auto i : idx) c[static_cast<std::size_t>(y[i])] += 1;
        double s = 1.0;
        const double n = static_cast<double>(idx.size());
        for (double v : c) s -= (v / n) * (v / n);
        return s;
    };
    std::vector<std::size_t> all(x.rows);
    std::iota(all.begin(), all.end(), 0);
    const double parent = gini(all), n = static_cast<double>(x.rows);
    double best = 0.0;
    for (std::size_t f = 0; f < x.cols; ++f)
        for (std::size_t a = 0; a < x.rows; ++a) {
            // Every split of the form value <= x(a, f) that leaves both sides nonempty.
            std::vector<std::size_t> l, r;
            for (std::size_t i = 0; i < x.rows; ++i) (x(i, f) <= x(a, f) ? l : r).push_back(i);
            if (l.empty() || r.empty()) continue;
            const double gain =
                parent - static_cast<double>(l.size()) / n * gini(l) - static_cast<double>(r.size()) / n * gini(r);
            best = std::max(best, gain);
        }
    return best;
}

Outcome micro_oracles() {
    Rng rng(3003);
    std::ostringstream detail;
    bool pass = true;

    // Logistic gradient against central differences.
    double worst_rel = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 20 + rng.below(40), d = 1 + rng.below(5);
        Matrix x(n, d);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = static_cast<double>(rng.below(2));
            for (std::size_t j = 0; j < d; ++j) x(i, j) = rng.normal() + y[i];
        }
        ml::LogisticBinary m;
        for (std::size_t j = 0; j < d; ++j) m.weights.push_back(rng.normal());
        m.bias = rng.normal();
        const auto g = ml::logistic_gradient(m, x, y, 1.0);
        for (std::size_t k = 0; k <= d; ++k) {
            const double h = 1e-6;
            auto plus = m, minus = m;
            (k < d ? plus.weights[k] : plus.bias) += h;
            (k < d ? minus.weights[k] : minus.bias) -= h;
            const double fd = (ml::logistic_objective(plus, x, y, 1.0) - ml::logistic_objective(minus, x, y, 1.0)) / (2 * h);
            worst_rel = std::max(worst_rel, std::abs(g[k] - fd) / std::max(1.0, std::abs(fd)));
        }
    }
    pass = pass && worst_rel < kGradientRelTolerance;
    detail << "logreg grad rel err " << worst_rel;

    // Root split against exhaustive enumeration.
    int split_mismatch = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 2 + rng.below(19), d = 1 + rng.below(4);
        const int classes = 2 + static_cast<int>(rng.below(2));
        Matrix x(n, d);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
            for (std::size_t j = 0; j < d; ++j) x(i, j) = static_cast<double>(rng.below(5));
        }
        std::vector<std::uint32_t> rows(n);
        std::iota(rows.begin(), rows.end(), 0u);
        const ml::GiniCriterion crit(y, classes);
        ml::TreeGrower<ml::GiniCriterion> grower(x, rows, crit);
        const auto split = grower.best_root_split();
        const double want = brute_best_gain(x, y, classes);
        if (want <= ml::kMinSplitGain ? split.has_value() : (!split || std::abs(split->gain - want) > 1e-12))
            ++split_mismatch;
    }
    pass = pass && split_mismatch == 0;
    detail << "; split mismatches " << split_mismatch << "/500";

    // knn against a full distance sort.
    int knn_mismatch = 0;
    for (int trial = 0; trial < 50; ++trial) {
        ml::KnnClassifier knn;
        knn.k = 5;
        knn.n_classes = 3;
        const std::size_t n = 10 + rng.below(60), d = 1 + rng.below(4);
        knn.train_x = Matrix(n, d);
        for (std::size_t i = 0; i < n; ++i) {
            knn.train_y.push_back(static_cast<int>(rng.below(3)));
            for (std::size_t j = 0; j < d; ++j) knn.train_x(i, j) = rng.normal();
        }
        for (int q = 0; q < 10; ++q) {
            std::vector<double> query(d);
            for (auto& v : query) v = rng.normal();
            std::vector<std::pair<double, std::size_t>> dist;
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0;
                for (std::size_t j = 0; j < d; ++j) s += (knn.train_x(i, j) - query[j]) * (knn.train_x(i, j) - query[j]);
                dist.push_back({s, i});
            }
            std::sort(dist.begin(), dist.end());
            std::vector<double> want(3, 0.0);
            for (std::size_t i = 0; i < 5; ++i) want[static_cast<std::size_t>(knn.train_y[dist[i].second])] += 0.2;
            const auto got = knn.predict_proba(query);
            for (std::size_t c = 0; c < 3; ++c)
                if (std::abs(got[c] - want[c]) > 1e-12) {
                    ++knn_mismatch;
                    break;
                }
        }
    }
    pass = pass && knn_mismatch == 0;
    detail << "; knn mismatches " << knn_mismatch << "/500";

    // Depth caps on noise labels, which push trees to the limit.
    Matrix x(3000, 4);
    std::vector<int> y(3000);
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t j = 0; j < 4; ++j) x(i, j) = rng.uniform();
        y[i] = static_cast<int>(rng.below(2));
    }
    ml::ForestOptions fo;
    fo.n_trees = 10;
    const auto forest = ml::RandomForest::fit(x, y, 2, fo);
    int forest_depth = 0;
    for (const auto& t : forest.trees) forest_depth = std::max(forest_depth, t.depth());
    ml::BoostingOptions bo;
    bo.rounds = 20;
    const int gbt_depth = ml::BoostedTrees::fit(x, y, 2, bo).max_depth();
    pass = pass && forest_depth <= 20 && gbt_depth <= 6;
    detail << "; max depth forest " << forest_depth << ", gbt " << gbt_depth;
    return {pass, detail.str()};
}

Outcome synthetic_benchmark(const Prepared& p) {
    const auto rf = ml::cross_validate(model_config(ml::Algorithm::random_forest, FeatureMode::binary), p.features, p.labels,
                                       p.train_month);
    const auto gbt = ml::cross_validate(model_config(ml::Algorithm::gbt, FeatureMode::binary), p.features, p.labels,
                                        p.train_month);
    bool pass = true;
    std::ostringstream detail;
    double rf_p_min = 1, rf_p_max = 0, rf_r_min = 1, rf_r_max = 0;
    double gbt_p_min = 1, gbt_p_max = 0, gbt_r_min = 1, gbt_r_max = 0;
    for (std::size_t m = 0; m < rf.months.size(); ++m) {
        const double rp = rf.months[m].precision.value_or(0), rr = rf.months[m].recall.value_or(0);
        const double gp = gbt.months[m].precision.value_or(0), gr = gbt.months[m].recall.value_or(0);
        pass = pass && rp >= kBenchPrecision && rr >= kBenchRecall;
        pass = pass && std::abs(gp - rp) <= kGbtGap && std::abs(gr - rr) <= kGbtGap;
        rf_p_min = std::min(rf_p_min, rp), rf_p_max = std::max(rf_p_max, rp);
        rf_r_min = std::min(rf_r_min, rr), rf_r_max = std::max(rf_r_max, rr);
        gbt_p_min = std::min(gbt_p_min, gp), gbt_p_max = std::max(gbt_p_max, gp);
        gbt_r_min = std::min(gbt_r_min, gr), gbt_r_max = std::max(gbt_r_max, gr);
        detail << rf.months[m].month << " rf P=" << fmt(rp) << " R=" << fmt(rr) << " gbt P=" << fmt(gp) << " R=" << fmt(gr)
               << "; ";
    }
    for (const double spread : {rf_p_max - rf_p_min, rf_r_max - rf_r_min, gbt_p_max - gbt_p_min, gbt_r_max - gbt_r_min})
        pass = pass && spread <= kMonthSpread;
    detail << "month spread rf P " << fmt(rf_p_max - rf_p_min) << " R " << fmt(rf_r_max - rf_r_min);
    return {pass, detail.str()};
}

Outcome importance(const Prepared& p) {
    const auto model = train_on_month(model_config(ml::Algorithm::random_forest, FeatureMode::binary),
                                      p.features.at(p.train_month), p.labels);
    const auto ranked = ml::gini_importance(model);
    double sum = 0;
    for (const auto& r : ranked) sum += r.importance;
    const std::set<std::string> top{ranked.at(0).feature, ranked.at(1).feature};
    const bool pass = top == std::set<std::string>{"to_misinformation", "from_misinformation"} &&
                      std::abs(sum - 1.0) <= kImportanceSumTolerance;
    std::ostringstream detail;
    for (std::size_t i = 0; i < 3; ++i) detail << ranked[i].feature << "=" << fmt(ranked[i].importance) << " ";
    detail << "sum-1=" << (sum - 1.0);
    return {pass, detail.str()};
}

Outcome deployment_filtering() {
    const auto p = prepare(load_synth("deploy.json"), FeatureMode::binary);
    const auto reg = default_registry();

    std::set<Domain> unlabeled;
    for (const auto& [m, g] : p.graphs)
        for (const auto& d : g.nodes())
            if (!p.store.is_labeled(d)) unlabeled.insert(d);

    DeploymentStrategy one_hop;
    const auto candidates = select_candidates(p.graphs, p.store, reg, one_hop);
    const std::set<Domain> cand_set(candidates.begin(), candidates.end());

    // Planted unlabeled misinformation with a thresholded edge to or from a seed.
    const auto seeds_vec = p.store.misinformation_domains();
    const std::set<Domain> seeds(seeds_vec.begin(), seeds_vec.end());
    const auto planted = [&](const Domain& d) {
        const auto* s = p.data.site(d);
        return s && s->kind == SiteKind::planted && !p.store.is_labeled(d);
    };
    std::set<Domain> reachable;
    for (const auto& [m, g] : p.graphs)
        for (const auto& e : g.edges()) {
            if (seeds.count(e.referrer) && planted(e.target)) reachable.insert(e.target);
            if (seeds.count(e.target) && planted(e.referrer)) reachable.insert(e.referrer);
        }
    std::size_t covered = 0;
    for (const auto& d : reachable) covered += cand_set.count(d);
    const double fraction = static_cast<double>(candidates.size()) / static_cast<double>(unlabeled.size());
    const double coverage = reachable.empty() ? 0.0 : static_cast<double>(covered) / static_cast<double>(reachable.size());

    const auto model = train_on_month(model_config(ml::Algorithm::random_forest, FeatureMode::binary),
                                      p.features.at(p.train_month), p.labels);
    const auto precision_of = [&](const std::vector<Domain>& pool, std::size_t& flagged) {
        const auto run = run_deployment(pool, p.graphs, p.store, reg, model, "misinformation", one_hop);
        flagged = run.positives.size();
        std::size_t correct = 0;
        for (const auto& d : run.positives) {
            const auto* s = p.data.site(d);
            correct += s && s->truly_misinformation();
        }
        return flagged ? static_cast<double>(correct) / static_cast<double>(flagged) : 0.0;
    };
    // Full scan: the same exclusions and traffic floor, without the egonet restriction.
    std::vector<Domain> scan;
    for (const auto& d : unlabeled) {
        if (reg.contains(d)) continue;
        bool ok = true;
        for (const auto& [m, g] : p.graphs)
            if (g.contains(d)) {
                const auto t = node_totals(g, d);
                ok = ok && t.inbound + t.outbound >= one_hop.traffic_floor;
            }
        if (ok) scan.push_back(d);
    }
    std::size_t flagged_hop = 0, flagged_scan = 0;
    const double prec_hop = precision_of(candidates, flagged_hop);
    const double prec_scan = precision_of(scan, flagged_scan);

    const bool pass = fraction < kCandidateFraction && coverage >= kPlantedCoverage && prec_hop > prec_scan;
    std::ostringstream detail;
    detail << candidates.size() << "/" << unlabeled.size() << " unlabeled are candidates (" << fmt(fraction)
           << "); planted coverage " << covered << "/" << reachable.size() << "; precision one-hop " << fmt(prec_hop) << " ("
           << flagged_hop << " flagged) vs full scan " << fmt(prec_scan) << " (" << flagged_scan << " flagged)";
    return {pass, detail.str()};
}

Outcome multiclass() {
    const auto p = prepare(load_synth("multiclass.json"), FeatureMode::multiclass);
    const auto config = model_config(ml::Algorithm::random_forest, FeatureMode::multiclass);
    const auto cv = ml::cross_validate(config, p.features, p.labels, p.train_month);
    bool pass = true;
    std::ostringstream detail;
    for (const auto& m : cv.months) {
        const double pr = m.precision.value_or(0), rc = m.recall.value_or(0);
        pass = pass && pr >= kPropagandaMetric && rc >= kPropagandaMetric;
        detail << m.month << " propaganda P=" << fmt(pr) << " R=" << fmt(rc) << "; ";
    }
    const auto model = train_on_month(config, p.features.at(p.train_month), p.labels);
    DeploymentStrategy strategy;
    strategy.seeds = SeedSet::propaganda_only;
    const auto candidates = select_candidates(p.graphs, p.store, default_registry(), strategy);
    const auto run = run_deployment(candidates, p.graphs, p.store, default_registry(), model, "propaganda", strategy);
    std::size_t planted = 0;
    for (const auto& d : run.positives) {
        const auto* s = p.data.site(d);
        planted += s && s->kind == SiteKind::planted && s->propaganda;
    }
    pass = pass && planted >= 1;
    detail << candidates.size() << " propaganda-seeded candidates, " << run.positives.size() << " flagged, " << planted
           << " planted propaganda";
    return {pass, detail.str()};
}

int run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "navnet");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int status = app::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    if (status != 0) std::cerr << "navnet " << args.at(1) << ": " << err.str();
    return status;
}

std::map<std::string, std::string> tree_contents(const std::filesystem::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        out[std::filesystem::relative(e.path(), root).string()] =
            std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    return out;
}

Outcome determinism() {
    const auto base = std::filesystem::temp_directory_path() / ("navnet_acceptance_" + std::to_string(::getpid()));
    std::filesystem::remove_all(base);
    const auto stages = [&](const std::filesystem::path& dir) {
        const auto f = [&](const char* name) { return (dir / name).string(); };
        std::filesystem::create_directories(dir);
        return run_cli({"synth", "--config", bench("binary.json"), "--out-dir", f("syn")}) == 0 &&
               run_cli({"ingest", "--logs", f("syn/logs.csv"), "--out", f("records.csv")}) == 0 &&
               run_cli({"build-graph", "--records", f("records.csv"), "--out", f("graphs.csv")}) == 0 &&
               run_cli({"features", "--graphs", f("graphs.csv"), "--labels", f("syn/labels.csv"), "--out-dir", f("feat")}) == 0 &&
               run_cli({"train", "--graphs", f("graphs.csv"), "--labels", f("syn/labels.csv"), "--out", f("model.json")}) == 0 &&
               run_cli({"evaluate", "--graphs", f("graphs.csv"), "--labels", f("syn/labels.csv"), "--out", f("metrics.csv")}) == 0 &&
               run_cli({"deploy", "--graphs", f("graphs.csv"), "--labels", f("syn/labels.csv"), "--model", f("model.json"),
                        "--runs-dir", f("runs"), "--run-id", "r1"}) == 0;
    };
    const bool ran = stages(base / "a") && stages(base / "b");
    Outcome o;
    if (!ran) {
        o = {false, "a pipeline stage failed"};
    } else {
        const auto a = tree_contents(base / "a"), b = tree_contents(base / "b");
        std::vector<std::string> differing;
        for (const auto& [name, content] : a)
            if (!b.count(name) || b.at(name) != content) differing.push_back(name);
        o.pass = differing.empty() && a.size() == b.size() && a.size() >= 10;
        o.detail = std::to_string(a.size()) + " artifacts compared, " + std::to_string(differing.size()) + " differ";
        for (const auto& d : differing) o.detail += " " + d;
    }
    std::filesystem::remove_all(base);
    return o;
}

GraphSet g1_months() {
    GraphSet s;
    for (const Month m : {Month{2022, 10}, Month{2022, 11}})
        s.emplace(m, NavigationGraph::from_parts(m, {},
                                                 {{"a.example", "b.example", 5000},
                                                  {"b.example", "a.example", 4000},
                                                  {"google.com", "a.example", 6000},
                                                  {"facebook.com", "a.example", 3500},
                                                  {"a.example", "c.example", 3000}}));
    return s;
}

Outcome rule_and_candidate_suites() {
    std::size_t violations = 0, checks = 0;
    const auto expect = [&](bool ok) {
        ++checks;
        violations += !ok;
    };

    // Strict threshold and the all-months quantifier over a grid that
    // brackets 0.5 from both sides.
    const std::vector<double> grid{0.0, 0.3, std::nextafter(0.5, 0.0), 0.5, std::nextafter(0.5, 1.0), 0.9, 1.0};
    for (std::size_t months = 1; months <= 3; ++months) {
        std::vector<std::size_t> idx(months, 0);
        while (true) {
            std::vector<double> c;
            bool all = true;
            for (const auto i : idx) {
                c.push_back(grid[i]);
                all = all && grid[i] > 0.5;
            }
            expect(is_positive(c) == all);
            std::size_t k = 0;
            while (k < months && ++idx[k] == grid.size()) idx[k++] = 0;
            if (k == months) break;
        }
    }
    expect(!is_positive(std::vector<double>{}));

    // Every labeling of the G1 nodes.
    const auto graphs = g1_months();
    const auto reg = default_registry();
    const auto nodes = graphs.begin()->second.nodes();
    std::vector<LabelStore> stores;
    for (std::size_t code = 0; code < 1024; ++code) {
        LabelStore s;
        std::size_t c = code;
        for (const auto& d : nodes) {
            if (c % 4 == 1) s.merge({d, DomainClass::misinformation, false, "t", ""});
            if (c % 4 == 2) s.merge({d, DomainClass::authoritative, false, "t", ""});
            if (c % 4 == 3) s.merge({d, DomainClass::misinformation, true, "t", ""});
            c /= 4;
        }
        stores.push_back(std::move(s));
    }
    const auto candidates = [&](const LabelStore& s, const DeploymentStrategy& st) {
        const bool seeded = st.seeds == SeedSet::propaganda_only ? !s.propaganda_domains().empty()
                                                                 : !s.misinformation_domains().empty();
        return seeded ? select_candidates(graphs, s, reg, st) : std::vector<Domain>{};
    };
    for (const auto& store : stores)
        for (const auto kind : {StrategyKind::one_hop_egonet, StrategyKind::two_hop_egonet})
            for (const auto seeds : {SeedSet::all_misinformation, SeedSet::propaganda_only}) {
                DeploymentStrategy st;
                st.kind = kind;
                st.seeds = seeds;
                const auto before = candidates(store, st);
                for (const auto& d : before) {
                    expect(!store.is_labeled(d));
                    expect(!reg.contains(d));
                    for (const auto& [m, g] : graphs) {
                        const auto t = node_totals(g, d);
                        expect(t.inbound + t.outbound >= st.traffic_floor);
                    }
                }
                for (const auto& d : nodes) {
                    if (store.is_labeled(d)) continue;
                    auto grown = store;
                    grown.merge({d, DomainClass::misinformation, seeds == SeedSet::propaganda_only, "t", ""});
                    const auto after = candidates(grown, st);
                    for (const auto& c : before)
                        if (c != d) expect(std::binary_search(after.begin(), after.end(), c));
                }
            }

    // With A and B labeled, C is the only candidate.
    LabelStore ref;
    ref.merge({"a.example", DomainClass::misinformation, false, "t", ""});
    ref.merge({"b.example", DomainClass::misinformation, false, "t", ""});
    expect(select_candidates(graphs, ref, reg, {}) == std::vector<Domain>{"c.example"});

    return {violations == 0, std::to_string(checks) + " checks, " + std::to_string(violations) + " violations"};
}

struct Criterion {
    std::string name;
    double budget_seconds;
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    std::optional<Prepared> binary;
    const auto binary_data = [&]() -> const Prepared& {
        if (!binary) binary = prepare(load_synth("binary.json"), FeatureMode::binary);
        return *binary;
    };

    const std::vector<Criterion> criteria{
        {"egonet-oracle", 30, egonet_oracle},
        {"feature-oracle", 60, feature_oracle},
        {"classifier-micro-oracles", 120, micro_oracles},
        {"synthetic-benchmark", 300, [&] { return synthetic_benchmark(binary_data()); }},
        {"feature-importance", 120, [&] { return importance(binary_data()); }},
        {"deployment-filtering", 600, deployment_filtering},
        {"multiclass-propaganda", 600, multiclass},
        {"determinism", 600, determinism},
        {"positive-rule-and-candidates", 60, rule_and_candidate_suites},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > c.budget_seconds) {
            o.pass = false;
            o.detail += "; over time budget of " + format_fixed(c.budget_seconds, 0) + " s";
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << c.name << " [" << format_fixed(secs, 1) << " s] " << o.detail
                  << std::endl;
    }
    std::cout << (failures ? "FAIL" : "PASS") << " overall: " << criteria.size() - static_cast<std::size_t>(failures) << "/"
              << criteria.size() << " criteria" << std::endl;
    return failures ? 1 : 0;
}
