#pragma once

// Deployment: choose candidate domains (egonet filtering around known
// misinformation or a traffic sample), score them in every month, flag the
// ones above 0.5 in all months, and feed review verdicts back as labels.

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "navnet/error.hpp"
#include "navnet/features.hpp"
#include "navnet/graph.hpp"
#include "navnet/labels.hpp"
#include "navnet/ml/model.hpp"
#include "navnet/util.hpp"

namespace navnet {

using GraphSet = std::map<Month, NavigationGraph>;

enum class StrategyKind { one_hop_egonet, two_hop_egonet, sampled_traffic };

inline std::string_view to_string(StrategyKind k) {
    switch (k) {
        case StrategyKind::one_hop_egonet: return "one-hop";
        case StrategyKind::two_hop_egonet: return "two-hop";
        case StrategyKind::sampled_traffic: return "sampled";
    }
    return "";
}

inline std::optional<StrategyKind> parse_strategy_kind(std::string_view s) {
    if (s == "one-hop" || s == "one_hop" || s == "one_hop_egonet") return StrategyKind::one_hop_egonet;
    if (s == "two-hop" || s == "two_hop" || s == "two_hop_egonet") return StrategyKind::two_hop_egonet;
    if (s == "sampled" || s == "sampled_traffic") return StrategyKind::sampled_traffic;
    return std::nullopt;
}

/// Which labeled domains seed the egonets.
enum class SeedSet { all_misinformation, propaganda_only };

struct DeploymentStrategy {
    StrategyKind kind = StrategyKind::one_hop_egonet;
    std::size_t sample_size = 50000;  // sampled_traffic only
    std::int64_t traffic_floor = 3000;
    SeedSet seeds = SeedSet::all_misinformation;
    std::uint64_t seed = 0;           // sampled_traffic only

    int hops() const { return kind == StrategyKind::two_hop_egonet ? 2 : 1; }

    void validate() const {
        if (kind == StrategyKind::sampled_traffic && sample_size < 1) {
            fail(ErrorCode::invalid_argument, "sampled strategy needs sample_size >= 1");
        }
        if (traffic_floor < 0) fail(ErrorCode::invalid_argument, "traffic floor must be >= 0");
    }

    nlohmann::json to_json() const {
        nlohmann::json j{{"kind", std::string(to_string(kind))},
                         {"traffic_floor", traffic_floor},
                         {"seeds", seeds == SeedSet::all_misinformation ? "all_misinformation" : "propaganda_only"}};
        if (kind == StrategyKind::sampled_traffic) {
            j["sample_size"] = sample_size;
            j["seed"] = seed;
        }
        return j;
    }

    static DeploymentStrategy from_json(const nlohmann::json& j) {
        DeploymentStrategy s;
        auto kind = parse_strategy_kind(j.value("kind", "one-hop"));
        if (!kind) fail(ErrorCode::invalid_argument, "unknown strategy kind");
        s.kind = *kind;
        s.traffic_floor = j.value("traffic_floor", s.traffic_floor);
        s.sample_size = j.value("sample_size", s.sample_size);
        s.seed = j.value("seed", s.seed);
        const auto seeds = j.value("seeds", std::string("all_misinformation"));
        if (seeds == "propaganda_only") s.seeds = SeedSet::propaganda_only;
        else if (seeds != "all_misinformation") fail(ErrorCode::invalid_argument, "unknown seed set '" + seeds + "'");
        s.validate();
        return s;
    }
};

namespace detail {

/// True when the domain's monthly traffic (inbound + outbound) is below the
/// floor in any month whose graph contains it.
inline bool below_floor(const GraphSet& graphs, std::string_view domain, std::int64_t floor) {
    for (const auto& [month, g] : graphs) {
        const auto id = g.find(domain);
        if (!id) continue;
        const auto t = node_totals(g, *id);
        if (t.inbound + t.outbound < floor) return true;
    }
    return false;
}

inline bool excluded(std::string_view d, const LabelStore& store, const CategoryRegistry& registry) {
    return store.is_labeled(d) || registry.contains(d);
}

}  // namespace detail

/// Candidate domains, sorted. Hop strategies take the union of both-direction
/// k-hop egonets around every seed in every month; all strategies drop labeled
/// domains, category hosts and domains under the traffic floor.
inline std::vector<Domain> select_candidates(const GraphSet& graphs, const LabelStore& store,
                                             const CategoryRegistry& registry, const DeploymentStrategy& strategy) {
    strategy.validate();
    if (graphs.empty()) fail(ErrorCode::precondition, "candidate selection needs at least one month");

    std::set<Domain> pool;
    if (strategy.kind == StrategyKind::sampled_traffic) {
        std::set<Domain> unlabeled;
        for (const auto& [month, g] : graphs)
            for (const auto& d : g.nodes())
                if (!detail::excluded(d, store, registry)) unlabeled.insert(d);
        std::vector<Domain> all(unlabeled.begin(), unlabeled.end());
        Rng rng = Rng::derive(strategy.seed, 0x5A3D);
        const std::size_t take = std::min(strategy.sample_size, all.size());
        for (std::size_t i = 0; i < take; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.below(all.size() - i));
            std::swap(all[i], all[j]);
            pool.insert(all[i]);
        }
    } else {
        const auto seeds = strategy.seeds == SeedSet::propaganda_only ? store.propaganda_domains()
                                                                      : store.misinformation_domains();
        if (seeds.empty()) fail(ErrorCode::precondition, "egonet strategies need at least one seed domain");
        for (const auto& [month, g] : graphs) {
            for (const auto& s : seeds) {
                const auto id = g.find(s);
                if (!id) continue;
                for (const NodeId n : egonet_ids(g, *id, strategy.hops(), Direction::both)) {
                    const auto& d = g.name(n);
                    if (!detail::excluded(d, store, registry)) pool.insert(d);
                }
            }
        }
    }

    std::vector<Domain> out;
    for (const auto& d : pool)
        if (!detail::below_floor(graphs, d, strategy.traffic_floor)) out.push_back(d);
    return out;
}

// ---------------------------------------------------------------------------

struct CandidateScore {
    Domain domain;
    std::vector<double> confidence;  // target-class confidence per month
    bool absent = false;             // missing from every month's graph

    double min_confidence() const {
        return confidence.empty() ? 0.0 : *std::min_element(confidence.begin(), confidence.end());
    }
};

/// Flag rule: target-class confidence strictly above 0.5 in every month.
inline bool is_positive(std::span<const double> monthly_confidence) {
    if (monthly_confidence.empty()) return false;
    return std::all_of(monthly_confidence.begin(), monthly_confidence.end(), [](double c) { return c > 0.5; });
}

struct DeploymentRun {
    std::string id;
    DeploymentStrategy strategy;
    std::string target_class;
    std::vector<std::string> months;
    std::vector<CandidateScore> candidates;  // sorted by domain
    std::vector<Domain> positives;           // sorted
    std::vector<std::string> warnings;
    std::string created_at;                  // caller supplied; empty keeps artifacts reproducible

    const CandidateScore* find(std::string_view domain) const {
        auto it = std::lower_bound(candidates.begin(), candidates.end(), domain,
                                   [](const CandidateScore& c, std::string_view d) { return c.domain < d; });
        return it != candidates.end() && it->domain == domain ? &*it : nullptr;
    }

    bool is_positive_domain(std::string_view domain) const {
        return std::binary_search(positives.begin(), positives.end(), domain);
    }

    /// Per month: candidates scored and candidates above 0.5 that month.
    struct MonthCount {
        std::string month;
        std::size_t all = 0;
        std::size_t positive = 0;
    };

    std::vector<MonthCount> month_counts() const {
        std::vector<MonthCount> out;
        for (std::size_t m = 0; m < months.size(); ++m) {
            MonthCount c{months[m], candidates.size(), 0};
            for (const auto& cand : candidates)
                if (cand.confidence[m] > 0.5) ++c.positive;
            out.push_back(c);
        }
        return out;
    }
};

struct DeploymentOptions {
    const HostBlock* host = nullptr;
    std::string run_id = "run";
    std::string created_at;
};

/// Scores every candidate in every month with `model`; candidates missing
/// from a month get zero-traffic features for it.
inline DeploymentRun run_deployment(const std::vector<Domain>& candidates, const GraphSet& graphs,
                                    const LabelStore& store, const CategoryRegistry& registry,
                                    const ml::TrainedModel& model, const std::string& target_class,
                                    const DeploymentStrategy& strategy, const DeploymentOptions& options = {}) {
    if (graphs.empty()) fail(ErrorCode::precondition, "deployment needs at least one month");
    const auto target = model.class_of(target_class);
    if (!target) fail(ErrorCode::invalid_argument, "model has no class '" + target_class + "'");

    DeploymentRun run;
    run.id = options.run_id;
    run.strategy = strategy;
    run.target_class = target_class;
    run.created_at = options.created_at;

    std::vector<Domain> sorted = candidates;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (const auto& d : sorted) run.candidates.push_back({d, {}, true});

    ExtractOptions extract;
    extract.mode = model.config.mode;
    extract.zero_fill_missing = true;
    extract.host = options.host;
    for (const auto& [month, g] : graphs) {
        run.months.push_back(month.str());
        const FeatureMatrix fm = extract_matrix(g, store, registry, sorted, extract);
        if (!(fm.schema == model.schema)) {
            fail(ErrorCode::schema_mismatch, "extracted schema '" + fm.schema.version + "' does not match model schema '" +
                                                 model.schema.version + "'");
        }
        const Matrix proba = model.predict_proba(fm);
        std::unordered_set<std::string_view> filled(fm.zero_filled.begin(), fm.zero_filled.end());
        for (std::size_t r = 0; r < run.candidates.size(); ++r) {
            auto& c = run.candidates[r];
            c.confidence.push_back(proba(r, static_cast<std::size_t>(*target)));
            if (!filled.count(c.domain)) c.absent = false;
        }
    }
    for (const auto& c : run.candidates) {
        if (c.absent) run.warnings.push_back("candidate " + c.domain + " absent from every month; scored on zero features");
        if (is_positive(c.confidence)) run.positives.push_back(c.domain);
    }
    return run;
}

// ---------------------------------------------------------------------------

struct ReviewSample {
    Domain domain;
    Verdict verdict;
};

struct MetricEstimate {
    std::optional<double> precision;
    std::optional<double> recall;
    std::size_t reviewed = 0;
    std::size_t confirmed = 0;
    std::size_t negatives_reviewed = 0;
    std::size_t negatives_confirmed = 0;  // misinformation found among unflagged samples
};

/// Precision from the flagged sample; recall scales the sampled precision and
/// sampled false-negative rate up to the run's flagged and unflagged counts.
inline MetricEstimate estimate_metrics(const DeploymentRun& run, const std::vector<ReviewSample>& reviewed,
                                       const std::vector<ReviewSample>& negatives_reviewed) {
    if (reviewed.empty()) fail(ErrorCode::precondition, "no reviewed positives to estimate from");
    MetricEstimate e;
    for (const auto& r : reviewed) {
        if (!run.is_positive_domain(r.domain)) fail(ErrorCode::precondition, r.domain + " is not a flagged domain");
        ++e.reviewed;
        if (is_confirmation(r.verdict)) ++e.confirmed;
    }
    for (const auto& r : negatives_reviewed) {
        if (!run.find(r.domain) || run.is_positive_domain(r.domain)) {
            fail(ErrorCode::precondition, r.domain + " is not an unflagged candidate");
        }
        ++e.negatives_reviewed;
        if (is_confirmation(r.verdict)) ++e.negatives_confirmed;
    }
    const double p_hat = static_cast<double>(e.confirmed) / static_cast<double>(e.reviewed);
    e.precision = p_hat;
    if (e.negatives_reviewed > 0) {
        const double n_hat = static_cast<double>(e.negatives_confirmed) / static_cast<double>(e.negatives_reviewed);
        const double found = p_hat * static_cast<double>(run.positives.size());
        const double missed = n_hat * static_cast<double>(run.candidates.size() - run.positives.size());
        if (found + missed > 0.0) e.recall = found / (found + missed);
    }
    return e;
}

/// Adds confirmed domains to the label store. Propaganda-target runs record
/// confirmed_propaganda, others confirmed_misinformation. Returns the events
/// actually applied (already-identical verdicts are skipped).
inline std::vector<ReviewEvent> feedback(const DeploymentRun& run, LabelStore& store, const std::vector<Domain>& confirmed,
                                         const std::string& reviewer, const std::string& timestamp) {
    for (const auto& d : confirmed)
        if (!run.is_positive_domain(d)) fail(ErrorCode::precondition, d + " was not flagged by run " + run.id);
    const Verdict verdict =
        run.target_class == "propaganda" ? Verdict::confirmed_propaganda : Verdict::confirmed_misinformation;
    std::vector<ReviewEvent> applied;
    for (const auto& d : confirmed) {
        ReviewEvent e{d, verdict, reviewer, timestamp, run.id, {}};
        if (store.add_review_label(e)) applied.push_back(std::move(e));
    }
    return applied;
}

// ---------------------------------------------------------------------------
// Run artifact directory:
//   run.json        metadata (id, strategy, target class, months, warnings)
//   candidates.csv  domain,<month>... target-class confidence per month
//   positives.csv   domain,min_confidence
//   reviews.jsonl   review events recorded against this run
//   summary.json    per-month All / Positive counts plus the flagged total

inline nlohmann::json run_summary(const DeploymentRun& run) {
    nlohmann::json months = nlohmann::json::array();
    for (const auto& c : run.month_counts()) months.push_back({{"month", c.month}, {"all", c.all}, {"positive", c.positive}});
    return {{"id", run.id},
            {"strategy", std::string(to_string(run.strategy.kind))},
            {"target_class", run.target_class},
            {"candidates", run.candidates.size()},
            {"flagged", run.positives.size()},
            {"months", months}};
}

/// Table-style rendering of the summary for terminals.
inline std::string run_summary_table(const DeploymentRun& run) {
    std::string out = "month,all,positive\n";
    for (const auto& c : run.month_counts())
        out += c.month + "," + std::to_string(c.all) + "," + std::to_string(c.positive) + "\n";
    out += "flagged_all_months," + std::to_string(run.candidates.size()) + "," + std::to_string(run.positives.size()) + "\n";
    return out;
}

inline void write_run(const DeploymentRun& run, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json meta{{"id", run.id},
                        {"strategy", run.strategy.to_json()},
                        {"target_class", run.target_class},
                        {"months", run.months},
                        {"warnings", run.warnings}};
    if (!run.created_at.empty()) meta["created_at"] = run.created_at;
    write_file((dir / "run.json").string(), meta.dump(2) + "\n");

    std::string cand = "domain";
    for (const auto& m : run.months) cand += "," + m;
    cand += "\n";
    for (const auto& c : run.candidates) {
        cand += c.domain;
        for (const double v : c.confidence) cand += "," + format_double(v);
        cand += "\n";
    }
    write_file((dir / "candidates.csv").string(), cand);

    std::string pos = "domain,min_confidence\n";
    for (const auto& d : run.positives) pos += d + "," + format_double(run.find(d)->min_confidence()) + "\n";
    write_file((dir / "positives.csv").string(), pos);

    if (!std::filesystem::exists(dir / "reviews.jsonl")) write_file((dir / "reviews.jsonl").string(), "");
    write_file((dir / "summary.json").string(), run_summary(run).dump(2) + "\n");
}

inline DeploymentRun load_run(const std::filesystem::path& dir) {
    std::ifstream in(dir / "run.json");
    if (!in) fail(ErrorCode::not_found, "no run artifact at '" + dir.string() + "'");
    const auto meta = nlohmann::json::parse(in, nullptr, false);
    if (meta.is_discarded()) fail(ErrorCode::parse, "corrupt run.json in '" + dir.string() + "'");
    DeploymentRun run;
    run.id = meta.at("id").get<std::string>();
    run.strategy = DeploymentStrategy::from_json(meta.at("strategy"));
    run.target_class = meta.at("target_class").get<std::string>();
    run.months = meta.at("months").get<std::vector<std::string>>();
    run.warnings = meta.value("warnings", std::vector<std::string>{});
    run.created_at = meta.value("created_at", "");

    const auto lines = read_lines((dir / "candidates.csv").string());
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const auto f = split_csv(lines[i]);
        if (f.size() != run.months.size() + 1) fail(ErrorCode::parse, "candidates.csv width mismatch");
        CandidateScore c{f[0], {}, false};
        for (std::size_t k = 1; k < f.size(); ++k) {
            const auto v = parse_double(f[k]);
            if (!v) fail(ErrorCode::parse, "bad confidence in candidates.csv");
            c.confidence.push_back(*v);
        }
        run.candidates.push_back(std::move(c));
    }
    std::sort(run.candidates.begin(), run.candidates.end(),
              [](const auto& a, const auto& b) { return a.domain < b.domain; });
    for (const auto& c : run.candidates)
        if (is_positive(c.confidence)) run.positives.push_back(c.domain);
    return run;
}

}  // namespace navnet
