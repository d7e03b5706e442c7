#pragma once

// Review service. Run artifacts and graphs are immutable after startup; the
// label store is the only mutable state and every write goes through one
// exclusive lock: validate, append to the label event log, apply, mirror into
// the run's reviews.jsonl.
//
// Endpoints:
//   GET  /health
//   GET  /runs
//   GET  /runs/{id}/queue?page=&size=
//   GET  /domains/{domain}
//   POST /reviews   {"run", "domain", "verdict", "reviewer", "checklist"?, "timestamp"?}

#include <chrono>
#include <ctime>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "navnet/app/config.hpp"
#include "navnet/deploy.hpp"
#include "navnet/features.hpp"
#include "navnet/graph.hpp"
#include "navnet/labels.hpp"

namespace navnet::app {

struct Response {
    int status = 200;
    nlohmann::json body;
};

inline int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::not_found: return 404;
        case ErrorCode::conflict: return 409;
        case ErrorCode::parse:
        case ErrorCode::invalid_argument:
        case ErrorCode::empty_input: return 400;
        default: return 500;
    }
}

inline Response error_response(ErrorCode code, const std::string& message) {
    return {http_status(code), {{"code", std::string(to_string(code))}, {"message", message}}};
}

inline std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

class ReviewService {
public:
    struct Options {
        GraphSet graphs;
        LabelStore labels;  // base labels, before the event log is replayed
        CategoryRegistry registry = default_registry();
        std::string events_path;
        std::filesystem::path runs_dir;
        FeatureMode mode = FeatureMode::binary;
        std::function<std::string()> clock = utc_now;
    };

    explicit ReviewService(Options options) : opt_(std::move(options)), store_(std::move(opt_.labels)) {
        replay_events(store_, read_event_log(opt_.events_path));
        for (std::size_t i = 0; i < store_.events().size(); ++i) last_event_[store_.events()[i].domain] = i;
        load_runs();
    }

    static ReviewService open(const PipelineConfig& config) {
        Options o;
        o.graphs = graphs_from_csv(config.graphs_path().string(), config.edge_threshold);
        o.labels = load_labels(config.labels);
        if (!config.registry.empty()) o.registry = load_registry(config.registry);
        o.events_path = config.events_path();
        o.runs_dir = config.runs_dir();
        o.mode = config.model.mode;
        return ReviewService(std::move(o));
    }

    Response health() const {
        std::shared_lock lock(mu_);
        return {200, {{"status", "ok"}, {"runs", runs_.size()}, {"label_events", store_.events().size()}}};
    }

    Response runs() const {
        std::shared_lock lock(mu_);
        nlohmann::json list = nlohmann::json::array();
        for (const auto& [id, run] : runs_) {
            auto s = run_summary(run);
            std::size_t reviewed = 0;
            for (const auto& d : run.positives) reviewed += store_.review_verdict(d).has_value();
            s["reviewed"] = reviewed;
            list.push_back(std::move(s));
        }
        return {200, {{"runs", list}}};
    }

    /// Flagged domains by minimum monthly confidence, highest first; page is 1-based.
    Response queue(const std::string& run_id, const std::string& page_text, const std::string& size_text) const {
        const auto page = page_text.empty() ? std::optional<long>(1) : parse_int<long>(page_text);
        const auto size = size_text.empty() ? std::optional<long>(50) : parse_int<long>(size_text);
        if (!page || *page < 1) return error_response(ErrorCode::invalid_argument, "page must be an integer >= 1");
        if (!size || *size < 1 || *size > 1000) {
            return error_response(ErrorCode::invalid_argument, "size must be an integer in [1, 1000]");
        }
        std::shared_lock lock(mu_);
        auto it = runs_.find(run_id);
        if (it == runs_.end()) return error_response(ErrorCode::not_found, "unknown run '" + run_id + "'");
        const auto& order = queue_order_.at(run_id);
        nlohmann::json entries = nlohmann::json::array();
        const auto begin = static_cast<std::size_t>((*page - 1) * *size);
        for (std::size_t i = begin; i < order.size() && i < begin + static_cast<std::size_t>(*size); ++i)
            entries.push_back(queue_entry(it->second, order[i]));
        return {200,
                {{"run", run_id}, {"page", *page}, {"size", *size}, {"total", order.size()}, {"entries", entries}}};
    }

    Response domain(const std::string& raw) const {
        const auto d = canonicalize_domain(raw);
        bool present = false;
        for (const auto& [m, g] : opt_.graphs) present = present || (!d.empty() && g.contains(d));
        if (!present) return error_response(ErrorCode::not_found, "domain '" + raw + "' is in no graph");

        std::shared_lock lock(mu_);
        const auto names = traffic_feature_names(opt_.mode);
        nlohmann::json months = nlohmann::json::array();
        for (const auto& [month, g] : opt_.graphs) {
            nlohmann::json entry{{"month", month.str()}, {"present", g.contains(d)}};
            if (!g.contains(d)) {
                entry["features"] = nullptr;
                entry["neighbors"] = nlohmann::json::array();
                months.push_back(std::move(entry));
                continue;
            }
            const auto values = extract_features(g, store_, opt_.registry, d).values(opt_.mode);
            nlohmann::json features = nlohmann::json::object();
            for (std::size_t k = 0; k < names.size(); ++k) features[names[k]] = values[k];
            entry["features"] = std::move(features);
            nlohmann::json neighbors = nlohmann::json::array();
            const NodeId id = g.id_of(d);
            for (const auto& a : g.successors(id)) neighbors.push_back(neighbor(g, a, "outbound"));
            for (const auto& a : g.predecessors(id)) neighbors.push_back(neighbor(g, a, "inbound"));
            entry["neighbors"] = std::move(neighbors);
            months.push_back(std::move(entry));
        }
        auto body = label_json(d);
        body["domain"] = d;
        body["feature_columns"] = names;
        body["months"] = std::move(months);
        return {200, std::move(body)};
    }

    Response post_review(const std::string& text) {
        const auto body = nlohmann::json::parse(text, nullptr, false);
        if (body.is_discarded() || !body.is_object()) return error_response(ErrorCode::parse, "body is not a JSON object");
        for (const char* key : {"run", "domain", "verdict", "reviewer"}) {
            if (!body.contains(key) || !body.at(key).is_string() || body.at(key).get<std::string>().empty()) {
                return error_response(ErrorCode::invalid_argument, std::string("missing or empty string field '") + key + "'");
            }
        }
        const auto verdict = parse_verdict(body.at("verdict").get<std::string>());
        if (!verdict) return error_response(ErrorCode::invalid_argument, "unknown verdict " + body.at("verdict").dump());
        ReviewEvent event;
        event.run = body.at("run").get<std::string>();
        event.domain = canonicalize_domain(body.at("domain").get<std::string>());
        event.verdict = *verdict;
        event.reviewer = body.at("reviewer").get<std::string>();
        if (auto c = body.find("checklist"); c != body.end()) {
            if (!c->is_array()) return error_response(ErrorCode::invalid_argument, "checklist must be an array of booleans");
            for (const auto& v : *c) {
                if (!v.is_boolean()) return error_response(ErrorCode::invalid_argument, "checklist must be an array of booleans");
                event.checklist.push_back(v.get<bool>());
            }
        }
        if (auto t = body.find("timestamp"); t != body.end() && !t->is_string()) {
            return error_response(ErrorCode::invalid_argument, "timestamp must be a string");
        }

        std::unique_lock lock(mu_);
        auto it = runs_.find(event.run);
        if (it == runs_.end()) return error_response(ErrorCode::not_found, "unknown run '" + event.run + "'");
        const DeploymentRun& run = it->second;
        if (!run.is_positive_domain(event.domain)) {
            return error_response(ErrorCode::not_found, "domain '" + event.domain + "' is not flagged by run '" + event.run + "'");
        }
        if (auto prior = store_.review_verdict(event.domain)) {
            if (*prior != event.verdict) {
                return error_response(ErrorCode::conflict, "domain '" + event.domain + "' already reviewed as " +
                                                               std::string(to_string(*prior)));
            }
            return {200, queue_entry(run, event.domain)};  // identical verdict: nothing to record
        }
        event.timestamp = body.value("timestamp", std::string());
        if (event.timestamp.empty()) event.timestamp = opt_.clock();
        try {
            append_event(opt_.events_path, event);
        } catch (const Error& e) {
            return error_response(ErrorCode::io, e.what());
        }
        store_.add_review_label(event);
        last_event_[event.domain] = store_.events().size() - 1;
        try {
            append_event((opt_.runs_dir / run.id / "reviews.jsonl").string(), event);
        } catch (const Error&) {
            // The label log already holds the event; the mirror is rebuilt on restart.
        }
        return {200, queue_entry(run, event.domain)};
    }

    const LabelStore& labels() const { return store_; }

private:
    void load_runs() {
        if (opt_.runs_dir.empty() || !std::filesystem::exists(opt_.runs_dir)) return;
        std::vector<std::filesystem::path> dirs;
        for (const auto& entry : std::filesystem::directory_iterator(opt_.runs_dir))
            if (entry.is_directory() && std::filesystem::exists(entry.path() / "run.json")) dirs.push_back(entry.path());
        std::sort(dirs.begin(), dirs.end());
        for (const auto& dir : dirs) {
            DeploymentRun run = load_run(dir);
            std::vector<Domain> order = run.positives;
            std::stable_sort(order.begin(), order.end(), [&](const Domain& a, const Domain& b) {
                return run.find(a)->min_confidence() > run.find(b)->min_confidence();
            });
            // Re-project the run's review mirror from the label log.
            std::string mirror;
            for (const auto& e : store_.events())
                if (e.run == run.id) mirror += e.to_json().dump() + "\n";
            write_file((dir / "reviews.jsonl").string(), mirror);
            queue_order_.emplace(run.id, std::move(order));
            runs_.emplace(run.id, std::move(run));
        }
    }

    nlohmann::json label_json(const Domain& d) const {
        nlohmann::json j;
        const auto* l = store_.find(d);
        j["class"] = std::string(to_string(l ? l->cls : DomainClass::unlabeled));
        j["propaganda"] = l && l->propaganda;
        if (auto c = opt_.registry.category_of(d)) j["category"] = std::string(to_string(*c));
        else j["category"] = nullptr;
        return j;
    }

    nlohmann::json neighbor(const NavigationGraph& g, const Arc& a, const char* direction) const {
        auto j = label_json(g.name(a.node));
        j["domain"] = g.name(a.node);
        j["direction"] = direction;
        j["weight"] = a.weight;
        return j;
    }

    nlohmann::json queue_entry(const DeploymentRun& run, const Domain& d) const {
        const auto* c = run.find(d);
        nlohmann::json confidence = nlohmann::json::object();
        for (std::size_t m = 0; m < run.months.size(); ++m) confidence[run.months[m]] = c->confidence[m];
        nlohmann::json j{{"domain", d}, {"min_confidence", c->min_confidence()}, {"confidence", confidence}};
        if (auto it = last_event_.find(d); it != last_event_.end()) {
            const auto& e = store_.events()[it->second];
            j["status"] = "reviewed";
            j["verdict"] = std::string(to_string(e.verdict));
            j["reviewer"] = e.reviewer;
            j["reviewed_at"] = e.timestamp;
        } else {
            j["status"] = "pending";
            j["verdict"] = nullptr;
        }
        return j;
    }

    Options opt_;
    LabelStore store_;
    std::map<std::string, DeploymentRun> runs_;
    std::map<std::string, std::vector<Domain>> queue_order_;
    std::map<Domain, std::size_t> last_event_;
    mutable std::shared_mutex mu_;
};

/// Registers the service's routes on an httplib server.
inline void bind_routes(httplib::Server& server, ReviewService& service) {
    const auto send = [](httplib::Response& res, const Response& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    const auto guarded = [send](auto&& fn) {
        return [send, fn](const httplib::Request& req, httplib::Response& res) {
            try {
                send(res, fn(req));
            } catch (const Error& e) {
                send(res, error_response(e.code(), e.what()));
            } catch (const std::exception& e) {
                send(res, {500, {{"code", "internal"}, {"message", e.what()}}});
            }
        };
    };
    server.Get("/health", guarded([&](const httplib::Request&) { return service.health(); }));
    server.Get("/runs", guarded([&](const httplib::Request&) { return service.runs(); }));
    server.Get(R"(/runs/([^/]+)/queue)", guarded([&](const httplib::Request& req) {
                   return service.queue(req.matches[1], req.get_param_value("page"), req.get_param_value("size"));
               }));
    server.Get(R"(/domains/([^/]+))", guarded([&](const httplib::Request& req) { return service.domain(req.matches[1]); }));
    server.Post("/reviews", guarded([&](const httplib::Request& req) { return service.post_review(req.body); }));
    server.set_error_handler([send](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) send(res, {res.status, {{"code", "not_found"}, {"message", "no such endpoint"}}});
    });
}

}  // namespace navnet::app
