#pragma once

// Command-line front end. Every subcommand reads and writes files only;
// failures print one JSON line {"error":{"code","message"}} to stderr and
// return a nonzero status.

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "navnet/app/config.hpp"
#include "navnet/app/service.hpp"
#include "navnet/deploy.hpp"
#include "navnet/features.hpp"
#include "navnet/graph.hpp"
#include "navnet/ingest.hpp"
#include "navnet/labels.hpp"
#include "navnet/ml/evaluation.hpp"
#include "navnet/ml/model.hpp"
#include "navnet/pipeline.hpp"
#include "navnet/synth.hpp"

namespace navnet::app {

namespace cli_detail {

inline LabelStore open_store(const std::vector<std::string>& label_files, const std::string& events) {
    LabelStore store = load_labels(label_files);
    if (!events.empty()) replay_events(store, read_event_log(events));
    return store;
}

inline CategoryRegistry open_registry(const std::string& path) {
    return path.empty() ? default_registry() : load_registry(path);
}

inline LogFormat format_for(const std::string& path, const std::string& requested) {
    if (requested == "csv") return LogFormat::csv;
    if (requested == "jsonl") return LogFormat::jsonl;
    if (requested != "auto") fail(ErrorCode::invalid_argument, "format must be csv, jsonl or auto");
    const auto ext = std::filesystem::path(path).extension().string();
    return ext == ".jsonl" || ext == ".json" ? LogFormat::jsonl : LogFormat::csv;
}

inline FeatureMode mode_from(const std::string& s) {
    auto m = parse_feature_mode(s);
    if (!m) fail(ErrorCode::invalid_argument, "mode must be binary or multiclass");
    return *m;
}

inline const NavigationGraph& graph_for(const GraphSet& graphs, const std::string& month) {
    if (graphs.empty()) fail(ErrorCode::empty_input, "no graphs");
    if (month.empty()) return graphs.begin()->second;
    auto it = graphs.find(Month::parse_or_throw(month));
    if (it == graphs.end()) fail(ErrorCode::not_found, "no graph for month " + month);
    return it->second;
}

inline std::vector<Domain> read_domain_list(const std::string& path) {
    std::vector<Domain> out;
    for (const auto& line : read_lines(path)) {
        const auto t = trim(line);
        if (t.empty() || t.front() == '#' || t == "domain") continue;
        const auto d = canonicalize_domain(split_csv(t).front());
        if (d.empty()) fail(ErrorCode::parse, path + ": bad domain '" + std::string(t) + "'");
        out.push_back(d);
    }
    return out;
}

struct Shared {
    std::string graphs;
    std::vector<std::string> labels;
    std::string events;
    std::string registry;
    std::string mode = "binary";
};

inline void add_shared(CLI::App* cmd, Shared& s, bool need_labels = true) {
    cmd->add_option("--graphs", s.graphs, "Edge-list CSV written by build-graph")->required()->check(CLI::ExistingFile);
    auto* labels = cmd->add_option("--labels", s.labels, "Label CSV (domain,class,propaganda,source); repeatable");
    labels->check(CLI::ExistingFile);
    if (need_labels) labels->required();
    cmd->add_option("--events", s.events, "Label event log (JSONL) replayed on top of the label files");
    cmd->add_option("--registry", s.registry, "Category host CSV (category,host); built-in hosts when omitted")
        ->check(CLI::ExistingFile);
    cmd->add_option("--mode", s.mode, "binary or multiclass")->check(CLI::IsMember({"binary", "multiclass"}));
}

inline volatile std::sig_atomic_t g_stop = 0;

}  // namespace cli_detail

/// Runs one CLI invocation; returns the process exit status.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    using namespace cli_detail;
    CLI::App app{"navnet: navigation-graph misinformation domain detection"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    // ingest
    std::vector<std::string> ingest_logs;
    std::string ingest_format = "auto", ingest_aliases, ingest_out;
    std::int64_t ingest_floor = 3000;
    auto* ingest = app.add_subcommand("ingest", "Parse, aggregate and privacy-filter traffic logs");
    ingest->add_option("--logs", ingest_logs, "Log file (CSV or JSONL); repeatable")->required()->check(CLI::ExistingFile);
    ingest->add_option("--format", ingest_format, "csv, jsonl or auto (by extension)");
    ingest->add_option("--aliases", ingest_aliases, "Alias CSV (from_host,to_host)")->check(CLI::ExistingFile);
    ingest->add_option("--privacy-floor", ingest_floor, "Drop domains whose monthly total is not above this; 0 disables");
    ingest->add_option("--out", ingest_out, "Aggregated records CSV")->required();

    // build-graph
    std::string bg_records, bg_out;
    std::int64_t bg_threshold = 3000;
    auto* build = app.add_subcommand("build-graph", "Build monthly navigation graphs from aggregated records");
    build->add_option("--records", bg_records, "Records CSV (month,referrer,target,page_views)")->required()->check(CLI::ExistingFile);
    build->add_option("--edge-threshold", bg_threshold, "Minimum monthly page views for an edge");
    build->add_option("--out", bg_out, "Edge-list CSV")->required();

    // features
    Shared fs;
    std::string f_domains, f_hosts, f_out;
    auto* features = app.add_subcommand("features", "Extract per-month feature matrices");
    add_shared(features, fs);
    features->add_option("--domains", f_domains, "Domain list (one per line); labeled domains when omitted")
        ->check(CLI::ExistingFile);
    features->add_option("--hosts", f_hosts, "Host metadata CSV enabling the host feature block")->check(CLI::ExistingFile);
    features->add_option("--out-dir", f_out, "Directory for features_<month>.csv")->required();

    // train
    Shared ts;
    std::string t_algorithm = "random_forest", t_month, t_out, t_model_config;
    std::uint64_t t_seed = 7;
    auto* train = app.add_subcommand("train", "Train a classifier on one month's labeled domains");
    add_shared(train, ts);
    train->add_option("--algorithm", t_algorithm, "knn, logreg, random_forest or gbt");
    train->add_option("--model-config", t_model_config, "Model hyperparameters (JSON)")->check(CLI::ExistingFile);
    train->add_option("--train-month", t_month, "YYYY-MM; earliest month when omitted");
    train->add_option("--seed", t_seed, "Random seed");
    train->add_option("--out", t_out, "Model file (JSON)")->required();

    // evaluate
    Shared es;
    std::string e_month, e_algorithms = "random_forest,gbt,logreg,knn", e_out;
    std::uint64_t e_seed = 7;
    int e_folds = 5;
    auto* evaluate = app.add_subcommand("evaluate", "Temporally shifted stratified k-fold evaluation");
    add_shared(evaluate, es);
    evaluate->add_option("--train-month", e_month, "YYYY-MM; earliest month when omitted");
    evaluate->add_option("--algorithms", e_algorithms, "Comma-separated algorithms");
    evaluate->add_option("--seed", e_seed, "Random seed");
    evaluate->add_option("--folds", e_folds, "Number of folds")->check(CLI::Range(2, 100));
    evaluate->add_option("--out", e_out, "Also write the metrics CSV here");

    // deploy
    Shared ds;
    std::string d_model, d_strategy = "one-hop", d_seeds = "all", d_target, d_run_id = "run", d_runs_dir, d_created;
    std::int64_t d_floor = 3000;
    std::size_t d_sample = 50000;
    std::uint64_t d_sample_seed = 7;
    auto* deploy = app.add_subcommand("deploy", "Select candidates, score them, write a run artifact");
    add_shared(deploy, ds);
    deploy->add_option("--model", d_model, "Model file from train")->required()->check(CLI::ExistingFile);
    deploy->add_option("--strategy", d_strategy, "one-hop, two-hop or sampled");
    deploy->add_option("--seeds", d_seeds, "Egonet seeds: all (misinformation) or propaganda")
        ->check(CLI::IsMember({"all", "propaganda"}));
    deploy->add_option("--traffic-floor", d_floor, "Minimum monthly in+out traffic for candidates");
    deploy->add_option("--sample-size", d_sample, "Sampled strategy: number of domains");
    deploy->add_option("--sample-seed", d_sample_seed, "Sampled strategy: seed");
    deploy->add_option("--target-class", d_target, "Class to flag; the model's positive class when omitted");
    deploy->add_option("--run-id", d_run_id, "Run identifier (directory name)");
    deploy->add_option("--runs-dir", d_runs_dir, "Directory holding run artifacts")->required();
    deploy->add_option("--created-at", d_created, "Timestamp recorded in run.json");

    // synth
    std::string s_config, s_out;
    std::optional<std::uint64_t> s_seed;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic benchmark");
    synth->add_option("--config", s_config, "Synthetic benchmark config (JSON)")->check(CLI::ExistingFile);
    synth->add_option("--seed", s_seed, "Override the config seed");
    synth->add_option("--out-dir", s_out, "Writes logs.csv, labels.csv, truth.csv, config.json")->required();

    // serve
    std::string v_config, v_host = "127.0.0.1";
    Shared vs;
    std::string v_runs;
    std::optional<int> v_port;
    auto* serve = app.add_subcommand("serve", "Run the review HTTP service");
    serve->add_option("--config", v_config, "Pipeline config (JSON)")->check(CLI::ExistingFile);
    serve->add_option("--graphs", vs.graphs, "Edge-list CSV")->check(CLI::ExistingFile);
    serve->add_option("--labels", vs.labels, "Label CSV; repeatable")->check(CLI::ExistingFile);
    serve->add_option("--events", vs.events, "Label event log (created if missing)");
    serve->add_option("--registry", vs.registry, "Category host CSV")->check(CLI::ExistingFile);
    serve->add_option("--mode", vs.mode, "binary or multiclass")->check(CLI::IsMember({"binary", "multiclass"}));
    serve->add_option("--runs-dir", v_runs, "Directory holding run artifacts");
    serve->add_option("--host", v_host, "Bind address");
    serve->add_option("--port", v_port, "Port");

    // estimate
    std::string x_run, x_events, x_negatives;
    auto* estimate = app.add_subcommand("estimate", "Estimate precision/recall of a run from reviewed samples");
    estimate->add_option("--run", x_run, "Run artifact directory")->required()->check(CLI::ExistingDirectory);
    estimate->add_option("--events", x_events, "Label event log holding the run's reviews")->required();
    estimate->add_option("--negatives", x_negatives, "Reviewed unflagged candidates CSV (domain,verdict)")
        ->check(CLI::ExistingFile);

    const auto report = [&](const std::string& code, const std::string& message, int status) {
        err << nlohmann::json{{"error", {{"code", code}, {"message", message}}}}.dump() << "\n";
        return status;
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        return report("usage", e.what(), 2);
    }

    try {
        if (ingest->parsed()) {
            const AliasTable aliases = ingest_aliases.empty() ? AliasTable{} : load_aliases(ingest_aliases);
            std::vector<TrafficRecord> all;
            std::size_t malformed = 0;
            for (const auto& path : ingest_logs) {
                auto r = parse_log(path, format_for(path, ingest_format), aliases);
                malformed += r.malformed;
                all.insert(all.end(), std::make_move_iterator(r.records.begin()), std::make_move_iterator(r.records.end()));
            }
            MonthlyRecords monthly = aggregate_month(all);
            std::size_t dropped = 0;
            if (ingest_floor > 0) {
                for (auto& [month, rows] : monthly) {
                    const auto before = rows.size();
                    rows = apply_privacy_floor(std::move(rows), ingest_floor);
                    dropped += before - rows.size();
                }
            }
            std::size_t kept = 0;
            nlohmann::json months = nlohmann::json::array();
            for (const auto& [month, rows] : monthly) {
                kept += rows.size();
                months.push_back(month.str());
            }
            write_file(ingest_out, records_to_csv(monthly));
            out << nlohmann::json{{"parsed", all.size()}, {"malformed", malformed}, {"aggregated", kept + dropped},
                                  {"dropped_by_privacy_floor", dropped}, {"written", kept}, {"months", months}}
                       .dump()
                << "\n";
        } else if (build->parsed()) {
            const auto parsed = parse_log(bg_records, LogFormat::csv);
            const GraphSet graphs = build_graphs(aggregate_month(parsed.records), bg_threshold);
            std::string csv;
            out << "month,nodes,edges\n";
            for (const auto& [month, g] : graphs) {
                const auto part = graph_to_csv(g);
                csv += csv.empty() ? part : part.substr(part.find('\n') + 1);
                out << month.str() << "," << g.node_count() << "," << g.edge_count() << "\n";
            }
            write_file(bg_out, csv);
        } else if (features->parsed()) {
            const auto graphs = graphs_from_csv(fs.graphs);
            const auto store = open_store(fs.labels, fs.events);
            const auto registry = open_registry(fs.registry);
            const FeatureMode mode = mode_from(fs.mode);
            std::optional<HostBlock> host;
            if (!f_hosts.empty()) {
                HostBlock block;
                block.table = load_host_table(f_hosts);
                block.encoder = HostEncoder::fit(block.table);
                host = std::move(block);
            }
            const auto domains = f_domains.empty() ? keys_of(labeled_classes(graphs, store, mode)) : read_domain_list(f_domains);
            std::filesystem::create_directories(f_out);
            ExtractOptions options;
            options.mode = mode;
            options.host = host ? &*host : nullptr;
            for (const auto& [month, g] : graphs) {
                const auto fm = extract_matrix(g, store, registry, domains, options);
                const auto path = (std::filesystem::path(f_out) / ("features_" + month.str() + ".csv")).string();
                write_file(path, feature_matrix_to_csv(fm));
                out << month.str() << ": " << fm.domains.size() << " rows, " << fm.missing.size() << " missing -> " << path << "\n";
            }
        } else if (train->parsed()) {
            const auto graphs = graphs_from_csv(ts.graphs);
            const auto store = open_store(ts.labels, ts.events);
            const auto registry = open_registry(ts.registry);
            ml::ModelConfig config;
            if (!t_model_config.empty()) {
                std::ifstream in(t_model_config);
                const auto j = nlohmann::json::parse(in, nullptr, false);
                if (j.is_discarded()) fail(ErrorCode::parse, "model config is not JSON");
                config = ml::ModelConfig::from_json(j);
            }
            if (train->count("--algorithm") || t_model_config.empty()) {
                auto a = ml::parse_algorithm(t_algorithm);
                if (!a) fail(ErrorCode::invalid_argument, "unknown algorithm '" + t_algorithm + "'");
                config.algorithm = *a;
            }
            if (train->count("--mode") || t_model_config.empty()) config.mode = mode_from(ts.mode);
            if (train->count("--seed") || t_model_config.empty()) config.seed = t_seed;
            const auto& g = graph_for(graphs, t_month);
            const auto labels = labeled_classes(graphs, store, config.mode);
            ExtractOptions options;
            options.mode = config.mode;
            options.zero_fill_missing = true;
            const auto fm = extract_matrix(g, store, registry, keys_of(labels), options);
            const auto model = train_on_month(config, fm, labels);
            ml::save_model(model, t_out);
            out << nlohmann::json{{"algorithm", std::string(ml::to_string(config.algorithm))},
                                  {"mode", std::string(to_string(config.mode))},
                                  {"train_month", g.month().str()},
                                  {"rows", fm.domains.size()},
                                  {"model", t_out}}
                       .dump()
                << "\n";
        } else if (evaluate->parsed()) {
            const auto graphs = graphs_from_csv(es.graphs);
            const auto store = open_store(es.labels, es.events);
            const auto registry = open_registry(es.registry);
            const FeatureMode mode = mode_from(es.mode);
            const auto labels = labeled_classes(graphs, store, mode);
            const auto matrices = monthly_features(graphs, store, registry, keys_of(labels), mode);
            const std::string month = graph_for(graphs, e_month).month().str();
            std::vector<std::pair<std::string, ml::CrossValidationResult>> rows;
            std::stringstream list(e_algorithms);
            for (std::string name; std::getline(list, name, ',');) {
                auto a = ml::parse_algorithm(std::string(trim(name)));
                if (!a) fail(ErrorCode::invalid_argument, "unknown algorithm '" + name + "'");
                ml::ModelConfig config;
                config.algorithm = *a;
                config.mode = mode;
                config.seed = e_seed;
                rows.emplace_back(std::string(ml::to_string(*a)), ml::cross_validate(config, matrices, labels, month, e_folds));
            }
            const auto table = ml::metrics_table_csv(rows);
            if (!e_out.empty()) write_file(e_out, table);
            out << table;
        } else if (deploy->parsed()) {
            const auto graphs = graphs_from_csv(ds.graphs);
            const auto store = open_store(ds.labels, ds.events);
            const auto registry = open_registry(ds.registry);
            const auto model = ml::load_model(d_model);
            DeploymentStrategy strategy;
            auto kind = parse_strategy_kind(d_strategy);
            if (!kind) fail(ErrorCode::invalid_argument, "strategy must be one-hop, two-hop or sampled");
            strategy.kind = *kind;
            strategy.traffic_floor = d_floor;
            strategy.sample_size = d_sample;
            strategy.seed = d_sample_seed;
            strategy.seeds = d_seeds == "propaganda" ? SeedSet::propaganda_only : SeedSet::all_misinformation;
            const std::string target =
                d_target.empty() ? model.classes.at(static_cast<std::size_t>(ml::positive_class(model.config.mode))) : d_target;
            DeploymentOptions options;
            options.run_id = d_run_id;
            options.created_at = d_created;
            const auto candidates = select_candidates(graphs, store, registry, strategy);
            const auto run = run_deployment(candidates, graphs, store, registry, model, target, strategy, options);
            write_run(run, std::filesystem::path(d_runs_dir) / d_run_id);
            for (const auto& w : run.warnings) err << "warning: " << w << "\n";
            out << run_summary_table(run);
        } else if (synth->parsed()) {
            SynthConfig config;
            if (!s_config.empty()) {
                std::ifstream in(s_config);
                const auto j = nlohmann::json::parse(in, nullptr, false);
                if (j.is_discarded()) fail(ErrorCode::parse, "synth config is not JSON");
                config = SynthConfig::from_json(j);
            }
            if (s_seed) config.seed = *s_seed;
            const auto data = generate(config);
            const std::filesystem::path dir(s_out);
            std::filesystem::create_directories(dir);
            write_file((dir / "logs.csv").string(), records_to_csv(data.records));
            write_file((dir / "labels.csv").string(), labels_to_csv(data.labels));
            write_file((dir / "truth.csv").string(), truth_to_csv(data.sites));
            write_file((dir / "config.json").string(), config.to_json().dump(2) + "\n");
            std::size_t rows = 0;
            for (const auto& [m, r] : data.records) rows += r.size();
            out << nlohmann::json{{"records", rows}, {"labels", data.labels.size()}, {"sites", data.sites.size()},
                                  {"out_dir", s_out}}
                       .dump()
                << "\n";
        } else if (serve->parsed()) {
            ReviewService::Options o;
            int port = 8080;
            if (!v_config.empty()) {
                const auto config = PipelineConfig::load(v_config);
                o.graphs = graphs_from_csv(config.graphs_path().string());
                o.labels = load_labels(config.labels);
                if (!config.registry.empty()) o.registry = load_registry(config.registry);
                o.events_path = config.events_path();
                o.runs_dir = config.runs_dir();
                o.mode = config.model.mode;
                port = config.port;
            }
            if (!vs.graphs.empty()) o.graphs = graphs_from_csv(vs.graphs);
            if (!vs.labels.empty()) o.labels = load_labels(vs.labels);
            if (!vs.registry.empty()) o.registry = load_registry(vs.registry);
            if (!vs.events.empty()) o.events_path = vs.events;
            if (!v_runs.empty()) o.runs_dir = v_runs;
            if (serve->count("--mode")) o.mode = mode_from(vs.mode);
            if (v_port) port = *v_port;
            if (o.graphs.empty()) fail(ErrorCode::invalid_argument, "serve needs --graphs or --config");
            if (o.events_path.empty()) fail(ErrorCode::invalid_argument, "serve needs --events or --config");
            if (o.runs_dir.empty()) fail(ErrorCode::invalid_argument, "serve needs --runs-dir or --config");
            ReviewService service(std::move(o));
            httplib::Server server;
            bind_routes(server, service);
            if (!server.bind_to_port(v_host, port)) fail(ErrorCode::io, "cannot bind " + v_host + ":" + std::to_string(port));
            out << nlohmann::json{{"listening", v_host + ":" + std::to_string(port)}}.dump() << std::endl;
            server.listen_after_bind();
        } else if (estimate->parsed()) {
            const auto run = load_run(x_run);
            std::vector<ReviewSample> reviewed, negatives;
            for (const auto& e : read_event_log(x_events))
                if (e.run == run.id && run.is_positive_domain(e.domain)) reviewed.push_back({e.domain, e.verdict});
            if (!x_negatives.empty()) {
                const auto lines = read_lines(x_negatives);
                for (std::size_t i = 1; i < lines.size(); ++i) {
                    if (trim(lines[i]).empty()) continue;
                    const auto f = split_csv(lines[i]);
                    auto v = f.size() == 2 ? parse_verdict(trim(f[1])) : std::nullopt;
                    if (!v) fail(ErrorCode::parse, x_negatives + ":" + std::to_string(i + 1) + ": expected domain,verdict");
                    negatives.push_back({canonicalize_domain(f[0]), *v});
                }
            }
            const auto e = estimate_metrics(run, reviewed, negatives);
            nlohmann::json j{{"run", run.id},
                             {"reviewed", e.reviewed},
                             {"confirmed", e.confirmed},
                             {"negatives_reviewed", e.negatives_reviewed},
                             {"negatives_confirmed", e.negatives_confirmed}};
            j["precision"] = e.precision ? nlohmann::json(*e.precision) : nlohmann::json(nullptr);
            j["recall"] = e.recall ? nlohmann::json(*e.recall) : nlohmann::json(nullptr);
            out << j.dump() << "\n";
        }
    } catch (const Error& e) {
        return report(std::string(to_string(e.code())), e.what(), 1);
    } catch (const nlohmann::json::exception& e) {
        return report("parse_error", e.what(), 1);
    } catch (const std::exception& e) {
        return report("internal", e.what(), 1);
    }
    return 0;
}

}  // namespace navnet::app
