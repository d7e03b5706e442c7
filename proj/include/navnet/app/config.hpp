#pragma once

// Pipeline configuration file. Relative paths resolve against the directory
// holding the config file.
//
// {
//   "logs": ["logs.csv"], "log_format": "csv", "aliases": "",
//   "labels": ["labels.csv"], "events": "label_events.jsonl", "registry": "",
//   "artifact_root": "artifacts", "edge_threshold": 3000, "privacy_floor": 3000,
//   "traffic_floor": 3000, "train_month": "", "port": 8080,
//   "model": {...}, "strategy": {...}
// }

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "navnet/deploy.hpp"
#include "navnet/error.hpp"
#include "navnet/ml/model.hpp"

namespace navnet::app {

struct PipelineConfig {
    std::vector<std::string> logs;
    std::string log_format = "csv";
    std::string aliases;
    std::vector<std::string> labels;
    std::string events;
    std::string registry;  // empty: built-in category hosts
    std::string artifact_root = "artifacts";
    std::int64_t edge_threshold = 3000;
    std::int64_t privacy_floor = 3000;  // 0 disables
    std::string train_month;  // empty: earliest month
    int port = 8080;
    ml::ModelConfig model;
    DeploymentStrategy strategy;

    std::filesystem::path graphs_path() const { return std::filesystem::path(artifact_root) / "graphs.csv"; }
    std::filesystem::path records_path() const { return std::filesystem::path(artifact_root) / "records.csv"; }
    std::filesystem::path model_path() const { return std::filesystem::path(artifact_root) / "model.json"; }
    std::filesystem::path runs_dir() const { return std::filesystem::path(artifact_root) / "runs"; }
    std::string events_path() const {
        return events.empty() ? (std::filesystem::path(artifact_root) / "label_events.jsonl").string() : events;
    }

    void validate() const {
        if (edge_threshold < 1) fail(ErrorCode::invalid_argument, "edge_threshold must be positive");
        if (privacy_floor < 0) fail(ErrorCode::invalid_argument, "privacy_floor must be >= 0");
        if (port < 0 || port > 65535) fail(ErrorCode::invalid_argument, "port out of range");
        if (log_format != "csv" && log_format != "jsonl") fail(ErrorCode::invalid_argument, "log_format must be csv or jsonl");
        strategy.validate();
        model.validate();
        const auto must_exist = [](const std::string& p, const char* what) {
            if (!p.empty() && !std::filesystem::exists(p))
                fail(ErrorCode::not_found, std::string(what) + " '" + p + "' does not exist");
        };
        for (const auto& p : logs) must_exist(p, "log file");
        for (const auto& p : labels) must_exist(p, "label file");
        must_exist(aliases, "alias file");
        must_exist(registry, "registry file");
    }

    static PipelineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base = {}) {
        const auto resolve = [&](const std::string& p) {
            if (p.empty() || std::filesystem::path(p).is_absolute() || base.empty()) return p;
            return (base / p).lexically_normal().string();
        };
        PipelineConfig c;
        for (const auto& p : j.value("logs", std::vector<std::string>{})) c.logs.push_back(resolve(p));
        c.log_format = j.value("log_format", c.log_format);
        c.aliases = resolve(j.value("aliases", ""));
        for (const auto& p : j.value("labels", std::vector<std::string>{})) c.labels.push_back(resolve(p));
        c.events = resolve(j.value("events", ""));
        c.registry = resolve(j.value("registry", ""));
        c.artifact_root = resolve(j.value("artifact_root", c.artifact_root));
        c.edge_threshold = j.value("edge_threshold", c.edge_threshold);
        c.privacy_floor = j.value("privacy_floor", c.privacy_floor);
        c.train_month = j.value("train_month", "");
        c.port = j.value("port", c.port);
        if (j.contains("model")) c.model = ml::ModelConfig::from_json(j.at("model"));
        if (j.contains("strategy")) c.strategy = DeploymentStrategy::from_json(j.at("strategy"));
        if (j.contains("traffic_floor")) c.strategy.traffic_floor = j.at("traffic_floor").get<std::int64_t>();
        c.validate();
        return c;
    }

    static PipelineConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) fail(ErrorCode::not_found, "config '" + path + "' not found");
        const auto j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded() || !j.is_object()) fail(ErrorCode::parse, "config '" + path + "' is not a JSON object");
        return from_json(j, std::filesystem::path(path).parent_path());
    }
};

}  // namespace navnet::app
