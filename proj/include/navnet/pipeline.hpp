#pragma once

// Glue between stages: monthly records -> graphs -> labeled feature matrices.

#include <map>
#include <string>
#include <vector>

#include "navnet/deploy.hpp"
#include "navnet/features.hpp"
#include "navnet/graph.hpp"
#include "navnet/ingest.hpp"
#include "navnet/labels.hpp"
#include "navnet/ml/model.hpp"

namespace navnet {

inline GraphSet build_graphs(const MonthlyRecords& records, std::int64_t edge_threshold) {
    if (records.empty()) fail(ErrorCode::empty_input, "no traffic records");
    GraphSet graphs;
    for (const auto& [month, rows] : records) graphs.emplace(month, build_graph(rows, edge_threshold));
    return graphs;
}

/// Class index of every labeled domain that appears in at least one month.
inline std::map<Domain, int> labeled_classes(const GraphSet& graphs, const LabelStore& store, FeatureMode mode) {
    std::map<Domain, int> out;
    for (const auto& [domain, label] : store.labels()) {
        bool present = false;
        for (const auto& [month, g] : graphs) present = present || g.contains(domain);
        if (!present) continue;
        if (auto cls = ml::class_index(store, domain, mode)) out.emplace(domain, *cls);
    }
    return out;
}

/// One matrix per month over the same domain list; absent domains are zero-filled.
inline std::map<std::string, FeatureMatrix> monthly_features(const GraphSet& graphs, const LabelStore& store,
                                                             const CategoryRegistry& registry,
                                                             const std::vector<Domain>& domains, FeatureMode mode,
                                                             const HostBlock* host = nullptr) {
    ExtractOptions options;
    options.mode = mode;
    options.zero_fill_missing = true;
    options.host = host;
    std::map<std::string, FeatureMatrix> out;
    for (const auto& [month, g] : graphs) out.emplace(month.str(), extract_matrix(g, store, registry, domains, options));
    return out;
}

template <typename Map>
std::vector<typename Map::key_type> keys_of(const Map& m) {
    std::vector<typename Map::key_type> out;
    out.reserve(m.size());
    for (const auto& kv : m) out.push_back(kv.first);
    return out;
}

/// Trains on every labeled domain's row in `month`.
inline ml::TrainedModel train_on_month(const ml::ModelConfig& config, const FeatureMatrix& fm,
                                       const std::map<Domain, int>& labels) {
    std::vector<std::size_t> rows;
    std::vector<int> y;
    for (const auto& [d, cls] : labels) {
        auto r = fm.row_of(d);
        if (!r) fail(ErrorCode::precondition, "labeled domain " + d + " has no feature row");
        rows.push_back(*r);
        y.push_back(cls);
    }
    return ml::train(config, fm.schema, fm.values.select_rows(rows), y);
}

}  // namespace navnet
