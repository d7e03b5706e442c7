#pragma once

// Positive-class metrics and the temporally shifted k-fold protocol: train on
// the training month's rows of k-1 folds, score the held-out fold's domains in
// every month.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "navnet/error.hpp"
#include "navnet/features.hpp"
#include "navnet/ml/model.hpp"
#include "navnet/util.hpp"

namespace navnet::ml {

struct Metrics {
    double accuracy = 0.0;
    std::optional<double> precision;  // absent when nothing was predicted positive
    std::optional<double> recall;     // absent when there are no actual positives
    int positive_class = 1;
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    std::size_t total = 0;
};

inline Metrics evaluate(std::span<const int> y_true, std::span<const int> y_pred, int positive) {
    if (y_true.size() != y_pred.size()) fail(ErrorCode::invalid_argument, "label and prediction lengths differ");
    Metrics m;
    m.positive_class = positive;
    m.total = y_true.size();
    std::size_t correct = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] == y_pred[i]) ++correct;
        const bool actual = y_true[i] == positive;
        const bool predicted = y_pred[i] == positive;
        if (actual && predicted) ++m.tp;
        else if (!actual && predicted) ++m.fp;
        else if (actual) ++m.fn;
        else ++m.tn;
    }
    m.accuracy = m.total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(m.total);
    if (m.tp + m.fp > 0) m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    if (m.tp + m.fn > 0) m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    return m;
}

/// Metrics when `score >= threshold` counts as a positive prediction.
inline Metrics evaluate_at_threshold(std::span<const int> y_true, std::span<const double> scores, int positive,
                                     double threshold) {
    // One-vs-rest view: every non-positive label collapses to -1.
    std::vector<int> truth(y_true.size()), pred(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        truth[i] = y_true[i] == positive ? positive : -1;
        pred[i] = scores[i] >= threshold ? positive : -1;
    }
    return evaluate(truth, pred, positive);
}

inline std::vector<int> predict_classes(const TrainedModel& model, const Matrix& x) {
    const Matrix p = model.predict_proba(x);
    std::vector<int> out(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) out[r] = argmax(p.row(r));
    return out;
}

/// Fold-averaged metrics for one evaluation month. Precision and recall are
/// averaged over the folds where they are defined.
struct MonthMetrics {
    std::string month;
    double accuracy = 0.0;
    std::optional<double> precision;
    std::optional<double> recall;
    std::vector<Metrics> folds;
};

struct CrossValidationResult {
    std::string train_month;
    std::vector<MonthMetrics> months;  // chronological
    std::vector<int> fold_of;          // fold index per labeled domain, in `domains` order
    std::vector<Domain> domains;
};

/// Stratified assignment: each class's domains (lexicographic) are shuffled
/// with the seed and dealt round-robin into folds.
inline std::vector<int> stratified_folds(std::span<const int> labels, int n_folds, std::uint64_t seed) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    std::vector<int> fold(labels.size(), 0);
    Rng rng = Rng::derive(seed, 0xF01D);
    int next = 0;
    for (auto& [cls, members] : by_class) {
        rng.shuffle(members);
        for (const auto i : members) {
            fold[i] = next;
            next = (next + 1) % n_folds;
        }
    }
    return fold;
}

/// `labels` maps domain -> class index; every labeled domain must have a row
/// in every month's matrix (zero-filled rows stand in for absent domains).
inline CrossValidationResult cross_validate(const ModelConfig& config,
                                            const std::map<std::string, FeatureMatrix>& features_by_month,
                                            const std::map<Domain, int>& labels, const std::string& train_month,
                                            int n_folds = 5) {
    if (features_by_month.size() < 2) fail(ErrorCode::precondition, "cross-validation needs at least two months");
    if (!features_by_month.count(train_month)) fail(ErrorCode::not_found, "training month " + train_month + " missing");
    if (n_folds < 2) fail(ErrorCode::invalid_argument, "need at least two folds");
    const FeatureSchema& schema = features_by_month.at(train_month).schema;

    CrossValidationResult result;
    result.train_month = train_month;
    std::vector<int> y;
    for (const auto& [d, cls] : labels) {
        result.domains.push_back(d);
        y.push_back(cls);
    }

    // Row of every labeled domain in every month.
    std::map<std::string, std::vector<std::size_t>> rows;
    for (const auto& [month, fm] : features_by_month) {
        if (!(fm.schema == schema)) fail(ErrorCode::schema_mismatch, "month " + month + " has a different schema");
        auto& r = rows[month];
        for (const auto& d : result.domains) {
            auto row = fm.row_of(d);
            if (!row) fail(ErrorCode::precondition, "labeled domain " + d + " has no row in month " + month);
            r.push_back(*row);
        }
    }

    result.fold_of = stratified_folds(y, n_folds, config.seed);
    for (const auto& [month, fm] : features_by_month) result.months.push_back({month, 0.0, {}, {}, {}});

    for (int fold = 0; fold < n_folds; ++fold) {
        std::vector<std::size_t> train_idx, test_idx;
        for (std::size_t i = 0; i < y.size(); ++i) (result.fold_of[i] == fold ? test_idx : train_idx).push_back(i);
        if (test_idx.empty()) continue;

        std::vector<std::size_t> train_rows;
        std::vector<int> train_y;
        for (const auto i : train_idx) {
            train_rows.push_back(rows[train_month][i]);
            train_y.push_back(y[i]);
        }
        const Matrix train_x = features_by_month.at(train_month).values.select_rows(train_rows);
        ModelConfig fold_config = config;
        fold_config.seed = splitmix64(config.seed + static_cast<std::uint64_t>(fold));
        const TrainedModel model = train(fold_config, schema, train_x, train_y);

        std::size_t m = 0;
        for (const auto& [month, fm] : features_by_month) {
            std::vector<std::size_t> test_rows;
            std::vector<int> test_y;
            for (const auto i : test_idx) {
                test_rows.push_back(rows[month][i]);
                test_y.push_back(y[i]);
            }
            const auto pred = predict_classes(model, fm.values.select_rows(test_rows));
            result.months[m++].folds.push_back(evaluate(test_y, pred, positive_class(config.mode)));
        }
    }

    for (auto& mm : result.months) {
        double acc = 0, prec = 0, rec = 0;
        int n_prec = 0, n_rec = 0;
        for (const auto& f : mm.folds) {
            acc += f.accuracy;
            if (f.precision) {
                prec += *f.precision;
                ++n_prec;
            }
            if (f.recall) {
                rec += *f.recall;
                ++n_rec;
            }
        }
        mm.accuracy = acc / static_cast<double>(mm.folds.size());
        if (n_prec) mm.precision = prec / n_prec;
        if (n_rec) mm.recall = rec / n_rec;
    }
    return result;
}

/// Wide metrics table: one row per model, accuracy/precision/recall per month.
/// Undefined values are left empty.
inline std::string metrics_table_csv(const std::vector<std::pair<std::string, CrossValidationResult>>& rows) {
    std::string out = "model";
    if (!rows.empty()) {
        for (const auto& mm : rows.front().second.months)
            out += "," + mm.month + "_accuracy," + mm.month + "_precision," + mm.month + "_recall";
    }
    out += "\n";
    auto cell = [](const std::optional<double>& v) { return v ? format_fixed(*v, 4) : std::string(); };
    for (const auto& [name, cv] : rows) {
        out += name;
        for (const auto& mm : cv.months)
            out += "," + format_fixed(mm.accuracy, 4) + "," + cell(mm.precision) + "," + cell(mm.recall);
        out += "\n";
    }
    return out;
}

}  // namespace navnet::ml
