#pragma once

// Model configuration, training entry point, confidence output and the
// text-based model file.

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "navnet/error.hpp"
#include "navnet/features.hpp"
#include "navnet/labels.hpp"
#include "navnet/ml/boosting.hpp"
#include "navnet/ml/forest.hpp"
#include "navnet/ml/knn.hpp"
#include "navnet/ml/linear.hpp"
#include "navnet/ml/matrix.hpp"
#include "navnet/util.hpp"

namespace navnet::ml {

enum class Algorithm { knn, logreg, random_forest, gbt };

inline constexpr std::array<Algorithm, 4> kAlgorithms = {Algorithm::knn, Algorithm::logreg, Algorithm::random_forest,
                                                        Algorithm::gbt};

inline std::string_view to_string(Algorithm a) {
    switch (a) {
        case Algorithm::knn: return "knn";
        case Algorithm::logreg: return "logreg";
        case Algorithm::random_forest: return "random_forest";
        case Algorithm::gbt: return "gbt";
    }
    return "";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view s) {
    for (const auto a : kAlgorithms)
        if (to_string(a) == s) return a;
    if (s == "rf" || s == "random-forest") return Algorithm::random_forest;
    if (s == "xgb") return Algorithm::gbt;
    return std::nullopt;
}

struct ModelConfig {
    Algorithm algorithm = Algorithm::random_forest;
    int knn_k = 5;
    double logreg_c = 1.0;
    int rf_max_depth = 20;
    int rf_n_trees = 100;
    int gbt_max_depth = 6;
    int gbt_rounds = 200;
    double gbt_learning_rate = 0.1;
    std::uint64_t seed = 0;
    FeatureMode mode = FeatureMode::binary;

    void validate() const {
        if (knn_k < 1 || knn_k % 2 == 0) fail(ErrorCode::invalid_argument, "knn_k must be odd and >= 1");
        if (logreg_c <= 0) fail(ErrorCode::invalid_argument, "logreg_c must be positive");
        if (rf_max_depth < 1 || rf_n_trees < 1 || gbt_max_depth < 1 || gbt_rounds < 1) {
            fail(ErrorCode::invalid_argument, "depths and counts must be >= 1");
        }
        if (!(gbt_learning_rate > 0)) fail(ErrorCode::invalid_argument, "gbt_learning_rate must be positive");
    }

    nlohmann::json to_json() const {
        return {{"algorithm", std::string(to_string(algorithm))},
                {"knn_k", knn_k},
                {"logreg_c", logreg_c},
                {"rf_max_depth", rf_max_depth},
                {"rf_n_trees", rf_n_trees},
                {"gbt_max_depth", gbt_max_depth},
                {"gbt_rounds", gbt_rounds},
                {"gbt_learning_rate", gbt_learning_rate},
                {"seed", seed},
                {"mode", std::string(to_string(mode))}};
    }

    /// Missing keys keep their defaults.
    static ModelConfig from_json(const nlohmann::json& j) {
        ModelConfig c;
        if (j.contains("algorithm")) {
            auto a = parse_algorithm(j.at("algorithm").get<std::string>());
            if (!a) fail(ErrorCode::invalid_argument, "unknown algorithm " + j.at("algorithm").dump());
            c.algorithm = *a;
        }
        c.knn_k = j.value("knn_k", c.knn_k);
        c.logreg_c = j.value("logreg_c", c.logreg_c);
        c.rf_max_depth = j.value("rf_max_depth", c.rf_max_depth);
        c.rf_n_trees = j.value("rf_n_trees", c.rf_n_trees);
        c.gbt_max_depth = j.value("gbt_max_depth", c.gbt_max_depth);
        c.gbt_rounds = j.value("gbt_rounds", c.gbt_rounds);
        c.gbt_learning_rate = j.value("gbt_learning_rate", c.gbt_learning_rate);
        c.seed = j.value("seed", c.seed);
        if (j.contains("mode")) {
            auto m = parse_feature_mode(j.at("mode").get<std::string>());
            if (!m) fail(ErrorCode::invalid_argument, "unknown mode " + j.at("mode").dump());
            c.mode = *m;
        }
        c.validate();
        return c;
    }
};

// ---------------------------------------------------------------------------
// Class sets.

inline std::vector<std::string> class_names(FeatureMode mode) {
    if (mode == FeatureMode::binary) return {"authoritative", "misinformation"};
    return {"authoritative", "misinformation", "propaganda"};
}

/// Class index the mode's positive metrics are reported for.
inline int positive_class(FeatureMode mode) { return mode == FeatureMode::binary ? 1 : 2; }

/// Training label of a domain, or nullopt when it carries none.
inline std::optional<int> class_index(const LabelStore& store, std::string_view domain, FeatureMode mode) {
    const auto* l = store.find(domain);
    if (!l || l->cls == DomainClass::unlabeled) return std::nullopt;
    if (l->cls == DomainClass::authoritative) return 0;
    if (mode == FeatureMode::multiclass && l->propaganda) return 2;
    return 1;
}

/// One-vs-rest logistic models (a single model for two classes).
struct LogisticModel {
    std::vector<LogisticBinary> per_class;

    std::vector<double> predict_proba(std::span<const double> row, int n_classes) const {
        if (n_classes == 2) {
            const double p = per_class[0].probability(row);
            return {1.0 - p, p};
        }
        std::vector<double> p(per_class.size());
        double sum = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) {
            p[k] = per_class[k].probability(row);
            sum += p[k];
        }
        for (auto& v : p) v = sum > 0 ? v / sum : 1.0 / static_cast<double>(p.size());
        return p;
    }
};

using ModelParams = std::variant<KnnClassifier, LogisticModel, RandomForest, BoostedTrees>;

struct TrainedModel {
    ModelConfig config;
    std::vector<std::string> classes;
    FeatureSchema schema;
    std::optional<Standardizer> standardizer;  // knn and logreg only
    ModelParams params;

    Algorithm algorithm() const { return config.algorithm; }
    int n_classes() const { return static_cast<int>(classes.size()); }

    std::optional<int> class_of(std::string_view name) const {
        for (std::size_t k = 0; k < classes.size(); ++k)
            if (classes[k] == name) return static_cast<int>(k);
        return std::nullopt;
    }

    std::vector<double> predict_proba_row(std::span<const double> row) const {
        std::vector<double> scaled;
        if (standardizer) {
            scaled.resize(row.size());
            standardizer->apply(row, scaled);
            row = scaled;
        }
        return std::visit(
            [&](const auto& p) -> std::vector<double> {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, LogisticModel>) return p.predict_proba(row, n_classes());
                else return p.predict_proba(row);
            },
            params);
    }

    /// Row-wise class confidences for a raw matrix with this model's columns.
    Matrix predict_proba(const Matrix& x) const {
        if (x.cols != schema.columns.size()) {
            fail(ErrorCode::schema_mismatch, "matrix has " + std::to_string(x.cols) + " columns, model expects " +
                                                 std::to_string(schema.columns.size()));
        }
        Matrix out(x.rows, classes.size());
        for (std::size_t r = 0; r < x.rows; ++r) {
            const auto p = predict_proba_row(x.row(r));
            std::copy(p.begin(), p.end(), out.row(r).begin());
        }
        return out;
    }

    Matrix predict_proba(const FeatureMatrix& m) const {
        if (!(m.schema == schema)) {
            fail(ErrorCode::schema_mismatch, "feature schema '" + m.schema.version + "' does not match model schema '" +
                                                 schema.version + "'");
        }
        return predict_proba(m.values);
    }
};

inline int argmax(std::span<const double> p) {
    return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

namespace detail {

/// Row permutation sorting rows by (values, label): training depends only on
/// the multiset of rows, never on the order they arrive in.
inline std::vector<std::size_t> canonical_order(const Matrix& x, std::span<const int> y) {
    std::vector<std::size_t> idx(x.rows);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const auto ra = x.row(a), rb = x.row(b);
        for (std::size_t c = 0; c < x.cols; ++c) {
            if (ra[c] < rb[c]) return true;
            if (rb[c] < ra[c]) return false;
        }
        return y[a] < y[b];
    });
    return idx;
}

}  // namespace detail

inline TrainedModel train(const ModelConfig& config, const FeatureSchema& schema, const Matrix& x_in,
                          std::span<const int> y_in) {
    config.validate();
    const auto classes = class_names(config.mode);
    const int n_classes = static_cast<int>(classes.size());
    if (x_in.cols != schema.columns.size()) fail(ErrorCode::schema_mismatch, "matrix width does not match schema");
    if (x_in.rows != y_in.size()) fail(ErrorCode::invalid_argument, "label count does not match rows");
    if (x_in.rows < classes.size()) fail(ErrorCode::precondition, "fewer training rows than classes");
    for (const int v : y_in)
        if (v < 0 || v >= n_classes) fail(ErrorCode::invalid_argument, "label outside the mode's class set");
    if (std::adjacent_find(y_in.begin(), y_in.end(), std::not_equal_to<>()) == y_in.end()) {
        fail(ErrorCode::precondition, "training labels contain a single class");
    }

    const auto order = detail::canonical_order(x_in, y_in);
    const Matrix x = x_in.select_rows(order);
    std::vector<int> y(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) y[i] = y_in[order[i]];

    TrainedModel model;
    model.config = config;
    model.classes = classes;
    model.schema = schema;

    switch (config.algorithm) {
        case Algorithm::knn: {
            model.standardizer = Standardizer::fit(x);
            KnnClassifier knn;
            knn.k = config.knn_k;
            knn.n_classes = n_classes;
            knn.train_x = model.standardizer->transform(x);
            knn.train_y = y;
            model.params = std::move(knn);
            break;
        }
        case Algorithm::logreg: {
            model.standardizer = Standardizer::fit(x);
            const Matrix xs = model.standardizer->transform(x);
            LogisticModel lm;
            const int fits = n_classes == 2 ? 1 : n_classes;
            for (int k = 0; k < fits; ++k) {
                const int positive = n_classes == 2 ? 1 : k;
                std::vector<double> target(y.size());
                for (std::size_t i = 0; i < y.size(); ++i) target[i] = y[i] == positive ? 1.0 : 0.0;
                lm.per_class.push_back(fit_logistic(xs, target, {config.logreg_c, 1e-6, 10000}));
            }
            model.params = std::move(lm);
            break;
        }
        case Algorithm::random_forest: {
            ForestOptions opt;
            opt.n_trees = config.rf_n_trees;
            opt.max_depth = config.rf_max_depth;
            opt.seed = config.seed;
            model.params = RandomForest::fit(x, y, n_classes, opt);
            break;
        }
        case Algorithm::gbt: {
            BoostingOptions opt;
            opt.rounds = config.gbt_rounds;
            opt.max_depth = config.gbt_max_depth;
            opt.learning_rate = config.gbt_learning_rate;
            model.params = BoostedTrees::fit(x, y, n_classes, opt);
            break;
        }
    }
    return model;
}

struct FeatureImportance {
    std::string feature;
    double importance = 0.0;
};

/// Gini importances of a random-forest model, ranked descending (ties keep
/// schema order).
inline std::vector<FeatureImportance> gini_importance(const TrainedModel& model) {
    const auto* forest = std::get_if<RandomForest>(&model.params);
    if (!forest) fail(ErrorCode::invalid_argument, "Gini importance requires a random-forest model");
    const auto imp = forest->feature_importances();
    std::vector<FeatureImportance> ranked;
    for (std::size_t f = 0; f < imp.size(); ++f) ranked.push_back({model.schema.columns[f], imp[f]});
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.importance > b.importance; });
    return ranked;
}

// ---------------------------------------------------------------------------
// Model file: a single JSON document tagged with format and version.

inline constexpr std::string_view kModelFormat = "navnet-model";
inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline nlohmann::json tree_to_json(const Tree& t) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : t.nodes)
        nodes.push_back({n.feature, n.threshold, n.left, n.right, n.depth, n.samples, n.improvement, n.value});
    return nodes;
}

inline Tree tree_from_json(const nlohmann::json& j) {
    Tree t;
    for (const auto& n : j) {
        TreeNode node;
        node.feature = n.at(0).get<int>();
        node.threshold = n.at(1).get<double>();
        node.left = n.at(2).get<int>();
        node.right = n.at(3).get<int>();
        node.depth = n.at(4).get<int>();
        node.samples = n.at(5).get<std::size_t>();
        node.improvement = n.at(6).get<double>();
        node.value = n.at(7).get<std::vector<double>>();
        t.nodes.push_back(std::move(node));
    }
    return t;
}

inline nlohmann::json matrix_to_json(const Matrix& m) {
    return {{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
    Matrix m;
    m.rows = j.at("rows").get<std::size_t>();
    m.cols = j.at("cols").get<std::size_t>();
    m.data = j.at("data").get<std::vector<double>>();
    if (m.data.size() != m.rows * m.cols) fail(ErrorCode::parse, "matrix payload size mismatch");
    return m;
}

}  // namespace detail

inline nlohmann::json model_to_json(const TrainedModel& m) {
    nlohmann::json j;
    j["format"] = std::string(kModelFormat);
    j["version"] = kModelFormatVersion;
    j["algorithm"] = std::string(to_string(m.algorithm()));
    j["config"] = m.config.to_json();
    j["classes"] = m.classes;
    j["schema"] = {{"version", m.schema.version}, {"columns", m.schema.columns}};
    if (m.standardizer) j["standardizer"] = {{"mean", m.standardizer->mean}, {"scale", m.standardizer->scale}};
    nlohmann::json params;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, KnnClassifier>) {
                params = {{"k", p.k}, {"train_x", detail::matrix_to_json(p.train_x)}, {"train_y", p.train_y}};
            } else if constexpr (std::is_same_v<T, LogisticModel>) {
                params = nlohmann::json::array();
                for (const auto& b : p.per_class) params.push_back({{"weights", b.weights}, {"bias", b.bias}});
            } else if constexpr (std::is_same_v<T, RandomForest>) {
                params = {{"n_features", p.n_features}, {"trees", nlohmann::json::array()}};
                for (const auto& t : p.trees) params["trees"].push_back(detail::tree_to_json(t));
            } else {
                params = nlohmann::json::array();
                for (const auto& round : p.rounds) {
                    nlohmann::json r = nlohmann::json::array();
                    for (const auto& t : round) r.push_back(detail::tree_to_json(t));
                    params.push_back(std::move(r));
                }
            }
        },
        m.params);
    j["params"] = std::move(params);
    return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != kModelFormat) fail(ErrorCode::parse, "not a navnet model file");
    if (j.value("version", 0) != kModelFormatVersion) {
        fail(ErrorCode::parse, "unsupported model file version " + std::to_string(j.value("version", 0)));
    }
    TrainedModel m;
    m.config = ModelConfig::from_json(j.at("config"));
    m.classes = j.at("classes").get<std::vector<std::string>>();
    m.schema.version = j.at("schema").at("version").get<std::string>();
    m.schema.columns = j.at("schema").at("columns").get<std::vector<std::string>>();
    if (j.contains("standardizer")) {
        m.standardizer = Standardizer{j["standardizer"].at("mean").get<std::vector<double>>(),
                                      j["standardizer"].at("scale").get<std::vector<double>>()};
    }
    const auto& params = j.at("params");
    const int n_classes = m.n_classes();
    switch (m.config.algorithm) {
        case Algorithm::knn: {
            KnnClassifier knn;
            knn.k = params.at("k").get<int>();
            knn.n_classes = n_classes;
            knn.train_x = detail::matrix_from_json(params.at("train_x"));
            knn.train_y = params.at("train_y").get<std::vector<int>>();
            m.params = std::move(knn);
            break;
        }
        case Algorithm::logreg: {
            LogisticModel lm;
            for (const auto& b : params)
                lm.per_class.push_back({b.at("weights").get<std::vector<double>>(), b.at("bias").get<double>()});
            m.params = std::move(lm);
            break;
        }
        case Algorithm::random_forest: {
            RandomForest f;
            f.n_classes = n_classes;
            f.n_features = params.at("n_features").get<std::size_t>();
            for (const auto& t : params.at("trees")) f.trees.push_back(detail::tree_from_json(t));
            m.params = std::move(f);
            break;
        }
        case Algorithm::gbt: {
            BoostedTrees b;
            b.n_classes = n_classes;
            for (const auto& r : params) {
                std::vector<Tree> round;
                for (const auto& t : r) round.push_back(detail::tree_from_json(t));
                b.rounds.push_back(std::move(round));
            }
            m.params = std::move(b);
            break;
        }
    }
    return m;
}

inline void save_model(const TrainedModel& m, const std::string& path) {
    write_file(path, model_to_json(m).dump() + "\n");
}

inline TrainedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open model '" + path + "'");
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) fail(ErrorCode::parse, "model '" + path + "' is not valid JSON");
    return model_from_json(j);
}

}  // namespace navnet::ml
