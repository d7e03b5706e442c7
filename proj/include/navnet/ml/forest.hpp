#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "navnet/error.hpp"
#include "navnet/ml/matrix.hpp"
#include "navnet/ml/tree.hpp"
#include "navnet/util.hpp"

namespace navnet::ml {

struct ForestOptions {
    int n_trees = 100;
    int max_depth = 20;
    /// Candidate features per split; 0 picks floor(sqrt(n_features)).
    std::size_t max_features = 0;
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

/// Bagged Gini trees; confidence is the mean of leaf class frequencies.
struct RandomForest {
    int n_classes = 2;
    std::size_t n_features = 0;
    std::vector<Tree> trees;

    static RandomForest fit(const Matrix& x, std::span<const int> y, int n_classes, const ForestOptions& opt) {
        if (opt.n_trees < 1 || opt.max_depth < 1) fail(ErrorCode::invalid_argument, "forest needs trees and depth >= 1");
        RandomForest forest;
        forest.n_classes = n_classes;
        forest.n_features = x.cols;
        GrowOptions grow;
        grow.max_depth = opt.max_depth;
        grow.max_features = opt.max_features != 0
                                ? opt.max_features
                                : std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(x.cols))));
        const GiniCriterion criterion(y, n_classes);
        forest.trees.reserve(static_cast<std::size_t>(opt.n_trees));
        for (int t = 0; t < opt.n_trees; ++t) {
            Rng rng = Rng::derive(opt.seed, static_cast<std::uint64_t>(t));
            std::vector<std::uint32_t> rows(x.rows);
            for (std::uint32_t i = 0; i < x.rows; ++i)
                rows[i] = opt.bootstrap ? static_cast<std::uint32_t>(rng.below(x.rows)) : i;
            TreeGrower<GiniCriterion> grower(x, std::move(rows), criterion);
            forest.trees.push_back(grower.grow(grow, &rng));
        }
        return forest;
    }

    std::vector<double> predict_proba(std::span<const double> row) const {
        std::vector<double> p(static_cast<std::size_t>(n_classes), 0.0);
        for (const auto& tree : trees) {
            const auto& leaf = tree.leaf_for(row);
            for (std::size_t k = 0; k < p.size(); ++k) p[k] += leaf.value[k];
        }
        for (auto& v : p) v /= static_cast<double>(trees.size());
        return p;
    }

    /// Mean decrease in Gini impurity per feature: each tree's decreases are
    /// normalised to sum 1, averaged over trees, then renormalised.
    std::vector<double> feature_importances() const {
        std::vector<double> total(n_features, 0.0);
        for (const auto& tree : trees) {
            std::vector<double> imp(n_features, 0.0);
            double sum = 0.0;
            for (const auto& node : tree.nodes) {
                if (node.is_leaf()) continue;
                imp[static_cast<std::size_t>(node.feature)] += node.improvement;
                sum += node.improvement;
            }
            if (sum <= 0.0) continue;
            for (std::size_t f = 0; f < n_features; ++f) total[f] += imp[f] / sum;
        }
        double sum = 0.0;
        for (const double v : total) sum += v;
        if (sum > 0.0)
            for (auto& v : total) v /= sum;
        return total;
    }
};

}  // namespace navnet::ml
