#pragma once

// Gradient-boosted regression trees with second-order leaf estimates:
// logistic loss for two classes, softmax over one tree per class otherwise.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "navnet/error.hpp"
#include "navnet/ml/linear.hpp"
#include "navnet/ml/matrix.hpp"
#include "navnet/ml/tree.hpp"

namespace navnet::ml {

struct BoostingOptions {
    int rounds = 200;
    int max_depth = 6;
    double learning_rate = 0.1;
    double lambda = 1.0;
    double min_child_weight = 1.0;
};

struct BoostedTrees {
    int n_classes = 2;
    std::vector<std::vector<Tree>> rounds;  // per round: 1 tree (binary) or one per class

    std::size_t outputs() const { return n_classes == 2 ? 1 : static_cast<std::size_t>(n_classes); }

    static BoostedTrees fit(const Matrix& x, std::span<const int> y, int n_classes, const BoostingOptions& opt) {
        if (opt.rounds < 1 || opt.max_depth < 1) fail(ErrorCode::invalid_argument, "boosting needs rounds and depth >= 1");
        BoostedTrees model;
        model.n_classes = n_classes;
        const std::size_t k_out = model.outputs();
        const std::size_t n = x.rows;
        std::vector<double> raw(n * k_out, 0.0);
        std::vector<double> grad(n), hess(n);
        std::vector<std::uint32_t> rows(n);
        for (std::uint32_t i = 0; i < n; ++i) rows[i] = i;
        const auto order = TreeGrower<GradientCriterion>::presort(x, rows);
        GrowOptions grow;
        grow.max_depth = opt.max_depth;

        std::vector<double> prob(k_out);
        for (int round = 0; round < opt.rounds; ++round) {
            std::vector<Tree> trees;
            std::vector<double> round_grad(n * k_out), round_hess(n * k_out);
            for (std::size_t i = 0; i < n; ++i) {
                probabilities(std::span<const double>(raw.data() + i * k_out, k_out), prob);
                for (std::size_t k = 0; k < k_out; ++k) {
                    const double target = k_out == 1 ? (y[i] == 1 ? 1.0 : 0.0)
                                                     : (static_cast<std::size_t>(y[i]) == k ? 1.0 : 0.0);
                    const double p = k_out == 1 ? prob[0] : prob[k];
                    round_grad[i * k_out + k] = p - target;
                    round_hess[i * k_out + k] = std::max(p * (1.0 - p), 1e-16);
                }
            }
            for (std::size_t k = 0; k < k_out; ++k) {
                for (std::size_t i = 0; i < n; ++i) {
                    grad[i] = round_grad[i * k_out + k];
                    hess[i] = round_hess[i * k_out + k];
                }
                const GradientCriterion criterion(grad, hess, opt.lambda, opt.min_child_weight, opt.learning_rate);
                TreeGrower<GradientCriterion> grower(x, rows, criterion, order);
                trees.push_back(grower.grow(grow));
                for (std::size_t i = 0; i < n; ++i) raw[i * k_out + k] += trees.back().leaf_for(x.row(i)).value[0];
            }
            model.rounds.push_back(std::move(trees));
        }
        return model;
    }

    std::vector<double> raw_scores(std::span<const double> row) const {
        std::vector<double> raw(outputs(), 0.0);
        for (const auto& trees : rounds)
            for (std::size_t k = 0; k < trees.size(); ++k) raw[k] += trees[k].leaf_for(row).value[0];
        return raw;
    }

    /// Logistic link for binary (raw 0 maps to 0.5), softmax otherwise.
    std::vector<double> predict_proba(std::span<const double> row) const {
        const auto raw = raw_scores(row);
        std::vector<double> prob(raw.size());
        probabilities(raw, prob);
        if (raw.size() == 1) return {1.0 - prob[0], prob[0]};
        return prob;
    }

    int max_depth() const {
        int d = 0;
        for (const auto& trees : rounds)
            for (const auto& t : trees) d = std::max(d, t.depth());
        return d;
    }

private:
    static void probabilities(std::span<const double> raw, std::vector<double>& out) {
        if (raw.size() == 1) {
            out[0] = sigmoid(raw[0]);
            return;
        }
        const double hi = *std::max_element(raw.begin(), raw.end());
        double sum = 0.0;
        for (std::size_t k = 0; k < raw.size(); ++k) {
            out[k] = std::exp(raw[k] - hi);
            sum += out[k];
        }
        for (auto& v : out) v /= sum;
    }
};

}  // namespace navnet::ml
