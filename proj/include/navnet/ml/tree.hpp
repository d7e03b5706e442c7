#pragma once

// Exact greedy decision-tree growth over presorted feature columns. The
// split criterion is a template parameter: class-count Gini for the random
// forest, second-order gradient statistics for boosting.
//
// Every node owns the same [begin, end) range in each feature's sorted slot
// array; after a split the range is stably partitioned in every array, so no
// node ever re-sorts.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "navnet/ml/matrix.hpp"
#include "navnet/util.hpp"

namespace navnet::ml {

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int depth = 0;
    std::size_t samples = 0;
    double improvement = 0.0;    // weighted criterion decrease, for importances
    std::vector<double> value;   // class distribution (Gini) or {raw score} (gradient)

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;

    const TreeNode& leaf_for(std::span<const double> x) const {
        std::size_t i = 0;
        while (!nodes[i].is_leaf()) {
            const auto& n = nodes[i];
            i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
        }
        return nodes[i];
    }

    int depth() const {
        int d = 0;
        for (const auto& n : nodes) d = std::max(d, n.depth);
        return d;
    }
};

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
    std::size_t left_count = 0;
};

/// Split point strictly between two distinct sorted values; falls back to
/// the lower value when the midpoint rounds onto the upper one.
inline double midpoint(double lo, double hi) {
    const double mid = lo + (hi - lo) / 2.0;
    return mid < hi ? mid : lo;
}

inline double gini_impurity(std::span<const std::int64_t> counts, std::int64_t n) {
    if (n == 0) return 0.0;
    double sum_sq = 0.0;
    for (const auto c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(n);
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

/// Impurity decrease of a partition, child impurities weighted by size.
inline double gini_gain(std::span<const std::int64_t> parent, std::span<const std::int64_t> left,
                        std::span<const std::int64_t> right, std::int64_t n, std::int64_t nl, std::int64_t nr) {
    const double dn = static_cast<double>(n);
    return gini_impurity(parent, n) - (static_cast<double>(nl) / dn) * gini_impurity(left, nl) -
           (static_cast<double>(nr) / dn) * gini_impurity(right, nr);
}

inline constexpr double kMinSplitGain = 1e-12;

/// Classification criterion over integer class labels.
class GiniCriterion {
public:
    struct Stats {
        std::vector<std::int64_t> counts;
        std::int64_t n = 0;
    };

    GiniCriterion(std::span<const int> labels, int n_classes) : labels_(labels), n_classes_(n_classes) {}

    Stats empty() const { return {std::vector<std::int64_t>(static_cast<std::size_t>(n_classes_), 0), 0}; }
    void add(Stats& s, std::uint32_t row) const {
        ++s.counts[static_cast<std::size_t>(labels_[row])];
        ++s.n;
    }
    void subtract(Stats& s, const Stats& other) const {
        for (std::size_t k = 0; k < s.counts.size(); ++k) s.counts[k] -= other.counts[k];
        s.n -= other.n;
    }
    bool pure(const Stats& s) const {
        return std::count_if(s.counts.begin(), s.counts.end(), [](auto c) { return c > 0; }) <= 1;
    }
    /// Gain of splitting `parent` into `left` and the remainder; nullopt when
    /// a child would be empty.
    std::optional<double> evaluate(const Stats& parent, const Stats& left) const {
        const std::int64_t nr = parent.n - left.n;
        if (left.n < 1 || nr < 1) return std::nullopt;
        right_.resize(parent.counts.size());
        for (std::size_t k = 0; k < right_.size(); ++k) right_[k] = parent.counts[k] - left.counts[k];
        return gini_gain(parent.counts, left.counts, right_, parent.n, left.n, nr);
    }
    /// Importance weight of a split: gain scaled by node size.
    double improvement(const Stats& parent, double gain) const { return static_cast<double>(parent.n) * gain; }
    std::vector<double> leaf_value(const Stats& s) const {
        std::vector<double> v(s.counts.size());
        for (std::size_t k = 0; k < v.size(); ++k)
            v[k] = s.n == 0 ? 0.0 : static_cast<double>(s.counts[k]) / static_cast<double>(s.n);
        return v;
    }

private:
    std::span<const int> labels_;
    int n_classes_;
    mutable std::vector<std::int64_t> right_;
};

/// Second-order boosting criterion (gradient/hessian sums, L2 leaf penalty).
class GradientCriterion {
public:
    struct Stats {
        double g = 0.0;
        double h = 0.0;
        std::int64_t n = 0;
    };

    GradientCriterion(std::span<const double> grad, std::span<const double> hess, double lambda,
                      double min_child_weight, double learning_rate)
        : grad_(grad), hess_(hess), lambda_(lambda), min_child_weight_(min_child_weight), rate_(learning_rate) {}

    Stats empty() const { return {}; }
    void add(Stats& s, std::uint32_t row) const {
        s.g += grad_[row];
        s.h += hess_[row];
        ++s.n;
    }
    void subtract(Stats& s, const Stats& other) const {
        s.g -= other.g;
        s.h -= other.h;
        s.n -= other.n;
    }
    bool pure(const Stats&) const { return false; }
    std::optional<double> evaluate(const Stats& parent, const Stats& left) const {
        const Stats right{parent.g - left.g, parent.h - left.h, parent.n - left.n};
        if (!valid_child(left) || !valid_child(right)) return std::nullopt;
        return 0.5 * (score(left) + score(right) - score(parent));
    }
    double improvement(const Stats&, double gain) const { return gain; }
    std::vector<double> leaf_value(const Stats& s) const { return {-rate_ * s.g / (s.h + lambda_)}; }

private:
    bool valid_child(const Stats& s) const { return s.n >= 1 && s.h >= min_child_weight_; }
    double score(const Stats& s) const { return s.g * s.g / (s.h + lambda_); }

    std::span<const double> grad_;
    std::span<const double> hess_;
    double lambda_;
    double min_child_weight_;
    double rate_;
};

struct GrowOptions {
    int max_depth = 20;
    std::size_t min_samples_split = 2;
    /// Features examined per node; 0 means all.
    std::size_t max_features = 0;
};

template <class Criterion>
class TreeGrower {
public:
    /// `rows` lists the training row of every sample slot (duplicates allowed,
    /// as produced by bootstrap sampling).
    TreeGrower(const Matrix& x, std::vector<std::uint32_t> rows, const Criterion& criterion)
        : TreeGrower(x, rows, criterion, presort(x, rows)) {}

    /// Reuses a presorted slot order (see presort) when the same sample
    /// slots are grown repeatedly, as in boosting rounds.
    TreeGrower(const Matrix& x, std::vector<std::uint32_t> rows, const Criterion& criterion,
               std::vector<std::vector<std::uint32_t>> order)
        : x_(x), rows_(std::move(rows)), criterion_(criterion), n_(rows_.size()), order_(std::move(order)) {
        go_left_.assign(n_, 0);
        scratch_.resize(n_);
    }

    /// Per feature, sample slots sorted by (value, slot).
    static std::vector<std::vector<std::uint32_t>> presort(const Matrix& x, std::span<const std::uint32_t> rows) {
        std::vector<std::vector<std::uint32_t>> order(x.cols);
        for (std::size_t f = 0; f < x.cols; ++f) {
            auto& ord = order[f];
            ord.resize(rows.size());
            for (std::uint32_t s = 0; s < rows.size(); ++s) ord[s] = s;
            std::sort(ord.begin(), ord.end(), [&](std::uint32_t a, std::uint32_t b) {
                const double va = x(rows[a], f), vb = x(rows[b], f);
                return va < vb || (va == vb && a < b);
            });
        }
        return order;
    }

    /// Best split of the whole sample set over the given features (all when
    /// empty), or nullopt when no split clears the minimum gain.
    std::optional<SplitCandidate> best_root_split(std::span<const std::size_t> features = {}) const {
        auto stats = criterion_.empty();
        for (std::uint32_t s = 0; s < n_; ++s) criterion_.add(stats, rows_[s]);
        std::vector<std::size_t> all;
        if (features.empty()) {
            for (std::size_t f = 0; f < x_.cols; ++f) all.push_back(f);
            features = all;
        }
        return best_split(0, n_, stats, features);
    }

    Tree grow(const GrowOptions& opt, Rng* rng = nullptr) {
        Tree tree;
        auto stats = criterion_.empty();
        for (std::uint32_t s = 0; s < n_; ++s) criterion_.add(stats, rows_[s]);
        std::vector<std::size_t> pool(x_.cols);
        for (std::size_t f = 0; f < x_.cols; ++f) pool[f] = f;
        build(tree, 0, n_, 0, std::move(stats), opt, rng, pool);
        return tree;
    }

private:
    double value(std::uint32_t slot, std::size_t f) const { return x_(rows_[slot], f); }

    int build(Tree& tree, std::size_t begin, std::size_t end, int depth, typename Criterion::Stats stats,
              const GrowOptions& opt, Rng* rng, std::vector<std::size_t>& pool) {
        const int index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[index].depth = depth;
        tree.nodes[index].samples = end - begin;

        std::optional<SplitCandidate> split;
        if (depth < opt.max_depth && end - begin >= opt.min_samples_split && !criterion_.pure(stats)) {
            std::vector<std::size_t> features;
            if (opt.max_features == 0 || opt.max_features >= pool.size() || rng == nullptr) {
                features = pool;
            } else {
                // Partial Fisher-Yates draw, then schema order for tie-breaking.
                for (std::size_t i = 0; i < opt.max_features; ++i) {
                    const std::size_t j = i + static_cast<std::size_t>(rng->below(pool.size() - i));
                    std::swap(pool[i], pool[j]);
                }
                features.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(opt.max_features));
                std::sort(features.begin(), features.end());
            }
            split = best_split(begin, end, stats, features);
        }

        if (!split) {
            tree.nodes[index].value = criterion_.leaf_value(stats);
            return index;
        }

        // Mark slots going left, then stably partition every feature column.
        const auto& ord = order_[static_cast<std::size_t>(split->feature)];
        auto left_stats = criterion_.empty();
        for (std::size_t i = begin; i < end; ++i) {
            const std::uint32_t s = ord[i];
            const bool left = value(s, static_cast<std::size_t>(split->feature)) <= split->threshold;
            go_left_[s] = left ? 1 : 0;
            if (left) criterion_.add(left_stats, rows_[s]);
        }
        auto right_stats = stats;
        criterion_.subtract(right_stats, left_stats);
        for (auto& column : order_) {
            std::size_t l = begin, r = 0;
            for (std::size_t i = begin; i < end; ++i) {
                const std::uint32_t s = column[i];
                if (go_left_[s]) column[l++] = s;
                else scratch_[r++] = s;
            }
            std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(r),
                      column.begin() + static_cast<std::ptrdiff_t>(l));
        }
        const std::size_t mid = begin + split->left_count;

        tree.nodes[index].feature = split->feature;
        tree.nodes[index].threshold = split->threshold;
        tree.nodes[index].improvement = criterion_.improvement(stats, split->gain);
        const int left = build(tree, begin, mid, depth + 1, std::move(left_stats), opt, rng, pool);
        const int right = build(tree, mid, end, depth + 1, std::move(right_stats), opt, rng, pool);
        tree.nodes[index].left = left;
        tree.nodes[index].right = right;
        return index;
    }

    std::optional<SplitCandidate> best_split(std::size_t begin, std::size_t end,
                                             const typename Criterion::Stats& parent,
                                             std::span<const std::size_t> features) const {
        std::optional<SplitCandidate> best;
        double best_gain = kMinSplitGain;
        for (const std::size_t f : features) {
            const auto& ord = order_[f];
            auto left = criterion_.empty();
            for (std::size_t i = begin; i + 1 < end; ++i) {
                criterion_.add(left, rows_[ord[i]]);
                const double v = value(ord[i], f);
                const double next = value(ord[i + 1], f);
                if (!(v < next)) continue;
                const auto g = criterion_.evaluate(parent, left);
                if (g && *g > best_gain) {
                    best_gain = *g;
                    best = SplitCandidate{static_cast<int>(f), midpoint(v, next), *g, i + 1 - begin};
                }
            }
        }
        return best;
    }

    const Matrix& x_;
    std::vector<std::uint32_t> rows_;
    const Criterion& criterion_;
    std::size_t n_;
    std::vector<std::vector<std::uint32_t>> order_;
    std::vector<std::uint8_t> go_left_;
    std::vector<std::uint32_t> scratch_;
};

}  // namespace navnet::ml
