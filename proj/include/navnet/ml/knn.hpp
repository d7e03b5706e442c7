#pragma once

#include <algorithm>
#include <span>
#include <utility>
#include <vector>

#include "navnet/error.hpp"
#include "navnet/ml/matrix.hpp"

namespace navnet::ml {

/// k-nearest-neighbour vote under Euclidean distance. Distance ties are broken
/// by training row order.
struct KnnClassifier {
    int k = 5;
    int n_classes = 2;
    Matrix train_x;
    std::vector<int> train_y;

    /// Indices of the k nearest training rows, nearest first.
    std::vector<std::size_t> neighbors(std::span<const double> q) const {
        std::vector<std::pair<double, std::size_t>> dist(train_x.rows);
        for (std::size_t r = 0; r < train_x.rows; ++r) {
            const auto row = train_x.row(r);
            double s = 0.0;
            for (std::size_t c = 0; c < row.size(); ++c) {
                const double d = row[c] - q[c];
                s += d * d;
            }
            dist[r] = {s, r};
        }
        const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), dist.size());
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
        std::vector<std::size_t> out(kk);
        for (std::size_t i = 0; i < kk; ++i) out[i] = dist[i].second;
        return out;
    }

    /// Neighbour vote fractions per class.
    std::vector<double> predict_proba(std::span<const double> q) const {
        std::vector<double> p(static_cast<std::size_t>(n_classes), 0.0);
        const auto nn = neighbors(q);
        if (nn.empty()) fail(ErrorCode::precondition, "knn model has no training rows");
        for (const auto r : nn) p[static_cast<std::size_t>(train_y[r])] += 1.0;
        for (auto& v : p) v /= static_cast<double>(nn.size());
        return p;
    }
};

}  // namespace navnet::ml
