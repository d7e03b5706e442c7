#pragma once

// Z-score standardisation and L2-regularised logistic regression.

#include <cmath>
#include <span>
#include <vector>

#include "navnet/error.hpp"
#include "navnet/ml/matrix.hpp"

namespace navnet::ml {

/// Column-wise z-scoring fitted on training rows; constant columns get unit scale.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const Matrix& x) {
        Standardizer s;
        s.mean.assign(x.cols, 0.0);
        s.scale.assign(x.cols, 1.0);
        if (x.rows == 0) return s;
        for (std::size_t r = 0; r < x.rows; ++r)
            for (std::size_t c = 0; c < x.cols; ++c) s.mean[c] += x(r, c);
        for (auto& m : s.mean) m /= static_cast<double>(x.rows);
        std::vector<double> var(x.cols, 0.0);
        for (std::size_t r = 0; r < x.rows; ++r)
            for (std::size_t c = 0; c < x.cols; ++c) {
                const double d = x(r, c) - s.mean[c];
                var[c] += d * d;
            }
        for (std::size_t c = 0; c < x.cols; ++c) {
            const double sd = std::sqrt(var[c] / static_cast<double>(x.rows));
            s.scale[c] = sd > 0.0 ? sd : 1.0;
        }
        return s;
    }

    void apply(std::span<const double> in, std::span<double> out) const {
        for (std::size_t c = 0; c < in.size(); ++c) out[c] = (in[c] - mean[c]) / scale[c];
    }

    Matrix transform(const Matrix& x) const {
        Matrix out(x.rows, x.cols);
        for (std::size_t r = 0; r < x.rows; ++r) apply(x.row(r), out.row(r));
        return out;
    }
};

inline double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// log(1 + exp(x)) without overflow.
inline double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

/// Binary logistic model: P(y = 1 | x) = sigmoid(w.x + b).
struct LogisticBinary {
    std::vector<double> weights;
    double bias = 0.0;

    double decision(std::span<const double> x) const {
        double z = bias;
        for (std::size_t c = 0; c < x.size(); ++c) z += weights[c] * x[c];
        return z;
    }
    double probability(std::span<const double> x) const { return sigmoid(decision(x)); }
};

/// Sum of cross-entropy losses plus ||w||^2 / (2C); the bias is not penalised.
inline double logistic_objective(const LogisticBinary& m, const Matrix& x, std::span<const double> y, double c) {
    double loss = 0.0;
    for (std::size_t r = 0; r < x.rows; ++r) {
        const double z = m.decision(x.row(r));
        loss += y[r] > 0.5 ? softplus(-z) : softplus(z);
    }
    double reg = 0.0;
    for (const double w : m.weights) reg += w * w;
    return loss + reg / (2.0 * c);
}

/// Gradient of logistic_objective; the last entry is d/d(bias).
inline std::vector<double> logistic_gradient(const LogisticBinary& m, const Matrix& x, std::span<const double> y,
                                             double c) {
    std::vector<double> g(x.cols + 1, 0.0);
    for (std::size_t r = 0; r < x.rows; ++r) {
        const auto row = x.row(r);
        const double residual = m.probability(row) - y[r];
        for (std::size_t k = 0; k < x.cols; ++k) g[k] += residual * row[k];
        g[x.cols] += residual;
    }
    for (std::size_t k = 0; k < x.cols; ++k) g[k] += m.weights[k] / c;
    return g;
}

struct LogisticFitOptions {
    double c = 1.0;
    double gradient_tolerance = 1e-6;
    int max_iterations = 10000;
};

struct LogisticFitReport {
    int iterations = 0;
    double gradient_norm = 0.0;
    bool converged = false;
};

namespace detail {

/// Solves A x = b for symmetric positive-definite A (row-major n x n) in place.
inline bool cholesky_solve(std::vector<double> a, std::vector<double>& b, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!(d > 0.0)) return false;
        d = std::sqrt(d);
        a[j * n + j] = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / d;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
        b[i] = s / a[i * n + i];
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[k * n + i] * b[k];
        b[i] = s / a[i * n + i];
    }
    return true;
}

inline double norm(std::span<const double> v) {
    double s = 0.0;
    for (const double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace detail

/// Damped Newton iterations with Armijo backtracking; stops when the gradient
/// norm drops below the tolerance or the iteration cap is reached.
inline LogisticBinary fit_logistic(const Matrix& x, std::span<const double> y, const LogisticFitOptions& opt,
                                   LogisticFitReport* report = nullptr) {
    if (opt.c <= 0.0) fail(ErrorCode::invalid_argument, "logistic regression C must be positive");
    const std::size_t d = x.cols;
    const std::size_t n = d + 1;
    LogisticBinary m{std::vector<double>(d, 0.0), 0.0};
    double f = logistic_objective(m, x, y, opt.c);
    auto g = logistic_gradient(m, x, y, opt.c);
    int it = 0;
    for (; it < opt.max_iterations && detail::norm(g) >= opt.gradient_tolerance; ++it) {
        std::vector<double> h(n * n, 0.0);
        for (std::size_t r = 0; r < x.rows; ++r) {
            const auto row = x.row(r);
            const double p = m.probability(row);
            const double s = p * (1.0 - p);
            for (std::size_t i = 0; i < n; ++i) {
                const double xi = i < d ? row[i] : 1.0;
                for (std::size_t j = 0; j <= i; ++j) {
                    const double xj = j < d ? row[j] : 1.0;
                    h[i * n + j] += s * xi * xj;
                }
            }
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j) h[j * n + i] = h[i * n + j];
        for (std::size_t i = 0; i < d; ++i) h[i * n + i] += 1.0 / opt.c;
        h[n * n - 1] += 1e-12;

        std::vector<double> step = g;
        if (!detail::cholesky_solve(h, step, n)) step = g;  // plain gradient step fallback

        double slope = 0.0;
        for (std::size_t i = 0; i < n; ++i) slope += g[i] * step[i];
        double t = 1.0;
        LogisticBinary next = m;
        double f_next = f;
        bool accepted = false;
        for (int halvings = 0; halvings < 60; ++halvings, t *= 0.5) {
            for (std::size_t i = 0; i < d; ++i) next.weights[i] = m.weights[i] - t * step[i];
            next.bias = m.bias - t * step[d];
            f_next = logistic_objective(next, x, y, opt.c);
            if (f_next <= f - 1e-4 * t * slope) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            // Objective is flat to rounding: take the Newton step if it still
            // reduces the gradient, otherwise stop.
            for (std::size_t i = 0; i < d; ++i) next.weights[i] = m.weights[i] - step[i];
            next.bias = m.bias - step[d];
            auto g_next = logistic_gradient(next, x, y, opt.c);
            if (detail::norm(g_next) >= detail::norm(g)) break;
            m = next;
            f = logistic_objective(m, x, y, opt.c);
            g = std::move(g_next);
            continue;
        }
        m = std::move(next);
        f = f_next;
        g = logistic_gradient(m, x, y, opt.c);
    }
    if (report) {
        report->iterations = it;
        report->gradient_norm = detail::norm(g);
        report->converged = report->gradient_norm < opt.gradient_tolerance;
    }
    return m;
}

}  // namespace navnet::ml
