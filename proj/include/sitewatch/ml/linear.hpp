// linear.hpp - logistic regression (batch gradient descent) and a linear SVM
// trained with Pegasos-style stochastic subgradient steps.

#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "../random.hpp"
#include "matrix.hpp"

namespace sitewatch::ml {

struct LinearParams {
    std::vector<double> weights;
    double bias = 0;

    double score(std::span<const double> x) const {
        double z = bias;
        for (std::size_t i = 0; i < weights.size(); ++i) z += weights[i] * x[i];
        return z;
    }
};

struct LinearGradient {
    std::vector<double> weights;
    double bias = 0;
};

inline double to_target(Label l) { return l == Label::malicious ? 1.0 : 0.0; }
inline double to_sign(Label l) { return l == Label::malicious ? 1.0 : -1.0; }

// ---------------------------------------------------------------------------
// Logistic regression

struct LogisticConfig {
    double learning_rate = 0.1;
    std::size_t max_iter = 1000;
    double tol = 1e-6;
    double l2 = 1e-4;
};

inline double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

/// log(1 + e^z) without overflow.
inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

/// Mean log-loss plus (l2 / 2) * |w|^2. The bias is not penalized.
inline double logistic_objective(const LinearParams& p, const Matrix& X, const std::vector<Label>& y, double l2) {
    double loss = 0;
    for (std::size_t i = 0; i < X.rows; ++i) {
        double z = p.score(X.row(i));
        loss += softplus(z) - to_target(y[i]) * z;
    }
    double reg = std::inner_product(p.weights.begin(), p.weights.end(), p.weights.begin(), 0.0);
    return loss / static_cast<double>(X.rows) + 0.5 * l2 * reg;
}

inline LinearGradient logistic_gradient(const LinearParams& p, const Matrix& X, const std::vector<Label>& y,
                                        double l2) {
    LinearGradient g{std::vector<double>(X.cols, 0.0), 0.0};
    for (std::size_t i = 0; i < X.rows; ++i) {
        auto x = X.row(i);
        double r = sigmoid(p.score(x)) - to_target(y[i]);
        for (std::size_t c = 0; c < X.cols; ++c) g.weights[c] += r * x[c];
        g.bias += r;
    }
    const double n = static_cast<double>(X.rows);
    for (std::size_t c = 0; c < X.cols; ++c) g.weights[c] = g.weights[c] / n + l2 * p.weights[c];
    g.bias /= n;
    return g;
}

struct LogisticTrace {
    std::vector<double> losses;
};

inline LinearParams fit_logistic(const Matrix& X, const std::vector<Label>& y, const LogisticConfig& config,
                                 LogisticTrace* trace = nullptr) {
    if (X.rows == 0) throw Error(ErrorCode::EmptyTrainingSet, "no training rows");
    LinearParams p{std::vector<double>(X.cols, 0.0), 0.0};
    double loss = logistic_objective(p, X, y, config.l2);
    if (trace) trace->losses.push_back(loss);
    for (std::size_t it = 0; it < config.max_iter; ++it) {
        auto g = logistic_gradient(p, X, y, config.l2);
        for (std::size_t c = 0; c < X.cols; ++c) p.weights[c] -= config.learning_rate * g.weights[c];
        p.bias -= config.learning_rate * g.bias;
        double next = logistic_objective(p, X, y, config.l2);
        if (!std::isfinite(next)) {
            throw Error(ErrorCode::NonFiniteLoss, "logistic loss diverged; try a smaller learning rate");
        }
        if (trace) trace->losses.push_back(next);
        double improvement = loss - next;
        loss = next;
        if (improvement < config.tol) break;
    }
    return p;
}

inline Label logistic_predict(const LinearParams& p, std::span<const double> x) {
    return sigmoid(p.score(x)) >= 0.5 ? Label::malicious : Label::benign;
}

// ---------------------------------------------------------------------------
// Linear SVM

struct SvmConfig {
    double lambda = 1e-4;
    std::size_t epochs = 100;
    std::uint64_t seed = 0;
};

/// (lambda / 2) * (|w|^2 + b^2) + mean hinge loss. The bias is treated as one
/// more weight on a constant input, as in the Pegasos update.
inline double svm_objective(const LinearParams& p, const Matrix& X, const std::vector<Label>& y, double lambda) {
    double hinge = 0;
    for (std::size_t i = 0; i < X.rows; ++i) hinge += std::max(0.0, 1.0 - to_sign(y[i]) * p.score(X.row(i)));
    double reg = std::inner_product(p.weights.begin(), p.weights.end(), p.weights.begin(), 0.0) + p.bias * p.bias;
    return 0.5 * lambda * reg + hinge / static_cast<double>(X.rows);
}

/// Subgradient of svm_objective; at a margin of exactly 1 the hinge term
/// contributes zero.
inline LinearGradient svm_subgradient(const LinearParams& p, const Matrix& X, const std::vector<Label>& y,
                                      double lambda) {
    LinearGradient g{std::vector<double>(X.cols, 0.0), 0.0};
    for (std::size_t i = 0; i < X.rows; ++i) {
        auto x = X.row(i);
        double s = to_sign(y[i]);
        if (s * p.score(x) < 1.0) {
            for (std::size_t c = 0; c < X.cols; ++c) g.weights[c] -= s * x[c];
            g.bias -= s;
        }
    }
    const double n = static_cast<double>(X.rows);
    for (std::size_t c = 0; c < X.cols; ++c) g.weights[c] = g.weights[c] / n + lambda * p.weights[c];
    g.bias = g.bias / n + lambda * p.bias;
    return g;
}

/// One pass per epoch over a seeded permutation, step 1 / (lambda * t), then
/// projection onto the ball of radius 1 / sqrt(lambda).
inline LinearParams fit_svm(const Matrix& X, const std::vector<Label>& y, const SvmConfig& config) {
    if (X.rows == 0) throw Error(ErrorCode::EmptyTrainingSet, "no training rows");
    if (!(config.lambda > 0)) throw Error(ErrorCode::InvalidConfig, "lambda must be positive");
    LinearParams p{std::vector<double>(X.cols, 0.0), 0.0};
    Rng rng(derive_seed(config.seed, "svm"));
    std::vector<std::size_t> order(X.rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const double radius = 1.0 / std::sqrt(config.lambda);
    std::size_t t = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle(order, rng);
        for (auto i : order) {
            ++t;
            const double eta = 1.0 / (config.lambda * static_cast<double>(t));
            auto x = X.row(i);
            const double s = to_sign(y[i]);
            const bool violated = s * p.score(x) < 1.0;
            const double shrink = 1.0 - eta * config.lambda;
            for (auto& w : p.weights) w *= shrink;
            p.bias *= shrink;
            if (violated) {
                for (std::size_t c = 0; c < X.cols; ++c) p.weights[c] += eta * s * x[c];
                p.bias += eta * s;
            }
            double norm = std::sqrt(std::inner_product(p.weights.begin(), p.weights.end(), p.weights.begin(), 0.0) +
                                    p.bias * p.bias);
            if (norm > radius) {
                double f = radius / norm;
                for (auto& w : p.weights) w *= f;
                p.bias *= f;
            }
        }
        if (!std::isfinite(p.bias)) throw Error(ErrorCode::NonFiniteLoss, "svm weights diverged");
    }
    return p;
}

/// Zero scores go to malicious.
inline Label svm_predict(const LinearParams& p, std::span<const double> x) {
    return p.score(x) >= 0 ? Label::malicious : Label::benign;
}

}  // namespace sitewatch::ml
