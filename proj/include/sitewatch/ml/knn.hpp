// knn.hpp - brute-force k-nearest-neighbour voting under a Minkowski metric.

#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "matrix.hpp"

namespace sitewatch::ml {

struct KnnConfig {
    std::size_t k = 8;
    double p = 2.0;
};

/// Sum of |a_i - b_i|^p. Monotone in the true distance, so it ranks
/// neighbours without taking the root.
inline double minkowski_power(std::span<const double> a, std::span<const double> b, double p) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = std::abs(a[i] - b[i]);
        s += p == 2.0 ? d * d : (p == 1.0 ? d : std::pow(d, p));
    }
    return s;
}

/// Indices of the k nearest training rows; distance ties go to the lower index.
inline std::vector<std::size_t> nearest(const Matrix& train, std::span<const double> query, const KnnConfig& config) {
    std::vector<std::pair<double, std::size_t>> d(train.rows);
    for (std::size_t i = 0; i < train.rows; ++i) d[i] = {minkowski_power(train.row(i), query, config.p), i};
    std::size_t k = std::min(config.k, d.size());
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = d[i].second;
    return out;
}

inline Label knn_predict(const Matrix& train, const std::vector<Label>& y, std::span<const double> query,
                         const KnnConfig& config) {
    auto idx = nearest(train, query, config);
    std::size_t mal = 0;
    for (auto i : idx) mal += y[i] == Label::malicious;
    return majority(mal, idx.size());
}

}  // namespace sitewatch::ml
