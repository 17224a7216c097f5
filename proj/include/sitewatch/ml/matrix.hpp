// matrix.hpp - dense row-major design matrix and the standard scaler.

#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "../core.hpp"
#include "../features.hpp"

namespace sitewatch::ml {

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols) throw Error(ErrorCode::LengthMismatch, "ragged rows");
            std::copy(rows[i].begin(), rows[i].end(), m.data.begin() + static_cast<std::ptrdiff_t>(i * m.cols));
        }
        return m;
    }

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
};

/// Feature matrix tagged with the feature slots its columns hold.
struct Design {
    Matrix X;
    FeatureMask mask;
};

/// Selects the masked slots of each vector. Every selected slot must be
/// available.
inline Design to_design(const std::vector<FeatureVector>& vectors, const FeatureMask& mask) {
    auto slots = mask.slots();
    Design d{Matrix(vectors.size(), slots.size()), mask};
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        for (std::size_t c = 0; c < slots.size(); ++c) {
            if (!vectors[i].available[slots[c]]) {
                throw Error(ErrorCode::UnavailableFeature,
                            "row " + std::to_string(i) + " lacks F" + std::to_string(slots[c] + 1));
            }
            d.X(i, c) = vectors[i].values[slots[c]];
        }
    }
    return d;
}

inline std::vector<Label> labels_of(const std::vector<FeatureVector>& vectors) {
    std::vector<Label> y;
    y.reserve(vectors.size());
    for (const auto& v : vectors) y.push_back(v.label);
    return y;
}

/// Per-column standardization. Constant columns map to 0.
class Scaler {
public:
    void fit(const Matrix& X) {
        mean_.assign(X.cols, 0.0);
        std_.assign(X.cols, 0.0);
        if (X.rows == 0) throw Error(ErrorCode::EmptyTrainingSet, "cannot fit scaler on 0 rows");
        const double n = static_cast<double>(X.rows);
        for (std::size_t c = 0; c < X.cols; ++c) {
            double sum = 0;
            for (std::size_t r = 0; r < X.rows; ++r) sum += X(r, c);
            double mean = sum / n;
            double ss = 0;
            for (std::size_t r = 0; r < X.rows; ++r) ss += (X(r, c) - mean) * (X(r, c) - mean);
            mean_[c] = mean;
            std_[c] = std::sqrt(ss / n);
        }
        fitted_ = true;
    }

    void restore(std::vector<double> mean, std::vector<double> std) {
        if (mean.size() != std.size()) throw Error(ErrorCode::FormatError, "scaler size mismatch");
        mean_ = std::move(mean);
        std_ = std::move(std);
        fitted_ = true;
    }

    Matrix transform(const Matrix& X) const {
        if (!fitted_) throw Error(ErrorCode::InvalidConfig, "scaler used before fit");
        if (X.cols != mean_.size()) throw Error(ErrorCode::MaskMismatch, "column count differs from fitted scaler");
        Matrix out = X;
        for (std::size_t r = 0; r < X.rows; ++r) {
            for (std::size_t c = 0; c < X.cols; ++c) {
                out(r, c) = std_[c] > 0 ? (X(r, c) - mean_[c]) / std_[c] : 0.0;
            }
        }
        return out;
    }

    Matrix fit_transform(const Matrix& X) {
        fit(X);
        return transform(X);
    }

    bool fitted() const { return fitted_; }
    const std::vector<double>& mean() const { return mean_; }
    const std::vector<double>& stddev() const { return std_; }

private:
    std::vector<double> mean_;
    std::vector<double> std_;
    bool fitted_ = false;
};

/// Majority label of a vote count; ties go to malicious.
inline Label majority(std::size_t malicious, std::size_t total) {
    return 2 * malicious >= total ? Label::malicious : Label::benign;
}

}  // namespace sitewatch::ml
