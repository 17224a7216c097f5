// tree.hpp - CART decision tree with entropy impurity, and the bagged forest.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "../features.hpp"
#include "../random.hpp"
#include "matrix.hpp"

namespace sitewatch::ml {

/// Splits whose gain differs by no more than this are treated as equal; the
/// first one found (lowest column, then lowest threshold) is kept.
inline constexpr double kGainEpsilon = 1e-12;

struct TreeConfig {
    std::size_t min_samples_split = 2;
    /// 0 means unlimited.
    std::size_t max_depth = 0;
    /// Columns examined per node; 0 means all.
    std::size_t max_features = 0;
};

struct TreeNode {
    int feature = -1;  // -1 for leaves
    double threshold = 0;
    int left = -1;
    int right = -1;
    Label label = Label::malicious;
    std::size_t samples = 0;
    double gain = 0;

    bool leaf() const { return feature < 0; }
};

/// Flat node array, root at index 0. Rows with x[feature] <= threshold go left.
struct Tree {
    std::vector<TreeNode> nodes;

    Label predict(std::span<const double> x) const {
        std::size_t i = 0;
        while (!nodes[i].leaf()) {
            const auto& n = nodes[i];
            i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
        }
        return nodes[i].label;
    }

    std::size_t depth() const {
        std::size_t best = 0;
        std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
        while (!stack.empty()) {
            auto [i, d] = stack.back();
            stack.pop_back();
            best = std::max(best, d);
            if (!nodes[i].leaf()) {
                stack.emplace_back(static_cast<std::size_t>(nodes[i].left), d + 1);
                stack.emplace_back(static_cast<std::size_t>(nodes[i].right), d + 1);
            }
        }
        return best;
    }
};

inline double label_entropy(std::size_t malicious, std::size_t benign) {
    return entropy_of_counts(std::array<std::size_t, 2>{malicious, benign});
}

struct Split {
    std::size_t column = 0;
    double threshold = 0;
    double gain = 0;
};

/// Best information-gain split of rows `idx` over `columns`. Candidate
/// thresholds are midpoints between consecutive distinct sorted values.
inline std::optional<Split> best_split(const Matrix& X, const std::vector<Label>& y, const std::vector<std::size_t>& idx,
                                       const std::vector<std::size_t>& columns) {
    std::size_t n = idx.size();
    std::size_t mal = 0;
    for (auto i : idx) mal += y[i] == Label::malicious;
    const double parent = label_entropy(mal, n - mal);

    std::optional<Split> best;
    std::vector<std::pair<double, Label>> col(n);
    for (auto c : columns) {
        for (std::size_t k = 0; k < n; ++k) col[k] = {X(idx[k], c), y[idx[k]]};
        std::sort(col.begin(), col.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        std::size_t left_mal = 0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            left_mal += col[k].second == Label::malicious;
            if (!(col[k].first < col[k + 1].first)) continue;
            std::size_t nl = k + 1, nr = n - nl;
            std::size_t right_mal = mal - left_mal;
            double child = (static_cast<double>(nl) / static_cast<double>(n)) * label_entropy(left_mal, nl - left_mal) +
                           (static_cast<double>(nr) / static_cast<double>(n)) * label_entropy(right_mal, nr - right_mal);
            double gain = parent - child;
            if (!best || gain > best->gain + kGainEpsilon) {
                double t = col[k].first + (col[k + 1].first - col[k].first) / 2;
                if (!(t < col[k + 1].first)) t = col[k].first;
                best = Split{c, t, gain};
            }
        }
    }
    return best;
}

/// Grows a tree on rows `sample` of X (repeats allowed, as in a bootstrap).
/// `rng` is required when config.max_features limits the per-node columns.
inline Tree grow_tree(const Matrix& X, const std::vector<Label>& y, std::vector<std::size_t> sample,
                      const TreeConfig& config, Rng* rng = nullptr) {
    if (sample.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no rows to grow a tree");
    Tree tree;
    std::vector<std::size_t> all_columns(X.cols);
    for (std::size_t c = 0; c < X.cols; ++c) all_columns[c] = c;
    const std::size_t per_node =
        config.max_features == 0 ? X.cols : std::min(std::max<std::size_t>(1, config.max_features), X.cols);

    struct Pending {
        std::size_t node;
        std::vector<std::size_t> idx;
        std::size_t depth;
    };
    tree.nodes.emplace_back();
    std::vector<Pending> stack;
    stack.push_back({0, std::move(sample), 0});
    while (!stack.empty()) {
        Pending p = std::move(stack.back());
        stack.pop_back();
        std::size_t mal = 0;
        for (auto i : p.idx) mal += y[i] == Label::malicious;
        {
            auto& node = tree.nodes[p.node];
            node.samples = p.idx.size();
            node.label = majority(mal, p.idx.size());
        }
        bool pure = mal == 0 || mal == p.idx.size();
        bool too_deep = config.max_depth != 0 && p.depth >= config.max_depth;
        if (pure || too_deep || p.idx.size() < config.min_samples_split || X.cols == 0) continue;

        std::vector<std::size_t> columns = all_columns;
        if (per_node < X.cols) {
            // Partial Fisher-Yates: the first per_node entries become the draw.
            for (std::size_t k = 0; k < per_node; ++k) {
                std::size_t j = k + static_cast<std::size_t>(uniform_index(*rng, X.cols - k));
                std::swap(columns[k], columns[j]);
            }
            columns.resize(per_node);
            std::sort(columns.begin(), columns.end());
        }
        auto split = best_split(X, y, p.idx, columns);
        if (!split || split->gain <= kGainEpsilon) continue;

        std::vector<std::size_t> left, right;
        for (auto i : p.idx) (X(i, split->column) <= split->threshold ? left : right).push_back(i);
        int li = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        auto& node = tree.nodes[p.node];
        node.feature = static_cast<int>(split->column);
        node.threshold = split->threshold;
        node.gain = split->gain;
        node.left = li;
        node.right = li + 1;
        stack.push_back({static_cast<std::size_t>(li + 1), std::move(right), p.depth + 1});
        stack.push_back({static_cast<std::size_t>(li), std::move(left), p.depth + 1});
    }
    return tree;
}

inline Tree fit_tree(const Matrix& X, const std::vector<Label>& y, const TreeConfig& config = {}) {
    std::vector<std::size_t> all(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i) all[i] = i;
    return grow_tree(X, y, std::move(all), config);
}

/// Sum over split nodes of (node sample fraction x gain) per column,
/// unnormalized.
inline std::vector<double> tree_importance(const Tree& tree, std::size_t cols) {
    std::vector<double> imp(cols, 0.0);
    const double root = static_cast<double>(tree.nodes.front().samples);
    for (const auto& n : tree.nodes) {
        if (n.leaf()) continue;
        imp[static_cast<std::size_t>(n.feature)] += static_cast<double>(n.samples) / root * n.gain;
    }
    return imp;
}

// ---------------------------------------------------------------------------
// Forest

struct ForestConfig {
    std::size_t n_trees = 100;
    bool bootstrap = true;
    /// Columns per node; 0 means floor(sqrt(columns)), at least 1.
    std::size_t max_features = 0;
    std::uint64_t seed = 0;
    std::size_t min_samples_split = 2;
    std::size_t max_depth = 0;
    /// Worker threads. Each tree owns a substream derived from the seed, so
    /// the result does not depend on this value.
    std::size_t jobs = 1;
};

inline std::vector<Tree> fit_forest(const Matrix& X, const std::vector<Label>& y, const ForestConfig& config) {
    if (X.rows == 0) throw Error(ErrorCode::EmptyTrainingSet, "no training rows");
    if (config.n_trees == 0) throw Error(ErrorCode::InvalidConfig, "n_trees must be positive");
    TreeConfig tc;
    tc.min_samples_split = config.min_samples_split;
    tc.max_depth = config.max_depth;
    tc.max_features = config.max_features != 0
                          ? config.max_features
                          : std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(
                                                         static_cast<double>(X.cols)))));

    std::vector<Tree> trees(config.n_trees);
    auto build = [&](std::size_t t) {
        Rng rng(derive_seed(config.seed, "forest.tree", t));
        std::vector<std::size_t> sample(X.rows);
        for (std::size_t i = 0; i < X.rows; ++i) {
            sample[i] = config.bootstrap ? static_cast<std::size_t>(uniform_index(rng, X.rows)) : i;
        }
        trees[t] = grow_tree(X, y, std::move(sample), tc, &rng);
    };

    std::size_t jobs = std::max<std::size_t>(1, std::min(config.jobs, config.n_trees));
    if (jobs == 1) {
        for (std::size_t t = 0; t < config.n_trees; ++t) build(t);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < jobs; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t t = w; t < config.n_trees; t += jobs) build(t);
            });
        }
        for (auto& th : pool) th.join();
    }
    return trees;
}

inline Label forest_predict(const std::vector<Tree>& trees, std::span<const double> x) {
    std::size_t mal = 0;
    for (const auto& t : trees) mal += t.predict(x) == Label::malicious;
    return majority(mal, trees.size());
}

}  // namespace sitewatch::ml
