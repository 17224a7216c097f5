// model.hpp - trained model container, training dispatch, prediction, hard
// voting, forest feature importance and the JSON model file.
//
// Model file layout (one JSON document, 2-space indent, trailing newline):
//   format        "sitewatch-model/1"
//   kind          decision_tree | random_forest | knn | logistic_regression |
//                 linear_svm | ensemble
//   feature_mask  e.g. "F1-F5,F7,F9-F11"; column j of every stored matrix and
//                 node "feature" index refers to the j-th slot of this mask
//   config        kind-specific hyperparameters
//   scaler        {"mean": [...], "std": [...]}
//   params        decision_tree: {"root": node}
//                 random_forest: {"trees": [node, ...]}
//                 knn:           {"train": [[...], ...], "labels": [0|1, ...]}
//                 logistic_regression, linear_svm: {"weights": [...], "bias": b}
//                 ensemble:      {"members": [model, ...]}
//   node          leaf:  {"label": 0|1, "samples": n}
//                 split: {"feature": j, "threshold": t, "gain": g,
//                         "label": 0|1, "samples": n, "left": node, "right": node}

#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "knn.hpp"
#include "linear.hpp"
#include "matrix.hpp"
#include "tree.hpp"

namespace sitewatch::ml {

enum class ModelKind { decision_tree, random_forest, knn, logistic_regression, linear_svm, ensemble };

inline constexpr std::array<ModelKind, 5> kEnsembleKinds{ModelKind::random_forest, ModelKind::decision_tree,
                                                          ModelKind::logistic_regression, ModelKind::knn,
                                                          ModelKind::linear_svm};

inline const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::decision_tree: return "decision_tree";
        case ModelKind::random_forest: return "random_forest";
        case ModelKind::knn: return "knn";
        case ModelKind::logistic_regression: return "logistic_regression";
        case ModelKind::linear_svm: return "linear_svm";
        case ModelKind::ensemble: return "ensemble";
    }
    return "unknown";
}

/// Short names used on the command line and in report tables.
inline const char* short_name(ModelKind k) {
    switch (k) {
        case ModelKind::decision_tree: return "DT";
        case ModelKind::random_forest: return "RF";
        case ModelKind::knn: return "KNN";
        case ModelKind::logistic_regression: return "LR";
        case ModelKind::linear_svm: return "SVM";
        case ModelKind::ensemble: return "Ensemble";
    }
    return "?";
}

inline std::optional<ModelKind> parse_model_kind(std::string_view s) {
    auto l = lower_trim(s);
    for (auto k : {ModelKind::decision_tree, ModelKind::random_forest, ModelKind::knn, ModelKind::logistic_regression,
                   ModelKind::linear_svm, ModelKind::ensemble}) {
        if (l == to_string(k) || l == lower_trim(short_name(k))) return k;
    }
    return std::nullopt;
}

struct TrainConfig {
    TreeConfig tree;
    ForestConfig forest;
    KnnConfig knn;
    LogisticConfig logistic;
    SvmConfig svm;

    /// Same hyperparameters with every seed drawn from one master seed.
    static TrainConfig seeded(std::uint64_t seed) {
        TrainConfig c;
        c.forest.seed = derive_seed(seed, "train.forest");
        c.svm.seed = derive_seed(seed, "train.svm");
        return c;
    }
};

struct KnnState {
    KnnConfig config;
    Matrix train;
    std::vector<Label> labels;
};

struct TrainedModel {
    ModelKind kind = ModelKind::decision_tree;
    FeatureMask mask;
    Scaler scaler;
    TrainConfig config;

    Tree tree;
    std::vector<Tree> forest;
    KnnState knn;
    LinearParams linear;
    std::vector<TrainedModel> members;
};

// ---------------------------------------------------------------------------
// Training

/// Fits the scaler on `data.X`, then the requested classifier on the scaled
/// matrix. `ensemble` trains one member of each of the five kinds.
inline TrainedModel train(ModelKind kind, const Design& data, const std::vector<Label>& y,
                          const TrainConfig& config = {}) {
    if (data.X.rows == 0) throw Error(ErrorCode::EmptyTrainingSet, "no training rows");
    if (y.size() != data.X.rows) throw Error(ErrorCode::LengthMismatch, "labels vs rows");
    TrainedModel m;
    m.kind = kind;
    m.mask = data.mask;
    m.config = config;
    Matrix Xs = m.scaler.fit_transform(data.X);
    switch (kind) {
        case ModelKind::decision_tree: m.tree = fit_tree(Xs, y, config.tree); break;
        case ModelKind::random_forest: m.forest = fit_forest(Xs, y, config.forest); break;
        case ModelKind::knn:
            if (config.knn.k == 0 || config.knn.k > Xs.rows) {
                throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(config.knn.k) + " with " +
                                                      std::to_string(Xs.rows) + " training rows");
            }
            m.knn = {config.knn, std::move(Xs), y};
            break;
        case ModelKind::logistic_regression: m.linear = fit_logistic(Xs, y, config.logistic); break;
        case ModelKind::linear_svm: m.linear = fit_svm(Xs, y, config.svm); break;
        case ModelKind::ensemble:
            for (auto k : kEnsembleKinds) m.members.push_back(train(k, data, y, config));
            break;
    }
    return m;
}

// ---------------------------------------------------------------------------
// Prediction

inline std::vector<Label> predict(const TrainedModel& model, const Design& data);

/// Unweighted per-row majority over exactly five members, one of each kind,
/// all sharing one feature mask.
inline std::vector<Label> vote_ensemble(const std::vector<TrainedModel>& models, const Design& data) {
    if (models.size() != kEnsembleKinds.size()) {
        throw Error(ErrorCode::WrongMemberCount, "ensemble needs 5 members, got " + std::to_string(models.size()));
    }
    std::set<ModelKind> kinds;
    for (const auto& m : models) {
        kinds.insert(m.kind);
        if (!(m.mask == models.front().mask)) throw Error(ErrorCode::MaskMismatch, "members disagree on feature mask");
    }
    if (kinds.size() != models.size() || kinds.count(ModelKind::ensemble)) {
        throw Error(ErrorCode::WrongMemberCount, "ensemble members must be the five distinct base kinds");
    }
    std::vector<std::size_t> votes(data.X.rows, 0);
    for (const auto& m : models) {
        auto p = predict(m, data);
        for (std::size_t i = 0; i < p.size(); ++i) votes[i] += p[i] == Label::malicious;
    }
    std::vector<Label> out(data.X.rows);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = majority(votes[i], models.size());
    return out;
}

inline std::vector<Label> predict(const TrainedModel& model, const Design& data) {
    if (!(data.mask == model.mask)) {
        throw Error(ErrorCode::MaskMismatch,
                    "model uses " + model.mask.to_string() + ", input has " + data.mask.to_string());
    }
    if (model.kind == ModelKind::ensemble) return vote_ensemble(model.members, data);

    Matrix Xs = model.scaler.transform(data.X);
    std::vector<Label> out(Xs.rows);
    for (std::size_t i = 0; i < Xs.rows; ++i) {
        auto x = Xs.row(i);
        switch (model.kind) {
            case ModelKind::decision_tree: out[i] = model.tree.predict(x); break;
            case ModelKind::random_forest: out[i] = forest_predict(model.forest, x); break;
            case ModelKind::knn: out[i] = knn_predict(model.knn.train, model.knn.labels, x, model.knn.config); break;
            case ModelKind::logistic_regression: out[i] = logistic_predict(model.linear, x); break;
            case ModelKind::linear_svm: out[i] = svm_predict(model.linear, x); break;
            case ModelKind::ensemble: break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Feature importance

struct FeatureImportance {
    FeatureMask mask;
    /// One score per mask slot, in slot order.
    std::vector<double> scores;

    double of_feature(int feature_number) const {
        auto slots = mask.slots();
        for (std::size_t j = 0; j < slots.size(); ++j) {
            if (static_cast<int>(slots[j]) + 1 == feature_number) return scores[j];
        }
        return 0.0;
    }
};

/// Mean over trees of the sample-weighted gain per column, normalized to sum
/// to one. All zeros when no tree ever split.
inline FeatureImportance feature_importance(const TrainedModel& forest) {
    if (forest.kind != ModelKind::random_forest) throw Error(ErrorCode::NotAForest, to_string(forest.kind));
    const std::size_t cols = forest.mask.size();
    FeatureImportance fi{forest.mask, std::vector<double>(cols, 0.0)};
    for (const auto& t : forest.forest) {
        auto imp = tree_importance(t, cols);
        for (std::size_t c = 0; c < cols; ++c) fi.scores[c] += imp[c];
    }
    double total = 0;
    for (auto& s : fi.scores) {
        s /= static_cast<double>(forest.forest.size());
        total += s;
    }
    if (total > 0) {
        for (auto& s : fi.scores) s /= total;
    }
    return fi;
}

// ---------------------------------------------------------------------------
// Serialization

using Json = nlohmann::ordered_json;

inline constexpr const char* kModelFormat = "sitewatch-model/1";

namespace detail {

inline Json node_to_json(const Tree& tree, std::size_t i) {
    const auto& n = tree.nodes[i];
    Json j;
    if (!n.leaf()) {
        j["feature"] = n.feature;
        j["threshold"] = n.threshold;
        j["gain"] = n.gain;
    }
    j["label"] = static_cast<int>(n.label);
    j["samples"] = n.samples;
    if (!n.leaf()) {
        j["left"] = node_to_json(tree, static_cast<std::size_t>(n.left));
        j["right"] = node_to_json(tree, static_cast<std::size_t>(n.right));
    }
    return j;
}

inline int node_from_json(const Json& j, Tree& tree) {
    int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    TreeNode n;
    n.label = j.at("label").get<int>() ? Label::malicious : Label::benign;
    n.samples = j.at("samples").get<std::size_t>();
    if (j.contains("feature")) {
        n.feature = j.at("feature").get<int>();
        n.threshold = j.at("threshold").get<double>();
        n.gain = j.at("gain").get<double>();
        n.left = node_from_json(j.at("left"), tree);
        n.right = node_from_json(j.at("right"), tree);
    }
    tree.nodes[static_cast<std::size_t>(id)] = n;
    return id;
}

inline Json config_to_json(const TrainedModel& m) {
    Json c = Json::object();
    const auto& cfg = m.config;
    switch (m.kind) {
        case ModelKind::decision_tree:
            c["min_samples_split"] = cfg.tree.min_samples_split;
            c["max_depth"] = cfg.tree.max_depth;
            c["max_features"] = cfg.tree.max_features;
            break;
        case ModelKind::random_forest:
            c["n_trees"] = cfg.forest.n_trees;
            c["bootstrap"] = cfg.forest.bootstrap;
            c["max_features"] = cfg.forest.max_features;
            c["min_samples_split"] = cfg.forest.min_samples_split;
            c["max_depth"] = cfg.forest.max_depth;
            c["seed"] = cfg.forest.seed;
            break;
        case ModelKind::knn:
            c["k"] = cfg.knn.k;
            c["p"] = cfg.knn.p;
            break;
        case ModelKind::logistic_regression:
            c["learning_rate"] = cfg.logistic.learning_rate;
            c["max_iter"] = cfg.logistic.max_iter;
            c["tol"] = cfg.logistic.tol;
            c["l2"] = cfg.logistic.l2;
            break;
        case ModelKind::linear_svm:
            c["lambda"] = cfg.svm.lambda;
            c["epochs"] = cfg.svm.epochs;
            c["seed"] = cfg.svm.seed;
            break;
        case ModelKind::ensemble: break;
    }
    return c;
}

inline void config_from_json(const Json& c, TrainedModel& m) {
    auto& cfg = m.config;
    switch (m.kind) {
        case ModelKind::decision_tree:
            cfg.tree.min_samples_split = c.at("min_samples_split").get<std::size_t>();
            cfg.tree.max_depth = c.at("max_depth").get<std::size_t>();
            cfg.tree.max_features = c.at("max_features").get<std::size_t>();
            break;
        case ModelKind::random_forest:
            cfg.forest.n_trees = c.at("n_trees").get<std::size_t>();
            cfg.forest.bootstrap = c.at("bootstrap").get<bool>();
            cfg.forest.max_features = c.at("max_features").get<std::size_t>();
            cfg.forest.min_samples_split = c.at("min_samples_split").get<std::size_t>();
            cfg.forest.max_depth = c.at("max_depth").get<std::size_t>();
            cfg.forest.seed = c.at("seed").get<std::uint64_t>();
            break;
        case ModelKind::knn:
            cfg.knn.k = c.at("k").get<std::size_t>();
            cfg.knn.p = c.at("p").get<double>();
            break;
        case ModelKind::logistic_regression:
            cfg.logistic.learning_rate = c.at("learning_rate").get<double>();
            cfg.logistic.max_iter = c.at("max_iter").get<std::size_t>();
            cfg.logistic.tol = c.at("tol").get<double>();
            cfg.logistic.l2 = c.at("l2").get<double>();
            break;
        case ModelKind::linear_svm:
            cfg.svm.lambda = c.at("lambda").get<double>();
            cfg.svm.epochs = c.at("epochs").get<std::size_t>();
            cfg.svm.seed = c.at("seed").get<std::uint64_t>();
            break;
        case ModelKind::ensemble: break;
    }
}

}  // namespace detail

inline Json to_json(const TrainedModel& m) {
    Json j;
    j["format"] = kModelFormat;
    j["kind"] = to_string(m.kind);
    j["feature_mask"] = m.mask.to_string();
    j["config"] = detail::config_to_json(m);
    j["scaler"] = {{"mean", m.scaler.mean()}, {"std", m.scaler.stddev()}};
    Json p = Json::object();
    switch (m.kind) {
        case ModelKind::decision_tree: p["root"] = detail::node_to_json(m.tree, 0); break;
        case ModelKind::random_forest: {
            Json trees = Json::array();
            for (const auto& t : m.forest) trees.push_back(detail::node_to_json(t, 0));
            p["trees"] = std::move(trees);
            break;
        }
        case ModelKind::knn: {
            Json rows = Json::array();
            for (std::size_t i = 0; i < m.knn.train.rows; ++i) {
                auto r = m.knn.train.row(i);
                rows.push_back(std::vector<double>(r.begin(), r.end()));
            }
            p["train"] = std::move(rows);
            std::vector<int> labels;
            for (auto l : m.knn.labels) labels.push_back(static_cast<int>(l));
            p["labels"] = labels;
            break;
        }
        case ModelKind::logistic_regression:
        case ModelKind::linear_svm:
            p["weights"] = m.linear.weights;
            p["bias"] = m.linear.bias;
            break;
        case ModelKind::ensemble: {
            Json members = Json::array();
            for (const auto& mem : m.members) members.push_back(to_json(mem));
            p["members"] = std::move(members);
            break;
        }
    }
    j["params"] = std::move(p);
    return j;
}

inline TrainedModel from_json(const Json& j) {
    try {
        if (j.at("format").get<std::string>() != kModelFormat) throw Error(ErrorCode::FormatError, "unknown format");
        TrainedModel m;
        auto kind = parse_model_kind(j.at("kind").get<std::string>());
        if (!kind) throw Error(ErrorCode::FormatError, "unknown model kind");
        m.kind = *kind;
        m.mask = FeatureMask::parse(j.at("feature_mask").get<std::string>());
        detail::config_from_json(j.at("config"), m);
        m.scaler.restore(j.at("scaler").at("mean").get<std::vector<double>>(),
                         j.at("scaler").at("std").get<std::vector<double>>());
        const auto& p = j.at("params");
        switch (m.kind) {
            case ModelKind::decision_tree: detail::node_from_json(p.at("root"), m.tree); break;
            case ModelKind::random_forest:
                for (const auto& t : p.at("trees")) {
                    Tree tree;
                    detail::node_from_json(t, tree);
                    m.forest.push_back(std::move(tree));
                }
                break;
            case ModelKind::knn: {
                m.knn.config = m.config.knn;
                m.knn.train = Matrix::from_rows(p.at("train").get<std::vector<std::vector<double>>>());
                for (int l : p.at("labels").get<std::vector<int>>()) {
                    m.knn.labels.push_back(l ? Label::malicious : Label::benign);
                }
                break;
            }
            case ModelKind::logistic_regression:
            case ModelKind::linear_svm:
                m.linear.weights = p.at("weights").get<std::vector<double>>();
                m.linear.bias = p.at("bias").get<double>();
                break;
            case ModelKind::ensemble:
                for (const auto& mem : p.at("members")) m.members.push_back(from_json(mem));
                break;
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::FormatError, std::string("model file: ") + e.what());
    }
}

inline std::string serialize(const TrainedModel& m) { return to_json(m).dump(2) + "\n"; }

inline TrainedModel deserialize(std::string_view text) {
    auto j = Json::parse(text, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::FormatError, "model file is not JSON");
    return from_json(j);
}

inline void save_model(const TrainedModel& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::FileNotFound, path.string());
    out << serialize(m);
}

inline TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileNotFound, path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize(ss.str());
}

}  // namespace sitewatch::ml
