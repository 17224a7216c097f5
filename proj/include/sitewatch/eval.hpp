// eval.hpp - splitting, class-ratio resampling, metrics, the ratio sweep and
// the three feature-set experiments.
//
// Counts derived from fractions (test size, resample targets) use
// round-half-up.

#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "core.hpp"
#include "features.hpp"
#include "ml/model.hpp"
#include "random.hpp"

namespace sitewatch::eval {

inline std::size_t round_half_up(double x) {
    if (x <= 0) return 0;
    return static_cast<std::size_t>(std::floor(x + 0.5 + 1e-9));
}

// ---------------------------------------------------------------------------
// Split

struct SplitConfig {
    double test_fraction = 0.2;
    std::uint64_t seed = 0;
    bool stratified = true;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Seeded shuffle then cut. With stratification each class contributes
/// round_half_up(class_size * test_fraction) rows to the test side, and
/// neither side may lose a class entirely. Both index lists come back sorted.
inline SplitIndices split_indices(const std::vector<Label>& labels, const SplitConfig& cfg) {
    if (!(cfg.test_fraction > 0 && cfg.test_fraction < 1)) {
        throw Error(ErrorCode::InvalidConfig, "test_fraction must lie in (0, 1)");
    }
    Rng rng(derive_seed(cfg.seed, "split"));
    SplitIndices out;
    auto cut = [&](std::vector<std::size_t> idx, const char* what) {
        if (idx.empty()) return;
        shuffle(idx, rng);
        std::size_t n_test = round_half_up(static_cast<double>(idx.size()) * cfg.test_fraction);
        if (n_test == 0 || n_test == idx.size()) {
            throw Error(ErrorCode::TooSmall, std::string(what) + ": " + std::to_string(idx.size()) +
                                                 " rows cannot be split at test_fraction " +
                                                 std::to_string(cfg.test_fraction));
        }
        out.test.insert(out.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
        out.train.insert(out.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
    };
    if (cfg.stratified) {
        std::vector<std::size_t> mal, ben;
        for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == Label::malicious ? mal : ben).push_back(i);
        cut(std::move(mal), "malicious class");
        cut(std::move(ben), "benign class");
    } else {
        std::vector<std::size_t> all(labels.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        cut(std::move(all), "dataset");
    }
    if (out.train.empty()) throw Error(ErrorCode::TooSmall, "empty dataset");
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

template <typename T>
std::vector<T> gather(const std::vector<T>& items, const std::vector<std::size_t>& idx) {
    std::vector<T> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(items[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Resampling

enum class ResampleMethod { none, oversample, undersample };

inline const char* to_string(ResampleMethod m) {
    switch (m) {
        case ResampleMethod::none: return "none";
        case ResampleMethod::oversample: return "oversample";
        case ResampleMethod::undersample: return "undersample";
    }
    return "?";
}

inline std::optional<ResampleMethod> parse_resample_method(std::string_view s) {
    auto l = lower_trim(s);
    if (l == "none") return ResampleMethod::none;
    if (l == "oversample" || l == "over") return ResampleMethod::oversample;
    if (l == "undersample" || l == "under") return ResampleMethod::undersample;
    return std::nullopt;
}

struct ResampleConfig {
    ResampleMethod method = ResampleMethod::none;
    /// Target malicious:benign ratio, e.g. 1.67 for 1.67:1.
    double target_ratio = 1.0;
    std::uint64_t seed = 0;
};

struct ResamplePlan {
    Label changed_class = Label::benign;
    std::size_t from = 0;
    std::size_t to = 0;
};

/// Works out which class changes and its target count. Oversampling only
/// grows the minority class; undersampling only shrinks the majority class.
inline ResamplePlan plan_resample(std::size_t malicious, std::size_t benign, const ResampleConfig& cfg) {
    if (!(cfg.target_ratio > 0) || !std::isfinite(cfg.target_ratio)) {
        throw Error(ErrorCode::InvalidConfig, "target ratio must be positive");
    }
    if (malicious == 0 || benign == 0) throw Error(ErrorCode::UnreachableRatio, "both classes must be present");
    const double r = cfg.target_ratio;
    const std::size_t benign_target = round_half_up(static_cast<double>(malicious) / r);
    const std::size_t malicious_target = round_half_up(static_cast<double>(benign) * r);
    auto unreachable = [&] {
        return Error(ErrorCode::UnreachableRatio,
                     std::string(to_string(cfg.method)) + " cannot reach " + std::to_string(r) + ":1 from " +
                         std::to_string(malicious) + ":" + std::to_string(benign));
    };
    switch (cfg.method) {
        case ResampleMethod::none: return {Label::benign, benign, benign};
        case ResampleMethod::oversample:
            if (benign <= malicious && benign_target >= benign) return {Label::benign, benign, benign_target};
            if (malicious <= benign && malicious_target >= malicious) {
                return {Label::malicious, malicious, malicious_target};
            }
            throw unreachable();
        case ResampleMethod::undersample:
            if (malicious >= benign && malicious_target <= malicious && malicious_target > 0) {
                return {Label::malicious, malicious, malicious_target};
            }
            if (benign >= malicious && benign_target <= benign && benign_target > 0) {
                return {Label::benign, benign, benign_target};
            }
            throw unreachable();
    }
    throw unreachable();
}

/// Row indices of the resampled training set (repeats mark replicas).
/// Oversampling appends replicas drawn with replacement; undersampling keeps
/// a seeded subset of the majority class in original order.
inline std::vector<std::size_t> resample_indices(const std::vector<Label>& labels, const ResampleConfig& cfg) {
    std::vector<std::size_t> all(labels.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    if (cfg.method == ResampleMethod::none) return all;

    std::vector<std::size_t> mal, ben;
    for (auto i : all) (labels[i] == Label::malicious ? mal : ben).push_back(i);
    auto plan = plan_resample(mal.size(), ben.size(), cfg);
    const auto& pool = plan.changed_class == Label::malicious ? mal : ben;
    Rng rng(derive_seed(cfg.seed, "resample"));

    if (cfg.method == ResampleMethod::oversample) {
        for (std::size_t k = plan.from; k < plan.to; ++k) {
            all.push_back(pool[static_cast<std::size_t>(uniform_index(rng, pool.size()))]);
        }
        return all;
    }
    std::vector<std::size_t> keep = pool;
    shuffle(keep, rng);
    keep.resize(plan.to);
    std::vector<bool> kept(labels.size(), true);
    for (auto i : pool) kept[i] = false;
    for (auto i : keep) kept[i] = true;
    std::vector<std::size_t> out;
    for (auto i : all) {
        if (kept[i]) out.push_back(i);
    }
    return out;
}

inline std::vector<FeatureVector> resample(const std::vector<FeatureVector>& train, const ResampleConfig& cfg) {
    return gather(train, resample_indices(ml::labels_of(train), cfg));
}

// ---------------------------------------------------------------------------
// Metrics

struct Confusion {
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
    std::size_t total() const { return tp + tn + fp + fn; }
    friend bool operator==(const Confusion&, const Confusion&) = default;
};

struct EvalReport {
    Confusion confusion;
    double acc = 0, fpr = 0, fnr = 0, f1 = 0;
    /// Set when the rate's denominator was zero (the rate is then reported as 0).
    bool fpr_degenerate = false, fnr_degenerate = false, f1_degenerate = false;

    std::string feature_set;
    std::string classifier;
    std::string method = "none";
    double ratio = 0;
    std::uint64_t seed = 0;
    double wall_time_s = 0;
};

inline EvalReport compute_metrics(const std::vector<Label>& predictions, const std::vector<Label>& truth) {
    if (predictions.size() != truth.size()) throw Error(ErrorCode::LengthMismatch, "predictions vs truth");
    if (truth.empty()) throw Error(ErrorCode::EmptyInput, "no predictions");
    EvalReport r;
    auto& c = r.confusion;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        bool p = predictions[i] == Label::malicious, t = truth[i] == Label::malicious;
        if (p && t) ++c.tp;
        else if (!p && !t) ++c.tn;
        else if (p) ++c.fp;
        else ++c.fn;
    }
    auto ratio = [](std::size_t num, std::size_t den, bool& degenerate) {
        degenerate = den == 0;
        return degenerate ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    bool unused = false;
    r.acc = ratio(c.tp + c.tn, c.total(), unused);
    r.fpr = ratio(c.fp, c.fp + c.tn, r.fpr_degenerate);
    r.fnr = ratio(c.fn, c.fn + c.tp, r.fnr_degenerate);
    r.f1 = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn, r.f1_degenerate);
    return r;
}

// ---------------------------------------------------------------------------
// Train-and-test protocol

struct Protocol {
    SplitConfig split;
    ResampleConfig resample;
    ml::TrainConfig train;
};

/// Result of one split: the untouched test rows and the resampled training
/// rows derived from the other side.
struct PreparedData {
    std::vector<FeatureVector> train;
    std::vector<FeatureVector> test;
};

inline PreparedData prepare(const std::vector<FeatureVector>& rows, const SplitConfig& split,
                            const ResampleConfig& resample_cfg) {
    auto idx = split_indices(ml::labels_of(rows), split);
    PreparedData d;
    d.test = gather(rows, idx.test);
    d.train = resample(gather(rows, idx.train), resample_cfg);
    return d;
}

struct TimedModel {
    ml::TrainedModel model;
    double train_s = 0;
};

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Trains `kind` on the prepared data and evaluates it on the test side.
inline EvalReport evaluate(ml::ModelKind kind, const PreparedData& data, const FeatureMask& mask,
                           const ml::TrainConfig& train_cfg) {
    auto t0 = std::chrono::steady_clock::now();
    auto model = ml::train(kind, ml::to_design(data.train, mask), ml::labels_of(data.train), train_cfg);
    auto pred = ml::predict(model, ml::to_design(data.test, mask));
    auto r = compute_metrics(pred, ml::labels_of(data.test));
    r.wall_time_s = seconds_since(t0);
    r.classifier = ml::short_name(kind);
    r.feature_set = mask.to_string();
    return r;
}

// ---------------------------------------------------------------------------
// Ratio sweep

struct SweepRow {
    ResampleMethod method = ResampleMethod::none;
    double ratio = 0;
    std::size_t train_malicious = 0;
    std::size_t train_benign = 0;
    std::optional<EvalReport> report;
    std::string error;
    bool best = false;
};

/// One fixed split; a baseline row with the training set as-is, then one
/// row per (method, ratio) for every method other than none. Unreachable
/// combinations produce a row with `error` set. The row with the highest F1
/// is flagged.
inline std::vector<SweepRow> ratio_sweep(const std::vector<FeatureVector>& rows, const std::vector<double>& ratios,
                                         const std::vector<ResampleMethod>& methods, ml::ModelKind kind,
                                         const FeatureMask& mask, std::uint64_t seed,
                                         const SplitConfig& split_base = {}) {
    SplitConfig split = split_base;
    split.seed = derive_seed(seed, "sweep.split");
    auto idx = split_indices(ml::labels_of(rows), split);
    auto train = gather(rows, idx.train);
    auto test = gather(rows, idx.test);
    auto train_cfg = ml::TrainConfig::seeded(derive_seed(seed, "sweep.train"));

    auto count = [](const std::vector<FeatureVector>& v, std::size_t& mal, std::size_t& ben) {
        mal = ben = 0;
        for (const auto& f : v) (f.label == Label::malicious ? mal : ben)++;
    };

    std::vector<SweepRow> out;
    auto run = [&](ResampleMethod method, double ratio) {
        SweepRow row;
        row.method = method;
        ResampleConfig rc{method, ratio, derive_seed(seed, "sweep.resample")};
        try {
            PreparedData d{resample(train, rc), test};
            count(d.train, row.train_malicious, row.train_benign);
            row.ratio = static_cast<double>(row.train_malicious) / static_cast<double>(row.train_benign);
            if (method != ResampleMethod::none) row.ratio = ratio;
            auto r = evaluate(kind, d, mask, train_cfg);
            r.method = to_string(method);
            r.ratio = row.ratio;
            r.seed = seed;
            row.report = r;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::UnreachableRatio) throw;
            row.ratio = ratio;
            row.error = e.what();
        }
        out.push_back(std::move(row));
    };

    run(ResampleMethod::none, 0);
    for (auto m : methods) {
        if (m == ResampleMethod::none) continue;
        for (double r : ratios) run(m, r);
    }
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i].report && (!best || out[i].report->f1 > out[*best].report->f1)) best = i;
    }
    if (best) out[*best].best = true;
    return out;
}

// ---------------------------------------------------------------------------
// Experiments

struct Experiment {
    int id;
    const char* name;
    FeatureMask mask;
};

/// Lexical+statistical+TLD, WHOIS only, and both. F6 and F8 are left out of
/// every experiment.
inline std::vector<Experiment> standard_experiments() {
    return {
        {1, "lexical", FeatureMask::of({5, 7, 9, 10, 11})},
        {2, "whois", FeatureMask::of({1, 2, 3, 4})},
        {3, "combined", FeatureMask::of({1, 2, 3, 4, 5, 7, 9, 10, 11})},
    };
}

struct ExperimentOptions {
    double test_fraction = 0.2;
    ResampleMethod method = ResampleMethod::oversample;
    double ratio = 1.67;
    std::size_t jobs = 1;
    /// Applied on top of the seeded defaults.
    std::optional<ml::TrainConfig> train_override;
};

struct ExperimentRow {
    int experiment = 0;
    ml::ModelKind kind = ml::ModelKind::random_forest;
    EvalReport report;
};

/// Five classifiers plus their hard-voting ensemble for each experiment, all
/// on one split and one resampled training set.
inline std::vector<ExperimentRow> run_experiments(const std::vector<FeatureVector>& rows, std::uint64_t seed,
                                                  const ExperimentOptions& opts = {},
                                                  const std::vector<Experiment>& experiments = standard_experiments()) {
    SplitConfig split{opts.test_fraction, derive_seed(seed, "experiment.split"), true};
    ResampleConfig rc{opts.method, opts.ratio, derive_seed(seed, "experiment.resample")};
    auto data = prepare(rows, split, rc);
    auto train_cfg = opts.train_override.value_or(ml::TrainConfig::seeded(derive_seed(seed, "experiment.train")));
    train_cfg.forest.jobs = opts.jobs;
    auto y_train = ml::labels_of(data.train);
    auto y_test = ml::labels_of(data.test);

    std::vector<ExperimentRow> out;
    for (const auto& ex : experiments) {
        auto train_design = ml::to_design(data.train, ex.mask);
        auto test_design = ml::to_design(data.test, ex.mask);
        ml::TrainedModel ensemble;
        ensemble.kind = ml::ModelKind::ensemble;
        ensemble.mask = ex.mask;
        double member_time = 0;
        auto finish = [&](ml::ModelKind kind, const std::vector<Label>& pred, double seconds) {
            ExperimentRow row;
            row.experiment = ex.id;
            row.kind = kind;
            row.report = compute_metrics(pred, y_test);
            row.report.classifier = ml::short_name(kind);
            row.report.feature_set = ex.mask.to_string();
            row.report.method = to_string(opts.method);
            row.report.ratio = opts.ratio;
            row.report.seed = seed;
            row.report.wall_time_s = seconds;
            out.push_back(std::move(row));
        };
        for (auto kind : ml::kEnsembleKinds) {
            auto t0 = std::chrono::steady_clock::now();
            auto model = ml::train(kind, train_design, y_train, train_cfg);
            auto pred = ml::predict(model, test_design);
            double s = seconds_since(t0);
            member_time += s;
            finish(kind, pred, s);
            ensemble.members.push_back(std::move(model));
        }
        auto t0 = std::chrono::steady_clock::now();
        auto pred = ml::predict(ensemble, test_design);
        finish(ml::ModelKind::ensemble, pred, member_time + seconds_since(t0));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Report files

inline std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

/// experiment,classifier,acc,fpr,fnr,f1,time_s. With `timing` off the time
/// column is left empty so reruns compare byte for byte.
inline void write_experiment_csv(std::ostream& out, const std::vector<ExperimentRow>& rows, bool timing = true) {
    out << "experiment,classifier,acc,fpr,fnr,f1,time_s\n";
    for (const auto& r : rows) {
        out << r.experiment << ',' << r.report.classifier << ',' << fixed(r.report.acc, 6) << ','
            << fixed(r.report.fpr, 6) << ',' << fixed(r.report.fnr, 6) << ',' << fixed(r.report.f1, 6) << ','
            << (timing ? fixed(r.report.wall_time_s, 3) : std::string()) << '\n';
    }
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool timing = true) {
    out << "method,ratio,train_malicious,train_benign,acc,fpr,fnr,f1,best,time_s,error\n";
    for (const auto& r : rows) {
        out << to_string(r.method) << ',' << fixed(r.ratio, 4) << ',' << r.train_malicious << ',' << r.train_benign
            << ',';
        if (r.report) {
            out << fixed(r.report->acc, 6) << ',' << fixed(r.report->fpr, 6) << ',' << fixed(r.report->fnr, 6) << ','
                << fixed(r.report->f1, 6) << ',' << (r.best ? 1 : 0) << ','
                << (timing ? fixed(r.report->wall_time_s, 3) : std::string()) << ',';
        } else {
            out << ",,,,0,,";
        }
        out << csv::escape(r.error) << '\n';
    }
}

}  // namespace sitewatch::eval
