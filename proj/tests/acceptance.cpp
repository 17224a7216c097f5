// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sitewatch/sitewatch.hpp>

#include "support/files.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace sitewatch;

namespace {

constexpr Label M = Label::malicious;
constexpr Label B = Label::benign;

/// Collects failures for one criterion; only the first few are kept for the report.
struct Check {
    std::size_t failures = 0;
    std::string first;

    void expect(bool ok, const std::string& what) {
        if (ok) return;
        if (failures++ == 0) first = what;
    }
    bool ok() const { return failures == 0; }
};

struct Criterion {
    int id;
    std::string name;
    double budget_s;  // 0 for no limit
    std::function<void(Check&)> run;
};

std::string str(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

ml::Design design(const std::vector<std::vector<double>>& rows) {
    std::bitset<kFeatureCount> bits;
    for (std::size_t c = 0; c < rows.front().size(); ++c) bits.set(c);
    return {ml::Matrix::from_rows(rows), FeatureMask(bits)};
}

std::vector<Label> random_labels(Rng& rng, std::size_t n) {
    std::vector<Label> y(n);
    for (auto& l : y) l = uniform_index(rng, 2) ? M : B;
    return y;
}

// ---------------------------------------------------------------------------

void metrics_oracle(Check& c) {
    Rng rng(101);
    for (int t = 0; t < 1000; ++t) {
        std::size_t n = 1 + uniform_index(rng, 500);
        auto p = random_labels(rng, n), y = random_labels(rng, n);
        auto want = oracle::count(p, y);
        auto got = eval::compute_metrics(p, y);
        double tp = static_cast<double>(want.tp), tn = static_cast<double>(want.tn);
        double fp = static_cast<double>(want.fp), fn = static_cast<double>(want.fn);
        bool ok = got.confusion.tp == want.tp && got.confusion.tn == want.tn && got.confusion.fp == want.fp &&
                  got.confusion.fn == want.fn && std::fabs(got.acc - (tp + tn) / static_cast<double>(n)) < 1e-12 &&
                  std::fabs(got.fpr - oracle::safe_div(fp, fp + tn)) < 1e-12 &&
                  std::fabs(got.fnr - oracle::safe_div(fn, fn + tp)) < 1e-12 &&
                  std::fabs(got.f1 - oracle::safe_div(2 * tp, 2 * tp + fp + fn)) < 1e-12;
        c.expect(ok, "pair " + std::to_string(t));
    }
}

void lexical_features(Check& c) {
    struct Fixture {
        std::string s;
        std::size_t dots, hyphens, vowels, unique;
        double digit_fraction;
    };
    const std::vector<Fixture> fixtures{
        {"covid19-relief-fund.com", 1, 2, 7, 14, 0.1},
        {"example.com", 1, 0, 4, 8, 0.0},
        {"a1b2.co.uk", 2, 0, 3, 8, 0.25},
        {"---", 0, 3, 0, 0, 0.0},
    };
    for (const auto& f : fixtures) {
        c.expect(f5_dot_count(f.s) == f.dots, f.s + " dots");
        c.expect(f6_hyphen_count(f.s) == f.hyphens, f.s + " hyphens");
        c.expect(f7_vowel_count(f.s) == f.vowels, f.s + " vowels");
        c.expect(f9_unique_alnum(f.s) == f.unique, f.s + " unique");
        c.expect(std::fabs(f8_digit_fraction(f.s) - f.digit_fraction) < 1e-12, f.s + " digits");
    }
    c.expect(f10_entropy("aaaa") == 0.0, "constant string entropy");
    c.expect(std::fabs(f10_entropy("ab") - 1.0) < 1e-12, "two-symbol entropy");

    static const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789-.";
    Rng rng(202);
    for (int t = 0; t < 10000; ++t) {
        std::string s(1 + uniform_index(rng, 63), 'a');
        for (auto& ch : s) ch = alphabet[uniform_index(rng, alphabet.size())];
        double h = f10_entropy(s);
        std::set<char> distinct(s.begin(), s.end());
        c.expect(std::fabs(h - oracle::entropy_bits(s)) < 1e-12, "entropy oracle " + s);
        c.expect(h >= 0 && h <= std::log2(static_cast<double>(distinct.size())) + 1e-12, "entropy bound " + s);
        std::string shuffled = s;
        shuffle(shuffled, rng);
        c.expect(std::fabs(f10_entropy(shuffled) - h) < 1e-12, "entropy permutation " + s);
        std::size_t digits = 0, alnum = 0;
        std::set<char> uniq;
        for (char ch : s) {
            bool d = ch >= '0' && ch <= '9', a = ch >= 'a' && ch <= 'z';
            digits += d;
            alnum += d || a;
            if (d || a) uniq.insert(ch);
        }
        c.expect(std::fabs(f8_digit_fraction(s) - oracle::safe_div(static_cast<double>(digits), static_cast<double>(alnum))) <
                     1e-12,
                 "digit fraction " + s);
        c.expect(f9_unique_alnum(s) == uniq.size(), "unique " + s);
    }
}

void lifetimes(Check& c) {
    Rng rng(303);
    auto random_day = [&] {
        int y = 1990 + static_cast<int>(uniform_index(rng, 41));
        int m = 1 + static_cast<int>(uniform_index(rng, 12));
        int d = 1 + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(oracle::month_length(y, m))));
        return oracle::YMD{y, m, d};
    };
    auto date = [](const oracle::YMD& v) {
        return make_date(v.y, static_cast<unsigned>(v.m), static_cast<unsigned>(v.d));
    };
    auto num = [](const oracle::YMD& v) { return oracle::day_number(v.y, v.m, v.d); };
    std::size_t strict_throws = 0;
    for (int t = 0; t < 1000; ++t) {
        auto cr = random_day(), ex = random_day(), up = random_day(), ref = random_day();
        WhoisRecord w{"r", date(cr), date(ex), date(up)};
        std::int64_t f1 = num(ref) - num(cr), f2 = num(ex) - num(ref), f3 = num(ref) - num(up);
        bool negative = f1 < 0 || f3 < 0;
        try {
            auto l = whois_lifetimes(w, date(ref), LifetimeMode::strict);
            c.expect(!negative, "strict accepted negative lifetime at triple " + std::to_string(t));
            c.expect(l.since_creation == f1 && l.until_expiration == f2 && l.since_update == f3,
                     "strict values at triple " + std::to_string(t));
        } catch (const Error& e) {
            ++strict_throws;
            c.expect(negative && e.code() == ErrorCode::NegativeLifetime, "strict threw at triple " + std::to_string(t));
        }
        auto l = whois_lifetimes(w, date(ref), LifetimeMode::lenient);
        c.expect(l.since_creation == std::max<std::int64_t>(0, f1) && l.until_expiration == f2 &&
                     l.since_update == std::max<std::int64_t>(0, f3) && l.clamped == negative,
                 "lenient values at triple " + std::to_string(t));
    }
    c.expect(strict_throws > 0, "no triple exercised the strict failure path");
}

void segmentation(Check& c) {
    const std::vector<std::string> words{"corona", "covid", "face", "mask", "help", "test", "virus", "kit", "shop",
                                         "safe", "a", "an", "as", "ask", "cor", "on", "fac", "he", "lp", "es"};
    wordseg::Lexicon lex(words);
    oracle::ToyLexicon toy(words);
    Rng rng(404);
    for (int t = 0; t < 500; ++t) {
        std::string s;
        while (s.size() < 12) {
            if (uniform_unit(rng) < 0.7) s += words[uniform_index(rng, words.size())];
            else s += static_cast<char>('a' + uniform_index(rng, 26));
        }
        s.resize(1 + uniform_index(rng, 12));
        auto got = wordseg::segment(s, lex);
        auto want = oracle::brute_force_segment(s, toy);
        std::string joined;
        for (const auto& p : got.pieces) joined += p;
        c.expect(std::fabs(got.total_cost - want.cost) <= 1e-9 * std::max(1.0, want.cost), "cost for " + s);
        c.expect(joined == s, "pieces do not reassemble " + s);
    }
}

void tree_and_forest(Check& c) {
    Rng rng(505);
    for (int t = 0; t < 200; ++t) {
        std::size_t n = 2 + uniform_index(rng, 14), f = 1 + uniform_index(rng, 4);
        std::vector<std::vector<double>> X(n, std::vector<double>(f));
        for (auto& r : X) {
            for (auto& v : r) v = static_cast<double>(uniform_index(rng, 6));
        }
        auto y = random_labels(rng, n);
        auto want = oracle::exhaustive_root_split(X, y);
        auto tree = ml::fit_tree(ml::Matrix::from_rows(X), y);
        if (want.gain <= ml::kGainEpsilon) {
            c.expect(tree.nodes.size() == 1, "expected leaf root in dataset " + std::to_string(t));
            continue;
        }
        if (tree.nodes.size() < 2) {
            c.expect(false, "missing root split in dataset " + std::to_string(t));
            continue;
        }
        const auto& root = tree.nodes[0];
        c.expect(static_cast<std::size_t>(root.feature) == want.feature, "root feature in dataset " + std::to_string(t));
        c.expect(std::fabs(root.gain - want.gain) < 1e-12, "root gain in dataset " + std::to_string(t));
        for (std::size_t i = 0; i < n; ++i) {
            c.expect((X[i][want.feature] <= root.threshold) == want.goes_left[i],
                     "partition in dataset " + std::to_string(t));
        }
    }
    for (int t = 0; t < 50; ++t) {
        std::size_t n = 10 + uniform_index(rng, 90), f = 1 + uniform_index(rng, 6);
        std::vector<std::vector<double>> X(n, std::vector<double>(f));
        for (auto& r : X) {
            for (auto& v : r) v = uniform_unit(rng);
        }
        auto y = random_labels(rng, n);
        auto Xm = ml::Matrix::from_rows(X);
        ml::ForestConfig fc;
        fc.n_trees = 1;
        fc.bootstrap = false;
        fc.max_features = f;
        fc.seed = t;
        auto forest = ml::fit_forest(Xm, y, fc);
        auto tree = ml::fit_tree(Xm, y);
        for (std::size_t q = 0; q < 20; ++q) {
            std::vector<double> x(f);
            for (auto& v : x) v = uniform_unit(rng);
            c.expect(ml::forest_predict(forest, x) == tree.predict(x), "forest vs tree in dataset " + std::to_string(t));
        }
    }
}

void knn(Check& c) {
    Rng rng(606);
    for (int t = 0; t < 100; ++t) {
        std::size_t n = 8 + uniform_index(rng, 193);
        bool discrete = t % 2 == 0;
        auto value = [&] { return discrete ? static_cast<double>(uniform_index(rng, 3)) : uniform_unit(rng); };
        std::vector<std::vector<double>> X(n, std::vector<double>(kFeatureCount));
        for (auto& r : X) {
            for (auto& v : r) v = value();
        }
        auto y = random_labels(rng, n);
        auto Xm = ml::Matrix::from_rows(X);
        for (int q = 0; q < 10; ++q) {
            std::vector<double> query(kFeatureCount);
            for (auto& v : query) v = value();
            c.expect(ml::knn_predict(Xm, y, query, ml::KnnConfig{8, 2.0}) == oracle::brute_knn(X, y, query, 8, 2.0),
                     "dataset " + std::to_string(t));
        }
    }
}

void gradients(Check& c) {
    Rng rng(707);
    auto sample = [&](std::size_t n, std::size_t d) {
        std::vector<std::vector<double>> X(n, std::vector<double>(d));
        for (auto& r : X) {
            for (auto& v : r) v = 2 * uniform_unit(rng) - 1;
        }
        return X;
    };
    auto unpack = [](const std::vector<double>& th) { return ml::LinearParams{{th.begin(), th.end() - 1}, th.back()}; };
    auto flat = [](const ml::LinearGradient& g) {
        auto v = g.weights;
        v.push_back(g.bias);
        return v;
    };
    for (int t = 0; t < 100; ++t) {
        std::size_t d = 1 + uniform_index(rng, kFeatureCount);
        auto X = ml::Matrix::from_rows(sample(20 + uniform_index(rng, 30), d));
        auto y = random_labels(rng, X.rows);
        std::vector<double> theta(d + 1);
        for (auto& v : theta) v = 2 * uniform_unit(rng) - 1;
        double l2 = 1e-4 * (1 + uniform_index(rng, 100));
        auto numeric = oracle::numeric_gradient(
            [&](const std::vector<double>& th) { return ml::logistic_objective(unpack(th), X, y, l2); }, theta);
        double err = oracle::relative_error(flat(ml::logistic_gradient(unpack(theta), X, y, l2)), numeric);
        c.expect(err <= 1e-5, "logistic check " + std::to_string(t) + " error " + str(err));
    }
    int checked = 0;
    while (checked < 100) {
        std::size_t d = 1 + uniform_index(rng, kFeatureCount);
        auto X = ml::Matrix::from_rows(sample(20 + uniform_index(rng, 30), d));
        auto y = random_labels(rng, X.rows);
        std::vector<double> theta(d + 1);
        for (auto& v : theta) v = 4 * uniform_unit(rng) - 2;
        auto p = unpack(theta);
        bool near_kink = false;
        for (std::size_t i = 0; i < X.rows; ++i) {
            near_kink |= std::fabs(1 - ml::to_sign(y[i]) * p.score(X.row(i))) < 1e-3;
        }
        if (near_kink) continue;
        ++checked;
        double lambda = 1e-4 * (1 + uniform_index(rng, 100));
        auto numeric = oracle::numeric_gradient(
            [&](const std::vector<double>& th) { return ml::svm_objective(unpack(th), X, y, lambda); }, theta);
        double err = oracle::relative_error(flat(ml::svm_subgradient(p, X, y, lambda)), numeric);
        c.expect(err <= 1e-5, "svm check " + std::to_string(checked) + " error " + str(err));
    }
}

void synthetic_experiments(Check& c) {
    auto vecs = synth::featurize_all(synth::generate(synth::Options{}));
    auto rows = eval::run_experiments(vecs, 1);
    std::map<std::pair<int, ml::ModelKind>, double> f1;
    for (const auto& r : rows) f1[{r.experiment, r.kind}] = r.report.f1;
    for (const auto& r : rows) {
        if (r.experiment == 3 && r.kind == ml::ModelKind::random_forest) {
            c.expect(r.report.acc >= 0.95, "RF accuracy " + str(r.report.acc));
            c.expect(r.report.f1 >= 0.95, "RF F1 " + str(r.report.f1));
            std::printf("  rf exp3 acc=%.4f f1=%.4f\n", r.report.acc, r.report.f1);
        }
        if (r.experiment == 3) {
            double e1 = f1[{1, r.kind}];
            c.expect(r.report.f1 >= e1 - 0.01, std::string(ml::short_name(r.kind)) + " exp3 F1 " + str(r.report.f1) +
                                                   " below exp1 F1 " + str(e1));
        }
    }
}

void resampling(Check& c) {
    Rng rng(909);
    for (int t = 0; t < 500; ++t) {
        std::size_t m = 1 + uniform_index(rng, 500), b = 1 + uniform_index(rng, 500);
        double ratio = 0.25 + 4 * uniform_unit(rng);
        auto method = t % 2 ? eval::ResampleMethod::oversample : eval::ResampleMethod::undersample;
        std::vector<Label> y(m, M);
        y.insert(y.end(), b, B);
        std::vector<std::size_t> idx;
        try {
            idx = eval::resample_indices(y, {method, ratio, static_cast<std::uint64_t>(t)});
        } catch (const Error& e) {
            c.expect(e.code() == ErrorCode::UnreachableRatio, "config " + std::to_string(t) + " threw " + e.what());
            continue;
        }
        double mm = 0, bb = 0;
        for (auto i : idx) (y[i] == M ? mm : bb) += 1;
        c.expect(std::fabs(mm - ratio * bb) <= std::max(1.0, ratio) + 1e-9, "config " + std::to_string(t) + " missed the ratio");
    }

    synth::Options opt;
    opt.records = 800;
    auto vecs = synth::featurize_all(synth::generate(opt));
    auto hash = [](const std::vector<FeatureVector>& rows) {
        std::uint64_t h = 0xCBF29CE484222325ULL;
        for (const auto& r : rows) {
            h = oracle::fnv1a(r.values.data(), sizeof(double) * r.values.size(), h);
            auto l = static_cast<int>(r.label);
            h = oracle::fnv1a(&l, sizeof l, h);
        }
        return h;
    };
    eval::SplitConfig split{0.2, 77, true};
    auto base = hash(eval::prepare(vecs, split, {}).test);
    for (auto method : {eval::ResampleMethod::oversample, eval::ResampleMethod::undersample}) {
        for (double ratio : {1.0, 1.67, 2.0}) {
            auto d = eval::prepare(vecs, split, {method, ratio, 5});
            c.expect(hash(d.test) == base, std::string("test split changed under ") + eval::to_string(method));
        }
    }
}

/// Snapshot of every regular file under `dir`, keyed by relative path.
std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out[std::filesystem::relative(e.path(), dir).string()] = testfs::read_file(e.path());
    }
    return out;
}

void cli_determinism(Check& c) {
    testfs::TempDir dir("sitewatch-accept");
    synth::Options opt;
    opt.records = 600;
    opt.whois_missing = 0.1;
    auto feeds = synth::write_feeds(synth::generate(opt), dir / "in");
    const std::string cli = SITEWATCH_CLI;
    auto q = [](const std::filesystem::path& p) { return testfs::quote(p); };
    auto out = dir / "out";
    const std::vector<std::string> steps{
        "ingest --malicious " + q(feeds.feed_a) + " --malicious " + q(feeds.feed_b) + " --benign " + q(feeds.benign) +
            " --whois " + q(feeds.whois) + " --reference-date 2020-08-07 --out " + q(out / "ds"),
        "featurize --dataset " + q(out / "ds") + " --partition with_whois --out " + q(out / "features.csv"),
        "train --features " + q(out / "features.csv") + " --model rf --seed 3 --jobs 1 --out " + q(out / "rf.json"),
        "train --features " + q(out / "features.csv") + " --model ensemble --seed 3 --out " + q(out / "ens.json"),
        "experiment --features " + q(out / "features.csv") + " --seed 3 --no-timing --out " + q(out / "exp"),
    };
    auto run_all = [&] {
        std::filesystem::remove_all(out);
        for (const auto& s : steps) {
            int rc = testfs::run(cli + " " + s + " >/dev/null 2>&1");
            c.expect(rc == 0, "exit " + std::to_string(rc) + " from: " + s.substr(0, s.find(' ')));
        }
        return snapshot(out);
    };
    auto first = run_all();
    auto second = run_all();
    c.expect(first.size() >= 12, "expected outputs missing");
    c.expect(first == second, "outputs differ between identical runs");
    for (const auto& [path, text] : first) {
        auto it = second.find(path);
        c.expect(it != second.end() && it->second == text, "differs: " + path);
    }

    auto forest = [&](int jobs) {
        auto p = dir / ("rf-jobs" + std::to_string(jobs) + ".json");
        testfs::run(cli + " train --features " + q(out / "features.csv") + " --model rf --seed 9 --jobs " +
                    std::to_string(jobs) + " --out " + q(p) + " >/dev/null 2>&1");
        return testfs::read_file(p);
    };
    auto one = forest(1);
    c.expect(!one.empty() && one == forest(8), "forest differs between --jobs 1 and --jobs 8");
}

void ensemble_degradation(Check& c) {
    // Overlapping classes so that no member is perfect.
    Rng rng(1111);
    auto make = [&](std::size_t n) {
        std::vector<std::vector<double>> X;
        std::vector<Label> y;
        for (std::size_t i = 0; i < n; ++i) {
            bool m = uniform_unit(rng) < 0.6;
            std::vector<double> r(4);
            for (auto& v : r) v = (m ? 0.35 : -0.35) + (uniform_unit(rng) + uniform_unit(rng) - 1);
            X.push_back(r);
            y.push_back(m ? M : B);
        }
        return std::make_pair(design(X), y);
    };
    auto [train_d, train_y] = make(1200);
    auto [test_d, test_y] = make(600);
    auto cfg = ml::TrainConfig::seeded(21);
    std::vector<Label> flipped;
    for (auto l : train_y) flipped.push_back(l == M ? B : M);

    std::vector<ml::TrainedModel> members;
    members.push_back(ml::train(ml::ModelKind::random_forest, train_d, train_y, cfg));
    members.push_back(ml::train(ml::ModelKind::decision_tree, train_d, train_y, cfg));
    members.push_back(ml::train(ml::ModelKind::logistic_regression, train_d, flipped, cfg));
    members.push_back(ml::train(ml::ModelKind::knn, train_d, train_y, cfg));
    members.push_back(ml::train(ml::ModelKind::linear_svm, train_d, flipped, cfg));

    double best = 0;
    for (const auto& m : members) {
        double f = eval::compute_metrics(ml::predict(m, test_d), test_y).f1;
        std::printf("  member %s f1=%.4f\n", ml::short_name(m.kind), f);
        best = std::max(best, f);
    }
    double ens = eval::compute_metrics(ml::vote_ensemble(members, test_d), test_y).f1;
    std::printf("  ensemble f1=%.4f best member f1=%.4f\n", ens, best);
    c.expect(ens < best, "ensemble F1 " + str(ens) + " not below best member " + str(best));
}

void importance(Check& c) {
    auto check = [&](const ml::TrainedModel& m, const std::string& tag) {
        auto fi = ml::feature_importance(m);
        double sum = 0;
        for (double s : fi.scores) {
            c.expect(s >= 0, tag + " negative score");
            sum += s;
        }
        c.expect(std::fabs(sum - 1) <= 1e-9, tag + " sums to " + str(sum));
    };
    synth::Options opt;
    opt.records = 1500;
    auto vecs = synth::featurize_all(synth::generate(opt));
    auto y = ml::labels_of(vecs);
    std::vector<FeatureMask> masks;
    for (const auto& ex : eval::standard_experiments()) masks.push_back(ex.mask);
    masks.push_back(FeatureMask::all());
    for (std::size_t i = 0; i < masks.size(); ++i) {
        for (std::uint64_t seed : {1, 2}) {
            auto m = ml::train(ml::ModelKind::random_forest, ml::to_design(vecs, masks[i]), y,
                               ml::TrainConfig::seeded(seed));
            check(m, masks[i].to_string() + " seed " + std::to_string(seed));
        }
    }

    Rng rng(1212);
    std::vector<std::vector<double>> X;
    std::vector<Label> yy;
    for (int i = 0; i < 300; ++i) {
        double v = uniform_unit(rng);
        X.push_back({2.0, 5.0, v, -1.0});
        yy.push_back(v > 0.4 ? M : B);
    }
    auto m = ml::train(ml::ModelKind::random_forest, design(X), yy, ml::TrainConfig::seeded(4));
    check(m, "single informative");
    auto fi = ml::feature_importance(m);
    c.expect(fi.of_feature(3) == 1.0, "informative feature scored " + str(fi.of_feature(3)));
    c.expect(fi.of_feature(1) == 0 && fi.of_feature(2) == 0 && fi.of_feature(4) == 0, "constant feature scored");
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "metrics match counting oracle on 1000 prediction pairs", 5, metrics_oracle},
        {2, "lexical fixtures and entropy properties on 10000 strings", 0, lexical_features},
        {3, "WHOIS lifetimes match calendar oracle on 1000 date triples", 0, lifetimes},
        {4, "segmentation cost equals brute force on 500 strings", 30, segmentation},
        {5, "root split exhaustive on 200 datasets; 1-tree forest equals tree on 50", 0, tree_and_forest},
        {6, "KNN equals brute force on 100 datasets", 0, knn},
        {7, "LR and SVM gradients within 1e-5 of finite differences", 0, gradients},
        {8, "synthetic corpus: RF accuracy and F1 >= 0.95; combined features not worse", 120,
         synthetic_experiments},
        {9, "resampling within one record on 500 configs; test split untouched", 0, resampling},
        {10, "CLI reruns are byte-identical; forest independent of --jobs", 0, cli_determinism},
        {11, "ensemble F1 falls below best member with two degraded members", 0, ensemble_degradation},
        {12, "forest importance non-negative and normalized", 0, importance},
    };
    int failed = 0;
    for (const auto& cr : criteria) {
        Check check;
        auto t0 = std::chrono::steady_clock::now();
        try {
            cr.run(check);
        } catch (const std::exception& e) {
            check.expect(false, std::string("exception: ") + e.what());
        }
        double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (cr.budget_s > 0 && s > cr.budget_s) check.expect(false, "exceeded " + str(cr.budget_s) + "s budget");
        bool ok = check.ok();
        failed += !ok;
        std::printf("%s criterion %d: %s (%.2fs)", ok ? "PASS" : "FAIL", cr.id, cr.name.c_str(), s);
        if (!ok) std::printf(" -- %zu failure(s), first: %s", check.failures, check.first.c_str());
        std::printf("\n");
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
