// sitewatch - command-line pipelines over the sitewatch library.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include <sitewatch/sitewatch.hpp>

namespace fs = std::filesystem;
using namespace sitewatch;
using Json = nlohmann::ordered_json;

#ifndef SITEWATCH_DATA_DIR
#define SITEWATCH_DATA_DIR "data"
#endif

namespace {

constexpr const char* kVersion = "0.1.0";

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string file_digest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileNotFound, path.string());
    std::uint64_t h = 0xCBF29CE484222325ULL;
    char buf[1 << 14];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001B3ULL;
        }
    }
    char hex[32];
    std::snprintf(hex, sizeof hex, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return hex;
}

void ensure_parent(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

std::ofstream open_output(const fs::path& p) {
    ensure_parent(p);
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorCode::FileNotFound, "cannot write " + p.string());
    return out;
}

/// Manifest written next to every output. No timestamps, so identical runs
/// produce identical manifests.
struct Manifest {
    Json doc;

    explicit Manifest(const std::string& command) {
        doc["tool"] = "sitewatch";
        doc["version"] = kVersion;
        doc["command"] = command;
        doc["config"] = Json::object();
        doc["inputs"] = Json::object();
    }

    template <typename T>
    Manifest& set(const std::string& key, const T& value) {
        doc["config"][key] = value;
        return *this;
    }

    Manifest& input(const fs::path& p) {
        doc["inputs"][p.string()] = file_digest(p);
        return *this;
    }

    void write(const fs::path& p) const {
        auto out = open_output(p);
        out << doc.dump(2) << '\n';
    }
};

fs::path manifest_for_file(const fs::path& output) { return fs::path(output.string() + ".manifest.json"); }

Date parse_date_flag(const std::string& text) {
    auto d = parse_iso_date(text);
    if (!d) throw UsageError("invalid date '" + text + "' (expected YYYY-MM-DD)");
    return *d;
}

std::size_t default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

std::vector<WebsiteRecord> load_dataset_dir(const fs::path& dir, Manifest* manifest) {
    std::vector<WebsiteRecord> all;
    for (const char* name : {"with_whois.jsonl", "without_whois.jsonl"}) {
        auto p = dir / name;
        auto part = read_records(p);
        if (manifest) manifest->input(p);
        all.insert(all.end(), part.begin(), part.end());
    }
    return all;
}

std::optional<Date> dataset_reference_date(const fs::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) return std::nullopt;
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("config") || !j["config"].contains("reference_date")) return std::nullopt;
    return parse_iso_date(j["config"]["reference_date"].get<std::string>());
}

std::vector<FeatureRow> read_features(const fs::path& path, Manifest& manifest) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::FileNotFound, path.string());
    manifest.input(path);
    return read_feature_csv(in);
}

std::vector<FeatureVector> rows_covering(const std::vector<FeatureRow>& rows, const FeatureMask& mask) {
    std::vector<FeatureVector> out;
    for (const auto& r : rows) {
        if (r.features.covers(mask)) out.push_back(r.features);
    }
    return out;
}

FeatureMask resolve_mask(const std::string& mask_text, int experiment) {
    if (!mask_text.empty()) {
        try {
            return FeatureMask::parse(mask_text);
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
    }
    for (const auto& ex : eval::standard_experiments()) {
        if (ex.id == experiment) return ex.mask;
    }
    throw UsageError("--experiment must be 1, 2 or 3");
}

ml::ModelKind resolve_model(const std::string& name) {
    auto k = ml::parse_model_kind(name);
    if (!k) throw UsageError("unknown model '" + name + "' (dt, rf, knn, lr, svm, ensemble)");
    return *k;
}

eval::ResampleMethod resolve_method(const std::string& name) {
    auto m = eval::parse_resample_method(name);
    if (!m) throw UsageError("unknown resampling method '" + name + "'");
    return *m;
}

// ---------------------------------------------------------------------------

struct IngestArgs {
    std::vector<std::string> malicious, benign, whois;
    std::string reference_date, out;
};

int cmd_ingest(const IngestArgs& a) {
    Date ref = a.reference_date.empty() ? today_utc() : parse_date_flag(a.reference_date);
    Manifest manifest("ingest");
    manifest.set("reference_date", format_date(ref));

    std::vector<std::vector<WebsiteRecord>> feeds;
    std::vector<SkipEntry> skips;
    std::size_t in_file_duplicates = 0;
    auto load = [&](const std::string& path, Label label) {
        auto r = load_domains(path, label, fs::path(path).stem().string());
        manifest.input(path);
        in_file_duplicates += r.duplicates;
        skips.insert(skips.end(), r.skips.begin(), r.skips.end());
        std::cerr << "loaded " << r.records.size() << " " << to_string(label) << " records from " << path << " ("
                  << r.skips.size() << " skipped)\n";
        feeds.push_back(std::move(r.records));
    };
    for (const auto& p : a.benign) load(p, Label::benign);
    for (const auto& p : a.malicious) load(p, Label::malicious);

    MergeStats stats;
    Dataset ds = merge_records(feeds, ref, &stats);
    std::size_t matched = 0, rejected = 0;
    for (const auto& p : a.whois) {
        auto r = attach_whois(ds.records, p);
        manifest.input(p);
        matched += r.matched;
        rejected += r.rejected;
        skips.insert(skips.end(), r.issues.begin(), r.issues.end());
    }
    if (stats.label_conflicts) {
        std::cerr << "warning: " << stats.label_conflicts << " domains listed as both malicious and benign; kept malicious\n";
    }
    auto parts = partition(ds);

    fs::path out(a.out);
    fs::create_directories(out);
    {
        auto f = open_output(out / "with_whois.jsonl");
        write_records(f, parts.with_whois.records);
    }
    {
        auto f = open_output(out / "without_whois.jsonl");
        write_records(f, parts.without_whois.records);
    }
    {
        auto f = open_output(out / "skips.jsonl");
        write_skip_report(f, skips);
    }
    manifest.set("records", ds.records.size())
        .set("with_whois", parts.with_whois.records.size())
        .set("without_whois", parts.without_whois.records.size())
        .set("duplicates", stats.duplicates + in_file_duplicates)
        .set("label_conflicts", stats.label_conflicts)
        .set("whois_matched", matched)
        .set("whois_rejected", rejected)
        .set("skipped_rows", skips.size());
    manifest.write(out / "manifest.json");
    std::cerr << "dataset: " << parts.with_whois.records.size() << " with WHOIS, "
              << parts.without_whois.records.size() << " without\n";
    return 0;
}

struct FeaturizeArgs {
    std::string dataset, out, partition = "all", reference_date;
    bool lenient = false;
};

int cmd_featurize(const FeaturizeArgs& a) {
    Manifest manifest("featurize");
    auto records = load_dataset_dir(a.dataset, &manifest);
    if (records.empty()) throw Error(ErrorCode::EmptyInput, "dataset " + a.dataset + " has no records");

    Date ref;
    if (!a.reference_date.empty()) {
        ref = parse_date_flag(a.reference_date);
    } else if (auto d = dataset_reference_date(a.dataset)) {
        ref = *d;
    } else {
        ref = today_utc();
    }
    auto rep = build_reputation(records);
    auto mode = a.lenient ? LifetimeMode::lenient : LifetimeMode::strict;

    std::vector<FeatureRow> rows;
    std::size_t clamped_count = 0;
    for (const auto& r : records) {
        bool complete = r.whois_complete();
        if (a.partition == "with_whois" && !complete) continue;
        if (a.partition == "without_whois" && complete) continue;
        bool clamped = false;
        rows.push_back({r.domain.canonical, featurize(r, rep, ref, mode, &clamped)});
        clamped_count += clamped;
    }
    if (clamped_count) std::cerr << "warning: clamped negative lifetimes on " << clamped_count << " records\n";
    {
        auto out = open_output(a.out);
        write_feature_csv(out, rows);
    }
    manifest.set("reference_date", format_date(ref))
        .set("partition", a.partition)
        .set("lifetime_mode", a.lenient ? "lenient" : "strict")
        .set("rows", rows.size())
        .set("benign_total", rep.benign_total)
        .set("clamped", clamped_count);
    manifest.write(manifest_for_file(a.out));
    std::cerr << "wrote " << rows.size() << " feature rows to " << a.out << "\n";
    return 0;
}

struct TrainArgs {
    std::string features, out, model = "rf", mask, method = "none";
    int experiment = 3;
    double ratio = 1.67;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
};

int cmd_train(const TrainArgs& a) {
    auto kind = resolve_model(a.model);
    auto mask = resolve_mask(a.mask, a.experiment);
    auto method = resolve_method(a.method);
    Manifest manifest("train");
    auto rows = rows_covering(read_features(a.features, manifest), mask);
    if (rows.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no rows carry " + mask.to_string());

    rows = eval::resample(rows, {method, a.ratio, derive_seed(a.seed, "train.resample")});
    auto cfg = ml::TrainConfig::seeded(a.seed);
    cfg.forest.jobs = a.jobs;
    auto model = ml::train(kind, ml::to_design(rows, mask), ml::labels_of(rows), cfg);
    ensure_parent(a.out);
    ml::save_model(model, a.out);
    manifest.set("model", ml::to_string(kind))
        .set("feature_mask", mask.to_string())
        .set("seed", a.seed)
        .set("method", eval::to_string(method))
        .set("ratio", a.ratio)
        .set("rows", rows.size());
    manifest.write(manifest_for_file(a.out));
    std::cerr << "trained " << ml::to_string(kind) << " on " << rows.size() << " rows -> " << a.out << "\n";
    return 0;
}

struct PredictArgs {
    std::string model, features, out;
};

int cmd_predict(const PredictArgs& a) {
    Manifest manifest("predict");
    auto model = ml::load_model(a.model);
    manifest.input(a.model);
    auto rows = read_features(a.features, manifest);
    std::vector<FeatureRow> usable;
    for (auto& r : rows) {
        if (r.features.covers(model.mask)) usable.push_back(r);
    }
    std::vector<FeatureVector> vecs;
    for (const auto& r : usable) vecs.push_back(r.features);
    auto pred = vecs.empty() ? std::vector<Label>{} : ml::predict(model, ml::to_design(vecs, model.mask));
    auto out = open_output(a.out);
    out << "domain,label,predicted\n";
    for (std::size_t i = 0; i < usable.size(); ++i) {
        out << csv::escape(usable[i].domain) << ',' << to_string(usable[i].features.label) << ','
            << to_string(pred[i]) << '\n';
    }
    if (!vecs.empty()) {
        auto r = eval::compute_metrics(pred, ml::labels_of(vecs));
        std::cerr << "acc " << r.acc << " fpr " << r.fpr << " fnr " << r.fnr << " f1 " << r.f1 << "\n";
    }
    manifest.write(manifest_for_file(a.out));
    return 0;
}

struct ExperimentArgs {
    std::string features, out, method = "oversample", classifier = "rf", mask;
    double ratio = 1.67;
    double test_fraction = 0.2;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    bool sweep = false, no_timing = false;
    std::vector<double> ratios{1.0, 1.67, 2.0};
    std::vector<std::string> methods{"oversample", "undersample"};
};

int cmd_experiment(const ExperimentArgs& a) {
    Manifest manifest("experiment");
    auto all = read_features(a.features, manifest);
    fs::path out(a.out);
    fs::create_directories(out);
    manifest.set("seed", a.seed).set("test_fraction", a.test_fraction).set("timing", !a.no_timing);

    if (a.sweep) {
        auto kind = resolve_model(a.classifier);
        auto mask = resolve_mask(a.mask, 3);
        std::vector<eval::ResampleMethod> methods;
        for (const auto& m : a.methods) methods.push_back(resolve_method(m));
        auto rows = rows_covering(all, mask);
        eval::SplitConfig split{a.test_fraction, 0, true};
        auto sweep = eval::ratio_sweep(rows, a.ratios, methods, kind, mask, a.seed, split);
        {
            auto f = open_output(out / "sweep.csv");
            eval::write_sweep_csv(f, sweep, !a.no_timing);
        }
        manifest.set("mode", "sweep")
            .set("classifier", ml::to_string(kind))
            .set("feature_mask", mask.to_string())
            .set("ratios", a.ratios)
            .set("methods", a.methods)
            .set("rows", rows.size());
        manifest.write(out / "manifest.json");
        std::cerr << "wrote " << sweep.size() << " sweep rows\n";
        return 0;
    }

    auto method = resolve_method(a.method);
    // Every experiment runs on the WHOIS-complete rows so the splits agree.
    auto rows = rows_covering(all, FeatureMask::of({1, 2, 3, 4, 5, 7, 9, 10, 11}));
    eval::ExperimentOptions opts;
    opts.method = method;
    opts.ratio = a.ratio;
    opts.test_fraction = a.test_fraction;
    opts.jobs = a.jobs;
    auto results = eval::run_experiments(rows, a.seed, opts);
    {
        auto f = open_output(out / "experiments.csv");
        eval::write_experiment_csv(f, results, !a.no_timing);
    }

    // Random-forest importance over every feature on the same protocol.
    eval::SplitConfig split{a.test_fraction, derive_seed(a.seed, "experiment.split"), true};
    auto prepared = eval::prepare(rows, split, {method, a.ratio, derive_seed(a.seed, "experiment.resample")});
    auto cfg = ml::TrainConfig::seeded(derive_seed(a.seed, "experiment.train"));
    cfg.forest.jobs = a.jobs;
    auto full = FeatureMask::all();
    auto forest = ml::train(ml::ModelKind::random_forest, ml::to_design(prepared.train, full),
                            ml::labels_of(prepared.train), cfg);
    auto imp = ml::feature_importance(forest);
    {
        auto f = open_output(out / "importance.csv");
        f << "feature,importance\n";
        auto slots = imp.mask.slots();
        for (std::size_t j = 0; j < slots.size(); ++j) {
            f << 'F' << slots[j] + 1 << ',' << eval::fixed(imp.scores[j], 6) << '\n';
        }
    }
    manifest.set("mode", "experiments")
        .set("method", eval::to_string(method))
        .set("ratio", a.ratio)
        .set("rows", rows.size())
        .set("train_rows", prepared.train.size())
        .set("test_rows", prepared.test.size());
    manifest.write(out / "manifest.json");
    std::cerr << "wrote " << results.size() << " experiment rows\n";
    return 0;
}

struct CharacterizeArgs {
    std::string dataset, out;
    std::size_t top = 10;
    bool bars = false;
};

int cmd_characterize(const CharacterizeArgs& a) {
    Manifest manifest("characterize");
    Dataset ds;
    ds.records = load_dataset_dir(a.dataset, &manifest);
    auto registrars = characterize::rank_registrars(ds, a.top);
    auto tlds = characterize::rank_tlds(ds, a.top);
    auto tr = characterize::trend(ds);

    fs::path out(a.out);
    fs::create_directories(out);
    {
        auto f = open_output(out / "registrars.csv");
        characterize::write_rank_csv(f, registrars, "registrar");
    }
    {
        auto f = open_output(out / "tlds.csv");
        characterize::write_rank_csv(f, tlds, "tld");
    }
    {
        auto f = open_output(out / "trend.csv");
        characterize::write_trend_csv(f, tr);
    }
    if (tr.merged.empty()) std::cerr << "warning: no dated malicious records; trend is empty\n";
    if (tr.excluded) std::cerr << tr.excluded << " malicious records without first_seen excluded from trend\n";
    for (const auto& [src, series] : tr.per_source) {
        if (auto p = characterize::TrendSeries::peak_of(series)) {
            std::cerr << "peak " << src << ": " << format_date(p->date) << " (" << p->count << ")\n";
        }
    }
    if (a.bars) {
        std::cout << "Top registrars (" << registrars.universe_size << " records)\n";
        characterize::render_bars(std::cout, registrars);
        std::cout << "\nTop TLDs (" << tlds.universe_size << " records)\n";
        characterize::render_bars(std::cout, tlds);
    }
    manifest.set("top", a.top)
        .set("registrar_universe", registrars.universe_size)
        .set("tld_universe", tlds.universe_size)
        .set("trend_excluded", tr.excluded);
    manifest.write(out / "manifest.json");
    return 0;
}

struct SegmentArgs {
    std::string dataset, domains, lexicon = std::string(SITEWATCH_DATA_DIR) + "/lexicon.txt", out;
    std::size_t min_count = 1;
    std::vector<std::string> compounds;
    bool no_digit_join = false;
};

int cmd_segment(const SegmentArgs& a) {
    if (a.dataset.empty() == a.domains.empty()) throw UsageError("give exactly one of --dataset or --domains");
    Manifest manifest("segment");
    auto lex = wordseg::Lexicon::load(a.lexicon);
    manifest.input(a.lexicon);

    std::vector<DomainName> names;
    if (!a.dataset.empty()) {
        for (const auto& r : load_dataset_dir(a.dataset, &manifest)) {
            if (r.label == Label::malicious) names.push_back(r.domain);
        }
    } else {
        auto r = load_domains(a.domains, Label::malicious, "domains");
        manifest.input(a.domains);
        for (auto& rec : r.records) names.push_back(std::move(rec.domain));
    }
    wordseg::KeywordOptions opts;
    opts.join_digit_suffix = !a.no_digit_join;
    opts.compounds.insert(a.compounds.begin(), a.compounds.end());
    auto table = wordseg::extract_keywords(names, lex, opts);

    auto out = open_output(a.out);
    out << "keyword,count\n";
    std::size_t written = 0;
    for (const auto& [k, c] : table) {
        if (c < a.min_count) continue;
        out << k << ',' << c << '\n';
        ++written;
    }
    manifest.set("lexicon_words", lex.size())
        .set("domains", names.size())
        .set("min_count", a.min_count)
        .set("compounds", a.compounds)
        .set("keywords", written);
    manifest.write(manifest_for_file(a.out));
    std::cerr << "wrote " << written << " keywords from " << names.size() << " domains\n";
    return 0;
}

struct WhoisArgs {
    std::string domains, out, server = "whois.verisign-grs.com", fixture_dir, transport_log;
    int timeout_ms = 5000;
    std::size_t concurrency = 1;
    int delay_ms = 0;
    int port = whois::kWhoisPort;
};

int cmd_whois(const WhoisArgs& a) {
    Manifest manifest("whois");
    auto loaded = load_domains(a.domains, Label::malicious, "domains");
    manifest.input(a.domains);
    std::vector<DomainName> names;
    for (auto& r : loaded.records) names.push_back(std::move(r.domain));

    std::unique_ptr<whois::Transport> transport;
    whois::FixtureTransport* fixture = nullptr;
    if (!a.fixture_dir.empty()) {
        auto f = std::make_unique<whois::FixtureTransport>(a.fixture_dir);
        fixture = f.get();
        transport = std::move(f);
    } else {
        transport = std::make_unique<whois::SocketTransport>(static_cast<std::uint16_t>(a.port));
    }
    whois::BatchOptions opts;
    opts.fetch.server = a.server;
    opts.fetch.timeout = std::chrono::milliseconds(a.timeout_ms);
    opts.concurrency = a.concurrency;
    opts.politeness_delay = std::chrono::milliseconds(a.delay_ms);
    auto results = whois::fetch_batch(names, *transport, opts);

    std::size_t failed = 0;
    {
        auto out = open_output(a.out);
        for (const auto& r : results) {
            WhoisRecord w = r.response ? r.response->parsed : WhoisRecord{};
            if (r.error) {
                ++failed;
                std::cerr << r.domain.canonical << ": " << r.error_message << "\n";
            }
            out << whois_to_json(r.domain.canonical, w).dump() << '\n';
        }
    }
    if (fixture && !a.transport_log.empty()) {
        auto log = fixture->log();
        auto out = open_output(a.transport_log);
        out << "domain,offset_ms\n";
        auto t0 = log.empty() ? whois::Clock::now() : log.front().at;
        for (const auto& e : log) {
            out << e.domain << ','
                << std::chrono::duration_cast<std::chrono::milliseconds>(e.at - t0).count() << '\n';
        }
    }
    manifest.set("server", a.server)
        .set("timeout_ms", a.timeout_ms)
        .set("concurrency", a.concurrency)
        .set("delay_ms", a.delay_ms)
        .set("transport", fixture ? "fixture" : "socket")
        .set("domains", names.size())
        .set("failed", failed);
    manifest.write(manifest_for_file(a.out));
    std::cerr << "queried " << names.size() << " domains, " << failed << " failed\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sitewatch: theme-based malicious domain characterization and detection"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    IngestArgs ingest;
    auto* ci = app.add_subcommand("ingest", "Merge domain feeds and WHOIS enrichment into a partitioned dataset");
    ci->add_option("--malicious", ingest.malicious, "Malicious feed CSV (repeatable)")->required();
    ci->add_option("--benign", ingest.benign, "Benign feed CSV (repeatable)")->required();
    ci->add_option("--whois", ingest.whois, "WHOIS enrichment JSONL (repeatable)");
    ci->add_option("--reference-date", ingest.reference_date, "Date all lifetimes are measured from")
        ->envname("SITEWATCH_REFERENCE_DATE");
    ci->add_option("--out", ingest.out, "Output directory")->required();

    FeaturizeArgs feat;
    auto* cf = app.add_subcommand("featurize", "Compute F1..F11 for an ingested dataset");
    cf->add_option("--dataset", feat.dataset, "Dataset directory from `ingest`")->required();
    cf->add_option("--out", feat.out, "Feature CSV")->required();
    cf->add_option("--partition", feat.partition, "with_whois, without_whois or all")
        ->check(CLI::IsMember({"with_whois", "without_whois", "all"}));
    cf->add_option("--reference-date", feat.reference_date, "Override the dataset reference date")
        ->envname("SITEWATCH_REFERENCE_DATE");
    cf->add_flag("--lenient", feat.lenient, "Clamp negative lifetimes to 0 instead of failing");

    TrainArgs tr;
    auto* ct = app.add_subcommand("train", "Train one classifier on a feature CSV");
    ct->add_option("--features", tr.features, "Feature CSV")->required();
    ct->add_option("--model", tr.model, "dt, rf, knn, lr, svm or ensemble");
    ct->add_option("--mask", tr.mask, "Feature set, e.g. F1-F5,F7,F9-F11");
    ct->add_option("--experiment", tr.experiment, "Use the feature set of experiment 1, 2 or 3");
    ct->add_option("--resample", tr.method, "none, oversample or undersample");
    ct->add_option("--ratio", tr.ratio, "Target malicious:benign ratio for resampling");
    ct->add_option("--seed", tr.seed, "Master seed");
    ct->add_option("--jobs", tr.jobs, "Forest training threads")->envname("SITEWATCH_JOBS");
    ct->add_option("--out", tr.out, "Model file")->required();

    PredictArgs pr;
    auto* cp = app.add_subcommand("predict", "Label a feature CSV with a trained model");
    cp->add_option("--model", pr.model, "Model file")->required();
    cp->add_option("--features", pr.features, "Feature CSV")->required();
    cp->add_option("--out", pr.out, "Prediction CSV")->required();

    ExperimentArgs ex;
    ex.jobs = default_jobs();
    auto* ce = app.add_subcommand("experiment", "Run the three feature-set experiments or a ratio sweep");
    ce->add_option("--features", ex.features, "Feature CSV")->required();
    ce->add_option("--out", ex.out, "Output directory")->required();
    ce->add_option("--seed", ex.seed, "Master seed");
    ce->add_option("--resample", ex.method, "none, oversample or undersample");
    ce->add_option("--ratio", ex.ratio, "Target malicious:benign ratio");
    ce->add_option("--test-fraction", ex.test_fraction, "Held-out fraction")->check(CLI::Range(0.0, 1.0));
    ce->add_option("--jobs", ex.jobs, "Forest training threads")->envname("SITEWATCH_JOBS");
    ce->add_flag("--no-timing", ex.no_timing, "Leave the time column empty");
    ce->add_flag("--sweep", ex.sweep, "Run the ratio sweep instead");
    ce->add_option("--ratios", ex.ratios, "Sweep ratios")->delimiter(',');
    ce->add_option("--methods", ex.methods, "Sweep methods")->delimiter(',');
    ce->add_option("--classifier", ex.classifier, "Sweep classifier");
    ce->add_option("--mask", ex.mask, "Sweep feature set (default: experiment 3)");

    CharacterizeArgs ch;
    auto* cc = app.add_subcommand("characterize", "Rank abused registrars and TLDs; daily trends");
    cc->add_option("--dataset", ch.dataset, "Dataset directory from `ingest`")->required();
    cc->add_option("--out", ch.out, "Output directory")->required();
    cc->add_option("--top", ch.top, "Entries per ranking (0 = all)");
    cc->add_flag("--bars", ch.bars, "Print text bar charts to stdout");

    SegmentArgs sg;
    auto* cs = app.add_subcommand("segment", "Split malicious domain names into theme keywords");
    cs->add_option("--dataset", sg.dataset, "Dataset directory; malicious records are segmented");
    cs->add_option("--domains", sg.domains, "Domain CSV instead of a dataset");
    cs->add_option("--lexicon", sg.lexicon, "Rank-ordered word list, one per line");
    cs->add_option("--min-count", sg.min_count, "Drop keywords seen fewer times");
    cs->add_option("--compound", sg.compounds, "Report these adjacent-token joins as one keyword (repeatable)");
    cs->add_flag("--no-digit-join", sg.no_digit_join, "Keep digit runs as separate keywords");
    cs->add_option("--out", sg.out, "Keyword CSV")->required();

    WhoisArgs wh;
    auto* cw = app.add_subcommand("whois", "Query WHOIS for a domain list and write enrichment JSONL");
    cw->add_option("--domains", wh.domains, "Domain CSV")->required();
    cw->add_option("--out", wh.out, "Enrichment JSONL")->required();
    cw->add_option("--whois-server", wh.server, "Server to query");
    cw->add_option("--port", wh.port, "Server port");
    cw->add_option("--timeout-ms", wh.timeout_ms, "Connect and read timeout");
    cw->add_option("--concurrency", wh.concurrency, "Parallel queries");
    cw->add_option("--delay-ms", wh.delay_ms, "Minimum spacing between queries");
    cw->add_option("--fixture-dir", wh.fixture_dir, "Replay recorded responses instead of using the network");
    cw->add_option("--transport-log", wh.transport_log, "With --fixture-dir, write query times here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*ci) return cmd_ingest(ingest);
        if (*cf) return cmd_featurize(feat);
        if (*ct) return cmd_train(tr);
        if (*cp) return cmd_predict(pr);
        if (*ce) return cmd_experiment(ex);
        if (*cc) return cmd_characterize(ch);
        if (*cs) return cmd_segment(sg);
        if (*cw) return cmd_whois(wh);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
