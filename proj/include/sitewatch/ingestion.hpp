// ingestion.hpp - feed and WHOIS enrichment loading, merging and partitioning.

#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "csv.hpp"

namespace sitewatch {

struct Dataset {
    std::vector<WebsiteRecord> records;
    Date reference_date = today_utc();
};

struct DatasetPartition {
    Dataset with_whois;
    Dataset without_whois;
};

/// One rejected or partially accepted input row. `row` is the 1-based line
/// number in the source file.
struct SkipEntry {
    std::string file;
    std::size_t row = 0;
    std::string reason;
};

struct LoadResult {
    std::vector<WebsiteRecord> records;
    std::vector<SkipEntry> skips;
    std::size_t duplicates = 0;
};

namespace detail {

inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::FileNotFound, path.string());
    return in;
}

inline std::string strip_bom(std::string line) {
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    return line;
}

}  // namespace detail

/// Reads a CSV feed with a `domain` column and optional `first_seen` column.
/// Malformed rows are tallied in the skip report; duplicates within the file
/// collapse to the later row.
inline LoadResult load_domains(const std::filesystem::path& path, Label label, const std::string& source) {
    if (source.empty()) throw Error(ErrorCode::FormatError, "empty source tag");
    auto in = detail::open_input(path);

    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::FormatError, path.string() + ": missing header");
    auto header = csv::split_line(csv::chomp(detail::strip_bom(line)));
    for (auto& h : header) h = lower_trim(h);
    int domain_col = csv::column(header, "domain");
    int seen_col = csv::column(header, "first_seen");
    if (domain_col < 0) throw Error(ErrorCode::FormatError, path.string() + ": header lacks 'domain' column");

    LoadResult result;
    std::unordered_map<std::string, std::size_t> index;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        auto text = csv::chomp(line);
        if (text.find_first_not_of(" \t") == std::string_view::npos) continue;
        auto fields = csv::split_line(text);
        auto skip = [&](std::string reason) { result.skips.push_back({path.string(), row, std::move(reason)}); };

        if (static_cast<int>(fields.size()) <= domain_col || fields[domain_col].empty()) {
            skip("empty domain");
            continue;
        }
        WebsiteRecord rec;
        try {
            rec.domain = normalize_domain(fields[domain_col]);
        } catch (const Error& e) {
            skip(e.what());
            continue;
        }
        if (seen_col >= 0 && seen_col < static_cast<int>(fields.size()) && !fields[seen_col].empty()) {
            rec.first_seen = parse_iso_date(fields[seen_col]);
            if (!rec.first_seen) {
                skip("unparseable first_seen '" + fields[seen_col] + "'");
                continue;
            }
        }
        rec.label = label;
        rec.source = source;

        auto [it, inserted] = index.emplace(rec.domain.canonical, result.records.size());
        if (inserted) {
            result.records.push_back(std::move(rec));
        } else {
            ++result.duplicates;
            result.records[it->second] = std::move(rec);
        }
    }
    return result;
}

struct MergeStats {
    std::size_t duplicates = 0;
    std::size_t label_conflicts = 0;
    std::vector<std::string> conflict_domains;
};

/// Union of several loaded feeds keyed on canonical domain. Later occurrences
/// replace earlier ones, except that a malicious label is never overwritten by
/// a benign one (each such case counts as a conflict).
inline Dataset merge_records(const std::vector<std::vector<WebsiteRecord>>& feeds, Date reference_date,
                             MergeStats* stats = nullptr) {
    MergeStats local;
    Dataset out;
    out.reference_date = reference_date;
    std::unordered_map<std::string, std::size_t> index;
    for (const auto& feed : feeds) {
        for (const auto& rec : feed) {
            auto [it, inserted] = index.emplace(rec.domain.canonical, out.records.size());
            if (inserted) {
                out.records.push_back(rec);
                continue;
            }
            ++local.duplicates;
            auto& existing = out.records[it->second];
            if (existing.label != rec.label) {
                ++local.label_conflicts;
                local.conflict_domains.push_back(rec.domain.canonical);
                if (existing.label == Label::malicious) continue;
            }
            auto whois = existing.whois;
            existing = rec;
            if (!existing.whois) existing.whois = whois;
        }
    }
    if (stats) *stats = std::move(local);
    return out;
}

struct AttachResult {
    std::size_t matched = 0;
    std::size_t rejected = 0;
    std::vector<SkipEntry> issues;
};

/// Parses one enrichment object. Date fields that fail to parse are left
/// absent and reported through `issues`.
inline WhoisRecord whois_from_json(const nlohmann::json& obj, std::vector<std::string>* issues = nullptr) {
    WhoisRecord w;
    auto text_field = [&](const char* key) -> std::optional<std::string> {
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) return std::nullopt;
        if (!it->is_string()) {
            if (issues) issues->push_back(std::string(key) + " is not a string");
            return std::nullopt;
        }
        return it->get<std::string>();
    };
    if (auto r = text_field("registrar_name"); r && !r->empty()) w.registrar_name = *r;
    auto date_field = [&](const char* key, std::optional<Date>& out) {
        auto t = text_field(key);
        if (!t || t->empty()) return;
        out = parse_iso_date(*t);
        if (!out && issues) issues->push_back(std::string("DateParseError: ") + key + " '" + *t + "'");
    };
    date_field("creation_date", w.creation_date);
    date_field("expiration_date", w.expiration_date);
    date_field("updated_date", w.updated_date);
    return w;
}

inline nlohmann::ordered_json whois_to_json(const std::string& domain, const WhoisRecord& w) {
    nlohmann::ordered_json j;
    j["domain"] = domain;
    auto put = [&](const char* key, const auto& v) {
        if (v) j[key] = *v;
        else j[key] = nullptr;
    };
    put("registrar_name", w.registrar_name);
    j["creation_date"] = w.creation_date ? nlohmann::ordered_json(format_date(*w.creation_date)) : nullptr;
    j["expiration_date"] = w.expiration_date ? nlohmann::ordered_json(format_date(*w.expiration_date)) : nullptr;
    j["updated_date"] = w.updated_date ? nlohmann::ordered_json(format_date(*w.updated_date)) : nullptr;
    return j;
}

/// Joins a line-delimited JSON enrichment file onto `records` by canonical
/// domain. Rows whose creation date is after the expiration date are rejected
/// and leave the record untouched.
inline AttachResult attach_whois(std::vector<WebsiteRecord>& records, const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < records.size(); ++i) index.emplace(records[i].domain.canonical, i);

    AttachResult result;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        auto text = csv::chomp(line);
        if (text.find_first_not_of(" \t") == std::string_view::npos) continue;
        auto issue = [&](std::string reason) { result.issues.push_back({path.string(), row, std::move(reason)}); };

        nlohmann::json obj = nlohmann::json::parse(text, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            issue("FormatError: not a JSON object");
            continue;
        }
        auto dom = obj.find("domain");
        if (dom == obj.end() || !dom->is_string()) {
            issue("FormatError: missing domain");
            continue;
        }
        std::string key;
        try {
            key = normalize_domain(dom->get<std::string>()).canonical;
        } catch (const Error& e) {
            issue(e.what());
            continue;
        }
        std::vector<std::string> problems;
        WhoisRecord w = whois_from_json(obj, &problems);
        for (auto& p : problems) issue(p);
        if (!w.consistent()) {
            ++result.rejected;
            issue("creation_date after expiration_date; row rejected");
            continue;
        }
        auto it = index.find(key);
        if (it == index.end()) continue;
        records[it->second].whois = std::move(w);
        ++result.matched;
    }
    return result;
}

/// Complete WHOIS records go to `with_whois`, everything else to
/// `without_whois`. Order within each side follows the input.
inline DatasetPartition partition(const Dataset& dataset) {
    DatasetPartition p;
    p.with_whois.reference_date = dataset.reference_date;
    p.without_whois.reference_date = dataset.reference_date;
    for (const auto& rec : dataset.records) {
        (rec.whois_complete() ? p.with_whois : p.without_whois).records.push_back(rec);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Dataset files (line-delimited JSON, one record per line)

inline nlohmann::ordered_json record_to_json(const WebsiteRecord& rec) {
    nlohmann::ordered_json j;
    j["domain"] = rec.domain.canonical;
    j["label"] = to_string(rec.label);
    j["first_seen"] = rec.first_seen ? nlohmann::ordered_json(format_date(*rec.first_seen)) : nullptr;
    j["source"] = rec.source;
    if (rec.whois) {
        auto w = whois_to_json(rec.domain.canonical, *rec.whois);
        w.erase("domain");
        j["whois"] = std::move(w);
    } else {
        j["whois"] = nullptr;
    }
    return j;
}

inline WebsiteRecord record_from_json(const nlohmann::json& j) {
    WebsiteRecord rec;
    try {
        rec.domain = normalize_domain(j.at("domain").get<std::string>());
        auto label = parse_label(j.at("label").get<std::string>());
        if (!label) throw Error(ErrorCode::FormatError, "bad label");
        rec.label = *label;
        if (j.contains("first_seen") && !j["first_seen"].is_null()) {
            rec.first_seen = parse_iso_date(j["first_seen"].get<std::string>());
        }
        rec.source = j.at("source").get<std::string>();
        if (j.contains("whois") && j["whois"].is_object()) rec.whois = whois_from_json(j["whois"]);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::FormatError, e.what());
    }
    return rec;
}

inline void write_records(std::ostream& out, const std::vector<WebsiteRecord>& records) {
    for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

inline std::vector<WebsiteRecord> read_records(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    std::vector<WebsiteRecord> out;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (csv::chomp(line).empty()) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw Error(ErrorCode::FormatError, path.string() + ":" + std::to_string(row) + ": invalid JSON");
        }
        out.push_back(record_from_json(j));
    }
    return out;
}

inline void write_skip_report(std::ostream& out, const std::vector<SkipEntry>& skips) {
    for (const auto& s : skips) {
        nlohmann::ordered_json j;
        j["file"] = s.file;
        j["row"] = s.row;
        j["reason"] = s.reason;
        out << j.dump() << '\n';
    }
}

}  // namespace sitewatch
