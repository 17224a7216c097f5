// characterize.hpp - abused-registrar and abused-TLD rankings and daily
// first-seen trends of malicious records.

#pragma once

#include <algorithm>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "csv.hpp"
#include "ingestion.hpp"

namespace sitewatch::characterize {

struct RankTable {
    /// Descending count, ties in lexicographic key order.
    std::vector<std::pair<std::string, std::size_t>> entries;
    std::size_t universe_size = 0;
};

inline RankTable rank_counts(const std::map<std::string, std::size_t>& counts, std::size_t universe,
                             std::size_t top_n) {
    RankTable t;
    t.universe_size = universe;
    t.entries.assign(counts.begin(), counts.end());
    std::stable_sort(t.entries.begin(), t.entries.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    if (top_n != 0 && t.entries.size() > top_n) t.entries.resize(top_n);
    return t;
}

/// Malicious records with a registrar name; other records are not part of
/// the universe. `top_n` 0 keeps every entry.
inline RankTable rank_registrars(const Dataset& dataset, std::size_t top_n) {
    std::map<std::string, std::size_t> counts;
    std::size_t universe = 0;
    for (const auto& r : dataset.records) {
        if (r.label != Label::malicious || !r.whois || !r.whois->registrar_name) continue;
        auto key = normalize_registrar(*r.whois->registrar_name);
        if (key.empty()) continue;
        ++universe;
        ++counts[key];
    }
    return rank_counts(counts, universe, top_n);
}

inline RankTable rank_tlds(const Dataset& dataset, std::size_t top_n) {
    std::map<std::string, std::size_t> counts;
    std::size_t universe = 0;
    for (const auto& r : dataset.records) {
        if (r.label != Label::malicious) continue;
        ++universe;
        ++counts[r.domain.tld()];
    }
    return rank_counts(counts, universe, top_n);
}

using DailyCounts = std::map<Date, std::size_t>;

struct Peak {
    Date date;
    std::size_t count = 0;
};

struct TrendSeries {
    std::map<std::string, DailyCounts> per_source;
    DailyCounts merged;
    /// Malicious records without a first-seen date.
    std::size_t excluded = 0;

    /// Earliest day with the highest count.
    static std::optional<Peak> peak_of(const DailyCounts& series) {
        std::optional<Peak> best;
        for (const auto& [d, c] : series) {
            if (!best || c > best->count) best = Peak{d, c};
        }
        return best;
    }

    std::size_t total() const {
        std::size_t n = 0;
        for (const auto& [d, c] : merged) n += c;
        return n;
    }
};

inline TrendSeries trend(const Dataset& dataset) {
    TrendSeries t;
    for (const auto& r : dataset.records) {
        if (r.label != Label::malicious) continue;
        if (!r.first_seen) {
            ++t.excluded;
            continue;
        }
        ++t.per_source[r.source][*r.first_seen];
        ++t.merged[*r.first_seen];
    }
    return t;
}

/// Source name used for the merged series in trend CSVs.
inline constexpr const char* kMergedSource = "_all";

inline void write_rank_csv(std::ostream& out, const RankTable& table, const char* key_header) {
    out << key_header << ",count\n";
    for (const auto& [k, c] : table.entries) out << csv::escape(k) << ',' << c << '\n';
}

inline void write_trend_csv(std::ostream& out, const TrendSeries& t) {
    out << "source,date,count\n";
    for (const auto& [src, series] : t.per_source) {
        for (const auto& [d, c] : series) out << csv::escape(src) << ',' << format_date(d) << ',' << c << '\n';
    }
    for (const auto& [d, c] : t.merged) out << kMergedSource << ',' << format_date(d) << ',' << c << '\n';
}

/// Plain-text horizontal bars scaled to `width` characters.
inline void render_bars(std::ostream& out, const RankTable& table, std::size_t width = 40) {
    std::size_t key_w = 0, max_c = 0;
    for (const auto& [k, c] : table.entries) {
        key_w = std::max(key_w, k.size());
        max_c = std::max(max_c, c);
    }
    for (const auto& [k, c] : table.entries) {
        std::size_t len = max_c == 0 ? 0 : (c * width + max_c - 1) / max_c;
        out << k << std::string(key_w - k.size() + 1, ' ') << std::string(len, '#') << ' ' << c << '\n';
    }
}

}  // namespace sitewatch::characterize
