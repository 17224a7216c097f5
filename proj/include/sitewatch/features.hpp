// features.hpp - WHOIS, lexical, statistical and reputation features F1..F11.
//
// Slot layout (0-based index = feature number - 1):
//   F1  days since registration        F7  vowel count
//   F2  days until expiration          F8  digit fraction of alphanumerics
//   F3  days since last update         F9  unique alphanumeric characters
//   F4  registrar reputation           F10 Shannon entropy (bits)
//   F5  dot count                      F11 TLD reputation
//   F6  hyphen count
// All lexical features read the full canonical hostname, TLD and dots included.

#pragma once

#include <array>
#include <bitset>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "core.hpp"
#include "csv.hpp"
#include "ingestion.hpp"

namespace sitewatch {

inline constexpr std::size_t kFeatureCount = 11;

/// Set of feature slots a model consumes. Parsed from and printed as
/// "F1-F5,F7,F9-F11".
class FeatureMask {
public:
    FeatureMask() = default;
    explicit FeatureMask(std::bitset<kFeatureCount> bits) : bits_(bits) {}

    static FeatureMask all() { return FeatureMask(std::bitset<kFeatureCount>().set()); }

    static FeatureMask of(std::initializer_list<int> features) {
        FeatureMask m;
        for (int f : features) m.bits_.set(static_cast<std::size_t>(f - 1));
        return m;
    }

    static FeatureMask parse(std::string_view text) {
        FeatureMask m;
        auto feature_number = [&](std::string_view tok) {
            while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
            while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
            if (!tok.empty() && (tok.front() == 'F' || tok.front() == 'f')) tok.remove_prefix(1);
            int v = 0;
            auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc{} || p != tok.data() + tok.size() || v < 1 || v > static_cast<int>(kFeatureCount)) {
                throw Error(ErrorCode::InvalidConfig, "bad feature '" + std::string(text) + "'");
            }
            return v;
        };
        std::size_t start = 0;
        while (start <= text.size()) {
            auto comma = text.find(',', start);
            auto tok = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
            if (auto dash = tok.find('-'); dash != std::string_view::npos) {
                int lo = feature_number(tok.substr(0, dash));
                int hi = feature_number(tok.substr(dash + 1));
                if (lo > hi) throw Error(ErrorCode::InvalidConfig, "bad range '" + std::string(tok) + "'");
                for (int f = lo; f <= hi; ++f) m.bits_.set(static_cast<std::size_t>(f - 1));
            } else {
                m.bits_.set(static_cast<std::size_t>(feature_number(tok) - 1));
            }
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (m.empty()) throw Error(ErrorCode::InvalidConfig, "empty feature mask");
        return m;
    }

    bool test(std::size_t slot) const { return bits_.test(slot); }
    bool empty() const { return bits_.none(); }
    std::size_t size() const { return bits_.count(); }

    std::vector<std::size_t> slots() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            if (bits_.test(i)) out.push_back(i);
        }
        return out;
    }

    std::string to_string() const {
        std::string out;
        std::size_t i = 0;
        while (i < kFeatureCount) {
            if (!bits_.test(i)) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j + 1 < kFeatureCount && bits_.test(j + 1)) ++j;
            if (!out.empty()) out += ',';
            out += "F" + std::to_string(i + 1);
            if (j > i) out += "-F" + std::to_string(j + 1);
            i = j + 1;
        }
        return out;
    }

    friend bool operator==(const FeatureMask&, const FeatureMask&) = default;

private:
    std::bitset<kFeatureCount> bits_;
};

struct FeatureVector {
    std::array<double, kFeatureCount> values{};
    std::array<bool, kFeatureCount> available{};
    Label label = Label::benign;

    bool has_whois() const { return available[0]; }

    bool covers(const FeatureMask& mask) const {
        for (auto s : mask.slots()) {
            if (!available[s]) return false;
        }
        return true;
    }
};

// ---------------------------------------------------------------------------
// Lexical features

inline std::string_view lexical_string(const DomainName& domain) { return domain.canonical; }

inline bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

inline std::size_t f5_dot_count(std::string_view s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '.')); }

inline std::size_t f6_hyphen_count(std::string_view s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '-'));
}

inline std::size_t f7_vowel_count(std::string_view s) {
    std::size_t n = 0;
    for (char c : s) {
        switch (std::tolower(static_cast<unsigned char>(c))) {
            case 'a': case 'e': case 'i': case 'o': case 'u': ++n; break;
            default: break;
        }
    }
    return n;
}

/// Digits over letters+digits; 0 when there are no alphanumerics.
inline double f8_digit_fraction(std::string_view s) {
    std::size_t digits = 0, alnum = 0;
    for (char c : s) {
        if (is_digit(c)) ++digits, ++alnum;
        else if (is_alpha(c)) ++alnum;
    }
    return alnum == 0 ? 0.0 : static_cast<double>(digits) / static_cast<double>(alnum);
}

/// Letters are case-folded, so the result is at most 36.
inline std::size_t f9_unique_alnum(std::string_view s) {
    std::bitset<36> seen;
    for (char c : s) {
        if (is_digit(c)) seen.set(static_cast<std::size_t>(26 + (c - '0')));
        else if (is_alpha(c)) seen.set(static_cast<std::size_t>(std::tolower(static_cast<unsigned char>(c)) - 'a'));
    }
    return seen.count();
}

/// Shannon entropy in bits of a discrete distribution given by counts.
/// Shared by F10 and the decision-tree impurity.
template <typename Counts>
double entropy_of_counts(const Counts& counts) {
    double total = 0;
    for (auto c : counts) total += static_cast<double>(c);
    if (total <= 0) return 0.0;
    double h = 0;
    for (auto c : counts) {
        if (c <= 0) continue;
        double p = static_cast<double>(c) / total;
        h -= p * std::log2(p);
    }
    return h;
}

inline double f10_entropy(std::string_view s) {
    std::array<std::size_t, 256> counts{};
    for (char c : s) ++counts[static_cast<unsigned char>(c)];
    return entropy_of_counts(counts);
}

// ---------------------------------------------------------------------------
// Reputation

struct ReputationTable {
    std::map<std::string, std::size_t> registrar_counts;
    std::map<std::string, std::size_t> tld_counts;
    std::size_t benign_total = 0;

    double registrar_reputation(std::string_view registrar) const {
        auto it = registrar_counts.find(normalize_registrar(registrar));
        return it == registrar_counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(benign_total);
    }

    double tld_reputation(std::string_view tld) const {
        auto it = tld_counts.find(std::string(tld));
        return it == tld_counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(benign_total);
    }
};

/// Counts over the benign-labeled records of `records`. Unseen keys get
/// reputation 0 (no smoothing).
inline ReputationTable build_reputation(const std::vector<WebsiteRecord>& records) {
    ReputationTable rep;
    for (const auto& r : records) {
        if (r.label != Label::benign) continue;
        ++rep.benign_total;
        ++rep.tld_counts[r.domain.tld()];
        if (r.whois && r.whois->registrar_name && !r.whois->registrar_name->empty()) {
            ++rep.registrar_counts[normalize_registrar(*r.whois->registrar_name)];
        }
    }
    if (rep.benign_total == 0) throw Error(ErrorCode::EmptyBenignSet, "no benign records");
    return rep;
}

inline ReputationTable build_reputation(const Dataset& benign) { return build_reputation(benign.records); }

// ---------------------------------------------------------------------------
// WHOIS lifetimes

enum class LifetimeMode { strict, lenient };

struct Lifetimes {
    std::int64_t since_creation = 0;   // F1
    std::int64_t until_expiration = 0; // F2, negative once expired
    std::int64_t since_update = 0;     // F3
    bool clamped = false;
};

inline Lifetimes whois_lifetimes(const WhoisRecord& w, const Date& reference,
                                 LifetimeMode mode = LifetimeMode::strict) {
    if (!w.creation_date || !w.expiration_date || !w.updated_date) {
        throw Error(ErrorCode::UnavailableFeature, "WHOIS dates incomplete");
    }
    Lifetimes out;
    out.since_creation = days_between(*w.creation_date, reference);
    out.until_expiration = days_between(reference, *w.expiration_date);
    out.since_update = days_between(*w.updated_date, reference);
    if (out.since_creation < 0 || out.since_update < 0) {
        if (mode == LifetimeMode::strict) {
            throw Error(ErrorCode::NegativeLifetime,
                        "creation or update after reference date " + format_date(reference));
        }
        out.since_creation = std::max<std::int64_t>(0, out.since_creation);
        out.since_update = std::max<std::int64_t>(0, out.since_update);
        out.clamped = true;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Assembly

/// F5..F11 are always populated; F1..F4 only for WHOIS-complete records.
/// `clamped`, when given, is set if lenient mode clamped a lifetime.
inline FeatureVector featurize(const WebsiteRecord& record, const ReputationTable& rep, const Date& reference,
                               LifetimeMode mode = LifetimeMode::strict, bool* clamped = nullptr) {
    FeatureVector fv;
    fv.label = record.label;
    auto s = lexical_string(record.domain);
    fv.values[4] = static_cast<double>(f5_dot_count(s));
    fv.values[5] = static_cast<double>(f6_hyphen_count(s));
    fv.values[6] = static_cast<double>(f7_vowel_count(s));
    fv.values[7] = f8_digit_fraction(s);
    fv.values[8] = static_cast<double>(f9_unique_alnum(s));
    fv.values[9] = f10_entropy(s);
    fv.values[10] = rep.tld_reputation(record.domain.tld());
    for (std::size_t i = 4; i < kFeatureCount; ++i) fv.available[i] = true;

    if (record.whois_complete()) {
        auto life = whois_lifetimes(*record.whois, reference, mode);
        if (clamped) *clamped = life.clamped;
        fv.values[0] = static_cast<double>(life.since_creation);
        fv.values[1] = static_cast<double>(life.until_expiration);
        fv.values[2] = static_cast<double>(life.since_update);
        fv.values[3] = rep.registrar_reputation(*record.whois->registrar_name);
        for (std::size_t i = 0; i < 4; ++i) fv.available[i] = true;
    }
    return fv;
}

// ---------------------------------------------------------------------------
// Feature CSV: domain,label,f1..f11,avail_whois

inline std::string format_number(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

inline double parse_number(std::string_view s) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw Error(ErrorCode::FormatError, "bad number '" + std::string(s) + "'");
    }
    return v;
}

struct FeatureRow {
    std::string domain;
    FeatureVector features;
};

inline std::vector<std::string> feature_csv_header() {
    std::vector<std::string> h{"domain", "label"};
    for (std::size_t i = 1; i <= kFeatureCount; ++i) h.push_back("f" + std::to_string(i));
    h.push_back("avail_whois");
    return h;
}

inline void write_feature_csv(std::ostream& out, const std::vector<FeatureRow>& rows) {
    out << csv::join(feature_csv_header()) << '\n';
    for (const auto& row : rows) {
        std::vector<std::string> f{row.domain, to_string(row.features.label)};
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            f.push_back(row.features.available[i] ? format_number(row.features.values[i]) : std::string());
        }
        f.push_back(row.features.has_whois() ? "1" : "0");
        out << csv::join(f) << '\n';
    }
}

inline std::vector<FeatureRow> read_feature_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::FormatError, "feature CSV missing header");
    auto header = csv::split_line(csv::chomp(line));
    if (header != feature_csv_header()) throw Error(ErrorCode::FormatError, "unexpected feature CSV header");
    std::vector<FeatureRow> rows;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        auto text = csv::chomp(line);
        if (text.empty()) continue;
        auto f = csv::split_line(text);
        if (f.size() != header.size()) {
            throw Error(ErrorCode::FormatError, "row " + std::to_string(row) + ": wrong field count");
        }
        FeatureRow r;
        r.domain = f[0];
        auto label = parse_label(f[1]);
        if (!label) throw Error(ErrorCode::FormatError, "row " + std::to_string(row) + ": bad label");
        r.features.label = *label;
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            if (f[2 + i].empty()) continue;
            r.features.values[i] = parse_number(f[2 + i]);
            r.features.available[i] = true;
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace sitewatch
