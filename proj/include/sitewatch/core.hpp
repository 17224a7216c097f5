// core.hpp - domain types shared by every sitewatch module.

#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sitewatch {

/// Every failure surfaced by the library carries one of these codes so
/// callers (and the CLI exit-code mapping) can branch without string matching.
enum class ErrorCode {
    EmptyAfterNormalization,
    InvalidCharacter,
    EmptyLabel,
    FileNotFound,
    FormatError,
    DateParseError,
    ConnectTimeout,
    ReadTimeout,
    ServerRefused,
    EmptyBenignSet,
    NegativeLifetime,
    EmptyTrainingSet,
    KTooLarge,
    NonFiniteLoss,
    MaskMismatch,
    UnavailableFeature,
    WrongMemberCount,
    NotAForest,
    TooSmall,
    UnreachableRatio,
    LengthMismatch,
    EmptyInput,
    InvalidConfig,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::EmptyAfterNormalization: return "EmptyAfterNormalization";
        case ErrorCode::InvalidCharacter: return "InvalidCharacter";
        case ErrorCode::EmptyLabel: return "EmptyLabel";
        case ErrorCode::FileNotFound: return "FileNotFound";
        case ErrorCode::FormatError: return "FormatError";
        case ErrorCode::DateParseError: return "DateParseError";
        case ErrorCode::ConnectTimeout: return "ConnectTimeout";
        case ErrorCode::ReadTimeout: return "ReadTimeout";
        case ErrorCode::ServerRefused: return "ServerRefused";
        case ErrorCode::EmptyBenignSet: return "EmptyBenignSet";
        case ErrorCode::NegativeLifetime: return "NegativeLifetime";
        case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
        case ErrorCode::KTooLarge: return "KTooLarge";
        case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorCode::MaskMismatch: return "MaskMismatch";
        case ErrorCode::UnavailableFeature: return "UnavailableFeature";
        case ErrorCode::WrongMemberCount: return "WrongMemberCount";
        case ErrorCode::NotAForest: return "NotAForest";
        case ErrorCode::TooSmall: return "TooSmall";
        case ErrorCode::UnreachableRatio: return "UnreachableRatio";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// ---------------------------------------------------------------------------
// Dates

using Date = std::chrono::year_month_day;

inline Date make_date(int y, unsigned m, unsigned d) {
    return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

/// Whole-day difference `to - from`.
inline std::int64_t days_between(const Date& from, const Date& to) {
    return (std::chrono::sys_days{to} - std::chrono::sys_days{from}).count();
}

/// Parses YYYY-MM-DD. Anything after the tenth character is accepted only if
/// it starts with 'T' or a space (a timestamp), and is discarded.
inline std::optional<Date> parse_iso_date(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    if (text.size() < 10) return std::nullopt;
    if (text.size() > 10 && text[10] != 'T' && text[10] != 't' && text[10] != ' ') return std::nullopt;
    auto digits = [&](std::size_t pos, std::size_t n, int& out) {
        out = 0;
        for (std::size_t i = pos; i < pos + n; ++i) {
            if (!std::isdigit(static_cast<unsigned char>(text[i]))) return false;
            out = out * 10 + (text[i] - '0');
        }
        return true;
    };
    int y = 0, m = 0, d = 0;
    if (!digits(0, 4, y) || text[4] != '-' || !digits(5, 2, m) || text[7] != '-' || !digits(8, 2, d)) {
        return std::nullopt;
    }
    Date date = make_date(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
    if (!date.ok()) return std::nullopt;
    return date;
}

inline std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

inline Date today_utc() {
    return Date{std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now())};
}

// ---------------------------------------------------------------------------
// Labels

/// Malicious is the positive class for every metric.
enum class Label : std::uint8_t { benign = 0, malicious = 1 };

inline const char* to_string(Label l) { return l == Label::malicious ? "malicious" : "benign"; }

inline std::optional<Label> parse_label(std::string_view s) {
    if (s == "malicious" || s == "1") return Label::malicious;
    if (s == "benign" || s == "0") return Label::benign;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Domain names

struct DomainName {
    std::string raw;
    std::string canonical;
    std::vector<std::string> labels;

    const std::string& tld() const { return labels.back(); }

    friend bool operator==(const DomainName& a, const DomainName& b) { return a.canonical == b.canonical; }
};

inline bool is_domain_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '.' || c == '_';
}

/// Strips scheme, path, port and one trailing dot, lowercases, then splits
/// into labels. Punycode labels are kept verbatim.
inline DomainName normalize_domain(std::string_view raw) {
    std::string_view s = raw;
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);

    if (auto scheme = s.find("://"); scheme != std::string_view::npos) s.remove_prefix(scheme + 3);
    if (auto path = s.find_first_of("/?#"); path != std::string_view::npos) s = s.substr(0, path);
    if (auto port = s.find(':'); port != std::string_view::npos) s = s.substr(0, port);
    if (!s.empty() && s.back() == '.') s.remove_suffix(1);

    if (s.empty()) throw Error(ErrorCode::EmptyAfterNormalization, "'" + std::string(raw) + "'");

    DomainName out;
    out.raw = std::string(raw);
    out.canonical.reserve(s.size());
    for (char c : s) {
        char lc = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (!is_domain_char(lc)) {
            throw Error(ErrorCode::InvalidCharacter, "'" + std::string(raw) + "'");
        }
        out.canonical.push_back(lc);
    }

    std::size_t start = 0;
    while (true) {
        auto dot = out.canonical.find('.', start);
        std::string label = out.canonical.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (label.empty()) throw Error(ErrorCode::EmptyLabel, "'" + std::string(raw) + "'");
        out.labels.push_back(std::move(label));
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Records

inline std::string lower_trim(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

/// Registrar names are compared lowercased and whitespace-trimmed.
inline std::string normalize_registrar(std::string_view name) { return lower_trim(name); }

struct WhoisRecord {
    std::optional<std::string> registrar_name;
    std::optional<Date> creation_date;
    std::optional<Date> expiration_date;
    std::optional<Date> updated_date;

    /// All four fields present. An empty registrar string counts as absent.
    bool complete() const {
        return registrar_name && !registrar_name->empty() && creation_date && expiration_date && updated_date;
    }

    bool consistent() const { return !(creation_date && expiration_date) || *creation_date <= *expiration_date; }

    friend bool operator==(const WhoisRecord&, const WhoisRecord&) = default;
};

struct WebsiteRecord {
    DomainName domain;
    Label label = Label::benign;
    std::optional<Date> first_seen;
    std::string source;
    std::optional<WhoisRecord> whois;

    bool whois_complete() const { return whois && whois->complete(); }
};

}  // namespace sitewatch
