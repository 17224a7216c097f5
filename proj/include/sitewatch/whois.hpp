// whois.hpp - port 43 WHOIS client and registration-text parser.
//
// The transport is injectable: SocketTransport talks to a live server,
// FixtureTransport replays recorded responses from a directory so tests and
// offline runs never touch the network.

#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <unistd.h>

#include "core.hpp"

namespace sitewatch::whois {

using Clock = std::chrono::steady_clock;

inline constexpr std::size_t kDefaultMaxResponse = 1 << 20;
inline constexpr std::uint16_t kWhoisPort = 43;

// ---------------------------------------------------------------------------
// Parsing

/// Byte offset of each extracted value inside the raw response, for audit.
struct FieldOffsets {
    std::optional<std::size_t> registrar_name;
    std::optional<std::size_t> creation_date;
    std::optional<std::size_t> expiration_date;
    std::optional<std::size_t> updated_date;
};

struct ParsedWhois {
    WhoisRecord record;
    FieldOffsets offsets;
};

namespace detail {

struct KeyFamily {
    std::vector<std::string_view> keys;
};

inline const KeyFamily kCreation{{"creation date", "created", "registered on"}};
inline const KeyFamily kExpiration{{"registry expiry date", "expiration date", "expires"}};
inline const KeyFamily kUpdated{{"updated date", "last updated"}};
inline const KeyFamily kRegistrar{{"registrar:"}};

inline char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

/// If `line` (already left-trimmed) starts with one of the family's keys and a
/// colon follows within a short qualifier ("Expires On:"), returns the offset
/// of the value within `line`.
inline std::optional<std::size_t> match_key(std::string_view line, const KeyFamily& family) {
    for (auto key : family.keys) {
        if (line.size() < key.size()) continue;
        bool eq = true;
        for (std::size_t i = 0; i < key.size(); ++i) {
            if (lower(line[i]) != key[i]) {
                eq = false;
                break;
            }
        }
        if (!eq) continue;
        std::size_t pos = key.size();
        if (key.back() != ':') {
            std::size_t limit = std::min(line.size(), pos + 16);
            while (pos < limit && line[pos] != ':') {
                char c = line[pos];
                if (!(std::isalpha(static_cast<unsigned char>(c)) || c == ' ' || c == '\t' || c == '(' || c == ')')) break;
                ++pos;
            }
            if (pos >= line.size() || line[pos] != ':') continue;
            ++pos;
        }
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
        return pos;
    }
    return std::nullopt;
}

}  // namespace detail

/// Case-insensitive scan for the first line carrying each key family. Never
/// throws; unrecognized or unparsable values leave the field absent.
inline ParsedWhois parse_whois_text_detailed(std::string_view raw) {
    ParsedWhois out;
    bool seen_creation = false, seen_expiration = false, seen_updated = false, seen_registrar = false;

    std::size_t line_start = 0;
    while (line_start < raw.size()) {
        std::size_t line_end = raw.find('\n', line_start);
        if (line_end == std::string_view::npos) line_end = raw.size();
        std::string_view line = raw.substr(line_start, line_end - line_start);
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
        std::size_t indent = 0;
        while (indent < line.size() && (line[indent] == ' ' || line[indent] == '\t')) ++indent;
        line.remove_prefix(indent);
        std::size_t base = line_start + indent;

        auto take_date = [&](const detail::KeyFamily& fam, bool& seen, std::optional<Date>& field,
                             std::optional<std::size_t>& offset) {
            if (seen) return;
            auto pos = detail::match_key(line, fam);
            if (!pos || *pos >= line.size()) return;
            seen = true;
            field = parse_iso_date(line.substr(*pos));
            if (field) offset = base + *pos;
        };
        take_date(detail::kCreation, seen_creation, out.record.creation_date, out.offsets.creation_date);
        take_date(detail::kExpiration, seen_expiration, out.record.expiration_date, out.offsets.expiration_date);
        take_date(detail::kUpdated, seen_updated, out.record.updated_date, out.offsets.updated_date);
        if (!seen_registrar) {
            auto pos = detail::match_key(line, detail::kRegistrar);
            if (pos && *pos < line.size()) {
                seen_registrar = true;
                out.record.registrar_name = std::string(line.substr(*pos));
                out.offsets.registrar_name = base + *pos;
            }
        }
        line_start = line_end + 1;
    }
    return out;
}

inline WhoisRecord parse_whois_text(std::string_view raw) { return parse_whois_text_detailed(raw).record; }

/// Replaces invalid UTF-8 sequences with U+FFFD.
inline std::string decode_utf8_lossy(std::string_view bytes) {
    static constexpr std::string_view kReplacement = "\xEF\xBF\xBD";
    std::string out;
    out.reserve(bytes.size());
    std::size_t i = 0;
    while (i < bytes.size()) {
        auto c = static_cast<unsigned char>(bytes[i]);
        std::size_t len = 0;
        std::uint32_t min = 0;
        if (c < 0x80) len = 1;
        else if ((c & 0xE0) == 0xC0) len = 2, min = 0x80;
        else if ((c & 0xF0) == 0xE0) len = 3, min = 0x800;
        else if ((c & 0xF8) == 0xF0) len = 4, min = 0x10000;

        bool valid = len > 0 && i + len <= bytes.size();
        std::uint32_t cp = len == 1 ? c : (c & (0xFF >> (len + 1)));
        for (std::size_t k = 1; valid && k < len; ++k) {
            auto cc = static_cast<unsigned char>(bytes[i + k]);
            if ((cc & 0xC0) != 0x80) valid = false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        if (valid && len > 1 && (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))) valid = false;
        if (valid) {
            out.append(bytes.substr(i, len));
            i += len;
        } else {
            out.append(kReplacement);
            ++i;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Transports

class Transport {
public:
    virtual ~Transport() = default;

    /// Sends `request` to `server` and returns the raw bytes received until the
    /// peer closes (or `max_bytes` is reached).
    virtual std::string exchange(const std::string& server, const std::string& request,
                                 std::chrono::milliseconds timeout, std::size_t max_bytes) = 0;
};

namespace detail {

class FdGuard {
public:
    explicit FdGuard(int fd) : fd_(fd) {}
    FdGuard(const FdGuard&) = delete;
    FdGuard& operator=(const FdGuard&) = delete;
    ~FdGuard() {
        if (fd_ >= 0) ::close(fd_);
    }
    int get() const { return fd_; }

private:
    int fd_;
};

inline int remaining_ms(Clock::time_point deadline) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    return left > 0 ? static_cast<int>(left) : 0;
}

}  // namespace detail

/// Plain TCP transport. The timeout bounds connect and the whole read
/// separately.
class SocketTransport : public Transport {
public:
    explicit SocketTransport(std::uint16_t port = kWhoisPort) : port_(port) {}

    std::string exchange(const std::string& server, const std::string& request, std::chrono::milliseconds timeout,
                         std::size_t max_bytes) override {
        addrinfo hints{};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo* res = nullptr;
        std::string port = std::to_string(port_);
        if (int rc = ::getaddrinfo(server.c_str(), port.c_str(), &hints, &res); rc != 0) {
            throw Error(ErrorCode::ServerRefused, server + ": " + ::gai_strerror(rc));
        }
        std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> addrs(res, &::freeaddrinfo);

        auto deadline = Clock::now() + timeout;
        ErrorCode last = ErrorCode::ServerRefused;
        for (addrinfo* ai = addrs.get(); ai; ai = ai->ai_next) {
            detail::FdGuard fd(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
            if (fd.get() < 0) continue;
            ::fcntl(fd.get(), F_SETFL, ::fcntl(fd.get(), F_GETFL, 0) | O_NONBLOCK);

            int rc = ::connect(fd.get(), ai->ai_addr, ai->ai_addrlen);
            if (rc < 0 && errno != EINPROGRESS) {
                last = ErrorCode::ServerRefused;
                continue;
            }
            if (rc < 0) {
                pollfd p{fd.get(), POLLOUT, 0};
                int ready = ::poll(&p, 1, detail::remaining_ms(deadline));
                if (ready == 0) {
                    last = ErrorCode::ConnectTimeout;
                    continue;
                }
                int err = 0;
                socklen_t len = sizeof err;
                ::getsockopt(fd.get(), SOL_SOCKET, SO_ERROR, &err, &len);
                if (ready < 0 || err != 0) {
                    last = ErrorCode::ServerRefused;
                    continue;
                }
            }
            return talk(fd.get(), server, request, timeout, max_bytes);
        }
        throw Error(last, server + ":" + port);
    }

private:
    static std::string talk(int fd, const std::string& server, const std::string& request,
                            std::chrono::milliseconds timeout, std::size_t max_bytes) {
        auto deadline = Clock::now() + timeout;
        std::size_t sent = 0;
        while (sent < request.size()) {
            pollfd p{fd, POLLOUT, 0};
            if (::poll(&p, 1, detail::remaining_ms(deadline)) <= 0) throw Error(ErrorCode::ReadTimeout, server);
            ssize_t n = ::send(fd, request.data() + sent, request.size() - sent, MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EAGAIN || errno == EINTR) continue;
                throw Error(ErrorCode::ServerRefused, server + ": " + std::strerror(errno));
            }
            sent += static_cast<std::size_t>(n);
        }

        std::string data;
        char buf[4096];
        while (data.size() < max_bytes) {
            pollfd p{fd, POLLIN, 0};
            int ready = ::poll(&p, 1, detail::remaining_ms(deadline));
            if (ready == 0) throw Error(ErrorCode::ReadTimeout, server);
            if (ready < 0) {
                if (errno == EINTR) continue;
                throw Error(ErrorCode::ServerRefused, server + ": " + std::strerror(errno));
            }
            ssize_t n = ::recv(fd, buf, std::min(sizeof buf, max_bytes - data.size()), 0);
            if (n == 0) break;
            if (n < 0) {
                if (errno == EAGAIN || errno == EINTR) continue;
                throw Error(ErrorCode::ServerRefused, server + ": " + std::strerror(errno));
            }
            data.append(buf, static_cast<std::size_t>(n));
        }
        return data;
    }

    std::uint16_t port_;
};

/// Replays `<dir>/<domain>.txt`. A `<domain>.timeout` file simulates an
/// unreachable server; a missing fixture behaves like a refused connection.
/// Every exchange is logged with its start time.
class FixtureTransport : public Transport {
public:
    struct LogEntry {
        std::string server;
        std::string domain;
        Clock::time_point at;
    };

    explicit FixtureTransport(std::filesystem::path dir) : dir_(std::move(dir)) {}

    std::string exchange(const std::string& server, const std::string& request, std::chrono::milliseconds,
                         std::size_t max_bytes) override {
        std::string domain = request;
        while (!domain.empty() && (domain.back() == '\n' || domain.back() == '\r')) domain.pop_back();
        {
            std::lock_guard lock(mu_);
            log_.push_back({server, domain, Clock::now()});
        }
        if (std::filesystem::exists(dir_ / (domain + ".timeout"))) throw Error(ErrorCode::ConnectTimeout, server);
        std::ifstream in(dir_ / (domain + ".txt"), std::ios::binary);
        if (!in) throw Error(ErrorCode::ServerRefused, server + ": no fixture for " + domain);
        std::ostringstream ss;
        ss << in.rdbuf();
        std::string data = ss.str();
        if (data.size() > max_bytes) data.resize(max_bytes);
        return data;
    }

    std::vector<LogEntry> log() const {
        std::lock_guard lock(mu_);
        return log_;
    }

private:
    std::filesystem::path dir_;
    mutable std::mutex mu_;
    std::vector<LogEntry> log_;
};

// ---------------------------------------------------------------------------
// Fetching

struct WhoisResponse {
    DomainName domain;
    std::string raw_text;
    WhoisRecord parsed;
    FieldOffsets offsets;
    std::string server;
    std::chrono::system_clock::time_point fetched_at;
};

struct FetchOptions {
    std::string server = "whois.verisign-grs.com";
    std::chrono::milliseconds timeout{5000};
    std::size_t max_bytes = kDefaultMaxResponse;
};

/// Single query. No referral chasing: the queried server's answer is final.
inline WhoisResponse fetch_whois(const DomainName& domain, Transport& transport, const FetchOptions& opts = {}) {
    WhoisResponse r;
    r.domain = domain;
    r.server = opts.server;
    r.fetched_at = std::chrono::system_clock::now();
    r.raw_text = decode_utf8_lossy(transport.exchange(opts.server, domain.canonical + "\r\n", opts.timeout,
                                                      opts.max_bytes));
    auto parsed = parse_whois_text_detailed(r.raw_text);
    r.parsed = std::move(parsed.record);
    r.offsets = parsed.offsets;
    return r;
}

struct BatchOptions {
    FetchOptions fetch;
    std::size_t concurrency = 1;
    /// Minimum spacing between two requests to the same server.
    std::chrono::milliseconds politeness_delay{0};
};

struct BatchResult {
    DomainName domain;
    std::optional<WhoisResponse> response;
    std::optional<ErrorCode> error;
    std::string error_message;
};

/// Fetches every domain with up to `concurrency` workers. Errors are captured
/// per domain and never abort the batch. Results keep input order.
inline std::vector<BatchResult> fetch_batch(const std::vector<DomainName>& domains, Transport& transport,
                                            const BatchOptions& opts = {}) {
    std::vector<BatchResult> results(domains.size());
    std::atomic<std::size_t> next{0};
    std::mutex pace_mu;
    std::optional<Clock::time_point> last_slot;

    auto wait_turn = [&] {
        if (opts.politeness_delay.count() <= 0) return;
        Clock::time_point slot;
        {
            std::lock_guard lock(pace_mu);
            auto now = Clock::now();
            slot = last_slot ? std::max(now, *last_slot + opts.politeness_delay) : now;
            last_slot = slot;
        }
        std::this_thread::sleep_until(slot);
    };

    auto worker = [&] {
        for (std::size_t i = next++; i < domains.size(); i = next++) {
            auto& out = results[i];
            out.domain = domains[i];
            wait_turn();
            try {
                out.response = fetch_whois(domains[i], transport, opts.fetch);
            } catch (const Error& e) {
                out.error = e.code();
                out.error_message = e.what();
            } catch (const std::exception& e) {
                out.error = ErrorCode::ServerRefused;
                out.error_message = e.what();
            }
        }
    };

    std::size_t n = std::max<std::size_t>(1, std::min(opts.concurrency, domains.size()));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return results;
}

}  // namespace sitewatch::whois
