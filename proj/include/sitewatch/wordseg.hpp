// wordseg.hpp - dictionary word segmentation of domain labels.
//
// Words carry a Zipf-style cost ln(rank * ln(N + 1)); unknown substrings cost
// ln((N + 1) * ln(N + 1)) per character, so every string has a segmentation.
// A minimum-cost dynamic program splits each alphabetic run; digit runs are
// emitted as their own tokens and any other character is a hard boundary.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "core.hpp"

namespace sitewatch::wordseg {

class Lexicon {
public:
    Lexicon() = default;

    /// `cost_basis` overrides N in the cost formula; by default N is the
    /// number of distinct words. Holding it fixed makes costs independent of
    /// later additions.
    explicit Lexicon(std::vector<std::string> words, std::optional<std::size_t> cost_basis = std::nullopt) {
        for (auto& w : words) add(std::move(w));
        cost_basis_ = cost_basis;
    }

    static Lexicon load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw Error(ErrorCode::FileNotFound, path.string());
        Lexicon lex;
        std::string line;
        while (std::getline(in, line)) {
            auto w = lower_trim(line);
            if (!w.empty() && std::all_of(w.begin(), w.end(), [](char c) { return c >= 'a' && c <= 'z'; })) {
                lex.add(std::move(w));
            }
        }
        return lex;
    }

    /// Appends a word at the next rank; repeated words keep their first rank.
    void add(std::string word) {
        if (word.empty() || rank_.count(word)) return;
        max_word_len_ = std::max(max_word_len_, word.size());
        words_.push_back(word);
        rank_.emplace(std::move(word), words_.size());
    }

    std::size_t size() const { return words_.size(); }
    std::size_t cost_basis() const { return cost_basis_.value_or(words_.size()); }
    std::size_t max_word_len() const { return max_word_len_; }
    const std::vector<std::string>& words() const { return words_; }

    std::optional<std::size_t> rank(std::string_view word) const {
        auto it = rank_.find(std::string(word));
        if (it == rank_.end()) return std::nullopt;
        return it->second;
    }

    double rank_cost(std::size_t rank) const {
        double n = static_cast<double>(cost_basis());
        return std::log(static_cast<double>(rank) * std::log(n + 1.0));
    }

    double unknown_char_cost() const {
        double n = static_cast<double>(cost_basis());
        return std::log((n + 1.0) * std::log(n + 1.0));
    }

    /// Cost of `piece` as a single token: its word cost if known, otherwise the
    /// per-character penalty times its length.
    double piece_cost(std::string_view piece) const {
        if (piece.size() <= max_word_len_) {
            if (auto r = rank(piece)) return rank_cost(*r);
        }
        return unknown_char_cost() * static_cast<double>(piece.size());
    }

private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, std::size_t> rank_;
    std::size_t max_word_len_ = 0;
    std::optional<std::size_t> cost_basis_;
};

struct Segmentation {
    std::vector<std::string> pieces;
    /// Byte offset of each piece in the input.
    std::vector<std::size_t> offsets;
    /// Sum of piece costs left to right; digit tokens cost nothing.
    double total_cost = 0;
};

namespace detail {

struct Cell {
    double cost = std::numeric_limits<double>::infinity();
    std::size_t pieces = 0;
    std::size_t from = 0;
};

/// Optimal split of one alphabetic run. Ties on cost go to fewer pieces, then
/// to the longer final piece. Unknown pieces may span the whole run.
inline std::vector<std::pair<std::size_t, std::size_t>> split_run(std::string_view run, const Lexicon& lex) {
    std::vector<Cell> best(run.size() + 1);
    best[0].cost = 0;
    for (std::size_t i = 1; i <= run.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            double c = best[j].cost + lex.piece_cost(run.substr(j, i - j));
            std::size_t p = best[j].pieces + 1;
            if (c < best[i].cost || (c == best[i].cost && p < best[i].pieces)) {
                best[i] = {c, p, j};
            }
        }
    }
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (std::size_t i = run.size(); i > 0; i = best[i].from) spans.emplace_back(best[i].from, i);
    std::reverse(spans.begin(), spans.end());
    return spans;
}

}  // namespace detail

inline Segmentation segment(std::string_view input, const Lexicon& lex) {
    std::string s = lower_trim(input);
    Segmentation seg;
    std::size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (c >= 'a' && c <= 'z') {
            std::size_t j = i;
            while (j < s.size() && s[j] >= 'a' && s[j] <= 'z') ++j;
            std::string_view run(s.data() + i, j - i);
            for (auto [from, to] : detail::split_run(run, lex)) {
                seg.pieces.emplace_back(run.substr(from, to - from));
                seg.offsets.push_back(i + from);
            }
            i = j;
        } else if (c >= '0' && c <= '9') {
            std::size_t j = i;
            while (j < s.size() && s[j] >= '0' && s[j] <= '9') ++j;
            seg.pieces.emplace_back(s.substr(i, j - i));
            seg.offsets.push_back(i);
            i = j;
        } else {
            ++i;
        }
    }
    for (const auto& p : seg.pieces) {
        if (p.front() >= 'a' && p.front() <= 'z') seg.total_cost += lex.piece_cost(p);
    }
    return seg;
}

struct KeywordOptions {
    /// Re-join an alphabetic token with a digit run that directly follows it
    /// ("covid" + "19" -> "covid19").
    bool join_digit_suffix = true;
    /// Adjacent tokens whose concatenation is listed here are reported as one
    /// keyword ("corona" + "virus" -> "coronavirus"). Longest match wins.
    std::unordered_set<std::string> compounds;
};

using KeywordTable = std::vector<std::pair<std::string, std::size_t>>;

/// Keyword tokens for one label after applying the reporting re-joins.
inline std::vector<std::string> label_keywords(std::string_view label, const Lexicon& lex,
                                               const KeywordOptions& opts = {}) {
    auto seg = segment(label, lex);
    auto contiguous = [&](std::size_t a, std::size_t b) {
        return seg.offsets[a] + seg.pieces[a].size() == seg.offsets[b];
    };
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < seg.pieces.size()) {
        std::size_t take = 1;
        std::string joined = seg.pieces[i];
        if (!opts.compounds.empty()) {
            std::string acc = seg.pieces[i];
            for (std::size_t k = i + 1; k < seg.pieces.size() && contiguous(k - 1, k); ++k) {
                acc += seg.pieces[k];
                if (opts.compounds.count(acc)) {
                    take = k - i + 1;
                    joined = acc;
                }
            }
        }
        std::size_t last = i + take - 1;
        bool alpha_end = seg.pieces[last].back() >= 'a' && seg.pieces[last].back() <= 'z';
        if (opts.join_digit_suffix && alpha_end && last + 1 < seg.pieces.size() && contiguous(last, last + 1) &&
            seg.pieces[last + 1].front() >= '0' && seg.pieces[last + 1].front() <= '9') {
            joined += seg.pieces[last + 1];
            ++take;
        }
        out.push_back(std::move(joined));
        i += take;
    }
    return out;
}

/// Segments every non-TLD label and ranks tokens by descending count, then
/// lexicographically.
inline KeywordTable extract_keywords(const std::vector<DomainName>& domains, const Lexicon& lex,
                                     const KeywordOptions& opts = {}) {
    std::map<std::string, std::size_t> counts;
    for (const auto& d : domains) {
        std::size_t n = d.labels.size() > 1 ? d.labels.size() - 1 : d.labels.size();
        for (std::size_t i = 0; i < n; ++i) {
            for (auto& k : label_keywords(d.labels[i], lex, opts)) ++counts[k];
        }
    }
    KeywordTable table(counts.begin(), counts.end());
    std::stable_sort(table.begin(), table.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return table;
}

}  // namespace sitewatch::wordseg
