#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include <sitewatch/core.hpp>
#include <sitewatch/csv.hpp>
#include <sitewatch/random.hpp>

#include "support/oracles.hpp"

using namespace sitewatch;

TEST(NormalizeDomain, PlainName) {
    auto d = normalize_domain("any.com");
    EXPECT_EQ(d.canonical, "any.com");
    EXPECT_EQ(d.tld(), "com");
    EXPECT_EQ(d.labels.size(), 2u);
}

TEST(NormalizeDomain, StripsSchemePathAndTrailingDot) {
    EXPECT_EQ(normalize_domain("HTTPS://Example.COM./path").canonical, "example.com");
    EXPECT_EQ(normalize_domain("  http://a.b.co.uk:8080/x?y#z ").canonical, "a.b.co.uk");
    EXPECT_EQ(normalize_domain("covid19.com?ref=1").canonical, "covid19.com");
}

TEST(NormalizeDomain, KeepsLongSingleLabel) {
    auto d = normalize_domain("coronaviruspreventionsanantonio.com");
    ASSERT_EQ(d.labels.size(), 2u);
    EXPECT_EQ(d.labels[0], "coronaviruspreventionsanantonio");
    EXPECT_EQ(d.labels[1], "com");
}

TEST(NormalizeDomain, PunycodeIsVerbatim) {
    EXPECT_EQ(normalize_domain("xn--coronavrus-xyz.com").canonical, "xn--coronavrus-xyz.com");
}

TEST(NormalizeDomain, Errors) {
    auto code_of = [](const char* raw) {
        try {
            normalize_domain(raw);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::InvalidConfig;
    };
    EXPECT_EQ(code_of(""), ErrorCode::EmptyAfterNormalization);
    EXPECT_EQ(code_of("   "), ErrorCode::EmptyAfterNormalization);
    EXPECT_EQ(code_of("https:///path"), ErrorCode::EmptyAfterNormalization);
    EXPECT_EQ(code_of("bad domain.com"), ErrorCode::InvalidCharacter);
    EXPECT_EQ(code_of("caf\xc3\xa9.com"), ErrorCode::InvalidCharacter);
    EXPECT_EQ(code_of("a..com"), ErrorCode::EmptyLabel);
    EXPECT_EQ(code_of(".com"), ErrorCode::EmptyLabel);
}

TEST(NormalizeDomain, Idempotent) {
    for (const char* raw : {"HTTPS://Example.COM./path", "A-B.Co.UK", "covid19.com", "x.y.z"}) {
        auto once = normalize_domain(raw).canonical;
        EXPECT_EQ(normalize_domain(once).canonical, once);
    }
}

TEST(Dates, ParseAndFormat) {
    auto d = parse_iso_date("2020-03-25");
    ASSERT_TRUE(d);
    EXPECT_EQ(format_date(*d), "2020-03-25");
    EXPECT_EQ(parse_iso_date("2020-03-01T00:00:00Z"), make_date(2020, 3, 1));
    EXPECT_EQ(parse_iso_date(" 2019-01-02 12:00 "), make_date(2019, 1, 2));
    EXPECT_FALSE(parse_iso_date("2020-02-30"));
    EXPECT_FALSE(parse_iso_date("2020/03/25"));
    EXPECT_FALSE(parse_iso_date("2020-03-25x"));
    EXPECT_FALSE(parse_iso_date(""));
}

TEST(Dates, DaysBetweenMatchesCalendarOracle) {
    EXPECT_EQ(days_between(make_date(2020, 1, 1), make_date(2020, 8, 7)), 219);
    EXPECT_EQ(days_between(make_date(2020, 8, 7), make_date(2021, 1, 1)), 147);
    Rng rng(3);
    for (int i = 0; i < 500; ++i) {
        auto draw = [&] {
            int y = 1990 + static_cast<int>(uniform_index(rng, 41));
            int m = 1 + static_cast<int>(uniform_index(rng, 12));
            int d = 1 + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(oracle::month_length(y, m))));
            return oracle::YMD{y, m, d};
        };
        auto a = draw(), b = draw();
        EXPECT_EQ(days_between(make_date(a.y, a.m, a.d), make_date(b.y, b.m, b.d)),
                  oracle::day_number(b.y, b.m, b.d) - oracle::day_number(a.y, a.m, a.d));
    }
}

TEST(Labels, Parse) {
    EXPECT_EQ(parse_label("malicious"), Label::malicious);
    EXPECT_EQ(parse_label("0"), Label::benign);
    EXPECT_FALSE(parse_label("phish"));
    EXPECT_STREQ(to_string(Label::benign), "benign");
}

TEST(Whois, CompletenessRequiresRegistrar) {
    WhoisRecord w{"", make_date(2020, 1, 1), make_date(2021, 1, 1), make_date(2020, 1, 2)};
    EXPECT_FALSE(w.complete());
    w.registrar_name = "r";
    EXPECT_TRUE(w.complete());
    EXPECT_TRUE(w.consistent());
    w.creation_date = make_date(2022, 1, 1);
    EXPECT_FALSE(w.consistent());
}

TEST(Csv, SplitQuotedFields) {
    auto f = csv::split_line(R"(a,"b,c","say ""hi""",)");
    ASSERT_EQ(f.size(), 4u);
    EXPECT_EQ(f[1], "b,c");
    EXPECT_EQ(f[2], "say \"hi\"");
    EXPECT_EQ(f[3], "");
    EXPECT_EQ(csv::escape("x,y"), "\"x,y\"");
    EXPECT_EQ(csv::escape("plain"), "plain");
    EXPECT_EQ(csv::split_line(csv::escape("q\"uote,comma")).at(0), "q\"uote,comma");
}

TEST(Random, DeriveSeedSeparatesStagesAndIndices) {
    std::set<std::uint64_t> seeds;
    for (std::uint64_t i = 0; i < 100; ++i) {
        seeds.insert(derive_seed(7, "forest.tree", i));
        seeds.insert(derive_seed(7, "split", i));
    }
    EXPECT_EQ(seeds.size(), 200u);
    EXPECT_EQ(derive_seed(7, "split"), derive_seed(7, "split"));
    EXPECT_NE(derive_seed(7, "split"), derive_seed(8, "split"));
}

TEST(Random, UniformIndexInRangeAndShuffleIsPermutation) {
    Rng rng(11);
    std::vector<int> hist(7, 0);
    for (int i = 0; i < 7000; ++i) ++hist[uniform_index(rng, 7)];
    for (int h : hist) EXPECT_GT(h, 800);

    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    auto w = v;
    shuffle(w, rng);
    EXPECT_NE(v, w);
    std::sort(w.begin(), w.end());
    EXPECT_EQ(v, w);
}

TEST(Random, StreamIsPortable) {
    // The 10000th output of a default-seeded mt19937_64 is fixed by the standard.
    Rng rng;
    rng.discard(9999);
    EXPECT_EQ(rng(), 9981545732273789042ULL);
}
