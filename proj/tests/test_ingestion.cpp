#include <gtest/gtest.h>

#include <sstream>

#include <sitewatch/ingestion.hpp>

#include "support/files.hpp"

using namespace sitewatch;
using testfs::TempDir;
using testfs::write_file;

namespace {

WebsiteRecord rec(const std::string& domain, Label label, bool complete) {
    WebsiteRecord r;
    r.domain = normalize_domain(domain);
    r.label = label;
    r.source = "t";
    if (complete) r.whois = WhoisRecord{"r", make_date(2020, 1, 1), make_date(2021, 1, 1), make_date(2020, 2, 1)};
    return r;
}

}  // namespace

TEST(LoadDomains, MapsFields) {
    TempDir dir;
    write_file(dir / "m.csv", "domain,first_seen\nany.com,2020-03-25\n");
    auto r = load_domains(dir / "m.csv", Label::malicious, "m");
    ASSERT_EQ(r.records.size(), 1u);
    EXPECT_EQ(r.records[0].domain.canonical, "any.com");
    EXPECT_EQ(r.records[0].first_seen, make_date(2020, 3, 25));
    EXPECT_EQ(r.records[0].label, Label::malicious);
    EXPECT_EQ(r.records[0].source, "m");
    EXPECT_TRUE(r.skips.empty());
}

TEST(LoadDomains, SkipsBadRowsWithLineNumbers) {
    TempDir dir;
    write_file(dir / "m.csv",
               "\xEF\xBB\xBF" "Domain , First_Seen\n,2020-01-01\nok.com,\nbad name.com,2020-01-01\nx.com,13/01/2020\n\n"
               "ok.com,2020-02-02\n");
    auto r = load_domains(dir / "m.csv", Label::malicious, "m");
    ASSERT_EQ(r.records.size(), 1u);
    EXPECT_EQ(r.records[0].first_seen, make_date(2020, 2, 2));
    EXPECT_EQ(r.duplicates, 1u);
    ASSERT_EQ(r.skips.size(), 3u);
    EXPECT_EQ(r.skips[0].row, 2u);
    EXPECT_EQ(r.skips[0].reason, "empty domain");
    EXPECT_EQ(r.skips[1].row, 4u);
    EXPECT_EQ(r.skips[2].row, 5u);
}

TEST(LoadDomains, Errors) {
    TempDir dir;
    EXPECT_THROW(load_domains(dir / "missing.csv", Label::benign, "b"), Error);
    write_file(dir / "h.csv", "url\nany.com\n");
    try {
        load_domains(dir / "h.csv", Label::benign, "b");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::FormatError);
    }
}

TEST(Merge, UnionDeduplicates) {
    std::vector<std::vector<WebsiteRecord>> feeds{{rec("a.com", Label::malicious, false)},
                                                  {rec("a.com", Label::malicious, false), rec("b.com", Label::malicious, false)}};
    MergeStats stats;
    auto ds = merge_records(feeds, make_date(2020, 8, 7), &stats);
    EXPECT_EQ(ds.records.size(), 2u);
    EXPECT_EQ(stats.duplicates, 1u);
    EXPECT_EQ(stats.label_conflicts, 0u);
}

TEST(Merge, MaliciousWinsConflictsInEitherOrder) {
    for (bool malicious_first : {true, false}) {
        auto m = rec("a.com", Label::malicious, false);
        auto b = rec("a.com", Label::benign, false);
        std::vector<std::vector<WebsiteRecord>> feeds =
            malicious_first ? std::vector<std::vector<WebsiteRecord>>{{m}, {b}}
                            : std::vector<std::vector<WebsiteRecord>>{{b}, {m}};
        MergeStats stats;
        auto ds = merge_records(feeds, make_date(2020, 8, 7), &stats);
        ASSERT_EQ(ds.records.size(), 1u);
        EXPECT_EQ(ds.records[0].label, Label::malicious);
        EXPECT_EQ(stats.label_conflicts, 1u);
        EXPECT_EQ(stats.conflict_domains, std::vector<std::string>{"a.com"});
    }
}

TEST(AttachWhois, CompleteRowJoins) {
    TempDir dir;
    write_file(dir / "w.jsonl",
               R"({"domain":"A.com","registrar_name":"R","creation_date":"2020-01-01","expiration_date":"2021-01-01","updated_date":"2020-02-01"})"
               "\n");
    std::vector<WebsiteRecord> records{rec("a.com", Label::malicious, false)};
    auto r = attach_whois(records, dir / "w.jsonl");
    EXPECT_EQ(r.matched, 1u);
    ASSERT_TRUE(records[0].whois);
    EXPECT_TRUE(records[0].whois_complete());
    EXPECT_EQ(records[0].whois->creation_date, make_date(2020, 1, 1));
}

TEST(AttachWhois, InconsistentRowRejected) {
    TempDir dir;
    write_file(dir / "w.jsonl",
               R"({"domain":"a.com","registrar_name":"R","creation_date":"2022-01-01","expiration_date":"2021-01-01","updated_date":"2020-02-01"})"
               "\nnot json\n"
               R"({"domain":"b.com","creation_date":"yesterday"})"
               "\n");
    std::vector<WebsiteRecord> records{rec("a.com", Label::malicious, false), rec("b.com", Label::benign, false)};
    auto r = attach_whois(records, dir / "w.jsonl");
    EXPECT_EQ(r.rejected, 1u);
    EXPECT_FALSE(records[0].whois);
    ASSERT_TRUE(records[1].whois);
    EXPECT_FALSE(records[1].whois->creation_date);
    ASSERT_EQ(r.issues.size(), 3u);
    EXPECT_EQ(r.issues[1].row, 2u);
}

TEST(Partition, CountsAndBoundaries) {
    Dataset ds;
    ds.records = {rec("a.com", Label::malicious, true), rec("b.com", Label::malicious, false),
                  rec("c.com", Label::benign, true), rec("d.com", Label::benign, false), rec("e.com", Label::benign, true)};
    auto p = partition(ds);
    EXPECT_EQ(p.with_whois.records.size(), 3u);
    EXPECT_EQ(p.without_whois.records.size(), 2u);

    Dataset all;
    all.records = {rec("a.com", Label::malicious, true)};
    EXPECT_TRUE(partition(all).without_whois.records.empty());
}

TEST(Partition, IncompleteWhoisRoutedToWithout) {
    Dataset ds;
    for (int i = 0; i < 100; ++i) {
        auto r = rec("m" + std::to_string(i) + ".com", Label::malicious, true);
        if (i < 19) r.whois->registrar_name.reset();
        ds.records.push_back(r);
    }
    auto p = partition(ds);
    EXPECT_EQ(p.without_whois.records.size(), 19u);
    for (const auto& r : p.without_whois.records) EXPECT_FALSE(r.whois_complete());
}

TEST(DatasetFiles, RoundTrip) {
    TempDir dir;
    auto a = rec("a.com", Label::malicious, true);
    a.first_seen = make_date(2020, 3, 25);
    std::vector<WebsiteRecord> records{a, rec("b.org", Label::benign, false)};
    {
        std::ofstream out(dir / "d.jsonl");
        write_records(out, records);
    }
    auto back = read_records(dir / "d.jsonl");
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].domain.canonical, "a.com");
    EXPECT_EQ(back[0].first_seen, a.first_seen);
    EXPECT_EQ(*back[0].whois, *a.whois);
    EXPECT_FALSE(back[1].whois);
    EXPECT_EQ(back[1].label, Label::benign);

    std::ostringstream again;
    write_records(again, back);
    EXPECT_EQ(again.str(), testfs::read_file(dir / "d.jsonl"));
}

TEST(SkipReport, OneJsonObjectPerLine) {
    std::ostringstream out;
    write_skip_report(out, {{"f.csv", 3, "empty domain"}});
    EXPECT_EQ(out.str(), "{\"file\":\"f.csv\",\"row\":3,\"reason\":\"empty domain\"}\n");
}
