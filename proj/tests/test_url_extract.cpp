#include "bibcoup/url_extract.hpp"

#include "bibcoup/common.hpp"
#include "support/test_util.hpp"

#include <doctest.h>

#include <map>

using namespace bibcoup;

TEST_CASE("empty text yields no urls") {
    CHECK(extract_urls("").empty());
    CHECK(extract_urls("no links here").empty());
}

TEST_CASE("punctuation stripping") {
    auto urls = extract_urls("see https://example.org/a and http://b.co.");
    REQUIRE(urls.size() == 2);
    CHECK(urls[0] == "https://example.org/a");
    CHECK(urls[1] == "http://b.co");
}

TEST_CASE("urls appear in order of appearance") {
    auto urls = extract_urls(
        "first http://one.example/1 then http://two.example/2");
    REQUIRE(urls.size() == 2);
    CHECK(urls[0] == "http://one.example/1");
    CHECK(urls[1] == "http://two.example/2");
}

TEST_CASE("scheme matching is case-insensitive, boundary enforced") {
    CHECK(extract_urls("HTTPS://EXAMPLE.ORG/X").size() == 1);
    CHECK(extract_urls("xhttps://example.org/no").empty());
    CHECK(extract_urls("9http://example.org/no").empty());
    CHECK(extract_urls("(https://example.org/yes)").size() == 1);
}

TEST_CASE("invalid authorities are rejected") {
    CHECK(extract_urls("dangling https:// scheme").empty());
    CHECK(extract_urls("empty http:///path host").empty());
    CHECK(extract_urls("https://.").empty());
}

TEST_CASE("fixture corpus multiset matches the manifest") {
    std::map<std::string, int> got;
    for (const std::string& line :
         read_lines(testutil::fixture_path("url_corpus.txt"))) {
        for (const std::string& url : extract_urls(line)) ++got[url];
    }
    std::map<std::string, int> expected;
    for (const auto& row :
         testutil::read_tsv(testutil::manifest_path("url_corpus_urls.tsv"))) {
        REQUIRE(row.size() == 2);
        expected[row[0]] = std::stoi(row[1]);
    }
    CHECK(got == expected);
}

TEST_CASE("provenance attaches to every url") {
    auto urls = extract_urls("x https://a.example/1 y https://b.example/2",
                             "m1", "c1");
    REQUIRE(urls.size() == 2);
    for (const RawUrl& u : urls) {
        CHECK(u.message_id == "m1");
        CHECK(u.channel_id == "c1");
    }
}
