#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace bibcoup {

/// Public-suffix rule set in the standard list file format (one rule per
/// line, `//` comments, `*` wildcard labels, `!` exception rules).
class PublicSuffixList {
public:
    /// Built-in minimal rule set covering common suffixes.
    PublicSuffixList();

    static PublicSuffixList from_file(const std::string& path);
    static PublicSuffixList from_rules(const std::vector<std::string>& rules);

    /// Number of labels in the public suffix of `labels`, per the published
    /// matching algorithm (exception rules prevail, then the longest rule,
    /// then the implicit single-label rule).
    std::size_t public_suffix_len(const std::vector<std::string>& labels) const;

    /// Registrable domain of a lowercase ASCII hostname: public suffix plus
    /// one label. Empty optional when the host is itself a public suffix.
    std::optional<std::string> registrable(const std::string& host) const;

    std::size_t rule_count() const { return rule_count_; }

private:
    void add_rule(std::string_view rule);

    std::unordered_set<std::string> exact_;
    std::unordered_set<std::string> wildcard_bases_;  // rule "*.X" keyed by X
    std::unordered_set<std::string> exceptions_;
    std::size_t rule_count_ = 0;
};

/// Punycode (RFC 3492) encoding of one UTF-8 label, without the xn-- prefix.
/// Empty optional on invalid UTF-8 or overflow.
std::optional<std::string> punycode_encode(std::string_view utf8_label);

/// ASCII form of a UTF-8 hostname: each non-ASCII label punycode-encoded and
/// prefixed with xn--.
std::optional<std::string> host_to_ascii(const std::string& host);

/// Reduces URLs (or bare hostnames) to registrable domains. Hostnames in the
/// exception set pass through verbatim; IPv4/IPv6 literals are kept whole;
/// naive mode takes the last two labels instead of consulting suffix rules.
class DomainNormalizer {
public:
    DomainNormalizer(PublicSuffixList psl,
                     std::unordered_set<std::string> exception_hosts,
                     bool naive_sld = false);

    /// Hostnames the production runs retain in full by default.
    static std::unordered_set<std::string> default_exceptions();

    std::optional<std::string> normalize(std::string_view url) const;

    /// Authority host of a URL or bare domain: lowercased, userinfo and port
    /// stripped, trailing dots removed. No punycode step.
    static std::optional<std::string> host_of(std::string_view url);

    bool naive_sld() const { return naive_; }

private:
    PublicSuffixList psl_;
    std::unordered_set<std::string> exceptions_;
    bool naive_;
};

}  // namespace bibcoup
