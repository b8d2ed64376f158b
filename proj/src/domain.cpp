#include "bibcoup/domain.hpp"

#include "bibcoup/common.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>

namespace bibcoup {

namespace {

const char* kBuiltinRules[] = {
    "com", "org", "net", "edu", "gov", "mil", "int",  "io", "co",
    "me",  "tv",  "info", "biz", "dev", "app", "uk",  "co.uk",
    "org.uk", "ac.uk", "gov.uk", "de", "fr", "ru", "ua", "es", "it",
    "nl", "se", "no", "jp", "cn", "in", "us", "ca", "eu", "br",
    "com.br", "au", "com.au", "ph", "ly", "gl",
};

}  // namespace

PublicSuffixList::PublicSuffixList() {
    for (const char* r : kBuiltinRules) add_rule(r);
}

PublicSuffixList PublicSuffixList::from_file(const std::string& path) {
    PublicSuffixList psl;
    psl.exact_.clear();
    psl.wildcard_bases_.clear();
    psl.exceptions_.clear();
    psl.rule_count_ = 0;
    for (const std::string& raw : read_lines(path)) {
        std::string line = trim(raw);
        if (line.empty() || line.rfind("//", 0) == 0) continue;
        psl.add_rule(line);
    }
    return psl;
}

PublicSuffixList PublicSuffixList::from_rules(
    const std::vector<std::string>& rules) {
    PublicSuffixList psl;
    psl.exact_.clear();
    psl.wildcard_bases_.clear();
    psl.exceptions_.clear();
    psl.rule_count_ = 0;
    for (const std::string& r : rules) psl.add_rule(r);
    return psl;
}

void PublicSuffixList::add_rule(std::string_view rule) {
    std::string r = ascii_lower(rule);
    ++rule_count_;
    bool exception = false;
    if (r.size() > 1 && r[0] == '!') {
        exception = true;
        r = r.substr(1);
    }
    // The published list carries internationalized rules in Unicode; hosts
    // are matched in punycode form, so rules convert at load time.
    if (auto ascii = host_to_ascii(r)) {
        r = std::move(*ascii);
    }
    if (exception) {
        exceptions_.insert(std::move(r));
    } else if (r.rfind("*.", 0) == 0) {
        wildcard_bases_.insert(r.substr(2));
    } else {
        exact_.insert(std::move(r));
    }
}

std::size_t PublicSuffixList::public_suffix_len(
    const std::vector<std::string>& labels) const {
    const std::size_t n = labels.size();
    std::size_t best = 0;
    std::size_t exception_len = 0;
    bool has_exception = false;

    std::string suffix;
    for (std::size_t i = n; i-- > 0;) {
        if (suffix.empty()) {
            suffix = labels[i];
        } else {
            suffix = labels[i] + "." + suffix;
        }
        const std::size_t len = n - i;
        if (exceptions_.count(suffix)) {
            has_exception = true;
            exception_len = std::max(exception_len, len - 1);
        }
        if (exact_.count(suffix)) best = std::max(best, len);
        // "*.base" matches one extra label in front of base.
        if (i > 0 && wildcard_bases_.count(suffix)) {
            best = std::max(best, len + 1);
        }
    }
    if (has_exception) return exception_len;
    return best > 0 ? best : 1;  // implicit "*" rule
}

std::optional<std::string> PublicSuffixList::registrable(
    const std::string& host) const {
    std::vector<std::string> labels = split(host, '.');
    for (const std::string& l : labels) {
        if (l.empty()) return std::nullopt;
    }
    const std::size_t ps = public_suffix_len(labels);
    if (ps >= labels.size()) return std::nullopt;
    std::string out;
    for (std::size_t i = labels.size() - ps - 1; i < labels.size(); ++i) {
        if (!out.empty()) out += '.';
        out += labels[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Punycode (RFC 3492)

namespace {

constexpr std::uint32_t kBase = 36, kTMin = 1, kTMax = 26, kSkew = 38,
                        kDamp = 700, kInitialBias = 72, kInitialN = 128;

std::uint32_t adapt(std::uint32_t delta, std::uint32_t numpoints,
                    bool firsttime) {
    delta = firsttime ? delta / kDamp : delta / 2;
    delta += delta / numpoints;
    std::uint32_t k = 0;
    while (delta > ((kBase - kTMin) * kTMax) / 2) {
        delta /= kBase - kTMin;
        k += kBase;
    }
    return k + (kBase - kTMin + 1) * delta / (delta + kSkew);
}

char encode_digit(std::uint32_t d) {
    return d < 26 ? static_cast<char>('a' + d) : static_cast<char>('0' + d - 26);
}

std::optional<std::vector<std::uint32_t>> decode_utf8(std::string_view s) {
    std::vector<std::uint32_t> cps;
    std::size_t i = 0;
    while (i < s.size()) {
        const unsigned char b = static_cast<unsigned char>(s[i]);
        std::uint32_t cp = 0;
        std::size_t extra = 0;
        if (b < 0x80) {
            cp = b;
        } else if ((b & 0xE0) == 0xC0) {
            cp = b & 0x1F;
            extra = 1;
        } else if ((b & 0xF0) == 0xE0) {
            cp = b & 0x0F;
            extra = 2;
        } else if ((b & 0xF8) == 0xF0) {
            cp = b & 0x07;
            extra = 3;
        } else {
            return std::nullopt;
        }
        if (extra > 0 && i + extra >= s.size()) return std::nullopt;
        for (std::size_t j = 1; j <= extra; ++j) {
            const unsigned char cb = static_cast<unsigned char>(s[i + j]);
            if ((cb & 0xC0) != 0x80) return std::nullopt;
            cp = (cp << 6) | (cb & 0x3F);
        }
        if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            return std::nullopt;
        }
        cps.push_back(cp);
        i += extra + 1;
    }
    return cps;
}

}  // namespace

std::optional<std::string> punycode_encode(std::string_view utf8_label) {
    auto decoded = decode_utf8(utf8_label);
    if (!decoded) return std::nullopt;
    const std::vector<std::uint32_t>& input = *decoded;

    std::string output;
    for (std::uint32_t cp : input) {
        if (cp < 0x80) output += static_cast<char>(cp);
    }
    const std::uint32_t b = static_cast<std::uint32_t>(output.size());
    std::uint32_t h = b;
    if (b > 0) output += '-';

    std::uint32_t n = kInitialN, delta = 0, bias = kInitialBias;
    const std::uint32_t in_len = static_cast<std::uint32_t>(input.size());
    constexpr std::uint32_t kMax = std::numeric_limits<std::uint32_t>::max();

    while (h < in_len) {
        std::uint32_t m = kMax;
        for (std::uint32_t cp : input) {
            if (cp >= n && cp < m) m = cp;
        }
        if (m - n > (kMax - delta) / (h + 1)) return std::nullopt;  // overflow
        delta += (m - n) * (h + 1);
        n = m;
        for (std::uint32_t cp : input) {
            if (cp < n && ++delta == 0) return std::nullopt;
            if (cp == n) {
                std::uint32_t q = delta;
                for (std::uint32_t k = kBase;; k += kBase) {
                    const std::uint32_t t =
                        k <= bias ? kTMin : (k >= bias + kTMax ? kTMax : k - bias);
                    if (q < t) break;
                    output += encode_digit(t + (q - t) % (kBase - t));
                    q = (q - t) / (kBase - t);
                }
                output += encode_digit(q);
                bias = adapt(delta, h + 1, h == b);
                delta = 0;
                ++h;
            }
        }
        ++delta;
        ++n;
    }
    return output;
}

std::optional<std::string> host_to_ascii(const std::string& host) {
    bool ascii = true;
    for (char c : host) {
        if (static_cast<unsigned char>(c) >= 0x80) {
            ascii = false;
            break;
        }
    }
    if (ascii) return host;

    std::string out;
    for (const std::string& label : split(host, '.')) {
        if (!out.empty()) out += '.';
        bool label_ascii = true;
        for (char c : label) {
            if (static_cast<unsigned char>(c) >= 0x80) {
                label_ascii = false;
                break;
            }
        }
        if (label_ascii) {
            out += label;
        } else {
            auto enc = punycode_encode(label);
            if (!enc) return std::nullopt;
            out += "xn--" + *enc;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// DomainNormalizer

DomainNormalizer::DomainNormalizer(PublicSuffixList psl,
                                   std::unordered_set<std::string> exceptions,
                                   bool naive_sld)
    : psl_(std::move(psl)), exceptions_(std::move(exceptions)), naive_(naive_sld) {}

std::unordered_set<std::string> DomainNormalizer::default_exceptions() {
    return {"books.google.com", "sites.google.com", "scholar.google.com",
            "docs.google.com", "drive.google.com"};
}

std::optional<std::string> DomainNormalizer::host_of(std::string_view url) {
    std::string_view s = url;
    if (auto p = s.find("://"); p != std::string_view::npos) {
        s = s.substr(p + 3);
    }
    for (char c : {'/', '?', '#'}) {
        if (auto p = s.find(c); p != std::string_view::npos) s = s.substr(0, p);
    }
    if (auto p = s.rfind('@'); p != std::string_view::npos) s = s.substr(p + 1);

    if (!s.empty() && s.front() == '[') {
        auto p = s.find(']');
        if (p == std::string_view::npos) return std::nullopt;
        return ascii_lower(s.substr(0, p + 1));  // IPv6 literal, port dropped
    }
    if (auto p = s.find(':'); p != std::string_view::npos) s = s.substr(0, p);

    std::string host = ascii_lower(s);
    while (!host.empty() && host.back() == '.') host.pop_back();
    if (host.empty()) return std::nullopt;
    return host;
}

std::optional<std::string> DomainNormalizer::normalize(
    std::string_view url) const {
    auto host_opt = host_of(url);
    if (!host_opt) return std::nullopt;
    std::string host = std::move(*host_opt);
    if (host.front() == '[') return host;

    std::vector<std::string> labels = split(host, '.');
    bool all_digits = true;
    for (const std::string& l : labels) {
        if (l.empty()) return std::nullopt;
        for (char c : l) {
            if (c < '0' || c > '9') {
                all_digits = false;
                break;
            }
        }
    }

    auto ascii = host_to_ascii(host);
    if (!ascii) return std::nullopt;
    host = std::move(*ascii);

    if (all_digits) return host;  // IPv4 literal
    if (exceptions_.count(host)) return host;
    if (naive_) {
        labels = split(host, '.');
        if (labels.size() < 2) return std::nullopt;
        return labels[labels.size() - 2] + "." + labels.back();
    }
    return psl_.registrable(host);
}

}  // namespace bibcoup
