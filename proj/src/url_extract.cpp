#include "bibcoup/url_extract.hpp"

namespace bibcoup {

namespace {

bool is_scheme_char(unsigned char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
           (c >= '0' && c <= '9') || c == '+' || c == '.' || c == '-';
}

bool is_break(unsigned char c) {
    return c <= 0x20 || c == 0x7F || c == '<' || c == '>' || c == '"';
}

bool is_strip(unsigned char c) {
    switch (c) {
        case '.': case ',': case ';': case ':':
        case ')': case ']': case '}': case '"': case '\'':
            return true;
        default:
            return false;
    }
}

bool iequals_at(std::string_view s, std::size_t pos, std::string_view lit) {
    if (pos + lit.size() > s.size()) return false;
    for (std::size_t i = 0; i < lit.size(); ++i) {
        unsigned char a = static_cast<unsigned char>(s[pos + i]);
        if (a >= 'A' && a <= 'Z') a = static_cast<unsigned char>(a + 32);
        if (a != static_cast<unsigned char>(lit[i])) return false;
    }
    return true;
}

}  // namespace

std::vector<std::string> extract_urls(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        if (!iequals_at(text, i, "http")) {
            ++i;
            continue;
        }
        std::size_t k = i + 4;
        if (k < n && (text[k] == 's' || text[k] == 'S')) ++k;
        if (!iequals_at(text, k, "://")) {
            ++i;
            continue;
        }
        if (i > 0 && is_scheme_char(static_cast<unsigned char>(text[i - 1]))) {
            ++i;
            continue;
        }
        const std::size_t scheme_len = k + 3 - i;
        std::size_t e = k + 3;
        while (e < n && !is_break(static_cast<unsigned char>(text[e]))) ++e;

        std::size_t len = e - i;
        while (len > scheme_len &&
               is_strip(static_cast<unsigned char>(text[i + len - 1]))) {
            --len;
        }
        std::string_view rest = text.substr(i + scheme_len, len - scheme_len);
        if (!rest.empty() && rest[0] != '/' && rest[0] != '?' && rest[0] != '#') {
            out.emplace_back(text.substr(i, len));
            i = e;
        } else {
            i = k + 3;
        }
    }
    return out;
}

std::vector<RawUrl> extract_urls(std::string_view text,
                                 const std::string& message_id,
                                 const std::string& channel_id) {
    std::vector<RawUrl> out;
    for (std::string& u : extract_urls(text)) {
        out.push_back(RawUrl{std::move(u), message_id, channel_id});
    }
    return out;
}

}  // namespace bibcoup
