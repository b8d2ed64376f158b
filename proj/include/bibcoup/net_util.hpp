#pragma once

#include <httplib.h>

#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace bibcoup {

struct ParsedUrl {
    std::string scheme;  // "http" or "https"
    std::string host;
    int port = 0;
    std::string target;  // path + query, at least "/"

    std::string origin() const {
        return scheme + "://" + host + ":" + std::to_string(port);
    }
};

inline std::optional<ParsedUrl> parse_http_url(std::string_view url) {
    ParsedUrl out;
    std::string_view s = url;
    if (s.rfind("http://", 0) == 0) {
        out.scheme = "http";
        out.port = 80;
        s = s.substr(7);
    } else if (s.rfind("https://", 0) == 0) {
        out.scheme = "https";
        out.port = 443;
        s = s.substr(8);
    } else {
        return std::nullopt;
    }
    const std::size_t slash = s.find_first_of("/?#");
    std::string_view authority =
        slash == std::string_view::npos ? s : s.substr(0, slash);
    out.target = slash == std::string_view::npos
                     ? "/"
                     : std::string(s.substr(slash));
    if (out.target[0] == '?' || out.target[0] == '#') {
        out.target = "/" + out.target;
    }
    if (auto at = authority.rfind('@'); at != std::string_view::npos) {
        authority = authority.substr(at + 1);
    }
    if (!authority.empty() && authority.front() == '[') {
        const auto close = authority.find(']');
        if (close == std::string_view::npos) return std::nullopt;
        out.host = std::string(authority.substr(0, close + 1));
        authority = authority.substr(close + 1);
        if (!authority.empty() && authority.front() == ':') {
            out.port = std::atoi(std::string(authority.substr(1)).c_str());
        }
    } else if (auto colon = authority.find(':');
               colon != std::string_view::npos) {
        out.host = std::string(authority.substr(0, colon));
        out.port = std::atoi(std::string(authority.substr(colon + 1)).c_str());
    } else {
        out.host = std::string(authority);
    }
    if (out.host.empty() || out.port <= 0 || out.port > 65535) {
        return std::nullopt;
    }
    return out;
}

inline std::unique_ptr<httplib::Client> make_client(const ParsedUrl& url,
                                                    int timeout_s) {
    auto client = std::make_unique<httplib::Client>(url.origin());
    client->set_connection_timeout(timeout_s, 0);
    client->set_read_timeout(timeout_s, 0);
    client->set_write_timeout(timeout_s, 0);
    client->set_follow_location(false);  // hops are followed explicitly
    client->enable_server_certificate_verification(false);
    return client;
}

}  // namespace bibcoup
