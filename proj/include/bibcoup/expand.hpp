#pragma once

#include "bibcoup/url_extract.hpp"

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace bibcoup {

class DomainNormalizer;

enum class ExpandFailure {
    none,
    timeout,
    too_many_redirects,
    network_error,
    not_a_shortener,
};

const char* to_string(ExpandFailure f);

struct ExpandedUrl {
    RawUrl original;
    std::string final_url;  // equals original.value unless expanded
    bool expanded = false;
    ExpandFailure failure = ExpandFailure::none;
};

struct ExpansionPolicy {
    int max_hops = 10;
    int timeout_s = 10;
    int politeness_delay_ms = 200;  // minimum gap between requests per host
    int concurrency = 4;
};

/// Follows redirect chains for URLs whose domain is in the shortener set.
/// Failures never throw; they come back as the original URL with a reason.
/// Results are cached by exact original string; successful resolutions are
/// appended to a two-column (original TAB final) cache file when one is
/// configured, and such a file is reloaded on construction.
class UrlExpander {
public:
    UrlExpander(std::unordered_set<std::string> shortener_domains,
                const DomainNormalizer* normalizer, ExpansionPolicy policy,
                const std::string& cache_path = "");
    ~UrlExpander();

    ExpandedUrl expand(const RawUrl& url);

    /// Bounded worker pool; output order matches input order.
    std::vector<ExpandedUrl> expand_all(const std::vector<RawUrl>& urls);

    std::size_t cache_size() const;

private:
    struct CacheEntry {
        std::string final_url;
        bool expanded;
        ExpandFailure failure;
    };
    struct HostState {
        std::mutex mu;  // serializes requests per host
        std::chrono::steady_clock::time_point last{};
    };

    ExpandedUrl resolve(const RawUrl& url);
    HostState& host_state(const std::string& host);
    void wait_politely(const std::string& host);

    std::unordered_set<std::string> shorteners_;
    const DomainNormalizer* normalizer_;
    ExpansionPolicy policy_;

    mutable std::mutex cache_mu_;
    std::unordered_map<std::string, CacheEntry> cache_;

    std::mutex hosts_mu_;
    std::map<std::string, std::unique_ptr<HostState>> hosts_;

    std::mutex file_mu_;
    std::string cache_path_;
};

}  // namespace bibcoup
