#include "bibcoup/expand.hpp"

#include "bibcoup/common.hpp"
#include "bibcoup/domain.hpp"
#include "bibcoup/net_util.hpp"

#include <atomic>
#include <fstream>
#include <thread>

namespace bibcoup {

namespace {

bool is_redirect(int status) {
    return status == 301 || status == 302 || status == 303 || status == 307 ||
           status == 308;
}

/// Location header resolved against the current hop.
std::string resolve_location(const ParsedUrl& base, const std::string& loc) {
    if (loc.rfind("http://", 0) == 0 || loc.rfind("https://", 0) == 0) {
        return loc;
    }
    if (loc.rfind("//", 0) == 0) return base.scheme + ":" + loc;

    std::string origin = base.scheme + "://" + base.host;
    const bool default_port = (base.scheme == "http" && base.port == 80) ||
                              (base.scheme == "https" && base.port == 443);
    if (!default_port) origin += ":" + std::to_string(base.port);

    if (!loc.empty() && loc[0] == '/') return origin + loc;
    std::string dir = base.target.substr(0, base.target.rfind('/') + 1);
    return origin + dir + loc;
}

}  // namespace

const char* to_string(ExpandFailure f) {
    switch (f) {
        case ExpandFailure::none: return "none";
        case ExpandFailure::timeout: return "timeout";
        case ExpandFailure::too_many_redirects: return "too_many_redirects";
        case ExpandFailure::network_error: return "network_error";
        case ExpandFailure::not_a_shortener: return "not_a_shortener";
    }
    return "unknown";
}

UrlExpander::UrlExpander(std::unordered_set<std::string> shortener_domains,
                         const DomainNormalizer* normalizer,
                         ExpansionPolicy policy, const std::string& cache_path)
    : shorteners_(std::move(shortener_domains)),
      normalizer_(normalizer),
      policy_(policy),
      cache_path_(cache_path) {
    if (cache_path_.empty()) return;
    std::ifstream in(cache_path_, std::ios::binary);
    if (!in) return;  // no cache yet
    std::string line;
    while (std::getline(in, line)) {
        const auto tab = line.find('\t');
        if (tab == std::string::npos) continue;
        cache_[line.substr(0, tab)] =
            CacheEntry{line.substr(tab + 1), true, ExpandFailure::none};
    }
}

UrlExpander::~UrlExpander() = default;

std::size_t UrlExpander::cache_size() const {
    std::lock_guard lock(cache_mu_);
    return cache_.size();
}

UrlExpander::HostState& UrlExpander::host_state(const std::string& host) {
    std::lock_guard lock(hosts_mu_);
    auto& slot = hosts_[host];
    if (!slot) slot = std::make_unique<HostState>();
    return *slot;
}

ExpandedUrl UrlExpander::expand(const RawUrl& url) {
    {
        std::lock_guard lock(cache_mu_);
        auto it = cache_.find(url.value);
        if (it != cache_.end()) {
            return ExpandedUrl{url, it->second.final_url, it->second.expanded,
                               it->second.failure};
        }
    }

    ExpandedUrl result = resolve(url);

    {
        std::lock_guard lock(cache_mu_);
        cache_[url.value] =
            CacheEntry{result.final_url, result.expanded, result.failure};
    }
    if (result.expanded && !cache_path_.empty()) {
        std::lock_guard lock(file_mu_);
        std::ofstream out(cache_path_, std::ios::binary | std::ios::app);
        out << url.value << '\t' << result.final_url << '\n';
    }
    return result;
}

ExpandedUrl UrlExpander::resolve(const RawUrl& url) {
    ExpandedUrl result{url, url.value, false, ExpandFailure::none};

    auto domain = normalizer_->normalize(url.value);
    if (!domain || !shorteners_.count(*domain)) {
        result.failure = ExpandFailure::not_a_shortener;
        return result;
    }

    std::string current = url.value;
    for (int hop = 0; hop < policy_.max_hops; ++hop) {
        auto parsed = parse_http_url(current);
        if (!parsed) {
            result.failure = ExpandFailure::network_error;
            return result;
        }

        httplib::Result res;
        {
            HostState& hs = host_state(parsed->host);
            std::lock_guard serialize(hs.mu);
            const auto now = std::chrono::steady_clock::now();
            const auto gap =
                std::chrono::milliseconds(policy_.politeness_delay_ms);
            if (hs.last.time_since_epoch().count() != 0 && now < hs.last + gap) {
                std::this_thread::sleep_for(hs.last + gap - now);
            }
            auto client = make_client(*parsed, policy_.timeout_s);
            res = client->Head(parsed->target);
            if (!res || res->status == 405 || res->status == 501 ||
                res->status == 400) {
                res = client->Get(parsed->target);
            }
            hs.last = std::chrono::steady_clock::now();
        }

        if (!res) {
            result.failure = res.error() == httplib::Error::ConnectionTimeout ||
                                     res.error() == httplib::Error::Read
                                 ? ExpandFailure::timeout
                                 : ExpandFailure::network_error;
            return result;
        }
        if (is_redirect(res->status)) {
            std::string loc = res->get_header_value("Location");
            if (loc.empty()) {
                result.failure = ExpandFailure::network_error;
                return result;
            }
            current = resolve_location(*parsed, loc);
            continue;
        }
        if (res->status >= 200 && res->status < 300) {
            result.final_url = current;
            result.expanded = true;
            return result;
        }
        result.failure = ExpandFailure::network_error;  // dead target
        return result;
    }
    result.failure = ExpandFailure::too_many_redirects;
    return result;
}

std::vector<ExpandedUrl> UrlExpander::expand_all(
    const std::vector<RawUrl>& urls) {
    std::vector<ExpandedUrl> out(urls.size());
    const int workers =
        std::max(1, std::min<int>(policy_.concurrency,
                                  static_cast<int>(urls.size())));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next.fetch_add(1); i < urls.size();
             i = next.fetch_add(1)) {
            out[i] = expand(urls[i]);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers) - 1);
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (std::thread& t : pool) t.join();
    return out;
}

}  // namespace bibcoup
