#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

namespace bibcoup {

class DomainNormalizer;

/// The set of knowledge-source domains. Membership is exact string equality
/// on normalized domains; no suffix matching.
struct SourceCatalog {
    std::unordered_set<std::string> domains;
    std::string provenance;
    std::uint64_t lines_read = 0;
    std::uint64_t skipped = 0;

    bool contains(const std::string& domain) const {
        return domains.count(domain) > 0;
    }

    /// Sorted, one domain per line, LF-terminated.
    void write(const std::string& path) const;
};

/// One source URL or bare domain per line; each line goes through the same
/// normalizer as message URLs. Unparseable lines are counted and skipped.
SourceCatalog build_catalog_from_file(const std::string& path,
                                      const DomainNormalizer& normalizer);

bool classify(const std::string& domain, const SourceCatalog& catalog);

// --------------------------------------------------------------------------
// Cursor-paginated source harvesting (OpenAlex-style REST endpoint).

struct HarvestPolicy {
    int page_size = 200;
    std::string field = "homepage_url";  // which result field carries the URL
    int max_retries = 5;
    int retry_base_ms = 500;  // exponential backoff: base * 2^attempt
    int timeout_s = 30;
};

struct HarvestResult {
    std::vector<std::string> urls;
    std::string next_cursor;  // resume point when not completed
    bool completed = false;
    int retries = 0;
    int pages = 0;
    std::uint64_t skipped_results = 0;  // results without the URL field
};

/// Walks `endpoint` page by page (per-page/cursor query parameters) until
/// the cursor is exhausted. Transient HTTP failures are retried with
/// exponential backoff; a page that keeps failing ends the harvest with the
/// partial result and the cursor needed to resume.
HarvestResult harvest_sources(const std::string& endpoint,
                              const HarvestPolicy& policy,
                              const std::string& resume_cursor = "*");

}  // namespace bibcoup
