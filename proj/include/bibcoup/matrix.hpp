#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace bibcoup {

struct SourceCatalog;

struct ChannelCitationProfile {
    std::string channel_id;
    std::map<std::string, std::uint32_t> domain_counts;  // every count >= 1
    std::uint64_t catalog_link_total = 0;  // links to catalog domains
};

using ProfileMap = std::map<std::string, ChannelCitationProfile>;

struct ClassifiedLink {
    std::string channel_id;
    std::string domain;
    bool is_catalog = false;
};

/// Incremental per-channel link tally. Duplicate links count every time;
/// the citation matrix binarizes later.
class ProfileAggregator {
public:
    void add(const std::string& channel_id, const std::string& domain,
             bool is_catalog);
    ProfileMap take() { return std::move(profiles_); }
    const ProfileMap& profiles() const { return profiles_; }

private:
    ProfileMap profiles_;
};

ProfileMap aggregate_profiles(const std::vector<ClassifiedLink>& links);

/// Channels ranked by catalog_link_total descending, channel_id ascending on
/// ties; at most k entries. k must be >= 1.
std::vector<std::string> select_top_channels(const ProfileMap& profiles,
                                             std::size_t k);

/// Sparse binary channel×source incidence. Sources (rows) are ordered
/// lexicographically, channels (columns) per the selection order; a row
/// exists only if at least one selected channel cites it.
struct CitationMatrix {
    std::vector<std::string> sources;   // row labels
    std::vector<std::string> channels;  // column labels
    std::vector<std::vector<std::uint32_t>> rows;  // sorted column indices

    std::size_t nnz() const;
    /// Dense binary column (one byte per source row).
    std::vector<std::uint8_t> column(std::size_t col) const;
    /// Distinct citing channels per row.
    std::vector<std::uint32_t> row_channel_counts() const;

    /// Writes base+".tsv" (header + triplets) with base+".rows"/".cols"
    /// label sidecars. Byte-stable for identical inputs.
    void save(const std::string& base_path) const;
    static CitationMatrix load(const std::string& base_path);
};

/// catalog_filter restricts rows to catalog domains (pass nullptr to keep
/// every cited source). Throws ValidationError on an empty selection.
CitationMatrix build_citation_matrix(const std::vector<std::string>& selected,
                                     const ProfileMap& profiles,
                                     const SourceCatalog* catalog_filter);

struct ExcludedSource {
    std::string domain;
    std::uint32_t channel_count;
};

/// Removes the n rows citing the most channels (ties: source ascending) and
/// reports them. Columns are left untouched even if they become all-zero.
/// Throws ValidationError when n >= row count.
std::pair<CitationMatrix, std::vector<ExcludedSource>> exclude_top_sources(
    const CitationMatrix& matrix, std::size_t n);

}  // namespace bibcoup
