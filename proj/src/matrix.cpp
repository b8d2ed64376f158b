#include "bibcoup/matrix.hpp"

#include "bibcoup/catalog.hpp"
#include "bibcoup/common.hpp"

#include <algorithm>

namespace bibcoup {

void ProfileAggregator::add(const std::string& channel_id,
                            const std::string& domain, bool is_catalog) {
    ChannelCitationProfile& p = profiles_[channel_id];
    if (p.channel_id.empty()) p.channel_id = channel_id;
    ++p.domain_counts[domain];
    if (is_catalog) ++p.catalog_link_total;
}

ProfileMap aggregate_profiles(const std::vector<ClassifiedLink>& links) {
    ProfileAggregator agg;
    for (const ClassifiedLink& l : links) {
        agg.add(l.channel_id, l.domain, l.is_catalog);
    }
    return agg.take();
}

std::vector<std::string> select_top_channels(const ProfileMap& profiles,
                                             std::size_t k) {
    if (k == 0) throw ValidationError("top-k channel selection requires k >= 1");
    std::vector<const ChannelCitationProfile*> ranked;
    ranked.reserve(profiles.size());
    for (const auto& [id, profile] : profiles) ranked.push_back(&profile);
    std::sort(ranked.begin(), ranked.end(),
              [](const ChannelCitationProfile* a,
                 const ChannelCitationProfile* b) {
                  if (a->catalog_link_total != b->catalog_link_total) {
                      return a->catalog_link_total > b->catalog_link_total;
                  }
                  return a->channel_id < b->channel_id;
              });
    if (ranked.size() > k) ranked.resize(k);
    std::vector<std::string> out;
    out.reserve(ranked.size());
    for (const ChannelCitationProfile* p : ranked) out.push_back(p->channel_id);
    return out;
}

std::size_t CitationMatrix::nnz() const {
    std::size_t total = 0;
    for (const auto& row : rows) total += row.size();
    return total;
}

std::vector<std::uint8_t> CitationMatrix::column(std::size_t col) const {
    std::vector<std::uint8_t> out(sources.size(), 0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (std::binary_search(rows[r].begin(), rows[r].end(),
                               static_cast<std::uint32_t>(col))) {
            out[r] = 1;
        }
    }
    return out;
}

std::vector<std::uint32_t> CitationMatrix::row_channel_counts() const {
    std::vector<std::uint32_t> out(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out[r] = static_cast<std::uint32_t>(rows[r].size());
    }
    return out;
}

CitationMatrix build_citation_matrix(const std::vector<std::string>& selected,
                                     const ProfileMap& profiles,
                                     const SourceCatalog* catalog_filter) {
    if (selected.empty()) {
        throw ValidationError("citation matrix: empty channel selection");
    }

    CitationMatrix m;
    m.channels = selected;

    // Row label universe: cited domains, optionally catalog-only.
    std::map<std::string, std::vector<std::uint32_t>> row_map;
    for (std::size_t c = 0; c < selected.size(); ++c) {
        auto it = profiles.find(selected[c]);
        if (it == profiles.end()) {
            throw ValidationError("selected channel has no profile: " +
                                  selected[c]);
        }
        for (const auto& [domain, count] : it->second.domain_counts) {
            if (catalog_filter && !catalog_filter->contains(domain)) continue;
            row_map[domain].push_back(static_cast<std::uint32_t>(c));
        }
    }

    m.sources.reserve(row_map.size());
    m.rows.reserve(row_map.size());
    for (auto& [domain, cols] : row_map) {
        m.sources.push_back(domain);
        m.rows.push_back(std::move(cols));  // per-channel maps are ordered,
                                            // columns arrive sorted
    }
    return m;
}

std::pair<CitationMatrix, std::vector<ExcludedSource>> exclude_top_sources(
    const CitationMatrix& matrix, std::size_t n) {
    if (n >= matrix.rows.size() && n > 0) {
        throw ValidationError(
            "cannot exclude " + std::to_string(n) + " sources from a matrix with " +
            std::to_string(matrix.rows.size()) + " rows");
    }

    std::vector<std::size_t> order(matrix.rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (matrix.rows[a].size() != matrix.rows[b].size()) {
            return matrix.rows[a].size() > matrix.rows[b].size();
        }
        return matrix.sources[a] < matrix.sources[b];
    });

    std::vector<ExcludedSource> removed;
    std::vector<bool> drop(matrix.rows.size(), false);
    for (std::size_t i = 0; i < n; ++i) {
        drop[order[i]] = true;
        removed.push_back(ExcludedSource{
            matrix.sources[order[i]],
            static_cast<std::uint32_t>(matrix.rows[order[i]].size())});
    }

    CitationMatrix out;
    out.channels = matrix.channels;
    for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
        if (drop[r]) continue;
        out.sources.push_back(matrix.sources[r]);
        out.rows.push_back(matrix.rows[r]);
    }
    return {std::move(out), std::move(removed)};
}

void CitationMatrix::save(const std::string& base_path) const {
    std::string body = "citation-matrix\t" + std::to_string(sources.size()) +
                       '\t' + std::to_string(channels.size()) + '\t' +
                       std::to_string(nnz()) + '\n';
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::uint32_t c : rows[r]) {
            body += std::to_string(r);
            body += '\t';
            body += std::to_string(c);
            body += "\t1\n";
        }
    }
    write_text_file(base_path + ".tsv", body);

    std::string row_labels, col_labels;
    for (const std::string& s : sources) {
        row_labels += s;
        row_labels += '\n';
    }
    for (const std::string& c : channels) {
        col_labels += c;
        col_labels += '\n';
    }
    write_text_file(base_path + ".rows", row_labels);
    write_text_file(base_path + ".cols", col_labels);
}

CitationMatrix CitationMatrix::load(const std::string& base_path) {
    CitationMatrix m;
    m.sources = read_lines(base_path + ".rows");
    while (!m.sources.empty() && m.sources.back().empty()) m.sources.pop_back();
    m.channels = read_lines(base_path + ".cols");
    while (!m.channels.empty() && m.channels.back().empty()) {
        m.channels.pop_back();
    }
    m.rows.resize(m.sources.size());

    std::vector<std::string> lines = read_lines(base_path + ".tsv");
    if (lines.empty() || lines[0].rfind("citation-matrix\t", 0) != 0) {
        throw IoError("not a citation matrix file: " + base_path + ".tsv");
    }
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        std::vector<std::string> parts = split(lines[i], '\t');
        if (parts.size() != 3) {
            throw IoError("malformed matrix triplet at line " +
                          std::to_string(i + 1));
        }
        const std::size_t r = std::stoul(parts[0]);
        const std::uint32_t c = static_cast<std::uint32_t>(std::stoul(parts[1]));
        if (r >= m.rows.size() || c >= m.channels.size()) {
            throw IoError("matrix triplet out of range at line " +
                          std::to_string(i + 1));
        }
        m.rows[r].push_back(c);
    }
    for (auto& row : m.rows) std::sort(row.begin(), row.end());
    return m;
}

}  // namespace bibcoup
