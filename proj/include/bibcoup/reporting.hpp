#pragma once

#include "bibcoup/communities.hpp"
#include "bibcoup/coupling.hpp"
#include "bibcoup/layout.hpp"
#include "bibcoup/matrix.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace bibcoup {

struct SourceCatalog;

enum class Segment { combined, catalog_only, non_catalog_only };

const char* to_string(Segment s);

struct FrequencyRow {
    std::string domain;
    std::uint32_t citing_channels = 0;  // distinct channels, ranks the table
    std::uint64_t total_links = 0;      // secondary metric
    bool is_catalog = false;
};

struct FrequencyReport {
    std::vector<FrequencyRow> rows;  // citing_channels desc, domain asc
    Segment segment = Segment::combined;
    std::size_t top_n = 0;
};

FrequencyReport frequency_report(const ProfileMap& profiles,
                                 const SourceCatalog& catalog, Segment segment,
                                 std::size_t top_n);

void write_frequency_csv(const FrequencyReport& report,
                         const std::string& path);

struct RunStats {
    std::uint64_t messages_total = 0;
    std::uint64_t messages_with_url = 0;
    std::uint64_t channels_with_urls = 0;
    std::uint64_t selected_channels = 0;
    std::uint64_t distinct_sources = 0;
    std::uint64_t catalog_domains = 0;
    std::map<std::string, std::uint64_t> extra;  // auxiliary counters
};

/// Key-value JSON document, keys sorted, byte-stable.
void write_run_stats(const RunStats& stats, const std::string& path);

/// GEXF 1.2 with viz extension: label = channel title, community and degree
/// attributes, position/size/color per node, BCF edge weights. Byte-stable
/// for identical inputs. Assignment and positions must cover the graph.
void export_gexf(const CouplingGraph& graph,
                 const CommunityAssignment& assignment,
                 const LayoutPositions& positions, const std::string& path,
                 double min_size = 4.0, double max_size = 24.0);

void write_coalitions_csv(const std::vector<CoalitionReport>& reports,
                          const std::string& path);

/// Horizontal bar chart of the top rows, one SVG file.
void write_frequency_svg(const FrequencyReport& report, const std::string& path,
                         std::size_t max_bars = 20);

}  // namespace bibcoup
