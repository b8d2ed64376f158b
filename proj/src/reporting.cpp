#include "bibcoup/reporting.hpp"

#include "bibcoup/catalog.hpp"
#include "bibcoup/common.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>

namespace bibcoup {

const char* to_string(Segment s) {
    switch (s) {
        case Segment::combined: return "combined";
        case Segment::catalog_only: return "catalog_only";
        case Segment::non_catalog_only: return "non_catalog_only";
    }
    return "unknown";
}

FrequencyReport frequency_report(const ProfileMap& profiles,
                                 const SourceCatalog& catalog, Segment segment,
                                 std::size_t top_n) {
    if (top_n == 0) throw ValidationError("frequency report requires top_n >= 1");

    std::map<std::string, FrequencyRow> by_domain;
    for (const auto& [channel_id, profile] : profiles) {
        for (const auto& [domain, count] : profile.domain_counts) {
            FrequencyRow& row = by_domain[domain];
            row.domain = domain;
            row.citing_channels += 1;
            row.total_links += count;
        }
    }

    FrequencyReport report;
    report.segment = segment;
    report.top_n = top_n;
    for (auto& [domain, row] : by_domain) {
        row.is_catalog = catalog.contains(domain);
        if (segment == Segment::catalog_only && !row.is_catalog) continue;
        if (segment == Segment::non_catalog_only && row.is_catalog) continue;
        report.rows.push_back(std::move(row));
    }
    std::sort(report.rows.begin(), report.rows.end(),
              [](const FrequencyRow& a, const FrequencyRow& b) {
                  if (a.citing_channels != b.citing_channels) {
                      return a.citing_channels > b.citing_channels;
                  }
                  return a.domain < b.domain;
              });
    if (report.rows.size() > top_n) report.rows.resize(top_n);
    return report;
}

namespace {

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

// Qualitative palette, cycled by community id.
constexpr std::array<std::array<int, 3>, 12> kPalette{{
    {31, 119, 180},  {255, 127, 14},  {44, 160, 44},   {214, 39, 40},
    {148, 103, 189}, {140, 86, 75},   {227, 119, 194}, {127, 127, 127},
    {188, 189, 34},  {23, 190, 207},  {174, 199, 232}, {255, 187, 120},
}};

}  // namespace

void write_frequency_csv(const FrequencyReport& report,
                         const std::string& path) {
    std::string body = "rank,domain,citing_channels,total_links,is_catalog\n";
    std::size_t rank = 1;
    for (const FrequencyRow& row : report.rows) {
        body += std::to_string(rank++);
        body += ',';
        body += csv_escape(row.domain);
        body += ',';
        body += std::to_string(row.citing_channels);
        body += ',';
        body += std::to_string(row.total_links);
        body += ',';
        body += row.is_catalog ? "true" : "false";
        body += '\n';
    }
    write_text_file(path, body);
}

void write_run_stats(const RunStats& stats, const std::string& path) {
    nlohmann::json doc;
    doc["messages_total"] = stats.messages_total;
    doc["messages_with_url"] = stats.messages_with_url;
    doc["channels_with_urls"] = stats.channels_with_urls;
    doc["selected_channels"] = stats.selected_channels;
    doc["distinct_sources"] = stats.distinct_sources;
    doc["catalog_domains"] = stats.catalog_domains;
    for (const auto& [key, value] : stats.extra) doc[key] = value;
    write_text_file(path, doc.dump(2) + "\n");
}

void export_gexf(const CouplingGraph& graph,
                 const CommunityAssignment& assignment,
                 const LayoutPositions& positions, const std::string& path,
                 double min_size, double max_size) {
    auto attrs = graph.nodes.empty()
                     ? std::map<std::string, NodeAttribute>{}
                     : node_attributes(graph, assignment, min_size, max_size);

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out +=
        "<gexf xmlns=\"http://www.gexf.net/1.2draft\" "
        "xmlns:viz=\"http://www.gexf.net/1.2draft/viz\" version=\"1.2\">\n";
    out += "  <meta><creator>bibcoup</creator></meta>\n";
    out += "  <graph defaultedgetype=\"undirected\" mode=\"static\">\n";
    out += "    <attributes class=\"node\">\n";
    out +=
        "      <attribute id=\"0\" title=\"community\" type=\"integer\"/>\n";
    out += "      <attribute id=\"1\" title=\"degree\" type=\"integer\"/>\n";
    out += "    </attributes>\n";

    out += "    <nodes count=\"" + std::to_string(graph.nodes.size()) +
           "\">\n";
    for (const CouplingNode& node : graph.nodes) {
        auto pos = positions.positions.find(node.id);
        if (pos == positions.positions.end()) {
            throw ValidationError("positions do not cover node: " + node.id);
        }
        const NodeAttribute& attr = attrs.at(node.id);
        const auto& color = kPalette[static_cast<std::size_t>(
            attr.color_index) % kPalette.size()];
        out += "      <node id=\"" + xml_escape(node.id) + "\" label=\"" +
               xml_escape(node.title) + "\">\n";
        out += "        <attvalues>\n";
        out += "          <attvalue for=\"0\" value=\"" +
               std::to_string(attr.color_index) + "\"/>\n";
        out += "          <attvalue for=\"1\" value=\"" +
               std::to_string(node.degree) + "\"/>\n";
        out += "        </attvalues>\n";
        out += "        <viz:position x=\"" + format_double(pos->second.first) +
               "\" y=\"" + format_double(pos->second.second) + "\" z=\"0\"/>\n";
        out += "        <viz:size value=\"" + format_double(attr.size) +
               "\"/>\n";
        out += "        <viz:color r=\"" + std::to_string(color[0]) +
               "\" g=\"" + std::to_string(color[1]) + "\" b=\"" +
               std::to_string(color[2]) + "\"/>\n";
        out += "      </node>\n";
    }
    out += "    </nodes>\n";

    out += "    <edges count=\"" + std::to_string(graph.edges.size()) +
           "\">\n";
    std::size_t edge_id = 0;
    for (const CouplingEdge& e : graph.edges) {
        out += "      <edge id=\"" + std::to_string(edge_id++) +
               "\" source=\"" + xml_escape(graph.nodes[e.a].id) +
               "\" target=\"" + xml_escape(graph.nodes[e.b].id) +
               "\" weight=\"" + std::to_string(e.weight) + "\"/>\n";
    }
    out += "    </edges>\n";
    out += "  </graph>\n";
    out += "</gexf>\n";
    write_text_file(path, out);
}

void write_coalitions_csv(const std::vector<CoalitionReport>& reports,
                          const std::string& path) {
    std::string body =
        "community_id,size,share,status,member_rank,channel_id,title,degree\n";
    for (const CoalitionReport& rep : reports) {
        std::size_t rank = 1;
        for (const CoalitionMember& m : rep.members) {
            body += std::to_string(rep.community_id);
            body += ',';
            body += std::to_string(rep.size);
            body += ',';
            body += format_double(rep.share);
            body += ',';
            body += rep.main ? "main" : "disregarded";
            body += ',';
            body += std::to_string(rank++);
            body += ',';
            body += csv_escape(m.channel_id);
            body += ',';
            body += csv_escape(m.title);
            body += ',';
            body += std::to_string(m.degree);
            body += '\n';
        }
    }
    write_text_file(path, body);
}

void write_frequency_svg(const FrequencyReport& report,
                         const std::string& path, std::size_t max_bars) {
    const std::size_t bars = std::min(max_bars, report.rows.size());
    const int bar_h = 18, gap = 4, label_w = 220, value_w = 60;
    const int chart_w = 480;
    const int width = label_w + chart_w + value_w;
    const int height = static_cast<int>(bars) * (bar_h + gap) + gap + 24;

    std::uint32_t max_count = 1;
    for (std::size_t i = 0; i < bars; ++i) {
        max_count = std::max(max_count, report.rows[i].citing_channels);
    }

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           std::to_string(width) + "\" height=\"" + std::to_string(height) +
           "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out += "  <text x=\"" + std::to_string(label_w) +
           "\" y=\"16\">domains by citing channels (" +
           std::string(to_string(report.segment)) + ")</text>\n";
    int y = 24 + gap;
    for (std::size_t i = 0; i < bars; ++i) {
        const FrequencyRow& row = report.rows[i];
        const int w = static_cast<int>(
            static_cast<double>(row.citing_channels) / max_count * chart_w);
        out += "  <text x=\"" + std::to_string(label_w - 6) + "\" y=\"" +
               std::to_string(y + bar_h - 5) +
               "\" text-anchor=\"end\">" + xml_escape(row.domain) +
               "</text>\n";
        out += "  <rect x=\"" + std::to_string(label_w) + "\" y=\"" +
               std::to_string(y) + "\" width=\"" + std::to_string(w) +
               "\" height=\"" + std::to_string(bar_h) + "\" fill=\"" +
               (row.is_catalog ? "#1f77b4" : "#ff7f0e") + "\"/>\n";
        out += "  <text x=\"" + std::to_string(label_w + w + 6) + "\" y=\"" +
               std::to_string(y + bar_h - 5) + "\">" +
               std::to_string(row.citing_channels) + "</text>\n";
        y += bar_h + gap;
    }
    out += "</svg>\n";
    write_text_file(path, out);
}

}  // namespace bibcoup
