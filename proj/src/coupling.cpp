#include "bibcoup/coupling.hpp"

#include "bibcoup/common.hpp"

#include <algorithm>
#include <thread>

namespace bibcoup {

std::uint64_t bcf_pair(std::span<const std::uint8_t> a,
                       std::span<const std::uint8_t> b) {
    if (a.size() != b.size()) {
        throw ValidationError("bcf_pair: vector lengths differ (" +
                              std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()) + ")");
    }
    std::uint64_t dot = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<std::uint64_t>(a[i] != 0 && b[i] != 0);
    }
    return dot;
}

WeightMap bcf_all_pairs(const CitationMatrix& matrix,
                        std::size_t per_source_cap, unsigned threads) {
    const std::size_t n_rows = matrix.rows.size();
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = std::min<unsigned>(threads, 16);
    if (n_rows < 256) threads = 1;

    auto accumulate = [&](std::size_t begin, std::size_t end, WeightMap& map) {
        for (std::size_t r = begin; r < end; ++r) {
            const std::vector<std::uint32_t>& cols = matrix.rows[r];
            if (per_source_cap && cols.size() > per_source_cap) continue;
            for (std::size_t i = 0; i < cols.size(); ++i) {
                for (std::size_t j = i + 1; j < cols.size(); ++j) {
                    ++map[pack_pair(cols[i], cols[j])];
                }
            }
        }
    };

    if (threads <= 1) {
        WeightMap weights;
        accumulate(0, n_rows, weights);
        return weights;
    }

    std::vector<WeightMap> partials(threads);
    std::vector<std::thread> pool;
    const std::size_t chunk = (n_rows + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(n_rows, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(
            [&, begin, end, t] { accumulate(begin, end, partials[t]); });
    }
    for (std::thread& th : pool) th.join();

    WeightMap weights = std::move(partials[0]);
    for (unsigned t = 1; t < threads; ++t) {
        for (const auto& [key, w] : partials[t]) weights[key] += w;
    }
    return weights;
}

std::size_t CouplingGraph::find_node(const std::string& id) const {
    auto it = std::lower_bound(
        nodes.begin(), nodes.end(), id,
        [](const CouplingNode& n, const std::string& v) { return n.id < v; });
    if (it == nodes.end() || it->id != id) return npos;
    return static_cast<std::size_t>(it - nodes.begin());
}

CouplingGraph build_graph(
    const WeightMap& weights, const std::vector<std::string>& channel_ids,
    const std::unordered_map<std::string, std::string>& titles,
    std::uint32_t min_bcf, bool keep_isolates) {
    if (min_bcf == 0) {
        throw ValidationError("build_graph: min_bcf must be >= 1");
    }

    std::vector<std::pair<std::uint64_t, std::uint32_t>> kept;
    std::vector<bool> has_edge(channel_ids.size(), false);
    for (const auto& [key, w] : weights) {
        if (w < min_bcf) continue;
        kept.emplace_back(key, w);
        auto [a, b] = unpack_pair(key);
        has_edge[a] = true;
        has_edge[b] = true;
    }

    CouplingGraph g;
    std::vector<std::size_t> col_to_node(channel_ids.size(),
                                         CouplingGraph::npos);
    std::vector<std::uint32_t> member_cols;
    for (std::uint32_t c = 0; c < channel_ids.size(); ++c) {
        if (keep_isolates || has_edge[c]) member_cols.push_back(c);
    }
    std::sort(member_cols.begin(), member_cols.end(),
              [&](std::uint32_t a, std::uint32_t b) {
                  return channel_ids[a] < channel_ids[b];
              });
    for (std::uint32_t c : member_cols) {
        col_to_node[c] = g.nodes.size();
        CouplingNode node;
        node.id = channel_ids[c];
        auto t = titles.find(node.id);
        node.title = t == titles.end() ? node.id : t->second;
        g.nodes.push_back(std::move(node));
    }

    for (const auto& [key, w] : kept) {
        auto [ca, cb] = unpack_pair(key);
        std::uint32_t a = static_cast<std::uint32_t>(col_to_node[ca]);
        std::uint32_t b = static_cast<std::uint32_t>(col_to_node[cb]);
        if (a > b) std::swap(a, b);
        g.edges.push_back(CouplingEdge{a, b, w});
    }
    std::sort(g.edges.begin(), g.edges.end(),
              [](const CouplingEdge& x, const CouplingEdge& y) {
                  return std::tie(x.a, x.b) < std::tie(y.a, y.b);
              });

    for (const CouplingEdge& e : g.edges) {
        ++g.nodes[e.a].degree;
        ++g.nodes[e.b].degree;
    }
    return g;
}

namespace {

std::string sanitize_tsv(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    }
    return out;
}

}  // namespace

void write_weights(const std::string& path, const WeightMap& weights,
                   const std::vector<std::string>& channel_ids) {
    std::vector<std::tuple<std::string, std::string, std::uint32_t>> rows;
    rows.reserve(weights.size());
    for (const auto& [key, w] : weights) {
        auto [a, b] = unpack_pair(key);
        std::string ida = channel_ids[a], idb = channel_ids[b];
        if (idb < ida) std::swap(ida, idb);
        rows.emplace_back(std::move(ida), std::move(idb), w);
    }
    std::sort(rows.begin(), rows.end());
    std::string body;
    for (const auto& [a, b, w] : rows) {
        body += a;
        body += '\t';
        body += b;
        body += '\t';
        body += std::to_string(w);
        body += '\n';
    }
    write_text_file(path, body);
}

void save_graph(const CouplingGraph& graph, const std::string& nodes_path,
                const std::string& edges_path) {
    std::string nodes_body;
    for (const CouplingNode& n : graph.nodes) {
        nodes_body += n.id;
        nodes_body += '\t';
        nodes_body += sanitize_tsv(n.title);
        nodes_body += '\t';
        nodes_body += std::to_string(n.degree);
        nodes_body += '\n';
    }
    write_text_file(nodes_path, nodes_body);

    std::string edges_body;
    for (const CouplingEdge& e : graph.edges) {
        edges_body += graph.nodes[e.a].id;
        edges_body += '\t';
        edges_body += graph.nodes[e.b].id;
        edges_body += '\t';
        edges_body += std::to_string(e.weight);
        edges_body += '\n';
    }
    write_text_file(edges_path, edges_body);
}

CouplingGraph load_graph(const std::string& nodes_path,
                         const std::string& edges_path) {
    CouplingGraph g;
    for (const std::string& line : read_lines(nodes_path)) {
        if (line.empty()) continue;
        std::vector<std::string> parts = split(line, '\t');
        if (parts.size() != 3) throw IoError("malformed node line: " + line);
        g.nodes.push_back(CouplingNode{
            parts[0], parts[1],
            static_cast<std::uint32_t>(std::stoul(parts[2]))});
    }
    std::sort(g.nodes.begin(), g.nodes.end(),
              [](const CouplingNode& a, const CouplingNode& b) {
                  return a.id < b.id;
              });
    for (const std::string& line : read_lines(edges_path)) {
        if (line.empty()) continue;
        std::vector<std::string> parts = split(line, '\t');
        if (parts.size() != 3) throw IoError("malformed edge line: " + line);
        const std::size_t a = g.find_node(parts[0]);
        const std::size_t b = g.find_node(parts[1]);
        if (a == CouplingGraph::npos || b == CouplingGraph::npos) {
            throw IoError("edge references unknown node: " + line);
        }
        CouplingEdge e;
        e.a = static_cast<std::uint32_t>(std::min(a, b));
        e.b = static_cast<std::uint32_t>(std::max(a, b));
        e.weight = static_cast<std::uint32_t>(std::stoul(parts[2]));
        g.edges.push_back(e);
    }
    return g;
}

}  // namespace bibcoup
