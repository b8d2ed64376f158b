#pragma once

#include "bibcoup/matrix.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace bibcoup {

/// Scalar product of two binary citation vectors: the number of sources
/// cited by both channels. Throws ValidationError on a length mismatch.
std::uint64_t bcf_pair(std::span<const std::uint8_t> a,
                       std::span<const std::uint8_t> b);

/// Symmetric pair weights keyed by packed column indices (low index in the
/// high 32 bits so numeric key order equals (a, b) lexicographic order).
using WeightMap = std::unordered_map<std::uint64_t, std::uint32_t>;

constexpr std::uint64_t pack_pair(std::uint32_t a, std::uint32_t b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
}
constexpr std::pair<std::uint32_t, std::uint32_t> unpack_pair(std::uint64_t k) {
    return {static_cast<std::uint32_t>(k >> 32),
            static_cast<std::uint32_t>(k & 0xffffffffu)};
}

/// Off-diagonal of AᵀA computed source-major: for every source, each pair of
/// citing channels gains one unit of coupling. Cost scales with co-citation
/// structure rather than channels². Rows with more than per_source_cap
/// citing channels are skipped when the cap is nonzero. Partitions the rows
/// over threads (0 = hardware default) and merges per-partition maps.
WeightMap bcf_all_pairs(const CitationMatrix& matrix,
                        std::size_t per_source_cap = 0, unsigned threads = 0);

struct CouplingNode {
    std::string id;
    std::string title;
    std::uint32_t degree = 0;
};

struct CouplingEdge {
    std::uint32_t a = 0, b = 0;  // node indices, a < b
    std::uint32_t weight = 0;
};

struct CouplingGraph {
    std::vector<CouplingNode> nodes;  // sorted by id
    std::vector<CouplingEdge> edges;  // sorted by (a, b)

    std::size_t find_node(const std::string& id) const;  // npos when absent
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Keeps edges with weight >= min_bcf; nodes with no surviving edge are
/// dropped unless keep_isolates. Titles come from the given lookup (missing
/// titles fall back to the channel id).
CouplingGraph build_graph(
    const WeightMap& weights, const std::vector<std::string>& channel_ids,
    const std::unordered_map<std::string, std::string>& titles,
    std::uint32_t min_bcf, bool keep_isolates = false);

/// Three-column text (channel_a, channel_b, bcf), lexicographic, LF lines.
void write_weights(const std::string& path, const WeightMap& weights,
                   const std::vector<std::string>& channel_ids);

void save_graph(const CouplingGraph& graph, const std::string& nodes_path,
                const std::string& edges_path);
CouplingGraph load_graph(const std::string& nodes_path,
                         const std::string& edges_path);

}  // namespace bibcoup
