#pragma once

#include "bibcoup/coupling.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace bibcoup {

struct CommunityAssignment {
    std::map<std::string, int> membership;  // node id -> community id (dense)
    double modularity = 0.0;                // Q recomputed on the input graph
    std::map<int, std::size_t> community_sizes;
    std::uint64_t seed = 0;
};

/// Newman modularity Q = (1/2m) Σᵢⱼ [Aᵢⱼ − γ·kᵢkⱼ/2m] δ(cᵢ, cⱼ) with BCF
/// edge weights. Throws ValidationError when the graph has no edges or the
/// membership leaves a node uncovered.
double modularity(const CouplingGraph& graph,
                  const std::map<std::string, int>& membership,
                  double resolution = 1.0);

struct LouvainResult {
    CommunityAssignment assignment;
    std::vector<double> pass_modularity;  // Q after every local-move pass
    int levels = 0;
    int passes = 0;
};

/// Two-phase Louvain: seeded-shuffle local moves until no gain beats the
/// tolerance, then community aggregation, repeated until stable. Identical
/// (graph, resolution, seed) triples produce identical assignments.
/// Community ids are relabeled by descending size.
LouvainResult louvain(const CouplingGraph& graph, double resolution,
                      std::uint64_t seed, double tolerance = 1e-7,
                      int max_passes = 100);

struct CoalitionMember {
    std::string channel_id;
    std::string title;
    std::uint32_t degree = 0;
};

struct CoalitionReport {
    int community_id = 0;
    std::size_t size = 0;
    double share = 0.0;
    bool main = false;  // share >= min_share
    std::vector<CoalitionMember> members;  // degree descending
};

/// Main coalitions (node share >= min_share) first, then the disregarded
/// rest; both blocks ordered by size descending.
std::vector<CoalitionReport> coalition_summary(
    const CommunityAssignment& assignment, const CouplingGraph& graph,
    double min_share);

}  // namespace bibcoup
