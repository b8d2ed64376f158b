#pragma once

#include "bibcoup/communities.hpp"
#include "bibcoup/coupling.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>

namespace bibcoup {

struct LayoutParams {
    double attraction = 1.0;   // linear attraction coefficient
    double repulsion = 2.0;    // scaling of (deg+1)(deg+1)/d repulsion
    double gravity = 1.0;      // pull toward the layout centroid, 0 disables
    bool linlog = false;       // log(1+d) attraction instead of linear
    double speed_tolerance = 1.0;  // global speed adaptation (tau)
    double theta = 1.2;            // Barnes-Hut opening angle
    std::size_t barnes_hut_threshold = 1000;  // approximate above this size
    bool edge_weight_attraction = true;       // scale attraction by BCF
};

struct LayoutPositions {
    std::map<std::string, std::pair<double, double>> positions;
    int iterations_run = 0;
    std::uint64_t seed = 0;
};

/// Force-directed layout: linear attraction along edges, degree-weighted
/// repulsion, optional LinLog attraction, gravity toward the centroid, and
/// swing-based adaptive speed. Initial positions are seeded uniform in the
/// unit square; a fixed iteration budget, no convergence criterion.
/// Deterministic for fixed (graph, iterations, params, seed).
LayoutPositions forceatlas2(const CouplingGraph& graph, int iterations,
                            const LayoutParams& params, std::uint64_t seed);

struct NodeAttribute {
    double size = 0.0;
    int color_index = 0;
};

/// size: degree mapped affinely into [min_size, max_size] (constant degree
/// maps to min_size); color_index: community id. Throws ValidationError on
/// an uncovered node.
std::map<std::string, NodeAttribute> node_attributes(
    const CouplingGraph& graph, const CommunityAssignment& assignment,
    double min_size = 4.0, double max_size = 24.0);

}  // namespace bibcoup
