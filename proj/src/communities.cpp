#include "bibcoup/communities.hpp"

#include "bibcoup/common.hpp"

#include <algorithm>
#include <numeric>

namespace bibcoup {

double modularity(const CouplingGraph& graph,
                  const std::map<std::string, int>& membership,
                  double resolution) {
    if (graph.edges.empty()) {
        throw ValidationError("modularity requires a graph with >= 1 edge");
    }
    std::vector<int> comm(graph.nodes.size());
    int max_comm = 0;
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        auto it = membership.find(graph.nodes[i].id);
        if (it == membership.end()) {
            throw ValidationError("membership does not cover node: " +
                                  graph.nodes[i].id);
        }
        comm[i] = it->second;
        max_comm = std::max(max_comm, it->second);
    }

    std::vector<double> weighted_degree(graph.nodes.size(), 0.0);
    std::vector<double> internal(static_cast<std::size_t>(max_comm) + 1, 0.0);
    double two_m = 0.0;
    for (const CouplingEdge& e : graph.edges) {
        weighted_degree[e.a] += e.weight;
        weighted_degree[e.b] += e.weight;
        two_m += 2.0 * e.weight;
        if (comm[e.a] == comm[e.b]) {
            internal[static_cast<std::size_t>(comm[e.a])] += 2.0 * e.weight;
        }
    }

    std::vector<double> total(static_cast<std::size_t>(max_comm) + 1, 0.0);
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        total[static_cast<std::size_t>(comm[i])] += weighted_degree[i];
    }

    double q = 0.0;
    for (std::size_t c = 0; c < total.size(); ++c) {
        const double frac_tot = total[c] / two_m;
        q += internal[c] / two_m - resolution * frac_tot * frac_tot;
    }
    return q;
}

namespace {

/// Aggregatable weighted graph. self_loop[i] is the diagonal matrix entry
/// Aᵢᵢ, counted once in the ordered double sum, so Q is invariant under
/// community aggregation.
struct WorkGraph {
    std::vector<std::vector<std::pair<std::uint32_t, double>>> adj;
    std::vector<double> self_loop;
    std::vector<double> degree;  // k_i = Σⱼ Aᵢⱼ (includes the self loop)
    double two_m = 0.0;

    std::size_t size() const { return adj.size(); }
};

WorkGraph from_coupling(const CouplingGraph& g) {
    WorkGraph wg;
    wg.adj.resize(g.nodes.size());
    wg.self_loop.assign(g.nodes.size(), 0.0);
    wg.degree.assign(g.nodes.size(), 0.0);
    for (const CouplingEdge& e : g.edges) {
        wg.adj[e.a].emplace_back(e.b, e.weight);
        wg.adj[e.b].emplace_back(e.a, e.weight);
        wg.degree[e.a] += e.weight;
        wg.degree[e.b] += e.weight;
    }
    wg.two_m = std::accumulate(wg.degree.begin(), wg.degree.end(), 0.0);
    return wg;
}

class LouvainLevel {
public:
    LouvainLevel(const WorkGraph& g, double resolution, double tolerance)
        : g_(g),
          gamma_(resolution),
          // move tolerance expressed in Q units: ΔQ = 2·Δgain / 2m
          gain_tol_(tolerance * g.two_m / 2.0),
          node_comm_(g.size()),
          comm_tot_(g.size()),
          comm_in_(g.size()),
          neigh_weight_(g.size(), -1.0) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            node_comm_[i] = static_cast<std::uint32_t>(i);
            comm_tot_[i] = g.degree[i];
            comm_in_[i] = g.self_loop[i];
        }
    }

    double quality() const {
        double q = 0.0;
        for (std::size_t c = 0; c < comm_tot_.size(); ++c) {
            if (comm_tot_[c] <= 0.0 && comm_in_[c] <= 0.0) continue;
            const double frac = comm_tot_[c] / g_.two_m;
            q += comm_in_[c] / g_.two_m - gamma_ * frac * frac;
        }
        return q;
    }

    /// One round of local moves over every node in shuffled order.
    /// Returns the number of moves performed. Nodes that stay put leave the
    /// accounting untouched, so a move-free pass is bit-identical.
    std::size_t pass(const std::vector<std::uint32_t>& order) {
        std::size_t moves = 0;
        for (std::uint32_t node : order) {
            const std::uint32_t old_comm = node_comm_[node];
            collect_neighbor_comms(node);

            const double k = g_.degree[node];
            // Gains are relative to the node sitting alone; the old
            // community's total is taken without the node itself.
            double best_gain =
                link_weight(old_comm) -
                gamma_ * (comm_tot_[old_comm] - k) * k / g_.two_m;
            std::uint32_t best_comm = old_comm;
            for (std::uint32_t c : neigh_comms_) {
                if (c == old_comm) continue;
                const double cand =
                    link_weight(c) - gamma_ * comm_tot_[c] * k / g_.two_m;
                if (cand > best_gain + gain_tol_) {
                    best_gain = cand;
                    best_comm = c;
                }
            }
            if (best_comm != old_comm) {
                remove_node(node, old_comm);
                insert_node(node, best_comm);
                ++moves;
            }
        }
        return moves;
    }

    const std::vector<std::uint32_t>& communities() const { return node_comm_; }

private:
    double link_weight(std::uint32_t comm) const {
        return neigh_weight_[comm] < 0 ? 0.0 : neigh_weight_[comm];
    }

    void collect_neighbor_comms(std::uint32_t node) {
        for (std::uint32_t c : neigh_comms_) neigh_weight_[c] = -1.0;
        neigh_comms_.clear();
        for (const auto& [v, w] : g_.adj[node]) {
            const std::uint32_t c = node_comm_[v];
            if (neigh_weight_[c] < 0) {
                neigh_weight_[c] = 0.0;
                neigh_comms_.push_back(c);
            }
            neigh_weight_[c] += w;
        }
    }

    void remove_node(std::uint32_t node, std::uint32_t comm) {
        comm_in_[comm] -= 2.0 * link_weight(comm) + g_.self_loop[node];
        comm_tot_[comm] -= g_.degree[node];
    }

    void insert_node(std::uint32_t node, std::uint32_t comm) {
        comm_in_[comm] += 2.0 * link_weight(comm) + g_.self_loop[node];
        comm_tot_[comm] += g_.degree[node];
        node_comm_[node] = comm;
    }

    const WorkGraph& g_;
    double gamma_;
    double gain_tol_;
    std::vector<std::uint32_t> node_comm_;
    std::vector<double> comm_tot_;
    std::vector<double> comm_in_;
    std::vector<double> neigh_weight_;  // -1 sentinel, indexed by community
    std::vector<std::uint32_t> neigh_comms_;
};

/// Renumbers community labels to 0..k-1 preserving ascending label order.
std::uint32_t compact_labels(std::vector<std::uint32_t>& labels) {
    std::vector<std::uint32_t> sorted(labels);
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<std::uint32_t> remap(
        sorted.empty() ? 0 : sorted.back() + 1, 0);
    for (std::uint32_t i = 0; i < sorted.size(); ++i) remap[sorted[i]] = i;
    for (std::uint32_t& l : labels) l = remap[l];
    return static_cast<std::uint32_t>(sorted.size());
}

WorkGraph aggregate(const WorkGraph& g,
                    const std::vector<std::uint32_t>& comm,
                    std::uint32_t n_comms) {
    WorkGraph out;
    out.adj.resize(n_comms);
    out.self_loop.assign(n_comms, 0.0);
    out.degree.assign(n_comms, 0.0);
    out.two_m = g.two_m;

    std::vector<std::map<std::uint32_t, double>> acc(n_comms);
    for (std::size_t u = 0; u < g.size(); ++u) {
        const std::uint32_t cu = comm[u];
        out.self_loop[cu] += g.self_loop[u];
        for (const auto& [v, w] : g.adj[u]) {
            const std::uint32_t cv = comm[v];
            if (cu == cv) {
                out.self_loop[cu] += w;  // both directions land here once
            } else {
                acc[cu][cv] += w;
            }
        }
    }
    for (std::uint32_t c = 0; c < n_comms; ++c) {
        out.degree[c] = out.self_loop[c];
        for (const auto& [v, w] : acc[c]) {
            out.adj[c].emplace_back(v, w);
            out.degree[c] += w;
        }
    }
    return out;
}

}  // namespace

LouvainResult louvain(const CouplingGraph& graph, double resolution,
                      std::uint64_t seed, double tolerance, int max_passes) {
    if (graph.nodes.empty()) {
        throw ValidationError("louvain requires a non-empty graph");
    }
    if (resolution <= 0.0) {
        throw ValidationError("louvain requires resolution > 0");
    }

    LouvainResult result;
    result.assignment.seed = seed;

    // node -> community, refined level by level
    std::vector<std::uint32_t> membership(graph.nodes.size());
    for (std::size_t i = 0; i < membership.size(); ++i) {
        membership[i] = static_cast<std::uint32_t>(i);
    }

    if (!graph.edges.empty()) {
        Rng rng(seed);
        WorkGraph wg = from_coupling(graph);
        while (result.passes < max_passes) {
            LouvainLevel level(wg, resolution, tolerance);
            double prev_q = level.quality();
            bool improved = false;
            std::vector<std::uint32_t> order(wg.size());
            for (std::size_t i = 0; i < order.size(); ++i) {
                order[i] = static_cast<std::uint32_t>(i);
            }
            while (result.passes < max_passes) {
                rng.shuffle(order);
                const std::size_t moves = level.pass(order);
                ++result.passes;
                const double q = level.quality();
                result.pass_modularity.push_back(q);
                if (moves > 0) improved = true;
                if (moves == 0 || q - prev_q <= tolerance) break;
                prev_q = q;
            }
            if (!improved) break;

            std::vector<std::uint32_t> level_comm = level.communities();
            const std::uint32_t n_comms = compact_labels(level_comm);
            for (std::uint32_t& m : membership) m = level_comm[m];
            ++result.levels;
            if (n_comms == wg.size()) break;
            wg = aggregate(wg, level_comm, n_comms);
        }
    }

    // Relabel by descending community size (ties: previous label order).
    std::map<std::uint32_t, std::size_t> sizes;
    for (std::uint32_t c : membership) ++sizes[c];
    std::vector<std::pair<std::uint32_t, std::size_t>> by_size(sizes.begin(),
                                                               sizes.end());
    std::stable_sort(by_size.begin(), by_size.end(),
                     [](const auto& a, const auto& b) {
                         return a.second > b.second;
                     });
    std::map<std::uint32_t, int> relabel;
    for (std::size_t i = 0; i < by_size.size(); ++i) {
        relabel[by_size[i].first] = static_cast<int>(i);
    }

    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        const int c = relabel[membership[i]];
        result.assignment.membership[graph.nodes[i].id] = c;
        ++result.assignment.community_sizes[c];
    }
    if (!graph.edges.empty()) {
        result.assignment.modularity =
            modularity(graph, result.assignment.membership, resolution);
    }
    return result;
}

std::vector<CoalitionReport> coalition_summary(
    const CommunityAssignment& assignment, const CouplingGraph& graph,
    double min_share) {
    if (min_share < 0.0 || min_share >= 1.0) {
        throw ValidationError("min_share must be in [0, 1)");
    }

    std::map<int, CoalitionReport> by_comm;
    for (const CouplingNode& n : graph.nodes) {
        auto it = assignment.membership.find(n.id);
        if (it == assignment.membership.end()) {
            throw ValidationError("assignment does not cover node: " + n.id);
        }
        CoalitionReport& rep = by_comm[it->second];
        rep.community_id = it->second;
        rep.members.push_back(CoalitionMember{n.id, n.title, n.degree});
    }

    const double total = static_cast<double>(graph.nodes.size());
    std::vector<CoalitionReport> reports;
    for (auto& [id, rep] : by_comm) {
        rep.size = rep.members.size();
        rep.share = total > 0 ? rep.size / total : 0.0;
        rep.main = rep.share >= min_share;
        std::sort(rep.members.begin(), rep.members.end(),
                  [](const CoalitionMember& a, const CoalitionMember& b) {
                      if (a.degree != b.degree) return a.degree > b.degree;
                      return a.channel_id < b.channel_id;
                  });
        reports.push_back(std::move(rep));
    }
    std::stable_sort(reports.begin(), reports.end(),
                     [](const CoalitionReport& a, const CoalitionReport& b) {
                         if (a.main != b.main) return a.main;
                         return a.size > b.size;
                     });
    return reports;
}

}  // namespace bibcoup
