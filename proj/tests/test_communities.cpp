#include "bibcoup/communities.hpp"

#include "bibcoup/common.hpp"
#include "support/test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace bibcoup;

namespace {

CouplingGraph make_graph(
    const std::vector<std::tuple<std::string, std::string, std::uint32_t>>&
        edge_list) {
    std::vector<std::string> ids;
    for (const auto& [a, b, w] : edge_list) {
        ids.push_back(a);
        ids.push_back(b);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

    CouplingGraph g;
    for (const std::string& id : ids) g.nodes.push_back({id, id, 0});
    for (const auto& [a, b, w] : edge_list) {
        auto ia = static_cast<std::uint32_t>(g.find_node(a));
        auto ib = static_cast<std::uint32_t>(g.find_node(b));
        if (ia > ib) std::swap(ia, ib);
        g.edges.push_back({ia, ib, w});
        ++g.nodes[ia].degree;
        ++g.nodes[ib].degree;
    }
    std::sort(g.edges.begin(), g.edges.end(),
              [](const CouplingEdge& x, const CouplingEdge& y) {
                  return std::tie(x.a, x.b) < std::tie(y.a, y.b);
              });
    return g;
}

CouplingGraph two_triangles() {
    return make_graph({{"a", "b", 1},
                       {"a", "c", 1},
                       {"b", "c", 1},
                       {"x", "y", 1},
                       {"x", "z", 1},
                       {"y", "z", 1}});
}

std::map<std::string, int> membership_of(const CouplingGraph& g,
                                         const std::vector<int>& labels) {
    std::map<std::string, int> m;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        m[g.nodes[i].id] = labels[i];
    }
    return m;
}

/// Enumerates every set partition of n elements as restricted growth
/// strings and reports the best modularity found.
double exhaustive_best_q(const CouplingGraph& g) {
    const std::size_t n = g.nodes.size();
    std::vector<int> labels(n, 0);
    double best = -1.0;
    // restricted growth: labels[0] = 0; labels[i] <= 1 + max(labels[0..i-1])
    while (true) {
        best = std::max(best, modularity(g, membership_of(g, labels)));
        std::size_t i = n;
        while (i-- > 1) {
            int max_prefix = 0;
            for (std::size_t j = 0; j < i; ++j) {
                max_prefix = std::max(max_prefix, labels[j]);
            }
            if (labels[i] <= max_prefix) {
                ++labels[i];
                for (std::size_t j = i + 1; j < n; ++j) labels[j] = 0;
                break;
            }
            if (i == 1) return best;
            labels[i] = 0;
        }
        if (n <= 1) return best;
    }
}

/// Adjusted Rand index between two labelings of 0..n-1.
double adjusted_rand(const std::vector<int>& a, const std::vector<int>& b) {
    const std::size_t n = a.size();
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> ra, rb;
    for (std::size_t i = 0; i < n; ++i) {
        ++joint[{a[i], b[i]}];
        ++ra[a[i]];
        ++rb[b[i]];
    }
    auto choose2 = [](double x) { return x * (x - 1) / 2.0; };
    double sum_joint = 0, sum_a = 0, sum_b = 0;
    for (const auto& [k, v] : joint) sum_joint += choose2(v);
    for (const auto& [k, v] : ra) sum_a += choose2(v);
    for (const auto& [k, v] : rb) sum_b += choose2(v);
    const double total = choose2(static_cast<double>(n));
    const double expected = sum_a * sum_b / total;
    const double max_index = (sum_a + sum_b) / 2.0;
    if (max_index == expected) return 1.0;
    return (sum_joint - expected) / (max_index - expected);
}

/// Four planted blocks of 25 nodes; Bernoulli edges from an explicit rng.
CouplingGraph planted_partition(std::uint64_t gen_seed, double p_in,
                                double p_out, std::vector<int>* truth) {
    const int blocks = 4, per_block = 25;
    const int n = blocks * per_block;
    Rng rng(gen_seed);
    std::vector<std::tuple<std::string, std::string, std::uint32_t>> edges;
    auto name = [](int i) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "n%03d", i);
        return std::string(buf);
    };
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const bool same = (i / per_block) == (j / per_block);
            const double p = same ? p_in : p_out;
            if (rng.unit() < p) edges.emplace_back(name(i), name(j), 1);
        }
    }
    CouplingGraph g = make_graph(edges);
    if (truth) {
        truth->clear();
        for (const CouplingNode& node : g.nodes) {
            truth->push_back(std::stoi(node.id.substr(1)) / per_block);
        }
    }
    return g;
}

}  // namespace

TEST_CASE("one community always has modularity zero") {
    for (const CouplingGraph& g :
         {two_triangles(), make_graph({{"a", "b", 7}, {"b", "c", 2}})}) {
        std::map<std::string, int> all_one;
        for (const CouplingNode& n : g.nodes) all_one[n.id] = 0;
        CHECK(modularity(g, all_one) == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("two disjoint triangles split by triangle give Q = 0.5") {
    CouplingGraph g = two_triangles();
    std::map<std::string, int> split{{"a", 0}, {"b", 0}, {"c", 0},
                                     {"x", 1}, {"y", 1}, {"z", 1}};
    CHECK(modularity(g, split) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("all singletons give negative modularity") {
    CouplingGraph g = two_triangles();
    std::map<std::string, int> singletons;
    int c = 0;
    for (const CouplingNode& n : g.nodes) singletons[n.id] = c++;
    // -sum (k_i/2m)^2 with six degree-2 nodes and 2m = 12
    CHECK(modularity(g, singletons) ==
          doctest::Approx(-6.0 * (2.0 / 12) * (2.0 / 12)).epsilon(1e-12));
}

TEST_CASE("modularity rejects uncovered nodes and empty graphs") {
    CouplingGraph g = two_triangles();
    std::map<std::string, int> partial{{"a", 0}};
    CHECK_THROWS_AS(modularity(g, partial), ValidationError);

    CouplingGraph empty;
    empty.nodes.push_back({"solo", "solo", 0});
    std::map<std::string, int> m{{"solo", 0}};
    CHECK_THROWS_AS(modularity(empty, m), ValidationError);
}

TEST_CASE("exhaustive search confirms the triangle split is optimal") {
    CouplingGraph g = two_triangles();
    const double best = exhaustive_best_q(g);
    CHECK(best == doctest::Approx(0.5).epsilon(1e-12));

    LouvainResult result = louvain(g, 1.0, 42);
    CHECK(result.assignment.community_sizes.size() == 2);
    CHECK(result.assignment.modularity ==
          doctest::Approx(0.5).epsilon(1e-12));
    // the two communities are exactly the triangles
    const auto& m = result.assignment.membership;
    CHECK(m.at("a") == m.at("b"));
    CHECK(m.at("b") == m.at("c"));
    CHECK(m.at("x") == m.at("y"));
    CHECK(m.at("y") == m.at("z"));
    CHECK(m.at("a") != m.at("x"));
}

TEST_CASE("single edge graph ends in one community with Q = 0") {
    CouplingGraph g = make_graph({{"a", "b", 3}});
    LouvainResult result = louvain(g, 1.0, 1);
    CHECK(result.assignment.modularity >= 0.0);
    CHECK(result.assignment.membership.at("a") ==
          result.assignment.membership.at("b"));
}

TEST_CASE("identical seeds give identical memberships") {
    std::vector<int> truth;
    CouplingGraph g = planted_partition(99, 0.3, 0.01, &truth);
    LouvainResult r1 = louvain(g, 1.0, 7);
    LouvainResult r2 = louvain(g, 1.0, 7);
    CHECK(r1.assignment.membership == r2.assignment.membership);
    CHECK(r1.assignment.modularity == r2.assignment.modularity);
}

TEST_CASE("planted partitions are recovered across seeds") {
    for (std::uint64_t gen_seed : {1ull, 2ull}) {
        std::vector<int> truth;
        CouplingGraph g = planted_partition(gen_seed, 0.3, 0.01, &truth);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            LouvainResult result = louvain(g, 1.0, seed);
            std::vector<int> found;
            found.reserve(g.nodes.size());
            for (const CouplingNode& n : g.nodes) {
                found.push_back(result.assignment.membership.at(n.id));
            }
            CHECK(adjusted_rand(truth, found) >= 0.9);
        }
    }
}

TEST_CASE("modularity never decreases across passes") {
    std::vector<int> truth;
    for (const CouplingGraph& g :
         {two_triangles(), planted_partition(5, 0.3, 0.01, &truth)}) {
        LouvainResult result = louvain(g, 1.0, 3);
        for (std::size_t i = 1; i < result.pass_modularity.size(); ++i) {
            CHECK(result.pass_modularity[i] >=
                  result.pass_modularity[i - 1] - 1e-9);
        }
        CHECK(result.assignment.modularity >=
              result.pass_modularity.front() - 1e-9);
    }
}

TEST_CASE("assignment invariants hold") {
    std::vector<int> truth;
    CouplingGraph g = planted_partition(8, 0.3, 0.01, &truth);
    LouvainResult result = louvain(g, 1.0, 21);
    const CommunityAssignment& a = result.assignment;

    CHECK(a.membership.size() == g.nodes.size());
    std::size_t total = 0;
    for (const auto& [c, size] : a.community_sizes) total += size;
    CHECK(total == g.nodes.size());

    // ids contiguous from 0, sizes descending under the relabeling
    int expected = 0;
    std::size_t prev = g.nodes.size() + 1;
    for (const auto& [c, size] : a.community_sizes) {
        CHECK(c == expected++);
        CHECK(size <= prev);
        prev = size;
    }
    // stored Q equals Q recomputed from the membership
    CHECK(a.modularity ==
          doctest::Approx(modularity(g, a.membership)).epsilon(1e-12));
}

TEST_CASE("disjoint cliques are never merged") {
    std::vector<std::tuple<std::string, std::string, std::uint32_t>> edges;
    for (int block = 0; block < 3; ++block) {
        for (int i = 0; i < 5; ++i) {
            for (int j = i + 1; j < 5; ++j) {
                edges.emplace_back(
                    "b" + std::to_string(block) + "n" + std::to_string(i),
                    "b" + std::to_string(block) + "n" + std::to_string(j), 2);
            }
        }
    }
    CouplingGraph g = make_graph(edges);
    LouvainResult result = louvain(g, 1.0, 11);
    CHECK(result.assignment.community_sizes.size() == 3);
    for (const auto& [c, size] : result.assignment.community_sizes) {
        CHECK(size == 5);
    }
}

TEST_CASE("louvain input validation") {
    CouplingGraph empty;
    CHECK_THROWS_AS(louvain(empty, 1.0, 1), ValidationError);
    CHECK_THROWS_AS(louvain(two_triangles(), 0.0, 1), ValidationError);
}

TEST_CASE("coalition summary splits main and disregarded") {
    // 10-node community plus a single straggler
    std::vector<std::tuple<std::string, std::string, std::uint32_t>> edges;
    for (int i = 0; i < 10; ++i) {
        edges.emplace_back("m" + std::to_string(i),
                           "m" + std::to_string((i + 1) % 10), 2);
    }
    edges.emplace_back("solo", "m0", 2);
    CouplingGraph g = make_graph(edges);

    CommunityAssignment a;
    for (int i = 0; i < 10; ++i) a.membership["m" + std::to_string(i)] = 0;
    a.membership["solo"] = 1;
    a.community_sizes[0] = 10;
    a.community_sizes[1] = 1;

    auto reports = coalition_summary(a, g, 0.1);
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].main);
    CHECK(reports[0].size == 10);
    CHECK_FALSE(reports[1].main);
    CHECK(reports[1].size == 1);
    CHECK(reports[1].share == doctest::Approx(1.0 / 11));

    // members are sorted by degree descending
    const auto& members = reports[0].members;
    for (std::size_t i = 1; i < members.size(); ++i) {
        CHECK(members[i - 1].degree >= members[i].degree);
    }

    auto all_main = coalition_summary(a, g, 0.0);
    for (const auto& rep : all_main) CHECK(rep.main);

    CHECK_THROWS_AS(coalition_summary(a, g, 1.0), ValidationError);
    CommunityAssignment missing;
    CHECK_THROWS_AS(coalition_summary(missing, g, 0.1), ValidationError);
}
