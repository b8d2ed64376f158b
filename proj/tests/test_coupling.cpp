#include "bibcoup/coupling.hpp"

#include "bibcoup/common.hpp"
#include "support/test_util.hpp"

#include <doctest.h>

#include <map>

using namespace bibcoup;

namespace {

/// Brute-force oracle: dense AᵀA off-diagonal via per-column dot products.
std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> dense_bcf(
    const CitationMatrix& m) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> out;
    std::vector<std::vector<std::uint8_t>> cols;
    for (std::size_t c = 0; c < m.channels.size(); ++c) {
        cols.push_back(m.column(c));
    }
    for (std::uint32_t i = 0; i < cols.size(); ++i) {
        for (std::uint32_t j = i + 1; j < cols.size(); ++j) {
            const std::uint64_t w = bcf_pair(cols[i], cols[j]);
            if (w > 0) out[{i, j}] = w;
        }
    }
    return out;
}

std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> as_map(
    const WeightMap& weights) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> out;
    for (const auto& [key, w] : weights) {
        out[unpack_pair(key)] = w;
    }
    return out;
}

CitationMatrix random_matrix(Rng& rng, std::size_t n_channels,
                             std::size_t n_sources, double density) {
    CitationMatrix m;
    for (std::size_t c = 0; c < n_channels; ++c) {
        m.channels.push_back("ch" + std::to_string(c));
    }
    const auto threshold =
        static_cast<std::uint64_t>(density * 4294967296.0);
    for (std::size_t s = 0; s < n_sources; ++s) {
        std::vector<std::uint32_t> cols;
        for (std::uint32_t c = 0; c < n_channels; ++c) {
            if ((rng.next() & 0xffffffffu) < threshold) cols.push_back(c);
        }
        if (cols.empty()) continue;  // matrices never carry all-zero rows
        m.sources.push_back("s" + std::to_string(s));
        m.rows.push_back(std::move(cols));
    }
    return m;
}

CitationMatrix worked_example_matrix() {
    CitationMatrix m;
    m.channels = {"ch1", "ch2", "ch3"};
    m.sources = {"url1", "url2", "url3", "url4"};
    m.rows = {{0, 1}, {0, 1}, {0, 1}, {2}};
    return m;
}

}  // namespace

TEST_CASE("worked scalar products") {
    std::vector<std::uint8_t> v1{1, 1, 1, 0};
    std::vector<std::uint8_t> v2{1, 1, 1, 0};
    std::vector<std::uint8_t> v3{0, 0, 0, 1};
    std::vector<std::uint8_t> zero{0, 0, 0, 0};
    CHECK(bcf_pair(v1, v2) == 3);
    CHECK(bcf_pair(v1, v3) == 0);
    CHECK(bcf_pair(v1, zero) == 0);
    CHECK(bcf_pair(v3, zero) == 0);
}

TEST_CASE("length mismatch is an error") {
    std::vector<std::uint8_t> a{1, 0};
    std::vector<std::uint8_t> b{1, 0, 1};
    CHECK_THROWS_AS(bcf_pair(a, b), ValidationError);
}

TEST_CASE("worked example couples channels 1 and 2 with weight 3") {
    WeightMap weights = bcf_all_pairs(worked_example_matrix());
    REQUIRE(weights.size() == 1);
    auto [a, b] = unpack_pair(weights.begin()->first);
    CHECK(a == 0);
    CHECK(b == 1);
    CHECK(weights.begin()->second == 3);
}

TEST_CASE("orthogonal columns produce an empty map") {
    CitationMatrix m;
    m.channels = {"a", "b"};
    m.sources = {"s1", "s2"};
    m.rows = {{0}, {1}};
    CHECK(bcf_all_pairs(m).empty());
}

TEST_CASE("sparse all-pairs equals the dense oracle on random matrices") {
    Rng rng(7);
    for (int round = 0; round < 10; ++round) {
        CitationMatrix m = random_matrix(rng, 50, 200, 0.05);
        CHECK(as_map(bcf_all_pairs(m)) == dense_bcf(m));
    }
}

TEST_CASE("weights are bounded by per-channel citation counts") {
    Rng rng(11);
    CitationMatrix m = random_matrix(rng, 40, 150, 0.08);
    std::vector<std::uint64_t> cited(m.channels.size(), 0);
    for (const auto& row : m.rows) {
        for (std::uint32_t c : row) ++cited[c];
    }
    for (const auto& [key, w] : bcf_all_pairs(m)) {
        auto [a, b] = unpack_pair(key);
        CHECK(w <= std::min(cited[a], cited[b]));
    }
}

TEST_CASE("diagonal identity: self product equals cited-source count") {
    Rng rng(13);
    CitationMatrix m = random_matrix(rng, 30, 100, 0.1);
    std::vector<std::uint64_t> cited(m.channels.size(), 0);
    for (const auto& row : m.rows) {
        for (std::uint32_t c : row) ++cited[c];
    }
    for (std::size_t c = 0; c < m.channels.size(); ++c) {
        auto col = m.column(c);
        CHECK(bcf_pair(col, col) == cited[c]);
    }
}

TEST_CASE("deleting a matrix row never increases any pairwise weight") {
    Rng rng(17);
    CitationMatrix m = random_matrix(rng, 25, 60, 0.15);
    auto before = as_map(bcf_all_pairs(m));
    for (std::size_t drop = 0; drop < m.rows.size(); drop += 7) {
        CitationMatrix reduced;
        reduced.channels = m.channels;
        for (std::size_t r = 0; r < m.rows.size(); ++r) {
            if (r == drop) continue;
            reduced.sources.push_back(m.sources[r]);
            reduced.rows.push_back(m.rows[r]);
        }
        for (const auto& [pair, w] : as_map(bcf_all_pairs(reduced))) {
            CHECK(w <= before.at(pair));
        }
    }
}

TEST_CASE("per-source cap skips ubiquitous sources") {
    CitationMatrix m;
    m.channels = {"a", "b", "c"};
    m.sources = {"everyone", "pair"};
    m.rows = {{0, 1, 2}, {0, 1}};
    WeightMap capped = bcf_all_pairs(m, /*per_source_cap=*/2);
    REQUIRE(capped.size() == 1);
    CHECK(capped.at(pack_pair(0, 1)) == 1);
}

TEST_CASE("threshold semantics and isolate removal") {
    WeightMap weights;
    weights[pack_pair(0, 1)] = 1;  // a-b
    weights[pack_pair(0, 2)] = 2;  // a-c
    weights[pack_pair(1, 2)] = 3;  // b-c
    std::vector<std::string> ids{"a", "b", "c"};

    CouplingGraph g = build_graph(weights, ids, {}, 2);
    CHECK(g.nodes.size() == 3);  // all three still have an edge
    REQUIRE(g.edges.size() == 2);
    CHECK(g.edges[0].weight == 2);
    CHECK(g.edges[1].weight == 3);

    CouplingGraph identity = build_graph(weights, ids, {}, 1);
    CHECK(identity.edges.size() == 3);

    WeightMap lonely;
    lonely[pack_pair(0, 1)] = 5;
    CouplingGraph dropped = build_graph(lonely, ids, {}, 2);
    CHECK(dropped.nodes.size() == 2);  // c is isolated and removed
    CouplingGraph kept = build_graph(lonely, ids, {}, 2, /*keep_isolates=*/true);
    CHECK(kept.nodes.size() == 3);
}

TEST_CASE("node set equals edge endpoints after thresholding") {
    Rng rng(23);
    CitationMatrix m = random_matrix(rng, 30, 80, 0.1);
    WeightMap weights = bcf_all_pairs(m);
    CouplingGraph g = build_graph(weights, m.channels, {}, 2);
    std::vector<bool> seen(g.nodes.size(), false);
    for (const CouplingEdge& e : g.edges) {
        CHECK(e.a < e.b);
        seen[e.a] = true;
        seen[e.b] = true;
    }
    for (std::size_t i = 0; i < g.nodes.size(); ++i) CHECK(seen[i]);
}

TEST_CASE("degrees and titles attach to nodes") {
    WeightMap weights;
    weights[pack_pair(0, 1)] = 3;
    weights[pack_pair(0, 2)] = 2;
    std::unordered_map<std::string, std::string> titles{{"a", "Alpha"}};
    CouplingGraph g = build_graph(weights, {"a", "b", "c"}, titles, 2);
    REQUIRE(g.nodes.size() == 3);
    const std::size_t a = g.find_node("a");
    REQUIRE(a != CouplingGraph::npos);
    CHECK(g.nodes[a].title == "Alpha");
    CHECK(g.nodes[a].degree == 2);
    CHECK(g.nodes[g.find_node("b")].title == "b");  // fallback to id
}

TEST_CASE("weights file is sorted and graph round-trips") {
    testutil::TempDir tmp;
    WeightMap weights;
    weights[pack_pair(0, 1)] = 2;
    weights[pack_pair(1, 2)] = 4;
    std::vector<std::string> ids{"zeta", "alpha", "mid"};
    write_weights(tmp.file("w.tsv"), weights, ids);
    CHECK(read_text_file(tmp.file("w.tsv")) ==
          "alpha\tmid\t4\nalpha\tzeta\t2\n");

    CouplingGraph g = build_graph(weights, ids, {}, 2);
    save_graph(g, tmp.file("nodes.tsv"), tmp.file("edges.tsv"));
    CouplingGraph loaded =
        load_graph(tmp.file("nodes.tsv"), tmp.file("edges.tsv"));
    REQUIRE(loaded.nodes.size() == g.nodes.size());
    REQUIRE(loaded.edges.size() == g.edges.size());
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        CHECK(loaded.nodes[i].id == g.nodes[i].id);
        CHECK(loaded.nodes[i].degree == g.nodes[i].degree);
    }
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        CHECK(loaded.edges[i].weight == g.edges[i].weight);
    }
}
