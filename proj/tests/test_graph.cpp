#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "stargaze/dataset.hpp"
#include "stargaze/graph.hpp"
#include "stargaze/rng.hpp"

using namespace stargaze;

TEST_SUITE_BEGIN("graph");

TEST_CASE("build_graph canonicalizes a triangle") {
    Graph g = build_graph(3, {{0, 1}, {1, 2}, {0, 2}});
    CHECK(g.node_count() == 3);
    CHECK(g.edge_count() == 3);
    for (std::uint32_t u = 0; u < 3; ++u) CHECK(g.degree(u) == 2);
}

TEST_CASE("build_graph deduplicates and normalizes orientation") {
    Graph g = build_graph(3, {{1, 0}, {0, 1}});
    CHECK(g.edge_count() == 1);
    REQUIRE(g.edges().size() == 1);
    CHECK(g.edges()[0] == Edge{0, 1});
    CHECK(g.degree(2) == 0);
}

TEST_CASE("build_graph rejects self-loops naming the pair") {
    CHECK_THROWS_WITH_AS(build_graph(2, {{0, 0}}),
                         doctest::Contains("self-loop (0, 0)"), Error);
}

TEST_CASE("build_graph rejects out-of-range endpoints") {
    CHECK_THROWS_WITH_AS(build_graph(2, {{0, 5}}), doctest::Contains("(0, 5)"), Error);
}

TEST_CASE("graph_stats on K3, P3 and a single node") {
    Graph k3 = build_graph(3, {{0, 1}, {1, 2}, {0, 2}});
    GraphStats s = graph_stats(k3);
    CHECK(s.node_count == 3);
    CHECK(s.edge_count == 3);
    CHECK(s.average_degree == doctest::Approx(2.0));
    CHECK(s.density == doctest::Approx(1.0));

    Graph p3 = build_graph(3, {{0, 1}, {1, 2}});
    s = graph_stats(p3);
    CHECK(s.average_degree == doctest::Approx(4.0 / 3.0));
    CHECK(s.density == doctest::Approx(2.0 / 3.0));

    Graph single = build_graph(1, {});
    s = graph_stats(single);
    CHECK(s.node_count == 1);
    CHECK(s.edge_count == 0);
    CHECK(s.average_degree == 0.0);
    CHECK(s.density == 0.0);
}

TEST_CASE("rebuilding from the edge list reproduces the graph") {
    Rng rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        std::size_t n = 2 + rng.uniform_index(20);
        SyntheticParams params;
        params.graph_count = 1;
        params.min_nodes = params.max_nodes = n;
        params.edge_probability = rng.uniform_real();
        Graph g = generate_synthetic(SyntheticKind::uniform_random, params, rng.next()).graphs[0];
        Graph rebuilt = build_graph(g.node_count(), g.edges());
        CHECK(rebuilt.edges() == g.edges());
        for (std::uint32_t u = 0; u < n; ++u) CHECK(rebuilt.neighbors(u) == g.neighbors(u));
    }
}

TEST_CASE("handshake lemma holds on random graphs") {
    Rng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        SyntheticParams params;
        params.min_nodes = 5;
        params.max_nodes = 40;
        params.edge_probability = 0.3;
        Graph g = generate_synthetic(SyntheticKind::uniform_random, params, trial).graphs[0];
        std::size_t degree_sum = 0;
        for (std::uint32_t u = 0; u < g.node_count(); ++u) degree_sum += g.degree(u);
        CHECK(degree_sum == 2 * g.edge_count());
    }
}

TEST_SUITE_END();

TEST_SUITE_BEGIN("split");

namespace {
GraphDataset tiny_dataset(std::size_t count) {
    SyntheticParams params;
    params.graph_count = count;
    params.min_nodes = 4;
    params.max_nodes = 8;
    params.edge_probability = 0.5;
    return generate_synthetic(SyntheticKind::uniform_random, params, 99);
}
}  // namespace

TEST_CASE("100 graphs split 60/20/20") {
    auto ds = tiny_dataset(100);
    auto split = split_dataset(ds, {0.6, 0.2, 0.2}, 1);
    CHECK(split.train_indices.size() == 60);
    CHECK(split.val_indices.size() == 20);
    CHECK(split.test_indices.size() == 20);
}

TEST_CASE("5 graphs split 3/1/1 by the floor-then-remainder rule") {
    auto ds = tiny_dataset(5);
    auto split = split_dataset(ds, {0.6, 0.2, 0.2}, 1);
    CHECK(split.train_indices.size() == 3);
    CHECK(split.val_indices.size() == 1);
    CHECK(split.test_indices.size() == 1);
}

TEST_CASE("same seed gives identical index lists") {
    auto ds = tiny_dataset(37);
    auto a = split_dataset(ds, {0.6, 0.2, 0.2}, 42);
    auto b = split_dataset(ds, {0.6, 0.2, 0.2}, 42);
    CHECK(a.train_indices == b.train_indices);
    CHECK(a.val_indices == b.val_indices);
    CHECK(a.test_indices == b.test_indices);
}

TEST_CASE("split is a partition") {
    auto ds = tiny_dataset(53);
    for (std::uint64_t seed : {0ULL, 7ULL, 123456789ULL}) {
        auto split = split_dataset(ds, {0.6, 0.2, 0.2}, seed);
        std::set<std::size_t> all;
        for (auto idx : split.train_indices) all.insert(idx);
        for (auto idx : split.val_indices) all.insert(idx);
        for (auto idx : split.test_indices) all.insert(idx);
        CHECK(all.size() ==
              split.train_indices.size() + split.val_indices.size() + split.test_indices.size());
        CHECK(all.size() == ds.size());
        CHECK(*all.begin() == 0);
        CHECK(*all.rbegin() == ds.size() - 1);
    }
}

TEST_CASE("ratios must sum to 1") {
    auto ds = tiny_dataset(5);
    CHECK_THROWS_AS(split_dataset(ds, {0.6, 0.2, 0.3}, 1), Error);
}

TEST_SUITE_END();

TEST_SUITE_BEGIN("batch");

TEST_CASE("two K2 graphs batch block-diagonally") {
    Graph k2 = build_graph(2, {{0, 1}});
    auto batch = batch_graphs(std::vector<Graph>{k2, k2});
    CHECK(batch.graph.node_count() == 4);
    CHECK(batch.graph.edges() == std::vector<Edge>{{0, 1}, {2, 3}});
    CHECK(batch.membership == std::vector<std::uint32_t>{0, 0, 1, 1});
    CHECK(batch.graph_count == 2);
}

TEST_CASE("single graph batches to itself") {
    Graph k3 = build_graph(3, {{0, 1}, {1, 2}, {0, 2}});
    auto batch = batch_graphs(std::vector<Graph>{k3});
    CHECK(batch.graph.edges() == k3.edges());
    CHECK(batch.membership == std::vector<std::uint32_t>{0, 0, 0});
}

TEST_CASE("P3 + K3 batch: no cross edges, stats recoverable per member") {
    Graph p3 = build_graph(3, {{0, 1}, {1, 2}});
    Graph k3 = build_graph(3, {{0, 1}, {1, 2}, {0, 2}});
    auto batch = batch_graphs(std::vector<Graph>{p3, k3});
    CHECK(batch.graph.node_count() == 6);
    CHECK(batch.graph.edge_count() == 5);
    for (const auto& [u, v] : batch.graph.edges())
        CHECK(batch.membership[u] == batch.membership[v]);

    // slicing by membership must recover each member's stats
    std::vector<Graph> members{p3, k3};
    for (std::size_t k = 0; k < members.size(); ++k) {
        std::size_t offset = batch.offsets[k];
        std::vector<Edge> sliced;
        for (const auto& [u, v] : batch.graph.edges())
            if (batch.membership[u] == k)
                sliced.emplace_back(static_cast<std::uint32_t>(u - offset),
                                    static_cast<std::uint32_t>(v - offset));
        Graph member = build_graph(members[k].node_count(), sliced);
        GraphStats got = graph_stats(member);
        GraphStats expected = graph_stats(members[k]);
        CHECK(got.edge_count == expected.edge_count);
        CHECK(got.average_degree == doctest::Approx(expected.average_degree));
        CHECK(got.density == doctest::Approx(expected.density));
    }
}

TEST_SUITE_END();

TEST_SUITE_BEGIN("synthetic");

TEST_CASE("uniform-random with p=1 yields the complete graph") {
    SyntheticParams params;
    params.min_nodes = params.max_nodes = 4;
    params.edge_probability = 1.0;
    Graph g = generate_synthetic(SyntheticKind::uniform_random, params, 5).graphs[0];
    CHECK(g.edge_count() == 6);
}

TEST_CASE("uniform-random with p=0 yields the empty graph") {
    SyntheticParams params;
    params.min_nodes = params.max_nodes = 6;
    params.edge_probability = 0.0;
    Graph g = generate_synthetic(SyntheticKind::uniform_random, params, 5).graphs[0];
    CHECK(g.edge_count() == 0);
}

TEST_CASE("invalid probability is rejected") {
    SyntheticParams params;
    params.edge_probability = 1.5;
    CHECK_THROWS_AS(generate_synthetic(SyntheticKind::uniform_random, params, 5), Error);
}

TEST_CASE("two-density classes separate in mean density over 100 samples") {
    SyntheticParams params;
    params.graph_count = 100;
    params.min_nodes = 55;
    params.max_nodes = 65;
    params.p0 = 0.05;
    params.p1 = 0.3;
    auto ds = generate_synthetic(SyntheticKind::two_density_classes, params, 31);
    double mean_density[2] = {0.0, 0.0};
    std::size_t count[2] = {0, 0};
    for (std::size_t i = 0; i < ds.size(); ++i) {
        mean_density[ds.labels[i]] += graph_stats(ds.graphs[i]).density;
        count[ds.labels[i]] += 1;
    }
    CHECK(count[0] + count[1] == 100);
    CHECK(mean_density[1] / count[1] > mean_density[0] / count[0]);
}

TEST_CASE("generation is deterministic for a fixed seed") {
    SyntheticParams params;
    params.graph_count = 5;
    params.min_nodes = 10;
    params.max_nodes = 30;
    params.edge_probability = 0.2;
    auto a = generate_synthetic(SyntheticKind::uniform_random, params, 17);
    auto b = generate_synthetic(SyntheticKind::uniform_random, params, 17);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.graphs[i].edges() == b.graphs[i].edges());
}

TEST_CASE("planted partition concentrates edges inside blocks") {
    SyntheticParams params;
    params.min_nodes = params.max_nodes = 100;
    params.blocks = 2;
    params.intra_p = 0.3;
    params.inter_p = 0.02;
    Graph g = generate_synthetic(SyntheticKind::planted_partition, params, 3).graphs[0];
    std::size_t intra = 0, inter = 0;
    for (const auto& [u, v] : g.edges())
        ((u < 50) == (v < 50) ? intra : inter) += 1;
    CHECK(intra > 8 * inter);
}

TEST_SUITE_END();
