#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "stargaze/error.hpp"

namespace stargaze {

using Edge = std::pair<std::uint32_t, std::uint32_t>;  // canonical: first < second

/// Immutable undirected simple graph: sorted adjacency lists plus a canonical
/// edge list (u < v, lexicographically sorted, deduplicated).
class Graph {
public:
    Graph() = default;

    /// Canonicalizes edge_pairs: orientation normalized, duplicates dropped.
    /// Self-loops and out-of-range endpoints are rejected, naming the pair.
    static Graph build(std::size_t node_count, const std::vector<Edge>& edge_pairs) {
        Graph g;
        g.node_count_ = node_count;
        g.edges_.reserve(edge_pairs.size());
        for (const auto& [a, b] : edge_pairs) {
            if (a >= node_count || b >= node_count)
                throw Error("build_graph: endpoint out of range in edge (" + std::to_string(a) +
                            ", " + std::to_string(b) + ") for node_count " +
                            std::to_string(node_count));
            if (a == b)
                throw Error("build_graph: self-loop (" + std::to_string(a) + ", " +
                            std::to_string(b) + ") is not allowed");
            g.edges_.emplace_back(std::min(a, b), std::max(a, b));
        }
        std::sort(g.edges_.begin(), g.edges_.end());
        g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end()), g.edges_.end());
        g.adjacency_.resize(node_count);
        for (const auto& [u, v] : g.edges_) {
            g.adjacency_[u].push_back(v);
            g.adjacency_[v].push_back(u);
        }
        for (auto& nbrs : g.adjacency_) std::sort(nbrs.begin(), nbrs.end());
        return g;
    }

    std::size_t node_count() const { return node_count_; }
    std::size_t edge_count() const { return edges_.size(); }

    const std::vector<std::uint32_t>& neighbors(std::uint32_t u) const { return adjacency_[u]; }
    std::size_t degree(std::uint32_t u) const { return adjacency_[u].size(); }
    const std::vector<Edge>& edges() const { return edges_; }

    bool has_edge(std::uint32_t u, std::uint32_t v) const {
        if (u >= node_count_ || v >= node_count_ || u == v) return false;
        const auto& nbrs = adjacency_[u].size() <= adjacency_[v].size() ? adjacency_[u]
                                                                        : adjacency_[v];
        std::uint32_t target = (&nbrs == &adjacency_[u]) ? v : u;
        return std::binary_search(nbrs.begin(), nbrs.end(), target);
    }

private:
    std::size_t node_count_ = 0;
    std::vector<std::vector<std::uint32_t>> adjacency_;
    std::vector<Edge> edges_;
};

inline Graph build_graph(std::size_t node_count, const std::vector<Edge>& edge_pairs) {
    return Graph::build(node_count, edge_pairs);
}

struct GraphStats {
    std::size_t node_count = 0;
    std::size_t edge_count = 0;
    double average_degree = 0.0;
    double density = 0.0;
};

/// Degenerate sizes (0 or 1 nodes) yield zero averages rather than errors.
inline GraphStats graph_stats(const Graph& g) {
    GraphStats s;
    s.node_count = g.node_count();
    s.edge_count = g.edge_count();
    double n = static_cast<double>(s.node_count);
    double m = static_cast<double>(s.edge_count);
    if (s.node_count >= 1) s.average_degree = 2.0 * m / n;
    if (s.node_count >= 2) s.density = 2.0 * m / (n * (n - 1.0));
    return s;
}

}  // namespace stargaze
