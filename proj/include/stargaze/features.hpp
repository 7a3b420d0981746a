#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <queue>
#include <string>
#include <vector>

#include "stargaze/csv.hpp"
#include "stargaze/error.hpp"
#include "stargaze/graph.hpp"
#include "stargaze/matrix.hpp"

namespace stargaze {

/// Column order of the model input matrix. Fixed; everything downstream
/// (checkpoints, embeddings, exports) depends on it.
enum FeatureColumn : std::size_t {
    kDegree = 0,
    kClustering = 1,
    kBetweenness = 2,
    kCloseness = 3,
    kPageRank = 4,
    kFeatureCount = 5,
};

inline std::vector<double> degree(const Graph& g) {
    std::vector<double> out(g.node_count());
    for (std::uint32_t u = 0; u < g.node_count(); ++u)
        out[u] = static_cast<double>(g.degree(u));
    return out;
}

/// Local clustering coefficient: 2*T(u) / (deg(u)*(deg(u)-1)), zero when
/// deg(u) < 2. T(u) counts edges among the neighbors of u.
inline std::vector<double> clustering_coefficient(const Graph& g) {
    const std::size_t n = g.node_count();
    std::vector<double> out(n, 0.0);
    std::vector<char> is_neighbor(n, 0);
    for (std::uint32_t u = 0; u < n; ++u) {
        const auto& nbrs = g.neighbors(u);
        if (nbrs.size() < 2) continue;
        for (std::uint32_t v : nbrs) is_neighbor[v] = 1;
        std::size_t links = 0;
        for (std::uint32_t v : nbrs)
            for (std::uint32_t w : g.neighbors(v))
                if (w > v && is_neighbor[w]) ++links;
        for (std::uint32_t v : nbrs) is_neighbor[v] = 0;
        double d = static_cast<double>(nbrs.size());
        out[u] = 2.0 * static_cast<double>(links) / (d * (d - 1.0));
    }
    return out;
}

/// Brandes' algorithm over all sources; shortest-path multiplicities carried
/// in the sigma counts. Undirected accumulation is halved, then normalized by
/// (n-1)(n-2)/2 so values are comparable across graph sizes. Graphs with
/// fewer than 3 nodes have no interior vertices and return all zeros.
inline std::vector<double> betweenness_centrality(const Graph& g) {
    const std::size_t n = g.node_count();
    std::vector<double> cb(n, 0.0);
    if (n < 3) return cb;

    std::vector<std::vector<std::uint32_t>> predecessors(n);
    std::vector<double> sigma(n), delta(n);
    std::vector<std::int64_t> dist(n);
    std::vector<std::uint32_t> order;
    order.reserve(n);

    for (std::uint32_t s = 0; s < n; ++s) {
        for (std::uint32_t i = 0; i < n; ++i) {
            predecessors[i].clear();
            sigma[i] = 0.0;
            dist[i] = -1;
        }
        order.clear();
        sigma[s] = 1.0;
        dist[s] = 0;
        std::queue<std::uint32_t> queue;
        queue.push(s);
        while (!queue.empty()) {
            std::uint32_t v = queue.front();
            queue.pop();
            order.push_back(v);
            for (std::uint32_t w : g.neighbors(v)) {
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    queue.push(w);
                }
                if (dist[w] == dist[v] + 1) {
                    sigma[w] += sigma[v];
                    predecessors[w].push_back(v);
                }
            }
        }
        std::fill(delta.begin(), delta.end(), 0.0);
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            std::uint32_t w = *it;
            for (std::uint32_t v : predecessors[w])
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            if (w != s) cb[w] += delta[w];
        }
    }

    const double scale = 1.0 / (static_cast<double>(n - 1) * static_cast<double>(n - 2));
    for (double& v : cb) v *= scale;  // halves the double-counted pairs and normalizes
    return cb;
}

/// Wasserman-Faust closeness, restricted to the node's connected component:
/// cc[u] = ((r-1)/(n-1)) * ((r-1)/sum of distances), r = component size.
/// Isolated nodes score 0.
inline std::vector<double> closeness_centrality(const Graph& g) {
    const std::size_t n = g.node_count();
    std::vector<double> out(n, 0.0);
    if (n < 2) return out;
    std::vector<std::int64_t> dist(n);
    for (std::uint32_t s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[s] = 0;
        std::queue<std::uint32_t> queue;
        queue.push(s);
        double total = 0.0;
        std::size_t reached = 1;
        while (!queue.empty()) {
            std::uint32_t v = queue.front();
            queue.pop();
            for (std::uint32_t w : g.neighbors(v)) {
                if (dist[w] >= 0) continue;
                dist[w] = dist[v] + 1;
                total += static_cast<double>(dist[w]);
                ++reached;
                queue.push(w);
            }
        }
        if (reached < 2 || total == 0.0) continue;
        double r = static_cast<double>(reached);
        out[s] = ((r - 1.0) / static_cast<double>(n - 1)) * ((r - 1.0) / total);
    }
    return out;
}

struct PageRankConfig {
    double damping = 0.85;
    double tolerance = 1e-8;
    std::size_t max_iterations = 200;
};

/// Power iteration on pr = (1-d)/n + d * (neighbor mass + dangling mass / n).
/// Degree-0 nodes are dangling: their mass redistributes uniformly, which
/// keeps the vector summing to exactly 1. Converged when the L1 change drops
/// below tolerance; otherwise reports the residual.
inline std::vector<double> pagerank(const Graph& g, const PageRankConfig& cfg = {}) {
    const std::size_t n = g.node_count();
    if (n == 0) throw Error("pagerank: graph has no nodes");
    std::vector<double> pr(n, 1.0 / static_cast<double>(n));
    std::vector<double> next(n);
    const double d = cfg.damping;
    const double teleport = (1.0 - d) / static_cast<double>(n);

    double change = 0.0;
    for (std::size_t iter = 0; iter < cfg.max_iterations; ++iter) {
        double dangling = 0.0;
        for (std::uint32_t u = 0; u < n; ++u)
            if (g.degree(u) == 0) dangling += pr[u];
        const double base = teleport + d * dangling / static_cast<double>(n);
        std::fill(next.begin(), next.end(), base);
        for (std::uint32_t u = 0; u < n; ++u) {
            if (g.degree(u) == 0) continue;
            const double share = d * pr[u] / static_cast<double>(g.degree(u));
            for (std::uint32_t v : g.neighbors(u)) next[v] += share;
        }
        change = 0.0;
        for (std::uint32_t u = 0; u < n; ++u) change += std::abs(next[u] - pr[u]);
        pr.swap(next);
        if (change < cfg.tolerance) return pr;
    }
    throw Error("pagerank: no convergence after " + std::to_string(cfg.max_iterations) +
                " iterations (L1 residual " + std::to_string(change) + ")");
}

/// Raw (unnormalized) feature matrix, one row per node, columns in
/// FeatureColumn order.
inline DenseMatrix assemble_features(const Graph& g, const PageRankConfig& pr_cfg = {}) {
    const std::size_t n = g.node_count();
    DenseMatrix out(n, kFeatureCount);
    const auto deg = degree(g);
    const auto clus = clustering_coefficient(g);
    const auto betw = betweenness_centrality(g);
    const auto clos = closeness_centrality(g);
    const auto pr = pagerank(g, pr_cfg);
    for (std::size_t u = 0; u < n; ++u) {
        out(u, kDegree) = deg[u];
        out(u, kClustering) = clus[u];
        out(u, kBetweenness) = betw[u];
        out(u, kCloseness) = clos[u];
        out(u, kPageRank) = pr[u];
    }
    return out;
}

/// Debug export: one row per node with a graph-id prefix column, then the
/// five feature columns in FeatureColumn order.
inline void write_features_csv(std::ostream& out, const std::vector<long long>& graph_ids,
                               const std::vector<DenseMatrix>& features) {
    if (graph_ids.size() != features.size())
        throw Error("write_features_csv: id/feature count mismatch");
    out << "graph_id,degree,clustering,betweenness,closeness,pagerank\n";
    for (std::size_t i = 0; i < features.size(); ++i) {
        const DenseMatrix& f = features[i];
        if (f.cols() != kFeatureCount) throw Error("write_features_csv: expected 5 columns");
        for (std::size_t r = 0; r < f.rows(); ++r) {
            out << graph_ids[i];
            for (std::size_t c = 0; c < kFeatureCount; ++c) out << ',' << format_double(f(r, c));
            out << '\n';
        }
    }
}

/// Per-column z-score transform fit on the training split only. Columns with
/// (sample) std below 1e-12 pass through zero-centered. The same transform
/// is then applied to validation/test features.
class Normalizer {
public:
    Normalizer() = default;
    Normalizer(std::vector<double> means, std::vector<double> stds)
        : mean_(std::move(means)), std_(std::move(stds)) {
        if (mean_.size() != std_.size()) throw Error("Normalizer: mean/std length mismatch");
    }

    static Normalizer fit(const std::vector<const DenseMatrix*>& train_features) {
        std::size_t cols = 0;
        std::size_t rows = 0;
        for (const DenseMatrix* m : train_features) {
            if (cols == 0) cols = m->cols();
            if (m->cols() != cols) throw Error("Normalizer::fit: column count mismatch");
            rows += m->rows();
        }
        if (rows < 1 || cols == 0) throw Error("Normalizer::fit: no training rows");
        std::vector<double> mean(cols, 0.0), sq(cols, 0.0);
        for (const DenseMatrix* m : train_features)
            for (std::size_t r = 0; r < m->rows(); ++r)
                for (std::size_t c = 0; c < cols; ++c) mean[c] += (*m)(r, c);
        for (double& v : mean) v /= static_cast<double>(rows);
        for (const DenseMatrix* m : train_features)
            for (std::size_t r = 0; r < m->rows(); ++r)
                for (std::size_t c = 0; c < cols; ++c) {
                    double d = (*m)(r, c) - mean[c];
                    sq[c] += d * d;
                }
        std::vector<double> stds(cols, 0.0);
        for (std::size_t c = 0; c < cols; ++c)
            stds[c] = rows > 1 ? std::sqrt(sq[c] / static_cast<double>(rows - 1)) : 0.0;
        return Normalizer(std::move(mean), std::move(stds));
    }

    DenseMatrix transform(const DenseMatrix& raw) const {
        if (raw.cols() != mean_.size()) throw Error("Normalizer: column count mismatch");
        DenseMatrix out(raw.rows(), raw.cols());
        for (std::size_t r = 0; r < raw.rows(); ++r)
            for (std::size_t c = 0; c < raw.cols(); ++c) {
                double centered = raw(r, c) - mean_[c];
                out(r, c) = std_[c] < 1e-12 ? centered : centered / std_[c];
            }
        return out;
    }

    const std::vector<double>& means() const { return mean_; }
    const std::vector<double>& stds() const { return std_; }

private:
    std::vector<double> mean_;
    std::vector<double> std_;
};

}  // namespace stargaze
