#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "stargaze/autodiff.hpp"
#include "stargaze/error.hpp"
#include "stargaze/eval.hpp"
#include "stargaze/features.hpp"
#include "stargaze/graph.hpp"
#include "stargaze/nn.hpp"
#include "stargaze/rng.hpp"

namespace stargaze {

struct SageConfig {
    std::size_t input_dim = kFeatureCount;
    std::size_t hidden_dim = 100;
    std::size_t output_dim = 100;
    std::size_t epochs = 600;
    double learning_rate = 0.01;
    double margin = 1.0;
    double holdout_fraction = 0.10;
    // Polyak tail averaging: the returned parameters are the mean over the
    // last tail_average_epochs epochs, damping the jitter the per-epoch
    // negative resampling injects. 0 keeps the final-epoch parameters.
    std::size_t tail_average_epochs = 150;
    bool l2_normalize = false;
    std::uint64_t seed = 0;

    void validate() const {
        if (input_dim < 1 || hidden_dim < 1 || output_dim < 1)
            throw Error("sage: zero layer width");
        if (epochs < 1) throw Error("sage: epochs must be at least 1");
        if (!(learning_rate > 0.0)) throw Error("sage: learning_rate must be positive");
        if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
            throw Error("sage: holdout_fraction must lie in (0, 1)");
    }
};

/// Two-round mean-aggregation encoder. Each layer computes
/// h'_v = act(W * concat(h_v, mean of neighbor h) + b); the first layer uses
/// ReLU, the second is linear (optionally followed by row L2 normalization).
class SageModel {
public:
    explicit SageModel(const SageConfig& cfg) : cfg_(cfg) {
        cfg_.validate();
        Rng rng = Rng::derive(cfg_.seed, 0x5A6E);
        layer1_ = LinearLayer("sage1", 2 * cfg_.input_dim, cfg_.hidden_dim, rng);
        layer2_ = LinearLayer("sage2", 2 * cfg_.hidden_dim, cfg_.output_dim, rng);
    }

    const SageConfig& config() const { return cfg_; }

    std::vector<Parameter*> parameters() {
        return {&layer1_.weight, &layer1_.bias, &layer2_.weight, &layer2_.bias};
    }

    /// (n, output_dim) embeddings. mean_adj must be the row-stochastic
    /// neighbor-averaging operator of the graph the features belong to.
    Tensor forward(const SparseMatrix& mean_adj, const Tensor& x) const {
        if (x->value.cols() != cfg_.input_dim)
            throw Error("sage_forward: expected " + std::to_string(cfg_.input_dim) +
                        " feature columns, got " + std::to_string(x->value.cols()));
        if (x->value.rows() != mean_adj.rows)
            throw Error("sage_forward: feature rows must equal node count");
        Tensor h = relu(layer1_.forward(concat_cols(x, spmm(mean_adj, x))));
        Tensor out = layer2_.forward(concat_cols(h, spmm(mean_adj, h)));
        return cfg_.l2_normalize ? row_l2_normalize(out) : out;
    }

private:
    SageConfig cfg_;
    LinearLayer layer1_, layer2_;
};

inline DenseMatrix sage_forward(const Graph& g, const DenseMatrix& features,
                                const SageModel& model) {
    return model.forward(mean_neighbor_matrix(g), make_tensor(features))->value;
}

/// Uniform rejection sampling of non-edges (no self-loops, no duplicates
/// within the sample). Candidates are checked against `exclude` when given,
/// e.g. the full graph while training on a holdout-reduced one.
inline std::vector<Edge> sample_negative_edges(const Graph& g, std::size_t count, Rng& rng,
                                               const Graph* exclude = nullptr) {
    const std::size_t n = g.node_count();
    const Graph& reference = exclude ? *exclude : g;
    const std::size_t pair_count = n * (n - 1) / 2;
    if (pair_count <= reference.edge_count())
        throw Error("sample_negative_edges: graph has no non-edges");
    if (count > pair_count - reference.edge_count())
        throw Error("sample_negative_edges: requested " + std::to_string(count) +
                    " negatives but only " +
                    std::to_string(pair_count - reference.edge_count()) + " non-edges exist");

    std::set<Edge> chosen;
    std::vector<Edge> out;
    out.reserve(count);
    // Rejection sampling with a cap; dense graphs fall back to enumerating
    // the remaining non-edges so the call always terminates.
    std::size_t attempts = 0;
    const std::size_t max_attempts = 100 * count + 1000;
    while (out.size() < count && attempts < max_attempts) {
        ++attempts;
        auto u = static_cast<std::uint32_t>(rng.uniform_index(n));
        auto v = static_cast<std::uint32_t>(rng.uniform_index(n));
        if (u == v) continue;
        Edge e{std::min(u, v), std::max(u, v)};
        if (reference.has_edge(e.first, e.second)) continue;
        if (!chosen.insert(e).second) continue;
        out.push_back(e);
    }
    if (out.size() < count) {
        std::vector<Edge> remaining;
        for (std::uint32_t u = 0; u + 1 < n; ++u)
            for (std::uint32_t v = u + 1; v < n; ++v) {
                Edge e{u, v};
                if (!reference.has_edge(u, v) && !chosen.count(e)) remaining.push_back(e);
            }
        rng.shuffle(remaining);
        for (std::size_t i = 0; out.size() < count; ++i) out.push_back(remaining[i]);
    }
    return out;
}

inline std::vector<Edge> sample_negative_edges(const Graph& g, std::size_t count,
                                               std::uint64_t seed) {
    Rng rng(seed);
    return sample_negative_edges(g, count, rng);
}

inline double edge_score(const DenseMatrix& emb, std::uint32_t u, std::uint32_t v) {
    if (u >= emb.rows() || v >= emb.rows()) throw Error("edge_score: node id out of range");
    double acc = 0.0;
    for (std::size_t c = 0; c < emb.cols(); ++c) acc += emb(u, c) * emb(v, c);
    return acc;
}

/// Cosine of the two embedding rows; 0 when either row has zero norm.
inline double cosine_sim(const DenseMatrix& emb, std::uint32_t u, std::uint32_t v) {
    if (u >= emb.rows() || v >= emb.rows()) throw Error("cosine_sim: node id out of range");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t c = 0; c < emb.cols(); ++c) {
        dot += emb(u, c) * emb(v, c);
        nu += emb(u, c) * emb(u, c);
        nv += emb(v, c) * emb(v, c);
    }
    if (nu == 0.0 || nv == 0.0) return 0.0;
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

struct LinkpredResult {
    SageModel model;
    double holdout_auc = 0.0;
    std::vector<Edge> held_out_edges;
    std::vector<Edge> evaluation_negatives;
    Graph training_graph;
};

/// Margin-loss training with per-epoch 1:1 negative resampling.
///
/// A seeded 10% of the edges is held out before training: those edges are
/// never aggregated over, and negative samples are screened against the full
/// graph so a held-out positive can never be drawn as a negative. Returns
/// the ROC-AUC of the held-out positives against freshly sampled non-edges.
inline LinkpredResult train_linkpred(const Graph& g, const DenseMatrix& raw_features,
                                     const SageConfig& cfg) {
    cfg.validate();
    if (g.edge_count() < 2)
        throw Error("train_linkpred: graph too small to hold out an edge (need >= 2 edges)");
    if (raw_features.rows() != g.node_count())
        throw Error("train_linkpred: feature rows must equal node count");

    // Per-graph feature scaling: one model per network, so the z-score is fit
    // on this graph's own nodes.
    Normalizer normalizer = Normalizer::fit({&raw_features});
    DenseMatrix features = normalizer.transform(raw_features);

    std::vector<Edge> edges = g.edges();
    Rng holdout_rng = Rng::derive(cfg.seed, 0x801D);
    holdout_rng.shuffle(edges);
    std::size_t holdout = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::ceil(cfg.holdout_fraction * static_cast<double>(edges.size()))));
    if (holdout >= edges.size()) holdout = edges.size() - 1;

    LinkpredResult result{SageModel(cfg), 0.0, {}, {}, {}};
    result.held_out_edges.assign(edges.begin(), edges.begin() + holdout);
    std::sort(result.held_out_edges.begin(), result.held_out_edges.end());
    std::vector<Edge> train_edges(edges.begin() + holdout, edges.end());
    result.training_graph = Graph::build(g.node_count(), train_edges);
    train_edges = result.training_graph.edges();

    SparseMatrix mean_adj = mean_neighbor_matrix(result.training_graph);
    std::vector<Parameter*> params = result.model.parameters();
    Tensor x = make_tensor(features);

    const std::size_t tail = std::min(cfg.tail_average_epochs, cfg.epochs);
    std::vector<DenseMatrix> tail_sum;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng neg_rng = Rng::derive(cfg.seed, 0x4E60 + epoch);
        std::vector<Edge> negatives =
            sample_negative_edges(result.training_graph, train_edges.size(), neg_rng, &g);
        Tensor emb = result.model.forward(mean_adj, x);
        Tensor loss =
            margin_loss(edge_dot(emb, train_edges), edge_dot(emb, negatives), cfg.margin);
        backward(loss);
        adam_step(params, cfg.learning_rate);
        if (tail > 0 && epoch + tail >= cfg.epochs) {
            if (tail_sum.empty())
                for (Parameter* p : params) tail_sum.push_back(p->value());
            else
                for (std::size_t i = 0; i < params.size(); ++i)
                    for (std::size_t k = 0; k < tail_sum[i].size(); ++k)
                        tail_sum[i].values()[k] += params[i]->value().values()[k];
        }
    }
    if (tail > 0)
        for (std::size_t i = 0; i < params.size(); ++i)
            for (std::size_t k = 0; k < tail_sum[i].size(); ++k)
                params[i]->value().values()[k] =
                    tail_sum[i].values()[k] / static_cast<double>(tail);

    // Evaluation conditions on the complete observed graph: the held-out
    // edges were hidden from training, but scoring asks how well the trained
    // encoder ranks them given the full structure, the same footing the
    // recommendation pass uses.
    Rng eval_rng = Rng::derive(cfg.seed, 0xE7A1);
    result.evaluation_negatives =
        sample_negative_edges(result.training_graph, result.held_out_edges.size(), eval_rng, &g);
    DenseMatrix emb = result.model.forward(mean_neighbor_matrix(g), x)->value;
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& [u, v] : result.held_out_edges) {
        scores.push_back(edge_score(emb, u, v));
        labels.push_back(1);
    }
    for (const auto& [u, v] : result.evaluation_negatives) {
        scores.push_back(edge_score(emb, u, v));
        labels.push_back(0);
    }
    result.holdout_auc = roc_auc(scores, labels).auc;
    return result;
}

struct Recommendation {
    struct Candidate {
        std::uint32_t node = 0;
        double dot = 0.0;
        double cosine = 0.0;
    };
    std::uint32_t source = 0;
    std::vector<Candidate> candidates;  // score-descending, ties by node id
};

/// Top-k new-connection candidates for ceil(fraction * n) seeded-uniformly
/// selected source nodes. Candidates exclude the source itself and existing
/// neighbors; ranking is by dot score with cosine similarity attached.
inline std::vector<Recommendation> recommend(const Graph& g, const DenseMatrix& emb,
                                             double fraction, std::size_t k,
                                             std::uint64_t seed) {
    if (k == 0) throw Error("recommend: k must be at least 1");
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw Error("recommend: fraction must lie in (0, 1]");
    if (emb.rows() != g.node_count()) throw Error("recommend: embedding rows mismatch");

    const std::size_t n = g.node_count();
    std::size_t select = std::min<std::size_t>(
        n, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n))));
    std::vector<std::uint32_t> nodes(n);
    std::iota(nodes.begin(), nodes.end(), 0u);
    Rng rng = Rng::derive(seed, 0x5E1E);
    rng.shuffle(nodes);
    nodes.resize(select);
    std::sort(nodes.begin(), nodes.end());

    std::vector<Recommendation> out;
    out.reserve(select);
    for (std::uint32_t source : nodes) {
        Recommendation rec;
        rec.source = source;
        std::vector<Recommendation::Candidate> candidates;
        for (std::uint32_t other = 0; other < n; ++other) {
            if (other == source || g.has_edge(source, other)) continue;
            candidates.push_back(
                {other, edge_score(emb, source, other), cosine_sim(emb, source, other)});
        }
        std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
            if (a.dot != b.dot) return a.dot > b.dot;
            return a.node < b.node;
        });
        if (candidates.size() > k) candidates.resize(k);
        rec.candidates = std::move(candidates);
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace stargaze
