#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "stargaze/autodiff.hpp"
#include "stargaze/error.hpp"
#include "stargaze/graph.hpp"
#include "stargaze/matrix.hpp"
#include "stargaze/rng.hpp"

namespace stargaze {

/// Symmetric-normalized adjacency with self-loops:
/// each entry (u, v) of A + I carries weight 1 / sqrt(deg~(u) * deg~(v)).
struct NormalizedAdjacency {
    SparseMatrix matrix;
};

inline NormalizedAdjacency normalize_adjacency(const Graph& g) {
    const std::size_t n = g.node_count();
    std::vector<double> inv_sqrt(n);
    for (std::uint32_t u = 0; u < n; ++u)
        inv_sqrt[u] = 1.0 / std::sqrt(static_cast<double>(g.degree(u) + 1));
    NormalizedAdjacency adj;
    adj.matrix.rows = adj.matrix.cols = n;
    adj.matrix.entries.reserve(2 * g.edge_count() + n);
    for (std::uint32_t u = 0; u < n; ++u) {
        adj.matrix.entries.push_back({u, u, inv_sqrt[u] * inv_sqrt[u]});
        for (std::uint32_t v : g.neighbors(u))
            adj.matrix.entries.push_back({u, v, inv_sqrt[u] * inv_sqrt[v]});
    }
    return adj;
}

/// Row-stochastic neighbor averaging operator (no self-loops): row u holds
/// 1/deg(u) for each neighbor. Degree-0 rows stay empty, so isolated nodes
/// aggregate a zero neighbor mean.
inline SparseMatrix mean_neighbor_matrix(const Graph& g) {
    SparseMatrix m;
    m.rows = m.cols = g.node_count();
    m.entries.reserve(2 * g.edge_count());
    for (std::uint32_t u = 0; u < g.node_count(); ++u) {
        if (g.degree(u) == 0) continue;
        const double w = 1.0 / static_cast<double>(g.degree(u));
        for (std::uint32_t v : g.neighbors(u)) m.entries.push_back({u, v, w});
    }
    return m;
}

enum class Activation { linear, relu };

/// One graph-convolution step: sigma(A_hat * H * W). The returned tensor
/// caches everything backward() needs.
inline Tensor gcn_layer_forward(const Tensor& h, const Tensor& weight,
                                const NormalizedAdjacency& adj, Activation activation) {
    if (h->value.rows() != adj.matrix.rows)
        throw Error("gcn_layer_forward: feature rows must equal node count");
    if (h->value.cols() != weight->value.rows())
        throw Error("gcn_layer_forward: feature/weight shape mismatch");
    Tensor out = matmul(spmm(adj.matrix, h), weight);
    return activation == Activation::relu ? relu(out) : out;
}

/// Trainable matrix plus its gradient and Adam state. The gradient and both
/// moment matrices always shape-match the value.
struct Parameter {
    std::string name;
    Tensor tensor;
    DenseMatrix adam_m;
    DenseMatrix adam_v;
    std::uint64_t adam_steps = 0;

    Parameter() = default;
    Parameter(std::string param_name, DenseMatrix init)
        : name(std::move(param_name)),
          tensor(make_tensor(std::move(init), /*requires_grad=*/true)),
          adam_m(tensor->value.rows(), tensor->value.cols()),
          adam_v(tensor->value.rows(), tensor->value.cols()) {}

    DenseMatrix& value() { return tensor->value; }
    const DenseMatrix& value() const { return tensor->value; }
    DenseMatrix& grad() { return tensor->grad_ref(); }

    void zero_grad() { tensor->grad_ref().fill(0.0); }
};

inline DenseMatrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
    DenseMatrix m(rows, cols);
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (double& v : m.values()) v = rng.uniform_real(-limit, limit);
    return m;
}

/// Bias-corrected Adam update over all parameters, then gradients are zeroed.
inline void adam_step(const std::vector<Parameter*>& params, double learning_rate,
                      double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
    for (Parameter* p : params) {
        DenseMatrix& g = p->grad();
        if (!all_finite(g)) throw Error("adam_step: non-finite gradient in " + p->name);
        p->adam_steps += 1;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(p->adam_steps));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(p->adam_steps));
        auto& value = p->value().values();
        auto& m = p->adam_m.values();
        auto& v = p->adam_v.values();
        const auto& grad = g.values();
        for (std::size_t i = 0; i < value.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            value[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + eps);
        }
        p->zero_grad();
    }
}

struct LinearLayer {
    Parameter weight;  // (in, out)
    Parameter bias;    // (1, out)

    LinearLayer() = default;
    LinearLayer(const std::string& name, std::size_t in, std::size_t out, Rng& rng)
        : weight(name + ".weight", glorot_uniform(in, out, rng)),
          bias(name + ".bias", DenseMatrix(1, out)) {}

    Tensor forward(const Tensor& x) const {
        return add_rowvec(matmul(x, weight.tensor), bias.tensor);
    }
};

struct GcnLayer {
    Parameter weight;  // (in, out)
    Parameter bias;    // (1, out)

    GcnLayer() = default;
    GcnLayer(const std::string& name, std::size_t in, std::size_t out, Rng& rng)
        : weight(name + ".weight", glorot_uniform(in, out, rng)),
          bias(name + ".bias", DenseMatrix(1, out)) {}

    Tensor forward(const NormalizedAdjacency& adj, const Tensor& h, Activation act) const {
        Tensor out = add_rowvec(matmul(spmm(adj.matrix, h), weight.tensor), bias.tensor);
        return act == Activation::relu ? relu(out) : out;
    }
};

struct Conv1dLayer {
    Parameter weight;  // (out_channels, in_channels * kernel)
    Parameter bias;    // (1, out_channels)
    std::size_t kernel = 1;
    std::size_t stride = 1;

    Conv1dLayer() = default;
    Conv1dLayer(const std::string& name, std::size_t in_channels, std::size_t out_channels,
                std::size_t kernel_width, std::size_t stride_width, Rng& rng)
        : weight(name + ".weight", glorot_uniform(out_channels, in_channels * kernel_width, rng)),
          bias(name + ".bias", DenseMatrix(1, out_channels)),
          kernel(kernel_width),
          stride(stride_width) {}

    Tensor forward(const Tensor& x) const {
        return conv1d(x, weight.tensor, bias.tensor, kernel, stride);
    }
};

}  // namespace stargaze
