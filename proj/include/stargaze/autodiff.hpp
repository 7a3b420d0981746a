#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <unordered_set>
#include <utility>
#include <vector>

#include "stargaze/error.hpp"
#include "stargaze/graph.hpp"
#include "stargaze/matrix.hpp"
#include "stargaze/rng.hpp"

namespace stargaze {

/// One node of the reverse-mode computation graph. Every forward op records
/// its inputs and a closure that pushes this node's gradient into them, so a
/// single backward() call differentiates any of the model architectures.
struct TensorNode {
    DenseMatrix value;
    DenseMatrix grad;  // allocated lazily, same shape as value
    const char* op = "leaf";  // producing operation, for graph introspection
    bool requires_grad = false;
    std::vector<std::shared_ptr<TensorNode>> inputs;
    std::function<void(TensorNode&)> backward_fn;

    DenseMatrix& grad_ref() {
        if (grad.rows() != value.rows() || grad.cols() != value.cols())
            grad = DenseMatrix(value.rows(), value.cols());
        return grad;
    }
};

using Tensor = std::shared_ptr<TensorNode>;

inline Tensor make_tensor(DenseMatrix value, bool requires_grad = false) {
    auto node = std::make_shared<TensorNode>();
    node->value = std::move(value);
    node->requires_grad = requires_grad;
    if (requires_grad) node->grad_ref();
    return node;
}

namespace detail {

inline Tensor make_op(const char* op, DenseMatrix value, std::vector<Tensor> inputs,
                      std::function<void(TensorNode&)> backward_fn) {
    auto node = std::make_shared<TensorNode>();
    node->value = std::move(value);
    node->op = op;
    for (const auto& in : inputs) node->requires_grad |= in->requires_grad;
    if (node->requires_grad) {
        node->inputs = std::move(inputs);
        node->backward_fn = std::move(backward_fn);
    }
    return node;
}

}  // namespace detail

/// Seeds the scalar root with gradient 1 and propagates through the graph in
/// reverse topological order. Gradients accumulate (+=) into every reachable
/// node with requires_grad, so parameter gradients must be zeroed between
/// steps (adam_step does this).
inline void backward(const Tensor& root) {
    if (root->value.rows() != 1 || root->value.cols() != 1)
        throw Error("backward: root must be a 1x1 scalar");
    if (!root->requires_grad) return;  // constant loss: nothing depends on parameters

    std::vector<TensorNode*> order;
    std::unordered_set<TensorNode*> visited;
    struct Frame {
        TensorNode* node;
        std::size_t next_input;
    };
    std::vector<Frame> stack{{root.get(), 0}};
    visited.insert(root.get());
    while (!stack.empty()) {
        Frame& frame = stack.back();
        if (frame.next_input < frame.node->inputs.size()) {
            TensorNode* child = frame.node->inputs[frame.next_input++].get();
            if (child->requires_grad && visited.insert(child).second)
                stack.push_back({child, 0});
        } else {
            order.push_back(frame.node);
            stack.pop_back();
        }
    }

    root->grad_ref()(0, 0) += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        TensorNode* node = *it;
        if (node->backward_fn && !node->grad.empty()) node->backward_fn(*node);
    }
}

// ---------------------------------------------------------------------------
// Core ops
// ---------------------------------------------------------------------------

inline Tensor matmul(const Tensor& a, const Tensor& b) {
    DenseMatrix value = matmul(a->value, b->value);
    return detail::make_op("matmul", std::move(value), {a, b}, [a, b](TensorNode& self) {
        if (a->requires_grad) {
            DenseMatrix da = matmul(self.grad, transpose(b->value));
            auto& ga = a->grad_ref();
            for (std::size_t i = 0; i < ga.size(); ++i) ga.values()[i] += da.values()[i];
        }
        if (b->requires_grad) {
            DenseMatrix db = matmul(transpose(a->value), self.grad);
            auto& gb = b->grad_ref();
            for (std::size_t i = 0; i < gb.size(); ++i) gb.values()[i] += db.values()[i];
        }
    });
}

inline Tensor spmm(const SparseMatrix& s, const Tensor& h) {
    DenseMatrix value = spmm(s, h->value);
    // The entries are copied into the closure: backward may outlive the
    // caller's sparse matrix.
    return detail::make_op("spmm", std::move(value), {h}, [entries = s.entries, h](TensorNode& self) {
        if (!h->requires_grad) return;
        auto& gh = h->grad_ref();
        const std::size_t cols = self.grad.cols();
        for (const auto& e : entries) {
            const double* src = self.grad.row_ptr(e.row);
            double* dst = gh.row_ptr(e.col);
            for (std::size_t j = 0; j < cols; ++j) dst[j] += e.weight * src[j];
        }
    });
}

/// Broadcast-adds a (1, c) row vector to every row of a (r, c) matrix.
inline Tensor add_rowvec(const Tensor& m, const Tensor& row) {
    if (row->value.rows() != 1 || row->value.cols() != m->value.cols())
        throw Error("add_rowvec: bias shape mismatch");
    DenseMatrix value = m->value;
    for (std::size_t r = 0; r < value.rows(); ++r)
        for (std::size_t c = 0; c < value.cols(); ++c) value(r, c) += row->value(0, c);
    return detail::make_op("add_rowvec", std::move(value), {m, row}, [m, row](TensorNode& self) {
        if (m->requires_grad) {
            auto& gm = m->grad_ref();
            for (std::size_t i = 0; i < gm.size(); ++i)
                gm.values()[i] += self.grad.values()[i];
        }
        if (row->requires_grad) {
            auto& gr = row->grad_ref();
            for (std::size_t r = 0; r < self.grad.rows(); ++r)
                for (std::size_t c = 0; c < self.grad.cols(); ++c)
                    gr(0, c) += self.grad(r, c);
        }
    });
}

inline Tensor relu(const Tensor& t) {
    DenseMatrix value = t->value;
    for (double& v : value.values()) v = v > 0.0 ? v : 0.0;
    return detail::make_op("relu", std::move(value), {t}, [t](TensorNode& self) {
        if (!t->requires_grad) return;
        auto& gt = t->grad_ref();
        for (std::size_t i = 0; i < gt.size(); ++i)
            if (t->value.values()[i] > 0.0) gt.values()[i] += self.grad.values()[i];
    });
}

inline Tensor sigmoid(const Tensor& t) {
    DenseMatrix value = t->value;
    for (double& v : value.values()) {
        if (v >= 0.0) {
            v = 1.0 / (1.0 + std::exp(-v));
        } else {
            double e = std::exp(v);
            v = e / (1.0 + e);
        }
    }
    return detail::make_op("sigmoid", std::move(value), {t}, [t](TensorNode& self) {
        if (!t->requires_grad) return;
        auto& gt = t->grad_ref();
        for (std::size_t i = 0; i < gt.size(); ++i) {
            double s = self.value.values()[i];
            gt.values()[i] += self.grad.values()[i] * s * (1.0 - s);
        }
    });
}

/// Inverted dropout: in training mode survivors scale by 1/(1-p) so the
/// expected output equals the input; in eval mode (or p == 0) the op is
/// exactly the identity.
inline Tensor dropout(const Tensor& t, double p, bool training, Rng& rng) {
    if (!(p >= 0.0 && p < 1.0)) throw Error("dropout: p must lie in [0, 1)");
    if (!training || p == 0.0) return t;
    DenseMatrix value = t->value;
    std::vector<double> mask(value.size());
    const double keep_scale = 1.0 / (1.0 - p);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        mask[i] = rng.uniform_real() >= p ? keep_scale : 0.0;
        value.values()[i] *= mask[i];
    }
    return detail::make_op("dropout", std::move(value), {t}, [t, mask = std::move(mask)](TensorNode& self) {
        if (!t->requires_grad) return;
        auto& gt = t->grad_ref();
        for (std::size_t i = 0; i < gt.size(); ++i)
            gt.values()[i] += self.grad.values()[i] * mask[i];
    });
}

/// Sorts node rows by the last feature column, descending (stable: ties keep
/// ascending row order), then truncates to k rows or zero-pads up to k.
inline Tensor sort_pool(const Tensor& t, std::size_t k) {
    if (k == 0) throw Error("sort_pooling: k must be at least 1");
    const std::size_t n = t->value.rows();
    const std::size_t cols = t->value.cols();
    if (cols == 0) throw Error("sort_pooling: empty feature dimension");
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    std::stable_sort(perm.begin(), perm.end(), [&](std::uint32_t a, std::uint32_t b) {
        return t->value(a, cols - 1) > t->value(b, cols - 1);
    });
    const std::size_t kept = std::min(k, n);
    perm.resize(kept);
    DenseMatrix value(k, cols);
    for (std::size_t i = 0; i < kept; ++i)
        for (std::size_t c = 0; c < cols; ++c) value(i, c) = t->value(perm[i], c);
    return detail::make_op("sort_pool", std::move(value), {t}, [t, perm = std::move(perm)](TensorNode& self) {
        if (!t->requires_grad) return;
        auto& gt = t->grad_ref();
        for (std::size_t i = 0; i < perm.size(); ++i)
            for (std::size_t c = 0; c < gt.cols(); ++c)
                gt(perm[i], c) += self.grad(i, c);
    });
}

inline Tensor slice_rows(const Tensor& t, std::size_t begin, std::size_t end) {
    if (begin > end || end > t->value.rows()) throw Error("slice_rows: range out of bounds");
    DenseMatrix value(end - begin, t->value.cols());
    for (std::size_t r = begin; r < end; ++r)
        for (std::size_t c = 0; c < value.cols(); ++c) value(r - begin, c) = t->value(r, c);
    return detail::make_op("slice_rows", std::move(value), {t}, [t, begin](TensorNode& self) {
        if (!t->requires_grad) return;
        auto& gt = t->grad_ref();
        for (std::size_t r = 0; r < self.grad.rows(); ++r)
            for (std::size_t c = 0; c < self.grad.cols(); ++c)
                gt(begin + r, c) += self.grad(r, c);
    });
}

inline Tensor concat_rows(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw Error("concat_rows: empty list");
    const std::size_t cols = parts.front()->value.cols();
    std::size_t rows = 0;
    for (const auto& p : parts) {
        if (p->value.cols() != cols) throw Error("concat_rows: column mismatch");
        rows += p->value.rows();
    }
    DenseMatrix value(rows, cols);
    std::size_t off = 0;
    for (const auto& p : parts) {
        for (std::size_t r = 0; r < p->value.rows(); ++r)
            for (std::size_t c = 0; c < cols; ++c) value(off + r, c) = p->value(r, c);
        off += p->value.rows();
    }
    return detail::make_op("concat_rows", std::move(value), parts, [parts](TensorNode& self) {
        std::size_t off = 0;
        for (const auto& p : parts) {
            if (p->requires_grad) {
                auto& gp = p->grad_ref();
                for (std::size_t r = 0; r < p->value.rows(); ++r)
                    for (std::size_t c = 0; c < gp.cols(); ++c)
                        gp(r, c) += self.grad(off + r, c);
            }
            off += p->value.rows();
        }
    });
}

inline Tensor concat_cols(const Tensor& a, const Tensor& b) {
    if (a->value.rows() != b->value.rows()) throw Error("concat_cols: row mismatch");
    DenseMatrix value(a->value.rows(), a->value.cols() + b->value.cols());
    for (std::size_t r = 0; r < value.rows(); ++r) {
        for (std::size_t c = 0; c < a->value.cols(); ++c) value(r, c) = a->value(r, c);
        for (std::size_t c = 0; c < b->value.cols(); ++c)
            value(r, a->value.cols() + c) = b->value(r, c);
    }
    return detail::make_op("concat_cols", std::move(value), {a, b}, [a, b](TensorNode& self) {
        const std::size_t ac = a->value.cols();
        if (a->requires_grad) {
            auto& ga = a->grad_ref();
            for (std::size_t r = 0; r < ga.rows(); ++r)
                for (std::size_t c = 0; c < ac; ++c) ga(r, c) += self.grad(r, c);
        }
        if (b->requires_grad) {
            auto& gb = b->grad_ref();
            for (std::size_t r = 0; r < gb.rows(); ++r)
                for (std::size_t c = 0; c < gb.cols(); ++c) gb(r, c) += self.grad(r, ac + c);
        }
    });
}

/// Row-major reinterpretation; value count must be preserved.
inline Tensor reshape(const Tensor& t, std::size_t rows, std::size_t cols) {
    if (rows * cols != t->value.size()) throw Error("reshape: element count mismatch");
    DenseMatrix value(rows, cols);
    value.values() = t->value.values();
    return detail::make_op("reshape", std::move(value), {t}, [t](TensorNode& self) {
        if (!t->requires_grad) return;
        auto& gt = t->grad_ref();
        for (std::size_t i = 0; i < gt.size(); ++i) gt.values()[i] += self.grad.values()[i];
    });
}

/// 1-D convolution over a (channels, length) signal. weight is
/// (out_channels, in_channels * kernel), bias is (1, out_channels).
inline Tensor conv1d(const Tensor& t, const Tensor& weight, const Tensor& bias,
                     std::size_t kernel, std::size_t stride) {
    const std::size_t in_channels = t->value.rows();
    const std::size_t length = t->value.cols();
    if (kernel == 0 || stride == 0) throw Error("conv1d: kernel and stride must be positive");
    if (length < kernel) throw Error("conv1d: input shorter than kernel");
    if (weight->value.cols() != in_channels * kernel)
        throw Error("conv1d: weight shape mismatch");
    const std::size_t out_channels = weight->value.rows();
    if (bias->value.rows() != 1 || bias->value.cols() != out_channels)
        throw Error("conv1d: bias shape mismatch");
    const std::size_t out_length = (length - kernel) / stride + 1;

    DenseMatrix value(out_channels, out_length);
    for (std::size_t o = 0; o < out_channels; ++o)
        for (std::size_t j = 0; j < out_length; ++j) {
            double acc = bias->value(0, o);
            for (std::size_t ci = 0; ci < in_channels; ++ci)
                for (std::size_t kk = 0; kk < kernel; ++kk)
                    acc += weight->value(o, ci * kernel + kk) * t->value(ci, j * stride + kk);
            value(o, j) = acc;
        }
    return detail::make_op("conv1d", 
        std::move(value), {t, weight, bias},
        [t, weight, bias, kernel, stride](TensorNode& self) {
            const std::size_t in_channels = t->value.rows();
            const std::size_t out_channels = self.grad.rows();
            const std::size_t out_length = self.grad.cols();
            for (std::size_t o = 0; o < out_channels; ++o)
                for (std::size_t j = 0; j < out_length; ++j) {
                    const double go = self.grad(o, j);
                    if (go == 0.0) continue;
                    if (bias->requires_grad) bias->grad_ref()(0, o) += go;
                    for (std::size_t ci = 0; ci < in_channels; ++ci)
                        for (std::size_t kk = 0; kk < kernel; ++kk) {
                            if (weight->requires_grad)
                                weight->grad_ref()(o, ci * kernel + kk) +=
                                    go * t->value(ci, j * stride + kk);
                            if (t->requires_grad)
                                t->grad_ref()(ci, j * stride + kk) +=
                                    go * weight->value(o, ci * kernel + kk);
                        }
                }
        });
}

/// Averages node rows per membership bucket: (n, f) -> (graph_count, f).
inline Tensor mean_readout(const Tensor& t, const std::vector<std::uint32_t>& membership,
                           std::size_t graph_count) {
    if (membership.size() != t->value.rows()) throw Error("mean_readout: membership mismatch");
    std::vector<double> counts(graph_count, 0.0);
    for (std::uint32_t m : membership) {
        if (m >= graph_count) throw Error("mean_readout: membership id out of range");
        counts[m] += 1.0;
    }
    DenseMatrix value(graph_count, t->value.cols());
    for (std::size_t r = 0; r < t->value.rows(); ++r)
        for (std::size_t c = 0; c < t->value.cols(); ++c)
            value(membership[r], c) += t->value(r, c);
    for (std::size_t g = 0; g < graph_count; ++g)
        if (counts[g] > 0.0)
            for (std::size_t c = 0; c < value.cols(); ++c) value(g, c) /= counts[g];
    return detail::make_op("mean_readout", std::move(value), {t},
                           [t, membership, counts = std::move(counts)](TensorNode& self) {
                               if (!t->requires_grad) return;
                               auto& gt = t->grad_ref();
                               for (std::size_t r = 0; r < gt.rows(); ++r) {
                                   const double inv = 1.0 / counts[membership[r]];
                                   for (std::size_t c = 0; c < gt.cols(); ++c)
                                       gt(r, c) += self.grad(membership[r], c) * inv;
                               }
                           });
}

/// Per-pair dot products of embedding rows: (n, f) with E pairs -> (E, 1).
inline Tensor edge_dot(const Tensor& emb, const std::vector<Edge>& pairs) {
    const std::size_t n = emb->value.rows();
    for (const auto& [u, v] : pairs)
        if (u >= n || v >= n) throw Error("edge_dot: node id out of range");
    DenseMatrix value(pairs.size(), 1);
    for (std::size_t e = 0; e < pairs.size(); ++e) {
        const double* ru = emb->value.row_ptr(pairs[e].first);
        const double* rv = emb->value.row_ptr(pairs[e].second);
        double acc = 0.0;
        for (std::size_t c = 0; c < emb->value.cols(); ++c) acc += ru[c] * rv[c];
        value(e, 0) = acc;
    }
    return detail::make_op("edge_dot", std::move(value), {emb}, [emb, pairs](TensorNode& self) {
        if (!emb->requires_grad) return;
        auto& ge = emb->grad_ref();
        for (std::size_t e = 0; e < pairs.size(); ++e) {
            const double g = self.grad(e, 0);
            if (g == 0.0) continue;
            double* gu = ge.row_ptr(pairs[e].first);
            double* gv = ge.row_ptr(pairs[e].second);
            const double* ru = emb->value.row_ptr(pairs[e].first);
            const double* rv = emb->value.row_ptr(pairs[e].second);
            for (std::size_t c = 0; c < ge.cols(); ++c) {
                gu[c] += g * rv[c];
                gv[c] += g * ru[c];
            }
        }
    });
}

/// Rows scaled to unit L2 norm; zero rows pass through unchanged.
inline Tensor row_l2_normalize(const Tensor& t) {
    DenseMatrix value = t->value;
    std::vector<double> norms(value.rows(), 0.0);
    for (std::size_t r = 0; r < value.rows(); ++r) {
        double sq = 0.0;
        for (std::size_t c = 0; c < value.cols(); ++c) sq += value(r, c) * value(r, c);
        norms[r] = std::sqrt(sq);
        if (norms[r] > 0.0)
            for (std::size_t c = 0; c < value.cols(); ++c) value(r, c) /= norms[r];
    }
    return detail::make_op("row_l2_normalize", std::move(value), {t}, [t, norms = std::move(norms)](TensorNode& self) {
        if (!t->requires_grad) return;
        auto& gt = t->grad_ref();
        for (std::size_t r = 0; r < gt.rows(); ++r) {
            if (norms[r] == 0.0) {
                for (std::size_t c = 0; c < gt.cols(); ++c) gt(r, c) += self.grad(r, c);
                continue;
            }
            double dot = 0.0;
            for (std::size_t c = 0; c < gt.cols(); ++c) dot += self.grad(r, c) * self.value(r, c);
            for (std::size_t c = 0; c < gt.cols(); ++c)
                gt(r, c) += (self.grad(r, c) - dot * self.value(r, c)) / norms[r];
        }
    });
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

constexpr double kBceClamp = 1e-7;

/// Mean binary cross entropy over a (n, 1) probability column. Probabilities
/// clamp to [1e-7, 1 - 1e-7]; the gradient is zero where the clamp is active.
inline Tensor bce_loss(const Tensor& probs, const std::vector<double>& targets) {
    if (probs->value.cols() != 1 || probs->value.rows() != targets.size())
        throw Error("bce_loss: probability/target length mismatch");
    if (targets.empty()) throw Error("bce_loss: empty input");
    const std::size_t n = targets.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double p = std::clamp(probs->value(i, 0), kBceClamp, 1.0 - kBceClamp);
        total -= targets[i] * std::log(p) + (1.0 - targets[i]) * std::log(1.0 - p);
    }
    DenseMatrix value(1, 1, total / static_cast<double>(n));
    return detail::make_op("bce_loss", std::move(value), {probs}, [probs, targets](TensorNode& self) {
        if (!probs->requires_grad) return;
        auto& gp = probs->grad_ref();
        const double g = self.grad(0, 0) / static_cast<double>(targets.size());
        for (std::size_t i = 0; i < targets.size(); ++i) {
            double raw = probs->value(i, 0);
            if (raw <= kBceClamp || raw >= 1.0 - kBceClamp) continue;
            gp(i, 0) += g * (raw - targets[i]) / (raw * (1.0 - raw));
        }
    });
}

/// Mean hinge over paired scores: max(0, margin - pos_i + neg_i).
inline Tensor margin_loss(const Tensor& pos, const Tensor& neg, double margin = 1.0) {
    if (pos->value.cols() != 1 || neg->value.cols() != 1 ||
        pos->value.rows() != neg->value.rows())
        throw Error("margin_loss: positive/negative score length mismatch");
    if (pos->value.rows() == 0) throw Error("margin_loss: empty input");
    const std::size_t n = pos->value.rows();
    double total = 0.0;
    std::vector<char> active(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        double h = margin - pos->value(i, 0) + neg->value(i, 0);
        if (h > 0.0) {
            total += h;
            active[i] = 1;
        }
    }
    DenseMatrix value(1, 1, total / static_cast<double>(n));
    return detail::make_op("margin_loss", std::move(value), {pos, neg},
                           [pos, neg, active = std::move(active)](TensorNode& self) {
                               const double g = self.grad(0, 0) / static_cast<double>(active.size());
                               for (std::size_t i = 0; i < active.size(); ++i) {
                                   if (!active[i]) continue;
                                   if (pos->requires_grad) pos->grad_ref()(i, 0) -= g;
                                   if (neg->requires_grad) neg->grad_ref()(i, 0) += g;
                               }
                           });
}

}  // namespace stargaze
