#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "stargaze/dataset.hpp"
#include "stargaze/error.hpp"
#include "stargaze/graph.hpp"
#include "stargaze/matrix.hpp"
#include "stargaze/rng.hpp"

namespace stargaze {

/// Class 1 (machine learning) is the positive class throughout.
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
};

inline ConfusionMatrix confusion(const std::vector<int>& pred, const std::vector<int>& truth) {
    if (pred.size() != truth.size()) throw Error("confusion: length mismatch");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (truth[i] == 1)
            pred[i] == 1 ? ++cm.tp : ++cm.fn;
        else
            pred[i] == 1 ? ++cm.fp : ++cm.tn;
    }
    return cm;
}

/// Ratio with an explicit defined flag: undefined denominators yield 0.
struct MetricValue {
    double value = 0.0;
    bool defined = false;
};

inline MetricValue accuracy(const ConfusionMatrix& cm) {
    if (cm.total() == 0) return {};
    return {static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total()), true};
}

inline MetricValue precision(const ConfusionMatrix& cm) {
    if (cm.tp + cm.fp == 0) return {};
    return {static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp), true};
}

inline MetricValue recall(const ConfusionMatrix& cm) {
    if (cm.tp + cm.fn == 0) return {};
    return {static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn), true};
}

struct RocCurve {
    std::vector<std::pair<double, double>> points;  // (fpr, tpr), (0,0) .. (1,1)
    double auc = 0.0;
};

/// Threshold sweep over the distinct scores, descending. The area is
/// accumulated in integers (2*wins + ties over all positive/negative pairs)
/// before the single final division, which makes the trapezoidal value agree
/// exactly with the Mann-Whitney pairwise statistic under the ties-count-half
/// convention.
inline RocCurve roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw Error("roc_auc: length mismatch");
    if (scores.empty()) throw Error("roc_auc: empty input");
    std::size_t pos = 0;
    for (int y : labels) {
        if (y != 0 && y != 1) throw Error("roc_auc: labels must be 0 or 1");
        pos += static_cast<std::size_t>(y);
    }
    const std::size_t neg = labels.size() - pos;
    if (pos == 0 || neg == 0) throw Error("roc_auc: both classes must be present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];
    });

    RocCurve curve;
    curve.points.emplace_back(0.0, 0.0);
    std::size_t tp = 0, fp = 0;
    unsigned long long numerator = 0;  // sum of n_g * (2 * tp_before + p_g)
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        std::size_t group_pos = 0, group_neg = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            labels[order[j]] == 1 ? ++group_pos : ++group_neg;
            ++j;
        }
        numerator += static_cast<unsigned long long>(group_neg) * (2 * tp + group_pos);
        tp += group_pos;
        fp += group_neg;
        curve.points.emplace_back(static_cast<double>(fp) / static_cast<double>(neg),
                                  static_cast<double>(tp) / static_cast<double>(pos));
        i = j;
    }
    curve.auc = static_cast<double>(numerator) /
                (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
    return curve;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw Error("pearson: length mismatch");
    if (x.size() < 2) throw Error("pearson: need at least 2 points");
    const double n = static_cast<double>(x.size());
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mx;
        double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw Error("pearson: zero variance");
    return sxy / std::sqrt(sxx * syy);
}

struct PcaResult {
    DenseMatrix projected;            // (rows, dims)
    DenseMatrix components;           // (dims, feature count), orthonormal rows
    std::vector<double> eigenvalues;  // descending
    std::vector<double> explained_variance_ratio;
    std::vector<double> column_means;
};

/// PCA via power iteration with deflation on the (1/(n-1)) covariance.
/// Sign convention: the largest-magnitude entry of each component is
/// positive. Tolerance 1e-10, at most 1000 iterations per component.
inline PcaResult pca_project(const DenseMatrix& x, std::size_t dims = 2) {
    if (dims == 0) throw Error("pca_project: dims must be at least 1");
    if (dims > x.cols())
        throw Error("pca_project: dims " + std::to_string(dims) + " exceeds feature count " +
                    std::to_string(x.cols()));
    if (x.rows() < dims) throw Error("pca_project: need at least dims rows");

    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    PcaResult result;
    result.column_means.assign(d, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) result.column_means[c] += x(r, c);
    for (double& m : result.column_means) m /= static_cast<double>(n);

    DenseMatrix centered(n, d);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) centered(r, c) = x(r, c) - result.column_means[c];

    DenseMatrix cov(d, d);
    const double scale = n > 1 ? 1.0 / static_cast<double>(n - 1) : 1.0;
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            double acc = 0.0;
            for (std::size_t r = 0; r < n; ++r) acc += centered(r, a) * centered(r, b);
            cov(a, b) = cov(b, a) = acc * scale;
        }
    double total_variance = 0.0;
    for (std::size_t c = 0; c < d; ++c) total_variance += cov(c, c);

    result.components = DenseMatrix(dims, d);
    DenseMatrix work = cov;
    Rng rng(0x9CA0);
    for (std::size_t comp = 0; comp < dims; ++comp) {
        std::vector<double> v(d);
        for (double& e : v) e = rng.uniform_real(-1.0, 1.0);
        // keep the start vector clear of already-extracted directions
        for (std::size_t prev = 0; prev < comp; ++prev) {
            double dot = 0.0;
            for (std::size_t c = 0; c < d; ++c) dot += v[c] * result.components(prev, c);
            for (std::size_t c = 0; c < d; ++c) v[c] -= dot * result.components(prev, c);
        }
        double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
        if (norm == 0.0) {
            v.assign(d, 0.0);
            v[comp % d] = 1.0;
            norm = 1.0;
        }
        for (double& e : v) e /= norm;

        double eigenvalue = 0.0;
        std::vector<double> next(d);
        for (std::size_t iter = 0; iter < 1000; ++iter) {
            for (std::size_t a = 0; a < d; ++a) {
                double acc = 0.0;
                for (std::size_t b = 0; b < d; ++b) acc += work(a, b) * v[b];
                next[a] = acc;
            }
            for (std::size_t prev = 0; prev < comp; ++prev) {
                double dot = 0.0;
                for (std::size_t c = 0; c < d; ++c) dot += next[c] * result.components(prev, c);
                for (std::size_t c = 0; c < d; ++c) next[c] -= dot * result.components(prev, c);
            }
            double next_norm =
                std::sqrt(std::inner_product(next.begin(), next.end(), next.begin(), 0.0));
            if (next_norm < 1e-300) break;  // zero eigenvalue direction
            for (std::size_t c = 0; c < d; ++c) next[c] /= next_norm;
            double delta = 0.0;
            for (std::size_t c = 0; c < d; ++c)
                delta = std::max(delta, std::abs(next[c] - v[c]));
            v = next;
            if (delta < 1e-10) break;
        }
        // Rayleigh quotient of the converged direction
        for (std::size_t a = 0; a < d; ++a) {
            double acc = 0.0;
            for (std::size_t b = 0; b < d; ++b) acc += work(a, b) * v[b];
            eigenvalue += v[a] * acc;
        }

        std::size_t pivot = 0;
        for (std::size_t c = 1; c < d; ++c)
            if (std::abs(v[c]) > std::abs(v[pivot])) pivot = c;
        if (v[pivot] < 0.0)
            for (double& e : v) e = -e;

        for (std::size_t c = 0; c < d; ++c) result.components(comp, c) = v[c];
        result.eigenvalues.push_back(eigenvalue);
        result.explained_variance_ratio.push_back(
            total_variance > 0.0 ? eigenvalue / total_variance : 0.0);
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b) work(a, b) -= eigenvalue * v[a] * v[b];
    }

    result.projected = matmul(centered, transpose(result.components));
    return result;
}

/// EDA bundle: per-graph stats, the Pearson matrix over
/// {nodes, edges, average degree, density}, and per-class means.
struct EdaReport {
    static constexpr std::array<const char*, 4> kMetricNames{"nodes", "edges", "avg_degree",
                                                             "density"};

    std::vector<GraphStats> per_graph;
    std::array<std::array<double, 4>, 4> correlations{};

    struct ClassSummary {
        std::size_t count = 0;
        double mean_nodes = 0.0;
        double mean_edges = 0.0;
        double mean_avg_degree = 0.0;
        double mean_density = 0.0;
    };
    ClassSummary class_summary[2];
};

inline EdaReport eda_report(const GraphDataset& ds) {
    if (ds.size() == 0) throw Error("eda_report: empty dataset");
    EdaReport report;
    report.per_graph.reserve(ds.size());
    for (const Graph& g : ds.graphs) report.per_graph.push_back(graph_stats(g));

    std::array<std::vector<double>, 4> columns;
    for (auto& col : columns) col.reserve(ds.size());
    for (const GraphStats& s : report.per_graph) {
        columns[0].push_back(static_cast<double>(s.node_count));
        columns[1].push_back(static_cast<double>(s.edge_count));
        columns[2].push_back(s.average_degree);
        columns[3].push_back(s.density);
    }
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b) {
            if (a == b) {
                report.correlations[a][b] = 1.0;
                continue;
            }
            try {
                report.correlations[a][b] = pearson(columns[a], columns[b]);
            } catch (const Error&) {
                report.correlations[a][b] = 0.0;  // degenerate column
            }
        }

    for (std::size_t i = 0; i < ds.size(); ++i) {
        auto& summary = report.class_summary[ds.labels[i]];
        summary.count += 1;
        summary.mean_nodes += columns[0][i];
        summary.mean_edges += columns[1][i];
        summary.mean_avg_degree += columns[2][i];
        summary.mean_density += columns[3][i];
    }
    for (auto& summary : report.class_summary) {
        if (summary.count == 0) continue;
        const double c = static_cast<double>(summary.count);
        summary.mean_nodes /= c;
        summary.mean_edges /= c;
        summary.mean_avg_degree /= c;
        summary.mean_density /= c;
    }
    return report;
}

}  // namespace stargaze
