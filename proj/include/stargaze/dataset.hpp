#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stargaze/error.hpp"
#include "stargaze/graph.hpp"
#include "stargaze/rng.hpp"

namespace stargaze {

/// Class 0 = web development, class 1 = machine learning.
struct GraphDataset {
    std::vector<Graph> graphs;
    std::vector<int> labels;
    std::vector<long long> ids;

    std::size_t size() const { return graphs.size(); }
};

struct DatasetSplit {
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> val_indices;
    std::vector<std::size_t> test_indices;
};

/// Block-diagonal union of a list of graphs. Node i of member graph k maps to
/// union node offsets[k] + i; membership tags every union node with k.
struct BatchedGraph {
    Graph graph;
    std::vector<std::uint32_t> membership;
    std::vector<std::size_t> offsets;
    std::size_t graph_count = 0;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline long long parse_id(const std::string& text, const std::string& context) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(text, &pos);
        if (pos != text.size() || v < 0) throw Error("");
        return v;
    } catch (...) {
        throw Error("malformed id '" + text + "' in " + context);
    }
}

}  // namespace detail

/// Loads the edge-JSON + label-CSV distribution and joins the two on id.
///
/// Edge file: JSON object {"<id>": [[u, v], ...], ...}; labels: CSV with
/// header `id,target`, target in {0,1}. Node count per graph is the maximum
/// endpoint + 1; ids absent from the edge list stay as degree-0 nodes.
/// Graphs come back sorted by id ascending.
inline GraphDataset load_dataset(const std::string& edges_path, const std::string& labels_path) {
    std::ifstream edges_in(edges_path);
    if (!edges_in) throw Error("cannot open edge file: " + edges_path);
    nlohmann::json root;
    try {
        edges_in >> root;
    } catch (const std::exception& e) {
        throw Error("malformed edge JSON in " + edges_path + ": " + e.what());
    }
    if (!root.is_object()) throw Error("edge file must be a JSON object: " + edges_path);

    std::map<long long, std::vector<Edge>> edge_lists;
    for (auto it = root.begin(); it != root.end(); ++it) {
        long long id = detail::parse_id(it.key(), edges_path);
        if (!it.value().is_array())
            throw Error("edge list for id " + std::to_string(id) + " is not an array");
        std::vector<Edge> pairs;
        pairs.reserve(it.value().size());
        for (const auto& pair : it.value()) {
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() ||
                !pair[1].is_number_integer())
                throw Error("malformed edge entry for id " + std::to_string(id));
            long long a = pair[0].get<long long>();
            long long b = pair[1].get<long long>();
            if (a < 0 || b < 0) throw Error("negative node id for graph " + std::to_string(id));
            pairs.emplace_back(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b));
        }
        if (pairs.empty()) throw Error("empty edge list for id " + std::to_string(id));
        edge_lists.emplace(id, std::move(pairs));
    }

    std::ifstream labels_in(labels_path);
    if (!labels_in) throw Error("cannot open label file: " + labels_path);
    std::string line;
    if (!std::getline(labels_in, line)) throw Error("empty label file: " + labels_path);
    {
        std::string header = detail::trim(line);
        if (header != "id,target")
            throw Error("label file must start with header 'id,target': " + labels_path);
    }
    std::map<long long, int> label_by_id;
    std::size_t line_no = 1;
    while (std::getline(labels_in, line)) {
        ++line_no;
        std::string row = detail::trim(line);
        if (row.empty()) continue;
        std::size_t comma = row.find(',');
        if (comma == std::string::npos)
            throw Error("malformed row " + std::to_string(line_no) + " in " + labels_path);
        long long id = detail::parse_id(detail::trim(row.substr(0, comma)), labels_path);
        std::string target = detail::trim(row.substr(comma + 1));
        if (target != "0" && target != "1")
            throw Error("label for id " + std::to_string(id) + " must be 0 or 1, got '" +
                        target + "'");
        if (!label_by_id.emplace(id, target == "1" ? 1 : 0).second)
            throw Error("duplicate label row for id " + std::to_string(id));
    }

    for (const auto& [id, label] : label_by_id)
        if (!edge_lists.count(id))
            throw Error("id " + std::to_string(id) + " present in labels but missing from edges");

    GraphDataset ds;
    ds.graphs.reserve(edge_lists.size());
    for (auto& [id, pairs] : edge_lists) {
        auto label_it = label_by_id.find(id);
        if (label_it == label_by_id.end())
            throw Error("id " + std::to_string(id) + " present in edges but missing from labels");
        std::uint32_t max_node = 0;
        for (const auto& [u, v] : pairs) max_node = std::max({max_node, u, v});
        ds.graphs.push_back(Graph::build(max_node + 1, pairs));
        ds.labels.push_back(label_it->second);
        ds.ids.push_back(id);
    }
    return ds;
}

/// Seeded uniform shuffle partitioned by the cumulative ratio boundaries.
/// Sizes are floored per ratio; remainder graphs go to train first, then val.
inline DatasetSplit split_dataset(const GraphDataset& ds, std::array<double, 3> ratios,
                                  std::uint64_t seed) {
    if (ds.size() == 0) throw Error("split_dataset: dataset is empty");
    double sum = ratios[0] + ratios[1] + ratios[2];
    if (std::abs(sum - 1.0) > 1e-9)
        throw Error("split_dataset: ratios must sum to 1, got " + std::to_string(sum));

    std::vector<std::size_t> order(ds.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    const double n = static_cast<double>(ds.size());
    std::array<std::size_t, 3> counts{};
    for (int i = 0; i < 3; ++i)
        counts[i] = static_cast<std::size_t>(std::floor(ratios[i] * n + 1e-9));
    std::size_t assigned = counts[0] + counts[1] + counts[2];
    std::size_t remainder = ds.size() - assigned;
    counts[0] += remainder > 0 ? (remainder + 1) / 2 : 0;
    counts[1] += remainder > 0 ? remainder / 2 : 0;

    DatasetSplit split;
    auto it = order.begin();
    split.train_indices.assign(it, it + counts[0]);
    it += counts[0];
    split.val_indices.assign(it, it + counts[1]);
    it += counts[1];
    split.test_indices.assign(it, order.end());
    return split;
}

/// Block-diagonal batch: offsets are cumulative node counts, no edge crosses
/// a membership boundary by construction.
inline BatchedGraph batch_graphs(const std::vector<const Graph*>& graphs) {
    if (graphs.empty()) throw Error("batch_graphs: empty list");
    BatchedGraph batch;
    batch.graph_count = graphs.size();
    batch.offsets.reserve(graphs.size());
    std::size_t total_nodes = 0;
    std::size_t total_edges = 0;
    for (const Graph* g : graphs) {
        batch.offsets.push_back(total_nodes);
        total_nodes += g->node_count();
        total_edges += g->edge_count();
    }
    std::vector<Edge> edges;
    edges.reserve(total_edges);
    batch.membership.resize(total_nodes);
    for (std::size_t k = 0; k < graphs.size(); ++k) {
        const std::uint32_t off = static_cast<std::uint32_t>(batch.offsets[k]);
        for (std::size_t i = 0; i < graphs[k]->node_count(); ++i)
            batch.membership[off + i] = static_cast<std::uint32_t>(k);
        for (const auto& [u, v] : graphs[k]->edges()) edges.emplace_back(off + u, off + v);
    }
    batch.graph = Graph::build(total_nodes, edges);
    return batch;
}

inline BatchedGraph batch_graphs(const std::vector<Graph>& graphs) {
    std::vector<const Graph*> ptrs;
    ptrs.reserve(graphs.size());
    for (const auto& g : graphs) ptrs.push_back(&g);
    return batch_graphs(ptrs);
}

enum class SyntheticKind { uniform_random, two_density_classes, planted_partition };

struct SyntheticParams {
    std::size_t graph_count = 1;
    std::size_t min_nodes = 30;
    std::size_t max_nodes = 80;
    double edge_probability = 0.1;  // uniform_random
    double p0 = 0.05;               // two_density_classes, class 0
    double p1 = 0.3;                // two_density_classes, class 1
    std::size_t blocks = 2;         // planted_partition
    double intra_p = 0.3;
    double inter_p = 0.02;
};

namespace detail {

inline void check_probability(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0))
        throw Error(std::string("generate_synthetic: probability ") + name +
                    " must lie in [0,1], got " + std::to_string(p));
}

inline Graph random_graph(std::size_t n, double p, Rng& rng) {
    std::vector<Edge> edges;
    for (std::uint32_t u = 0; u + 1 < n; ++u)
        for (std::uint32_t v = u + 1; v < n; ++v)
            if (rng.uniform_real() < p) edges.emplace_back(u, v);
    return Graph::build(n, edges);
}

inline Graph planted_partition_graph(std::size_t n, std::size_t blocks, double intra_p,
                                     double inter_p, Rng& rng) {
    // Node u belongs to block u * blocks / n: contiguous, near-equal sizes.
    std::vector<Edge> edges;
    auto block_of = [&](std::uint32_t u) { return u * blocks / n; };
    for (std::uint32_t u = 0; u + 1 < n; ++u)
        for (std::uint32_t v = u + 1; v < n; ++v) {
            double p = block_of(u) == block_of(v) ? intra_p : inter_p;
            if (rng.uniform_real() < p) edges.emplace_back(u, v);
        }
    return Graph::build(n, edges);
}

}  // namespace detail

/// Deterministic synthetic datasets for desk-scale experiments. Per-graph
/// generators derive their own substream so insertion order never shifts
/// under a fixed seed. two_density_classes alternates labels 0,1,0,1,...
inline GraphDataset generate_synthetic(SyntheticKind kind, const SyntheticParams& params,
                                       std::uint64_t seed) {
    if (params.graph_count == 0) throw Error("generate_synthetic: graph_count must be positive");
    if (params.min_nodes < 2 || params.max_nodes < params.min_nodes)
        throw Error("generate_synthetic: need max_nodes >= min_nodes >= 2");
    detail::check_probability(params.edge_probability, "edge_probability");
    detail::check_probability(params.p0, "p0");
    detail::check_probability(params.p1, "p1");
    detail::check_probability(params.intra_p, "intra_p");
    detail::check_probability(params.inter_p, "inter_p");
    if (kind == SyntheticKind::planted_partition && params.blocks < 1)
        throw Error("generate_synthetic: blocks must be positive");

    GraphDataset ds;
    for (std::size_t i = 0; i < params.graph_count; ++i) {
        Rng rng = Rng::derive(seed, i);
        std::size_t n = params.min_nodes +
                        (params.max_nodes > params.min_nodes
                             ? rng.uniform_index(params.max_nodes - params.min_nodes + 1)
                             : 0);
        int label = 0;
        Graph g;
        switch (kind) {
            case SyntheticKind::uniform_random:
                g = detail::random_graph(n, params.edge_probability, rng);
                break;
            case SyntheticKind::two_density_classes:
                label = static_cast<int>(i % 2);
                g = detail::random_graph(n, label == 0 ? params.p0 : params.p1, rng);
                break;
            case SyntheticKind::planted_partition:
                g = detail::planted_partition_graph(n, params.blocks, params.intra_p,
                                                    params.inter_p, rng);
                break;
        }
        ds.graphs.push_back(std::move(g));
        ds.labels.push_back(label);
        ds.ids.push_back(static_cast<long long>(i));
    }
    return ds;
}

/// Fixture format: JSON lines, one object per graph:
/// {"id":..,"n":..,"edges":[[u,v],..],"label":..}
inline void save_jsonl(const GraphDataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        nlohmann::json obj;
        obj["id"] = ds.ids[i];
        obj["n"] = ds.graphs[i].node_count();
        auto edges = nlohmann::json::array();
        for (const auto& [u, v] : ds.graphs[i].edges()) edges.push_back({u, v});
        obj["edges"] = std::move(edges);
        obj["label"] = ds.labels[i];
        out << obj.dump() << '\n';
    }
}

inline GraphDataset load_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open: " + path);
    GraphDataset ds;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw Error("malformed JSON line " + std::to_string(line_no) + " in " + path + ": " +
                        e.what());
        }
        std::vector<Edge> edges;
        for (const auto& pair : obj.at("edges"))
            edges.emplace_back(pair.at(0).get<std::uint32_t>(), pair.at(1).get<std::uint32_t>());
        ds.graphs.push_back(Graph::build(obj.at("n").get<std::size_t>(), edges));
        ds.labels.push_back(obj.at("label").get<int>());
        ds.ids.push_back(obj.at("id").get<long long>());
    }
    return ds;
}

}  // namespace stargaze
