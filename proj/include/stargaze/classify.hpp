#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stargaze/autodiff.hpp"
#include "stargaze/csv.hpp"
#include "stargaze/dataset.hpp"
#include "stargaze/error.hpp"
#include "stargaze/features.hpp"
#include "stargaze/nn.hpp"

namespace stargaze {

/// Hyperparameters shared by the four classifier architectures.
///
/// Architectures:
///   1: two GCN layers -> mean readout -> two fully connected layers
///   2: three GCN layers -> sort pooling -> two conv1d -> fully connected
///      -> dropout -> output
///   3: like 2 with two GCN layers
///   4: three GCN layers -> mean readout -> two fully connected layers
/// All hidden activations are ReLU; the output is a per-graph sigmoid scalar.
struct ClassifierConfig {
    int architecture = 4;
    std::size_t input_dim = kFeatureCount;
    std::size_t hidden_dim = 64;
    std::size_t sort_k = 30;
    std::size_t conv_channels1 = 16;
    std::size_t conv_channels2 = 32;
    std::size_t conv_kernel = 5;
    double dropout_p = 0.5;
    double learning_rate = 0.01;
    std::size_t epochs = 50;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;

    void validate() const {
        if (architecture < 1 || architecture > 4)
            throw Error("unknown architecture id " + std::to_string(architecture) +
                        " (expected 1..4)");
        if (epochs < 1) throw Error("classifier: epochs must be at least 1");
        if (!(learning_rate > 0.0)) throw Error("classifier: learning_rate must be positive");
        if (hidden_dim < 1 || input_dim < 1) throw Error("classifier: zero layer width");
        if (batch_size < 1) throw Error("classifier: batch_size must be at least 1");
        if (!(dropout_p >= 0.0 && dropout_p < 1.0))
            throw Error("classifier: dropout_p must lie in [0, 1)");
        if (architecture == 2 || architecture == 3) {
            if (sort_k < 1) throw Error("classifier: sort_k must be at least 1");
            if (sort_k < conv_kernel)
                throw Error("classifier: sort_k must be at least conv_kernel");
            if (conv_channels1 < 1 || conv_channels2 < 1)
                throw Error("classifier: zero convolution channels");
        }
    }

    bool uses_sort_pooling() const { return architecture == 2 || architecture == 3; }
    std::size_t gcn_layer_count() const { return architecture == 1 || architecture == 3 ? 2 : 3; }
};

class GcnClassifier {
public:
    explicit GcnClassifier(const ClassifierConfig& cfg) : cfg_(cfg) {
        cfg_.validate();
        Rng rng = Rng::derive(cfg_.seed, 0xDEC0DE);
        const std::size_t h = cfg_.hidden_dim;
        std::size_t in = cfg_.input_dim;
        for (std::size_t l = 0; l < cfg_.gcn_layer_count(); ++l) {
            gcn_.emplace_back("gcn" + std::to_string(l + 1), in, h, rng);
            in = h;
        }
        if (cfg_.uses_sort_pooling()) {
            conv1_ = Conv1dLayer("conv1", 1, cfg_.conv_channels1, h, h, rng);
            conv2_ = Conv1dLayer("conv2", cfg_.conv_channels1, cfg_.conv_channels2,
                                 cfg_.conv_kernel, 1, rng);
            const std::size_t dense_in =
                cfg_.conv_channels2 * (cfg_.sort_k - cfg_.conv_kernel + 1);
            fc1_ = LinearLayer("fc1", dense_in, h, rng);
        } else {
            fc1_ = LinearLayer("fc1", h, h, rng);
        }
        fc_out_ = LinearLayer("fc2", h, 1, rng);
    }

    const ClassifierConfig& config() const { return cfg_; }

    std::vector<Parameter*> parameters() {
        std::vector<Parameter*> out;
        for (auto& layer : gcn_) {
            out.push_back(&layer.weight);
            out.push_back(&layer.bias);
        }
        if (cfg_.uses_sort_pooling()) {
            out.push_back(&conv1_.weight);
            out.push_back(&conv1_.bias);
            out.push_back(&conv2_.weight);
            out.push_back(&conv2_.bias);
        }
        out.push_back(&fc1_.weight);
        out.push_back(&fc1_.bias);
        out.push_back(&fc_out_.weight);
        out.push_back(&fc_out_.bias);
        return out;
    }

    std::vector<const Parameter*> parameters() const {
        auto mutable_params = const_cast<GcnClassifier*>(this)->parameters();
        return {mutable_params.begin(), mutable_params.end()};
    }

    std::size_t parameter_count() const {
        std::size_t total = 0;
        for (const Parameter* p : parameters()) total += p->value().size();
        return total;
    }

    /// Per-graph class-1 probabilities, shape (graph_count, 1). In training
    /// mode dropout draws its masks from rng; eval mode needs no rng.
    Tensor forward(const BatchedGraph& batch, const DenseMatrix& features, bool training,
                   Rng* rng = nullptr) {
        if (features.rows() != batch.graph.node_count() || features.cols() != cfg_.input_dim)
            throw Error("classifier forward: feature matrix shape mismatch");
        if (training && cfg_.uses_sort_pooling() && cfg_.dropout_p > 0.0 && rng == nullptr)
            throw Error("classifier forward: training mode requires an rng for dropout");
        NormalizedAdjacency adj = normalize_adjacency(batch.graph);
        Tensor h = gcn_stack(adj, make_tensor(features));
        if (!cfg_.uses_sort_pooling()) {
            Tensor pooled = mean_readout(h, batch.membership, batch.graph_count);
            Tensor z = relu(fc1_.forward(pooled));
            return sigmoid(fc_out_.forward(z));
        }
        std::vector<Tensor> logits;
        logits.reserve(batch.graph_count);
        Rng unused(0);
        Rng& dropout_rng = rng ? *rng : unused;
        for (std::size_t g = 0; g < batch.graph_count; ++g) {
            const std::size_t begin = batch.offsets[g];
            const std::size_t end =
                g + 1 < batch.graph_count ? batch.offsets[g + 1] : batch.graph.node_count();
            Tensor rows = slice_rows(h, begin, end);
            Tensor pooled = sort_pool(rows, cfg_.sort_k);
            Tensor signal = reshape(pooled, 1, cfg_.sort_k * cfg_.hidden_dim);
            Tensor c1 = relu(conv1_.forward(signal));
            Tensor c2 = relu(conv2_.forward(c1));
            Tensor flat = reshape(c2, 1, c2->value.size());
            Tensor dense = relu(fc1_.forward(flat));
            dense = dropout(dense, cfg_.dropout_p, training, dropout_rng);
            logits.push_back(fc_out_.forward(dense));
        }
        return sigmoid(concat_rows(logits));
    }

    /// Mean-pooled output of the final GCN layer, one row per graph. This is
    /// the representation handed to the downstream random forest.
    Tensor graph_embeddings(const BatchedGraph& batch, const DenseMatrix& features) {
        NormalizedAdjacency adj = normalize_adjacency(batch.graph);
        Tensor h = gcn_stack(adj, make_tensor(features));
        return mean_readout(h, batch.membership, batch.graph_count);
    }

private:
    Tensor gcn_stack(const NormalizedAdjacency& adj, Tensor h) {
        for (const auto& layer : gcn_) h = layer.forward(adj, h, Activation::relu);
        return h;
    }

    ClassifierConfig cfg_;
    std::vector<GcnLayer> gcn_;
    Conv1dLayer conv1_, conv2_;
    LinearLayer fc1_, fc_out_;
};

inline GcnClassifier build_classifier(const ClassifierConfig& cfg) { return GcnClassifier(cfg); }

/// Loss/accuracy trajectory. Epoch 0 holds the evaluation of the freshly
/// initialized model; entry e >= 1 is measured after epoch e's updates.
struct TrainReport {
    double initial_train_loss = 0.0;
    double initial_val_loss = 0.0;
    double initial_train_accuracy = 0.0;
    double initial_val_accuracy = 0.0;
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    std::vector<double> train_accuracy;
    std::vector<double> val_accuracy;
    std::vector<double> epoch_seconds;  // informational; not exported

    std::string to_csv() const {
        std::ostringstream out;
        out << "epoch,train_loss,val_loss,train_acc,val_acc\n";
        out << "0," << format_double(initial_train_loss) << ',' << format_double(initial_val_loss)
            << ',' << format_double(initial_train_accuracy) << ','
            << format_double(initial_val_accuracy) << '\n';
        for (std::size_t e = 0; e < train_loss.size(); ++e)
            out << (e + 1) << ',' << format_double(train_loss[e]) << ','
                << format_double(val_loss[e]) << ',' << format_double(train_accuracy[e]) << ','
                << format_double(val_accuracy[e]) << '\n';
        return out.str();
    }
};

namespace detail {

struct Minibatch {
    BatchedGraph batch;
    DenseMatrix features;
    std::vector<double> labels;
};

inline Minibatch make_minibatch(const GraphDataset& ds, const std::vector<DenseMatrix>& features,
                                const std::vector<std::size_t>& indices, std::size_t begin,
                                std::size_t end) {
    Minibatch mb;
    std::vector<const Graph*> graphs;
    graphs.reserve(end - begin);
    std::size_t total_rows = 0;
    for (std::size_t i = begin; i < end; ++i) {
        graphs.push_back(&ds.graphs[indices[i]]);
        total_rows += ds.graphs[indices[i]].node_count();
    }
    mb.batch = batch_graphs(graphs);
    mb.features = DenseMatrix(total_rows, features.front().cols());
    std::size_t row = 0;
    for (std::size_t i = begin; i < end; ++i) {
        const DenseMatrix& f = features[indices[i]];
        for (std::size_t r = 0; r < f.rows(); ++r, ++row)
            for (std::size_t c = 0; c < f.cols(); ++c) mb.features(row, c) = f(r, c);
        mb.labels.push_back(static_cast<double>(ds.labels[indices[i]]));
    }
    return mb;
}

struct EvalMetrics {
    double loss = 0.0;
    double accuracy = 0.0;
};

inline EvalMetrics evaluate_classifier(GcnClassifier& model, const GraphDataset& ds,
                                       const std::vector<DenseMatrix>& features,
                                       const std::vector<std::size_t>& indices,
                                       std::size_t batch_size) {
    if (indices.empty()) return {};
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t begin = 0; begin < indices.size(); begin += batch_size) {
        std::size_t end = std::min(begin + batch_size, indices.size());
        Minibatch mb = make_minibatch(ds, features, indices, begin, end);
        Tensor probs = model.forward(mb.batch, mb.features, /*training=*/false);
        Tensor loss = bce_loss(probs, mb.labels);
        loss_sum += loss->value(0, 0) * static_cast<double>(end - begin);
        for (std::size_t i = 0; i < mb.labels.size(); ++i)
            if ((probs->value(i, 0) >= 0.5 ? 1.0 : 0.0) == mb.labels[i]) ++correct;
    }
    EvalMetrics m;
    m.loss = loss_sum / static_cast<double>(indices.size());
    m.accuracy = static_cast<double>(correct) / static_cast<double>(indices.size());
    return m;
}

}  // namespace detail

/// Minibatch Adam training. Deterministic under a fixed seed: the per-epoch
/// shuffle and the dropout masks both come from substreams of cfg.seed. The
/// model is left holding the parameters of its lowest-validation-loss
/// evaluation (the final state included).
inline TrainReport train_classifier(GcnClassifier& model, const GraphDataset& ds,
                                    const std::vector<DenseMatrix>& features,
                                    const DatasetSplit& split) {
    const ClassifierConfig& cfg = model.config();
    if (split.train_indices.empty()) throw Error("train_classifier: empty training split");
    if (features.size() != ds.size())
        throw Error("train_classifier: feature/graph count mismatch");
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (features[i].rows() != ds.graphs[i].node_count())
            throw Error("train_classifier: feature rows mismatch for graph index " +
                        std::to_string(i));

    std::vector<Parameter*> params = model.parameters();
    auto snapshot_params = [&] {
        std::vector<DenseMatrix> snap;
        snap.reserve(params.size());
        for (Parameter* p : params) snap.push_back(p->value());
        return snap;
    };

    TrainReport report;
    auto initial_train =
        detail::evaluate_classifier(model, ds, features, split.train_indices, cfg.batch_size);
    auto initial_val =
        detail::evaluate_classifier(model, ds, features, split.val_indices, cfg.batch_size);
    report.initial_train_loss = initial_train.loss;
    report.initial_train_accuracy = initial_train.accuracy;
    report.initial_val_loss = initial_val.loss;
    report.initial_val_accuracy = initial_val.accuracy;

    const bool has_val = !split.val_indices.empty();
    double best_val_loss = has_val ? initial_val.loss : initial_train.loss;
    std::vector<DenseMatrix> best_params = snapshot_params();

    std::vector<std::size_t> order = split.train_indices;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto t0 = std::chrono::steady_clock::now();
        Rng shuffle_rng = Rng::derive(cfg.seed, 0x5407 + epoch);
        Rng dropout_rng = Rng::derive(cfg.seed, 0xD607 + epoch);
        shuffle_rng.shuffle(order);
        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            std::size_t end = std::min(begin + cfg.batch_size, order.size());
            detail::Minibatch mb = detail::make_minibatch(ds, features, order, begin, end);
            Tensor probs = model.forward(mb.batch, mb.features, /*training=*/true, &dropout_rng);
            Tensor loss = bce_loss(probs, mb.labels);
            backward(loss);
            adam_step(params, cfg.learning_rate);
        }
        auto train_metrics =
            detail::evaluate_classifier(model, ds, features, split.train_indices, cfg.batch_size);
        auto val_metrics =
            detail::evaluate_classifier(model, ds, features, split.val_indices, cfg.batch_size);
        report.train_loss.push_back(train_metrics.loss);
        report.train_accuracy.push_back(train_metrics.accuracy);
        report.val_loss.push_back(val_metrics.loss);
        report.val_accuracy.push_back(val_metrics.accuracy);
        double tracked = has_val ? val_metrics.loss : train_metrics.loss;
        if (tracked < best_val_loss) {
            best_val_loss = tracked;
            best_params = snapshot_params();
        }
        report.epoch_seconds.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }

    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value() = best_params[i];
    return report;
}

/// Eval-mode class-1 probabilities for the given graphs (chunked internally).
inline std::vector<double> predict(GcnClassifier& model, const GraphDataset& ds,
                                   const std::vector<DenseMatrix>& features,
                                   const std::vector<std::size_t>& indices) {
    if (features.size() != ds.size()) throw Error("predict: feature/graph count mismatch");
    std::vector<double> out;
    out.reserve(indices.size());
    const std::size_t batch_size = model.config().batch_size;
    for (std::size_t begin = 0; begin < indices.size(); begin += batch_size) {
        std::size_t end = std::min(begin + batch_size, indices.size());
        detail::Minibatch mb = detail::make_minibatch(ds, features, indices, begin, end);
        Tensor probs = model.forward(mb.batch, mb.features, /*training=*/false);
        for (std::size_t i = 0; i < end - begin; ++i) out.push_back(probs->value(i, 0));
    }
    return out;
}

/// Graph-level embeddings (mean-pooled final GCN layer) for the hybrid
/// stage. Only defined for architecture 4, the extraction target.
inline DenseMatrix extract_embeddings(GcnClassifier& model, const GraphDataset& ds,
                                      const std::vector<DenseMatrix>& features,
                                      const std::vector<std::size_t>& indices) {
    if (model.config().architecture != 4)
        throw Error("extract_embeddings: requires architecture 4, got " +
                    std::to_string(model.config().architecture));
    if (features.size() != ds.size())
        throw Error("extract_embeddings: feature/graph count mismatch");
    DenseMatrix out(indices.size(), model.config().hidden_dim);
    const std::size_t batch_size = model.config().batch_size;
    for (std::size_t begin = 0; begin < indices.size(); begin += batch_size) {
        std::size_t end = std::min(begin + batch_size, indices.size());
        detail::Minibatch mb = detail::make_minibatch(ds, features, indices, begin, end);
        Tensor emb = model.graph_embeddings(mb.batch, mb.features);
        for (std::size_t i = 0; i < end - begin; ++i)
            for (std::size_t c = 0; c < out.cols(); ++c)
                out(begin + i, c) = emb->value(i, c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Checkpoint format (versioned JSON): architecture + layer shapes + row-major
// values, plus the feature normalizer and split recipe needed to reproduce
// the downstream evaluation. Loading rejects any shape mismatch.
// ---------------------------------------------------------------------------

struct CheckpointMeta {
    Normalizer normalizer;
    std::uint64_t split_seed = 0;
    std::array<double, 3> split_ratios{0.6, 0.2, 0.2};
    std::size_t dataset_size = 0;
};

inline void save_checkpoint(const std::string& path, const GcnClassifier& model,
                            const CheckpointMeta& meta) {
    nlohmann::json root;
    root["format_version"] = 1;
    const ClassifierConfig& cfg = model.config();
    root["model"] = {
        {"architecture", cfg.architecture},   {"input_dim", cfg.input_dim},
        {"hidden_dim", cfg.hidden_dim},       {"sort_k", cfg.sort_k},
        {"conv_channels1", cfg.conv_channels1}, {"conv_channels2", cfg.conv_channels2},
        {"conv_kernel", cfg.conv_kernel},     {"dropout_p", cfg.dropout_p},
        {"learning_rate", cfg.learning_rate}, {"epochs", cfg.epochs},
        {"batch_size", cfg.batch_size},       {"seed", cfg.seed},
    };
    auto params = nlohmann::json::array();
    for (const Parameter* p : model.parameters()) {
        params.push_back({{"name", p->name},
                          {"rows", p->value().rows()},
                          {"cols", p->value().cols()},
                          {"values", p->value().values()}});
    }
    root["parameters"] = std::move(params);
    root["normalizer"] = {{"means", meta.normalizer.means()}, {"stds", meta.normalizer.stds()}};
    root["split"] = {{"seed", meta.split_seed},
                     {"ratios", meta.split_ratios},
                     {"dataset_size", meta.dataset_size}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path);
    out << root.dump(2) << '\n';
}

struct LoadedCheckpoint {
    GcnClassifier model;
    CheckpointMeta meta;
};

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open checkpoint: " + path);
    nlohmann::json root;
    try {
        in >> root;
    } catch (const std::exception& e) {
        throw Error("malformed checkpoint JSON in " + path + ": " + e.what());
    }
    if (root.value("format_version", 0) != 1)
        throw Error("unsupported checkpoint format_version in " + path);

    const auto& m = root.at("model");
    ClassifierConfig cfg;
    cfg.architecture = m.at("architecture").get<int>();
    cfg.input_dim = m.at("input_dim").get<std::size_t>();
    cfg.hidden_dim = m.at("hidden_dim").get<std::size_t>();
    cfg.sort_k = m.at("sort_k").get<std::size_t>();
    cfg.conv_channels1 = m.at("conv_channels1").get<std::size_t>();
    cfg.conv_channels2 = m.at("conv_channels2").get<std::size_t>();
    cfg.conv_kernel = m.at("conv_kernel").get<std::size_t>();
    cfg.dropout_p = m.at("dropout_p").get<double>();
    cfg.learning_rate = m.at("learning_rate").get<double>();
    cfg.epochs = m.at("epochs").get<std::size_t>();
    cfg.batch_size = m.at("batch_size").get<std::size_t>();
    cfg.seed = m.at("seed").get<std::uint64_t>();

    LoadedCheckpoint loaded{GcnClassifier(cfg), {}};
    std::vector<Parameter*> params = loaded.model.parameters();
    const auto& stored = root.at("parameters");
    if (stored.size() != params.size())
        throw Error("checkpoint parameter count mismatch in " + path);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& entry = stored[i];
        if (entry.at("name").get<std::string>() != params[i]->name)
            throw Error("checkpoint parameter name mismatch: expected " + params[i]->name);
        std::size_t rows = entry.at("rows").get<std::size_t>();
        std::size_t cols = entry.at("cols").get<std::size_t>();
        auto values = entry.at("values").get<std::vector<double>>();
        if (rows != params[i]->value().rows() || cols != params[i]->value().cols() ||
            values.size() != rows * cols)
            throw Error("checkpoint shape mismatch for parameter " + params[i]->name);
        params[i]->value().values() = std::move(values);
    }

    const auto& norm = root.at("normalizer");
    loaded.meta.normalizer = Normalizer(norm.at("means").get<std::vector<double>>(),
                                        norm.at("stds").get<std::vector<double>>());
    const auto& split = root.at("split");
    loaded.meta.split_seed = split.at("seed").get<std::uint64_t>();
    auto ratios = split.at("ratios").get<std::vector<double>>();
    if (ratios.size() != 3) throw Error("checkpoint split ratios must have 3 entries");
    loaded.meta.split_ratios = {ratios[0], ratios[1], ratios[2]};
    loaded.meta.dataset_size = split.at("dataset_size").get<std::size_t>();
    return loaded;
}

}  // namespace stargaze
