// Command-line surface of the stargaze library: dataset statistics, GCN
// classifier training, hybrid GCN -> random-forest evaluation, and per-graph
// link recommendations. Every run writes its fully resolved configuration
// (flags over config-file values over defaults) into the output directory, so
// re-running with that file reproduces the run byte for byte.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stargaze/classify.hpp"
#include "stargaze/csv.hpp"
#include "stargaze/dataset.hpp"
#include "stargaze/error.hpp"
#include "stargaze/eval.hpp"
#include "stargaze/features.hpp"
#include "stargaze/forest.hpp"
#include "stargaze/graph.hpp"
#include "stargaze/linkpred.hpp"
#include "stargaze/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void require_readable(const std::string& path, const std::string& what) {
    if (path.empty()) throw stargaze::ConfigError("missing required option: " + what);
    if (!fs::exists(path))
        throw stargaze::ConfigError(what + " file does not exist: " + path);
}

void prepare_outdir(const std::string& out, bool force) {
    if (out.empty()) throw stargaze::ConfigError("missing required option: --out");
    fs::path dir(out);
    if (fs::exists(dir)) {
        if (!fs::is_directory(dir))
            throw stargaze::ConfigError("output path is not a directory: " + out);
        if (!fs::is_empty(dir) && !force)
            throw stargaze::ConfigError("output directory is not empty (use --force): " + out);
    } else {
        fs::create_directories(dir);
    }
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw stargaze::Error("cannot open for writing: " + path.string());
    out << content;
}

json load_config_file(const std::string& path) {
    if (path.empty()) return json::object();
    if (!fs::exists(path))
        throw stargaze::ConfigError("config file does not exist: " + path);
    std::ifstream in(path);
    json cfg;
    try {
        in >> cfg;
    } catch (const std::exception& e) {
        throw stargaze::ConfigError("malformed config JSON in " + path + ": " + e.what());
    }
    if (!cfg.is_object()) throw stargaze::ConfigError("config file must be a JSON object");
    return cfg;
}

/// Flags override config-file values, which override defaults.
template <typename T>
void apply_config(const json& cfg, const CLI::Option* opt, const char* key, T& value) {
    if (opt->count() > 0 || !cfg.contains(key)) return;
    try {
        value = cfg.at(key).get<T>();
    } catch (const std::exception&) {
        throw stargaze::ConfigError(std::string("config key '") + key + "' has the wrong type");
    }
}

stargaze::GraphDataset load_dataset_checked(const std::string& edges, const std::string& labels) {
    require_readable(edges, "--edges");
    require_readable(labels, "--labels");
    return stargaze::load_dataset(edges, labels);
}

std::vector<stargaze::DenseMatrix> compute_all_features(const stargaze::GraphDataset& ds,
                                                        unsigned threads) {
    std::vector<stargaze::DenseMatrix> features(ds.size());
    stargaze::parallel_for(ds.size(), threads, [&](std::size_t i) {
        features[i] = stargaze::assemble_features(ds.graphs[i]);
    });
    return features;
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

struct StatsOptions {
    std::string edges, labels, out, config;
    unsigned threads = 0;
    bool force = false;
};

void run_stats(const StatsOptions& opt) {
    auto ds = load_dataset_checked(opt.edges, opt.labels);
    prepare_outdir(opt.out, opt.force);
    auto report = stargaze::eda_report(ds);
    fs::path dir(opt.out);

    {
        stargaze::CsvWriter csv((dir / "graph_stats.csv").string());
        csv.row({"id", "nodes", "edges", "avg_degree", "density"});
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const auto& s = report.per_graph[i];
            csv.row({stargaze::cell(ds.ids[i]), stargaze::cell(s.node_count),
                     stargaze::cell(s.edge_count), stargaze::cell(s.average_degree),
                     stargaze::cell(s.density)});
        }
    }
    {
        stargaze::CsvWriter csv((dir / "correlations.csv").string());
        csv.row({"metric", "nodes", "edges", "avg_degree", "density"});
        for (std::size_t a = 0; a < 4; ++a) {
            std::vector<std::string> row{stargaze::EdaReport::kMetricNames[a]};
            for (std::size_t b = 0; b < 4; ++b)
                row.push_back(stargaze::cell(report.correlations[a][b]));
            csv.row(row);
        }
    }
    {
        json summary;
        const char* keys[2] = {"class_0", "class_1"};
        const char* names[2] = {"web_development", "machine_learning"};
        for (int c = 0; c < 2; ++c) {
            const auto& s = report.class_summary[c];
            summary[keys[c]] = {{"label", names[c]},
                                {"count", s.count},
                                {"mean_nodes", s.mean_nodes},
                                {"mean_edges", s.mean_edges},
                                {"mean_avg_degree", s.mean_avg_degree},
                                {"mean_density", s.mean_density}};
        }
        write_file(dir / "class_summary.json", summary.dump(2) + "\n");
    }
    json resolved{{"command", "stats"}, {"edges", opt.edges},     {"labels", opt.labels},
                  {"out", opt.out},     {"threads", opt.threads}, {"force", opt.force}};
    write_file(dir / "resolved_config.json", resolved.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainOptions {
    std::string edges, labels, out, config;
    int arch = 4;
    std::size_t hidden_dim = 64;
    std::size_t sort_k = 30;
    std::size_t conv_channels1 = 16;
    std::size_t conv_channels2 = 32;
    std::size_t conv_kernel = 5;
    double dropout = 0.5;
    double lr = 0.01;
    std::size_t epochs = 50;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    bool force = false;
};

json train_resolved_config(const TrainOptions& opt) {
    return json{{"command", "train"},
                {"edges", opt.edges},
                {"labels", opt.labels},
                {"out", opt.out},
                {"arch", opt.arch},
                {"hidden_dim", opt.hidden_dim},
                {"sort_k", opt.sort_k},
                {"conv_channels1", opt.conv_channels1},
                {"conv_channels2", opt.conv_channels2},
                {"conv_kernel", opt.conv_kernel},
                {"dropout", opt.dropout},
                {"lr", opt.lr},
                {"epochs", opt.epochs},
                {"batch_size", opt.batch_size},
                {"seed", opt.seed},
                {"threads", opt.threads},
                {"force", opt.force}};
}

void run_train(const TrainOptions& opt) {
    auto ds = load_dataset_checked(opt.edges, opt.labels);
    prepare_outdir(opt.out, opt.force);
    fs::path dir(opt.out);

    stargaze::ClassifierConfig cfg;
    cfg.architecture = opt.arch;
    cfg.hidden_dim = opt.hidden_dim;
    cfg.sort_k = opt.sort_k;
    cfg.conv_channels1 = opt.conv_channels1;
    cfg.conv_channels2 = opt.conv_channels2;
    cfg.conv_kernel = opt.conv_kernel;
    cfg.dropout_p = opt.dropout;
    cfg.learning_rate = opt.lr;
    cfg.epochs = opt.epochs;
    cfg.batch_size = opt.batch_size;
    cfg.seed = opt.seed;
    cfg.validate();

    auto features = compute_all_features(ds, stargaze::resolve_thread_count(opt.threads));
    auto split = stargaze::split_dataset(ds, {0.6, 0.2, 0.2}, opt.seed);

    std::vector<const stargaze::DenseMatrix*> train_features;
    for (std::size_t i : split.train_indices) train_features.push_back(&features[i]);
    auto normalizer = stargaze::Normalizer::fit(train_features);
    for (auto& f : features) f = normalizer.transform(f);

    stargaze::GcnClassifier model(cfg);
    auto report = stargaze::train_classifier(model, ds, features, split);

    stargaze::CheckpointMeta meta;
    meta.normalizer = normalizer;
    meta.split_seed = opt.seed;
    meta.split_ratios = {0.6, 0.2, 0.2};
    meta.dataset_size = ds.size();
    stargaze::save_checkpoint((dir / "checkpoint.json").string(), model, meta);
    write_file(dir / "train_report.csv", report.to_csv());
    write_file(dir / "resolved_config.json", train_resolved_config(opt).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// hybrid-eval
// ---------------------------------------------------------------------------

struct HybridOptions {
    std::string edges, labels, checkpoint, out, config;
    std::size_t trees = 100;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    bool force = false;
};

void run_hybrid_eval(const HybridOptions& opt) {
    auto ds = load_dataset_checked(opt.edges, opt.labels);
    require_readable(opt.checkpoint, "--checkpoint");
    auto loaded = stargaze::load_checkpoint(opt.checkpoint);
    if (loaded.model.config().architecture != 4)
        throw stargaze::Error("hybrid-eval requires an architecture-4 checkpoint, got " +
                              std::to_string(loaded.model.config().architecture));
    if (loaded.meta.dataset_size != ds.size())
        throw stargaze::Error("checkpoint was trained on " +
                              std::to_string(loaded.meta.dataset_size) +
                              " graphs but the dataset has " + std::to_string(ds.size()));
    prepare_outdir(opt.out, opt.force);
    fs::path dir(opt.out);

    auto features = compute_all_features(ds, stargaze::resolve_thread_count(opt.threads));
    for (auto& f : features) f = loaded.meta.normalizer.transform(f);
    auto split = stargaze::split_dataset(ds, loaded.meta.split_ratios, loaded.meta.split_seed);

    auto train_emb =
        stargaze::extract_embeddings(loaded.model, ds, features, split.train_indices);
    auto test_emb = stargaze::extract_embeddings(loaded.model, ds, features, split.test_indices);
    std::vector<int> train_labels, test_labels;
    for (std::size_t i : split.train_indices) train_labels.push_back(ds.labels[i]);
    for (std::size_t i : split.test_indices) test_labels.push_back(ds.labels[i]);

    stargaze::ForestConfig forest_cfg;
    forest_cfg.n_trees = opt.trees;
    forest_cfg.seed = opt.seed;
    auto forest = stargaze::fit_forest(train_emb, train_labels, forest_cfg);
    auto probabilities = forest.predict_proba(test_emb);

    std::vector<int> predictions;
    predictions.reserve(probabilities.size());
    for (double p : probabilities) predictions.push_back(p >= 0.5 ? 1 : 0);
    auto cm = stargaze::confusion(predictions, test_labels);
    auto curve = stargaze::roc_auc(probabilities, test_labels);

    {
        json out{{"tp", cm.tp},
                 {"fp", cm.fp},
                 {"tn", cm.tn},
                 {"fn", cm.fn},
                 {"total", cm.total()},
                 {"errors_web_development", cm.fp},
                 {"errors_machine_learning", cm.fn}};
        write_file(dir / "confusion.json", out.dump(2) + "\n");
    }
    {
        json out{{"accuracy", stargaze::accuracy(cm).value},
                 {"precision_ml", stargaze::precision(cm).value},
                 {"recall_ml", stargaze::recall(cm).value},
                 {"auc", curve.auc}};
        write_file(dir / "metrics.json", out.dump(2) + "\n");
    }
    {
        stargaze::CsvWriter csv((dir / "roc.csv").string());
        csv.row({"fpr", "tpr"});
        for (const auto& [fpr, tpr] : curve.points)
            csv.row({stargaze::cell(fpr), stargaze::cell(tpr)});
    }
    {
        auto pca = stargaze::pca_project(test_emb, 2);
        stargaze::CsvWriter csv((dir / "pca2d.csv").string());
        csv.row({"x", "y", "label"});
        for (std::size_t i = 0; i < split.test_indices.size(); ++i)
            csv.row({stargaze::cell(pca.projected(i, 0)), stargaze::cell(pca.projected(i, 1)),
                     stargaze::cell(test_labels[i])});
    }
    write_file(dir / "forest.json", forest.to_json().dump() + "\n");
    json resolved{{"command", "hybrid-eval"}, {"edges", opt.edges},
                  {"labels", opt.labels},     {"checkpoint", opt.checkpoint},
                  {"out", opt.out},           {"trees", opt.trees},
                  {"seed", opt.seed},         {"threads", opt.threads},
                  {"force", opt.force}};
    write_file(dir / "resolved_config.json", resolved.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// recommend
// ---------------------------------------------------------------------------

struct RecommendOptions {
    std::string edges, labels, out, config;
    long long graph_id = -1;
    double fraction = 0.10;
    std::size_t k = 5;
    std::size_t epochs = 600;
    double lr = 0.01;
    double margin = 1.0;
    double holdout = 0.10;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    bool force = false;
};

void run_recommend(const RecommendOptions& opt) {
    auto ds = load_dataset_checked(opt.edges, opt.labels);
    std::size_t index = ds.size();
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (ds.ids[i] == opt.graph_id) {
            index = i;
            break;
        }
    if (index == ds.size())
        throw stargaze::Error("graph id " + std::to_string(opt.graph_id) +
                              " not present in the dataset");
    const stargaze::Graph& g = ds.graphs[index];
    prepare_outdir(opt.out, opt.force);
    fs::path dir(opt.out);

    stargaze::SageConfig cfg;
    cfg.epochs = opt.epochs;
    cfg.learning_rate = opt.lr;
    cfg.margin = opt.margin;
    cfg.holdout_fraction = opt.holdout;
    cfg.seed = opt.seed;

    auto raw_features = stargaze::assemble_features(g);
    auto result = stargaze::train_linkpred(g, raw_features, cfg);

    // Recommendations use the full graph: all observed edges feed the final
    // embeddings, and candidate lists must exclude every existing edge.
    auto normalizer = stargaze::Normalizer::fit({&raw_features});
    auto emb = stargaze::sage_forward(g, normalizer.transform(raw_features), result.model);
    auto recs = stargaze::recommend(g, emb, opt.fraction, opt.k, opt.seed);

    {
        stargaze::CsvWriter csv((dir / "recommendations.csv").string());
        csv.row({"graph_id", "source", "rank", "candidate", "dot_score", "cosine"});
        for (const auto& rec : recs)
            for (std::size_t r = 0; r < rec.candidates.size(); ++r)
                csv.row({stargaze::cell(opt.graph_id), stargaze::cell(std::size_t{rec.source}),
                         stargaze::cell(r + 1), stargaze::cell(std::size_t{rec.candidates[r].node}),
                         stargaze::cell(rec.candidates[r].dot),
                         stargaze::cell(rec.candidates[r].cosine)});
    }
    {
        json out{{"graph_id", opt.graph_id},
                 {"auc", result.holdout_auc},
                 {"held_out_edges", result.held_out_edges.size()},
                 {"evaluation_negatives", result.evaluation_negatives.size()}};
        write_file(dir / "auc.json", out.dump(2) + "\n");
    }
    {
        json held = json::array();
        for (const auto& [u, v] : result.held_out_edges) held.push_back({u, v});
        json out{{"graph_id", opt.graph_id}, {"seed", opt.seed}, {"held_out_edges", held}};
        write_file(dir / "holdout.json", out.dump(2) + "\n");
    }
    json resolved{{"command", "recommend"},
                  {"edges", opt.edges},
                  {"labels", opt.labels},
                  {"out", opt.out},
                  {"graph_id", opt.graph_id},
                  {"fraction", opt.fraction},
                  {"k", opt.k},
                  {"epochs", opt.epochs},
                  {"lr", opt.lr},
                  {"margin", opt.margin},
                  {"holdout", opt.holdout},
                  {"seed", opt.seed},
                  {"threads", opt.threads},
                  {"force", opt.force}};
    write_file(dir / "resolved_config.json", resolved.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Developer-network classification and link recommendation"};
    app.require_subcommand(1);

    StatsOptions stats_opt;
    auto* stats = app.add_subcommand("stats", "Dataset statistics and correlation analysis");
    auto* stats_edges = stats->add_option("--edges", stats_opt.edges, "Edge JSON file");
    auto* stats_labels = stats->add_option("--labels", stats_opt.labels, "Label CSV file");
    auto* stats_out = stats->add_option("--out", stats_opt.out, "Output directory");
    auto* stats_threads = stats->add_option("--threads", stats_opt.threads, "Worker threads");
    stats->add_flag("--force", stats_opt.force, "Overwrite non-empty output directory");
    stats->add_option("--config", stats_opt.config, "JSON config file (flags override)");

    TrainOptions train_opt;
    auto* train = app.add_subcommand("train", "Train a GCN classifier");
    auto* train_edges = train->add_option("--edges", train_opt.edges, "Edge JSON file");
    auto* train_labels = train->add_option("--labels", train_opt.labels, "Label CSV file");
    auto* train_out = train->add_option("--out", train_opt.out, "Output directory");
    auto* train_arch = train->add_option("--arch", train_opt.arch, "Architecture (1-4)")
                           ->check(CLI::Range(1, 4));
    auto* train_hidden = train->add_option("--hidden-dim", train_opt.hidden_dim, "Hidden width");
    auto* train_sort_k = train->add_option("--sort-k", train_opt.sort_k, "Sort-pooling k");
    auto* train_dropout = train->add_option("--dropout", train_opt.dropout, "Dropout rate");
    auto* train_lr = train->add_option("--lr", train_opt.lr, "Learning rate");
    auto* train_epochs = train->add_option("--epochs", train_opt.epochs, "Training epochs");
    auto* train_batch = train->add_option("--batch-size", train_opt.batch_size, "Batch size");
    auto* train_seed = train->add_option("--seed", train_opt.seed, "Random seed");
    auto* train_threads = train->add_option("--threads", train_opt.threads, "Worker threads");
    train->add_flag("--force", train_opt.force, "Overwrite non-empty output directory");
    train->add_option("--config", train_opt.config, "JSON config file (flags override)");

    HybridOptions hybrid_opt;
    auto* hybrid = app.add_subcommand(
        "hybrid-eval", "Evaluate extracted embeddings with a random forest");
    auto* hybrid_edges = hybrid->add_option("--edges", hybrid_opt.edges, "Edge JSON file");
    auto* hybrid_labels = hybrid->add_option("--labels", hybrid_opt.labels, "Label CSV file");
    auto* hybrid_ckpt =
        hybrid->add_option("--checkpoint", hybrid_opt.checkpoint, "Trained checkpoint");
    auto* hybrid_out = hybrid->add_option("--out", hybrid_opt.out, "Output directory");
    auto* hybrid_trees = hybrid->add_option("--trees", hybrid_opt.trees, "Number of trees")
                             ->check(CLI::PositiveNumber);
    auto* hybrid_seed = hybrid->add_option("--seed", hybrid_opt.seed, "Random seed");
    auto* hybrid_threads = hybrid->add_option("--threads", hybrid_opt.threads, "Worker threads");
    hybrid->add_flag("--force", hybrid_opt.force, "Overwrite non-empty output directory");
    hybrid->add_option("--config", hybrid_opt.config, "JSON config file (flags override)");

    RecommendOptions rec_opt;
    auto* rec = app.add_subcommand("recommend", "Per-graph connection recommendations");
    auto* rec_edges = rec->add_option("--edges", rec_opt.edges, "Edge JSON file");
    auto* rec_labels = rec->add_option("--labels", rec_opt.labels, "Label CSV file");
    auto* rec_out = rec->add_option("--out", rec_opt.out, "Output directory");
    auto* rec_graph = rec->add_option("--graph-id", rec_opt.graph_id, "Graph id to analyze");
    auto* rec_fraction =
        rec->add_option("--fraction", rec_opt.fraction, "Fraction of nodes to select")
            ->check(CLI::Range(1e-9, 1.0));
    auto* rec_k = rec->add_option("--k", rec_opt.k, "Recommendations per node")
                      ->check(CLI::PositiveNumber);
    auto* rec_epochs = rec->add_option("--epochs", rec_opt.epochs, "Training epochs");
    auto* rec_lr = rec->add_option("--lr", rec_opt.lr, "Learning rate");
    auto* rec_margin = rec->add_option("--margin", rec_opt.margin, "Margin-loss margin");
    auto* rec_holdout = rec->add_option("--holdout", rec_opt.holdout, "Held-out edge fraction");
    auto* rec_seed = rec->add_option("--seed", rec_opt.seed, "Random seed");
    auto* rec_threads = rec->add_option("--threads", rec_opt.threads, "Worker threads");
    rec->add_flag("--force", rec_opt.force, "Overwrite non-empty output directory");
    rec->add_option("--config", rec_opt.config, "JSON config file (flags override)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (stats->parsed()) {
            json cfg = load_config_file(stats_opt.config);
            apply_config(cfg, stats_edges, "edges", stats_opt.edges);
            apply_config(cfg, stats_labels, "labels", stats_opt.labels);
            apply_config(cfg, stats_out, "out", stats_opt.out);
            apply_config(cfg, stats_threads, "threads", stats_opt.threads);
            run_stats(stats_opt);
        } else if (train->parsed()) {
            json cfg = load_config_file(train_opt.config);
            apply_config(cfg, train_edges, "edges", train_opt.edges);
            apply_config(cfg, train_labels, "labels", train_opt.labels);
            apply_config(cfg, train_out, "out", train_opt.out);
            apply_config(cfg, train_arch, "arch", train_opt.arch);
            apply_config(cfg, train_hidden, "hidden_dim", train_opt.hidden_dim);
            apply_config(cfg, train_sort_k, "sort_k", train_opt.sort_k);
            apply_config(cfg, train_dropout, "dropout", train_opt.dropout);
            apply_config(cfg, train_lr, "lr", train_opt.lr);
            apply_config(cfg, train_epochs, "epochs", train_opt.epochs);
            apply_config(cfg, train_batch, "batch_size", train_opt.batch_size);
            apply_config(cfg, train_seed, "seed", train_opt.seed);
            apply_config(cfg, train_threads, "threads", train_opt.threads);
            if (cfg.contains("conv_channels1"))
                train_opt.conv_channels1 = cfg.at("conv_channels1").get<std::size_t>();
            if (cfg.contains("conv_channels2"))
                train_opt.conv_channels2 = cfg.at("conv_channels2").get<std::size_t>();
            if (cfg.contains("conv_kernel"))
                train_opt.conv_kernel = cfg.at("conv_kernel").get<std::size_t>();
            if (train_opt.arch < 1 || train_opt.arch > 4)
                throw stargaze::ConfigError("arch must lie in 1..4");
            run_train(train_opt);
        } else if (hybrid->parsed()) {
            json cfg = load_config_file(hybrid_opt.config);
            apply_config(cfg, hybrid_edges, "edges", hybrid_opt.edges);
            apply_config(cfg, hybrid_labels, "labels", hybrid_opt.labels);
            apply_config(cfg, hybrid_ckpt, "checkpoint", hybrid_opt.checkpoint);
            apply_config(cfg, hybrid_out, "out", hybrid_opt.out);
            apply_config(cfg, hybrid_trees, "trees", hybrid_opt.trees);
            apply_config(cfg, hybrid_seed, "seed", hybrid_opt.seed);
            apply_config(cfg, hybrid_threads, "threads", hybrid_opt.threads);
            if (hybrid_opt.trees < 1) throw stargaze::ConfigError("trees must be positive");
            run_hybrid_eval(hybrid_opt);
        } else if (rec->parsed()) {
            json cfg = load_config_file(rec_opt.config);
            apply_config(cfg, rec_edges, "edges", rec_opt.edges);
            apply_config(cfg, rec_labels, "labels", rec_opt.labels);
            apply_config(cfg, rec_out, "out", rec_opt.out);
            apply_config(cfg, rec_graph, "graph_id", rec_opt.graph_id);
            apply_config(cfg, rec_fraction, "fraction", rec_opt.fraction);
            apply_config(cfg, rec_k, "k", rec_opt.k);
            apply_config(cfg, rec_epochs, "epochs", rec_opt.epochs);
            apply_config(cfg, rec_lr, "lr", rec_opt.lr);
            apply_config(cfg, rec_margin, "margin", rec_opt.margin);
            apply_config(cfg, rec_holdout, "holdout", rec_opt.holdout);
            apply_config(cfg, rec_seed, "seed", rec_opt.seed);
            apply_config(cfg, rec_threads, "threads", rec_opt.threads);
            if (rec_opt.k < 1) throw stargaze::ConfigError("k must be positive");
            if (rec_opt.graph_id < 0)
                throw stargaze::ConfigError("missing required option: --graph-id");
            run_recommend(rec_opt);
        }
    } catch (const stargaze::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
