#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "stargaze/error.hpp"
#include "stargaze/matrix.hpp"
#include "stargaze/rng.hpp"

namespace stargaze {

struct ForestConfig {
    std::size_t n_trees = 100;
    std::size_t max_depth = 0;          // 0 = unlimited
    std::size_t min_samples_leaf = 1;
    std::size_t features_per_split = 0;  // 0 = ceil(sqrt(feature count))
    std::uint64_t seed = 0;
};

/// Binary decision tree with Gini-impurity splits. Internal nodes route
/// x[feature] <= threshold to the left child; leaves store the class-1
/// probability of their training samples.
class DecisionTree {
public:
    struct Node {
        bool leaf = true;
        std::size_t feature = 0;
        double threshold = 0.0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        double probability = 0.0;
    };

    double predict(const double* row) const {
        std::size_t i = 0;
        while (!nodes_[i].leaf)
            i = row[nodes_[i].feature] <= nodes_[i].threshold
                    ? static_cast<std::size_t>(nodes_[i].left)
                    : static_cast<std::size_t>(nodes_[i].right);
        return nodes_[i].probability;
    }

    const std::vector<Node>& nodes() const { return nodes_; }
    std::vector<Node>& nodes() { return nodes_; }

private:
    std::vector<Node> nodes_;
};

namespace detail {

struct TreeBuilder {
    const DenseMatrix& x;
    const std::vector<int>& y;
    const ForestConfig& cfg;
    std::size_t features_per_split;
    Rng& rng;
    DecisionTree tree;

    struct Split {
        bool found = false;
        std::size_t feature = 0;
        double threshold = 0.0;
        double impurity = 0.0;
    };

    static double gini(std::size_t pos, std::size_t total) {
        if (total == 0) return 0.0;
        double p = static_cast<double>(pos) / static_cast<double>(total);
        return 2.0 * p * (1.0 - p);
    }

    /// Weighted Gini of the best midpoint threshold over the candidate
    /// features. Ties break toward the lowest feature index, then the lowest
    /// threshold, to keep refits deterministic.
    Split best_split(const std::vector<std::size_t>& samples,
                     const std::vector<std::size_t>& candidates) const {
        Split best;
        const std::size_t total = samples.size();
        std::size_t total_pos = 0;
        for (std::size_t s : samples) total_pos += static_cast<std::size_t>(y[s]);
        std::vector<std::pair<double, int>> sorted;
        sorted.reserve(total);
        for (std::size_t f : candidates) {
            sorted.clear();
            for (std::size_t s : samples) sorted.emplace_back(x(s, f), y[s]);
            std::sort(sorted.begin(), sorted.end());
            std::size_t left_n = 0, left_pos = 0;
            for (std::size_t i = 0; i + 1 < total; ++i) {
                ++left_n;
                left_pos += static_cast<std::size_t>(sorted[i].second);
                if (sorted[i].first == sorted[i + 1].first) continue;
                std::size_t right_n = total - left_n;
                if (left_n < cfg.min_samples_leaf || right_n < cfg.min_samples_leaf) continue;
                double threshold = sorted[i].first + (sorted[i + 1].first - sorted[i].first) / 2.0;
                double impurity =
                    (static_cast<double>(left_n) * gini(left_pos, left_n) +
                     static_cast<double>(right_n) * gini(total_pos - left_pos, right_n)) /
                    static_cast<double>(total);
                bool better = !best.found || impurity < best.impurity ||
                              (impurity == best.impurity &&
                               (f < best.feature ||
                                (f == best.feature && threshold < best.threshold)));
                if (better) best = {true, f, threshold, impurity};
            }
        }
        return best;
    }

    std::vector<std::size_t> sample_candidate_features() {
        std::vector<std::size_t> all(x.cols());
        std::iota(all.begin(), all.end(), std::size_t{0});
        for (std::size_t i = 0; i < features_per_split; ++i) {
            std::size_t j = i + rng.uniform_index(all.size() - i);
            std::swap(all[i], all[j]);
        }
        all.resize(features_per_split);
        std::sort(all.begin(), all.end());
        return all;
    }

    std::int32_t build(std::vector<std::size_t> samples, std::size_t depth) {
        std::size_t pos = 0;
        for (std::size_t s : samples) pos += static_cast<std::size_t>(y[s]);
        const std::size_t id = tree.nodes().size();
        tree.nodes().emplace_back();
        tree.nodes()[id].probability =
            static_cast<double>(pos) / static_cast<double>(samples.size());
        const bool pure = pos == 0 || pos == samples.size();
        const bool depth_capped = cfg.max_depth > 0 && depth >= cfg.max_depth;
        if (pure || depth_capped || samples.size() < 2 * cfg.min_samples_leaf)
            return static_cast<std::int32_t>(id);

        Split split = best_split(samples, sample_candidate_features());
        if (!split.found) return static_cast<std::int32_t>(id);

        std::vector<std::size_t> left, right;
        for (std::size_t s : samples)
            (x(s, split.feature) <= split.threshold ? left : right).push_back(s);
        if (left.empty() || right.empty()) return static_cast<std::int32_t>(id);
        samples.clear();
        samples.shrink_to_fit();
        std::int32_t left_id = build(std::move(left), depth + 1);
        std::int32_t right_id = build(std::move(right), depth + 1);
        tree.nodes()[id].leaf = false;
        tree.nodes()[id].feature = split.feature;
        tree.nodes()[id].threshold = split.threshold;
        tree.nodes()[id].left = left_id;
        tree.nodes()[id].right = right_id;
        return static_cast<std::int32_t>(id);
    }
};

}  // namespace detail

/// Bagged Gini trees over a fixed-width feature matrix. Trees are
/// independent; tree t draws its bootstrap sample and feature subsets from
/// the substream (seed, t), so refitting with the same seed is identical.
class RandomForest {
public:
    static RandomForest fit(const DenseMatrix& x, const std::vector<int>& y,
                            const ForestConfig& cfg) {
        if (x.rows() == 0 || x.cols() == 0) throw Error("fit_forest: empty input");
        if (x.rows() != y.size()) throw Error("fit_forest: sample/label count mismatch");
        if (cfg.n_trees < 1) throw Error("fit_forest: n_trees must be at least 1");
        if (cfg.min_samples_leaf < 1) throw Error("fit_forest: min_samples_leaf must be >= 1");
        for (int label : y)
            if (label != 0 && label != 1) throw Error("fit_forest: labels must be 0 or 1");

        RandomForest forest;
        forest.feature_count_ = x.cols();
        std::size_t fps = cfg.features_per_split;
        if (fps == 0)
            fps = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(x.cols()))));
        fps = std::min(fps, x.cols());

        forest.trees_.resize(cfg.n_trees);
        for (std::size_t t = 0; t < cfg.n_trees; ++t) {
            Rng rng = Rng::derive(cfg.seed, t);
            std::vector<std::size_t> bootstrap(x.rows());
            for (auto& s : bootstrap) s = rng.uniform_index(x.rows());
            std::sort(bootstrap.begin(), bootstrap.end());
            detail::TreeBuilder builder{x, y, cfg, fps, rng, {}};
            builder.build(std::move(bootstrap), 0);
            forest.trees_[t] = std::move(builder.tree);
        }
        return forest;
    }

    /// Mean of the per-tree leaf probabilities for each row.
    std::vector<double> predict_proba(const DenseMatrix& x) const {
        if (x.cols() != feature_count_)
            throw Error("predict_proba: expected " + std::to_string(feature_count_) +
                        " features, got " + std::to_string(x.cols()));
        std::vector<double> out(x.rows(), 0.0);
        for (std::size_t r = 0; r < x.rows(); ++r) {
            double sum = 0.0;
            for (const auto& tree : trees_) sum += tree.predict(x.row_ptr(r));
            out[r] = sum / static_cast<double>(trees_.size());
        }
        return out;
    }

    const std::vector<DecisionTree>& trees() const { return trees_; }
    std::size_t feature_count() const { return feature_count_; }

    nlohmann::json to_json() const {
        nlohmann::json root;
        root["format_version"] = 1;
        root["feature_count"] = feature_count_;
        auto trees = nlohmann::json::array();
        for (const auto& tree : trees_) {
            auto nodes = nlohmann::json::array();
            for (const auto& n : tree.nodes())
                nodes.push_back({{"leaf", n.leaf},
                                 {"feature", n.feature},
                                 {"threshold", n.threshold},
                                 {"left", n.left},
                                 {"right", n.right},
                                 {"probability", n.probability}});
            trees.push_back({{"nodes", std::move(nodes)}});
        }
        root["trees"] = std::move(trees);
        return root;
    }

    static RandomForest from_json(const nlohmann::json& root) {
        if (root.value("format_version", 0) != 1)
            throw Error("unsupported forest format_version");
        RandomForest forest;
        forest.feature_count_ = root.at("feature_count").get<std::size_t>();
        for (const auto& tree_json : root.at("trees")) {
            DecisionTree tree;
            for (const auto& n : tree_json.at("nodes")) {
                DecisionTree::Node node;
                node.leaf = n.at("leaf").get<bool>();
                node.feature = n.at("feature").get<std::size_t>();
                node.threshold = n.at("threshold").get<double>();
                node.left = n.at("left").get<std::int32_t>();
                node.right = n.at("right").get<std::int32_t>();
                node.probability = n.at("probability").get<double>();
                tree.nodes().push_back(node);
            }
            if (tree.nodes().empty()) throw Error("forest JSON contains an empty tree");
            forest.trees_.push_back(std::move(tree));
        }
        if (forest.trees_.empty()) throw Error("forest JSON contains no trees");
        return forest;
    }

private:
    std::vector<DecisionTree> trees_;
    std::size_t feature_count_ = 0;
};

inline RandomForest fit_forest(const DenseMatrix& x, const std::vector<int>& y,
                               const ForestConfig& cfg) {
    return RandomForest::fit(x, y, cfg);
}

}  // namespace stargaze
