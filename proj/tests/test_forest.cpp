#include <doctest.h>

#include <cmath>

#include "stargaze/forest.hpp"
#include "stargaze/rng.hpp"

using namespace stargaze;

namespace {

/// Two linearly separable blobs in 2-D.
void separable_blobs(std::size_t per_class, DenseMatrix& x, std::vector<int>& y,
                     std::uint64_t seed) {
    Rng rng(seed);
    x = DenseMatrix(2 * per_class, 2);
    y.clear();
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        int label = i < per_class ? 0 : 1;
        double cx = label == 0 ? -2.0 : 2.0;
        x(i, 0) = cx + rng.uniform_real(-0.8, 0.8);
        x(i, 1) = rng.uniform_real(-1.0, 1.0);
        y.push_back(label);
    }
}

}  // namespace

TEST_SUITE_BEGIN("forest");

TEST_CASE("unlimited-depth trees reach training accuracy 1 on separable data") {
    DenseMatrix x;
    std::vector<int> y;
    separable_blobs(25, x, y, 1);
    ForestConfig cfg;
    cfg.n_trees = 20;
    cfg.seed = 4;
    auto forest = fit_forest(x, y, cfg);
    auto probs = forest.predict_proba(x);
    for (std::size_t i = 0; i < y.size(); ++i)
        CHECK((probs[i] >= 0.5 ? 1 : 0) == y[i]);
}

TEST_CASE("a single sample yields single-leaf trees predicting that label") {
    DenseMatrix x(1, 3);
    x(0, 0) = 1.0;
    auto forest = fit_forest(x, {1}, {.n_trees = 5, .seed = 0});
    for (const auto& tree : forest.trees()) {
        CHECK(tree.nodes().size() == 1);
        CHECK(tree.nodes()[0].leaf);
        CHECK(tree.nodes()[0].probability == 1.0);
    }
    CHECK(forest.predict_proba(x)[0] == 1.0);
}

TEST_CASE("same seed gives identical held-out predictions") {
    DenseMatrix x;
    std::vector<int> y;
    separable_blobs(20, x, y, 2);
    DenseMatrix held(7, 2);
    Rng rng(3);
    for (auto& v : held.values()) v = rng.uniform_real(-3.0, 3.0);
    ForestConfig cfg;
    cfg.n_trees = 15;
    cfg.seed = 99;
    auto a = fit_forest(x, y, cfg).predict_proba(held);
    auto b = fit_forest(x, y, cfg).predict_proba(held);
    CHECK(a == b);
}

TEST_CASE("predict_proba is the exact mean of per-tree outputs") {
    DenseMatrix x;
    std::vector<int> y;
    separable_blobs(15, x, y, 5);
    auto forest = fit_forest(x, y, {.n_trees = 9, .seed = 7});
    DenseMatrix probe(4, 2);
    Rng rng(8);
    for (auto& v : probe.values()) v = rng.uniform_real(-3.0, 3.0);
    auto probs = forest.predict_proba(probe);
    for (std::size_t r = 0; r < probe.rows(); ++r) {
        double sum = 0.0;
        for (const auto& tree : forest.trees()) sum += tree.predict(probe.row_ptr(r));
        CHECK(probs[r] == sum / 9.0);
    }
}

TEST_CASE("probabilities always lie in [0,1]") {
    DenseMatrix x;
    std::vector<int> y;
    separable_blobs(10, x, y, 6);
    // flip some labels so leaves are impure
    y[0] = 1;
    y[19] = 0;
    auto forest = fit_forest(x, y, {.n_trees = 30, .max_depth = 2, .seed = 2});
    auto probs = forest.predict_proba(x);
    for (double p : probs) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
}

TEST_CASE("strictly monotone transforms of one feature preserve training decisions") {
    DenseMatrix x;
    std::vector<int> y;
    separable_blobs(12, x, y, 9);
    ForestConfig cfg;
    cfg.n_trees = 12;
    cfg.seed = 13;
    auto baseline = fit_forest(x, y, cfg).predict_proba(x);

    DenseMatrix transformed = x;
    for (std::size_t r = 0; r < x.rows(); ++r)
        transformed(r, 0) = std::exp(0.8 * x(r, 0));  // strictly increasing
    auto retrained = fit_forest(transformed, y, cfg).predict_proba(transformed);
    for (std::size_t i = 0; i < baseline.size(); ++i)
        CHECK(baseline[i] == doctest::Approx(retrained[i]).epsilon(1e-12));
}

TEST_CASE("duplicating training points never hurts training accuracy on them") {
    DenseMatrix x;
    std::vector<int> y;
    separable_blobs(10, x, y, 11);
    ForestConfig cfg;
    cfg.n_trees = 25;
    cfg.seed = 21;
    auto forest = fit_forest(x, y, cfg);
    auto base_probs = forest.predict_proba(x);
    std::size_t base_correct = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if ((base_probs[i] >= 0.5 ? 1 : 0) == y[i]) ++base_correct;

    DenseMatrix doubled(2 * x.rows(), 2);
    std::vector<int> doubled_y;
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (int copy = 0; copy < 2; ++copy) {
            doubled(2 * r + copy, 0) = x(r, 0);
            doubled(2 * r + copy, 1) = x(r, 1);
        }
    for (std::size_t r = 0; r < x.rows(); ++r) {
        doubled_y.push_back(y[r]);
        doubled_y.push_back(y[r]);
    }
    auto forest2 = fit_forest(doubled, doubled_y, cfg);
    auto probs2 = forest2.predict_proba(x);
    std::size_t correct2 = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if ((probs2[i] >= 0.5 ? 1 : 0) == y[i]) ++correct2;
    CHECK(correct2 >= base_correct);
}

TEST_CASE("dimension mismatches and empty inputs are rejected") {
    DenseMatrix x;
    std::vector<int> y;
    separable_blobs(5, x, y, 12);
    auto forest = fit_forest(x, y, {.n_trees = 3, .seed = 1});
    DenseMatrix wrong(2, 5);
    CHECK_THROWS_AS(forest.predict_proba(wrong), Error);
    CHECK_THROWS_AS(fit_forest(DenseMatrix(), {}, {.n_trees = 3}), Error);
}

TEST_CASE("forest JSON round-trips") {
    DenseMatrix x;
    std::vector<int> y;
    separable_blobs(10, x, y, 14);
    auto forest = fit_forest(x, y, {.n_trees = 6, .seed = 3});
    auto reloaded = RandomForest::from_json(forest.to_json());
    CHECK(reloaded.predict_proba(x) == forest.predict_proba(x));
}

TEST_SUITE_END();
