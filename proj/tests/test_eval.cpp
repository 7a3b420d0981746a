#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "stargaze/dataset.hpp"
#include "stargaze/eval.hpp"

using namespace stargaze;

TEST_SUITE_BEGIN("confusion");

TEST_CASE("perfect and inverted predictions") {
    std::vector<int> y{1, 0, 1, 1, 0};
    auto cm = confusion(y, y);
    CHECK(accuracy(cm).value == 1.0);
    CHECK(cm.fp == 0);
    CHECK(cm.fn == 0);

    std::vector<int> flipped{0, 1, 0, 0, 1};
    cm = confusion(flipped, y);
    CHECK(accuracy(cm).value == 0.0);
}

TEST_CASE("tp=3 fp=1 fn=1 tn=5 gives precision .75, recall .75, accuracy .8") {
    std::vector<int> truth{1, 1, 1, 1, 0, 0, 0, 0, 0, 0};
    std::vector<int> pred{1, 1, 1, 0, 1, 0, 0, 0, 0, 0};
    auto cm = confusion(pred, truth);
    CHECK(cm.tp == 3);
    CHECK(cm.fp == 1);
    CHECK(cm.fn == 1);
    CHECK(cm.tn == 5);
    CHECK(precision(cm).value == doctest::Approx(0.75));
    CHECK(recall(cm).value == doctest::Approx(0.75));
    CHECK(accuracy(cm).value == doctest::Approx(0.8));
    CHECK(accuracy(cm).value ==
          doctest::Approx(static_cast<double>(cm.tp + cm.tn) / cm.total()));
}

TEST_CASE("undefined ratios flag instead of dividing by zero") {
    std::vector<int> truth{0, 0};
    std::vector<int> pred{0, 0};
    auto cm = confusion(pred, truth);
    CHECK_FALSE(precision(cm).defined);
    CHECK(precision(cm).value == 0.0);
    CHECK_FALSE(recall(cm).defined);
    CHECK_THROWS_AS(confusion({1}, {1, 0}), Error);
}

TEST_SUITE_END();

TEST_SUITE_BEGIN("roc");

TEST_CASE("perfectly separating scores give AUC 1") {
    auto curve = roc_auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0});
    CHECK(curve.auc == 1.0);
}

TEST_CASE("all-equal scores give AUC 0.5 under the ties rule") {
    auto curve = roc_auc({0.4, 0.4, 0.4, 0.4}, {1, 0, 1, 0});
    CHECK(curve.auc == 0.5);
}

TEST_CASE("the four-point example enumerates to 0.75") {
    auto curve = roc_auc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1});
    CHECK(curve.auc == doctest::Approx(0.75));
}

TEST_CASE("curves start at (0,0), end at (1,1), and are monotone") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> scores;
        std::vector<int> labels;
        std::size_t n = 2 + rng.uniform_index(60);
        for (std::size_t i = 0; i < n; ++i) {
            scores.push_back(rng.uniform_real());
            labels.push_back(static_cast<int>(rng.uniform_index(2)));
        }
        labels[0] = 1;
        labels[n - 1] = 0;
        auto curve = roc_auc(scores, labels);
        CHECK(curve.points.front() == std::pair<double, double>{0.0, 0.0});
        CHECK(curve.points.back() == std::pair<double, double>{1.0, 1.0});
        for (std::size_t i = 1; i < curve.points.size(); ++i) {
            CHECK(curve.points[i].first >= curve.points[i - 1].first);
            CHECK(curve.points[i].second >= curve.points[i - 1].second);
        }
    }
}

TEST_CASE("trapezoidal AUC equals the pairwise statistic exactly") {
    Rng rng(18);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 2 + rng.uniform_index(199);
        std::vector<double> scores;
        std::vector<int> labels;
        for (std::size_t i = 0; i < n; ++i) {
            // quantized scores force plenty of ties
            scores.push_back(rng.uniform_index(12) * 0.125);
            labels.push_back(static_cast<int>(rng.uniform_index(2)));
        }
        labels[0] = 1;
        labels[n - 1] = 0;
        CHECK(roc_auc(scores, labels).auc == oracles::pairwise_auc(scores, labels));
    }
}

TEST_CASE("AUC is invariant under strictly increasing transforms") {
    Rng rng(19);
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 80; ++i) {
        scores.push_back(rng.uniform_real(-2.0, 2.0));
        labels.push_back(static_cast<int>(rng.uniform_index(2)));
    }
    labels[0] = 1;
    labels[1] = 0;
    double base = roc_auc(scores, labels).auc;
    std::vector<double> shifted, expd, cubed;
    for (double s : scores) {
        shifted.push_back(3.0 * s + 11.0);
        expd.push_back(std::exp(s));
        cubed.push_back(s * s * s);
    }
    CHECK(roc_auc(shifted, labels).auc == base);
    CHECK(roc_auc(expd, labels).auc == base);
    CHECK(roc_auc(cubed, labels).auc == base);
}

TEST_CASE("single-class input is rejected") {
    CHECK_THROWS_AS(roc_auc({0.1, 0.9}, {1, 1}), Error);
    CHECK_THROWS_AS(roc_auc({0.1}, {0, 1}), Error);
}

TEST_SUITE_END();

TEST_SUITE_BEGIN("pearson");

TEST_CASE("linear relations hit the endpoints") {
    std::vector<double> x{1, 2, 3, 4};
    std::vector<double> up, down;
    for (double v : x) {
        up.push_back(2.0 * v + 1.0);
        down.push_back(-v);
    }
    CHECK(pearson(x, up) == doctest::Approx(1.0));
    CHECK(pearson(x, down) == doctest::Approx(-1.0));
}

TEST_CASE("the (1,3,2) example gives 0.5") {
    CHECK(pearson({1, 2, 3}, {1, 3, 2}) == doctest::Approx(0.5));
}

TEST_CASE("degenerate inputs are rejected") {
    CHECK_THROWS_AS(pearson({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0}), Error);
    CHECK_THROWS_AS(pearson({1.0}, {1.0}), Error);
    CHECK_THROWS_AS(pearson({1.0, 2.0}, {1.0}), Error);
}

TEST_SUITE_END();

TEST_SUITE_BEGIN("pca");

TEST_CASE("collinear data puts all variance on the first component") {
    DenseMatrix x(10, 3);
    for (std::size_t r = 0; r < 10; ++r) {
        double t = static_cast<double>(r) - 4.5;
        x(r, 0) = 2.0 * t;
        x(r, 1) = -t;
        x(r, 2) = 0.5 * t;
    }
    auto pca = pca_project(x, 2);
    CHECK(pca.explained_variance_ratio[0] == doctest::Approx(1.0));
    CHECK(pca.explained_variance_ratio[1] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("the mean row projects to the origin") {
    Rng rng(23);
    DenseMatrix x(15, 4);
    for (auto& v : x.values()) v = rng.uniform_real(-2.0, 5.0);
    auto pca = pca_project(x, 2);
    // transform the mean row manually: centered coordinates are all zero
    double coord0 = 0.0, coord1 = 0.0;
    for (std::size_t c = 0; c < 4; ++c) {
        double centered = pca.column_means[c] - pca.column_means[c];
        coord0 += centered * pca.components(0, c);
        coord1 += centered * pca.components(1, c);
    }
    CHECK(coord0 == 0.0);
    CHECK(coord1 == 0.0);
    // column means of the projection are zero as well
    double m0 = 0.0, m1 = 0.0;
    for (std::size_t r = 0; r < 15; ++r) {
        m0 += pca.projected(r, 0);
        m1 += pca.projected(r, 1);
    }
    CHECK(std::abs(m0 / 15.0) < 1e-12);
    CHECK(std::abs(m1 / 15.0) < 1e-12);
}

TEST_CASE("components match the Jacobi eigendecomposition on a conditioned fixture") {
    Rng rng(29);
    // anisotropic data: distinct eigenvalues
    DenseMatrix x(60, 4);
    for (std::size_t r = 0; r < 60; ++r) {
        x(r, 0) = 4.0 * rng.normal();
        x(r, 1) = 2.0 * rng.normal() + 0.3 * x(r, 0);
        x(r, 2) = 1.0 * rng.normal();
        x(r, 3) = 0.25 * rng.normal() + 0.1 * x(r, 1);
    }
    auto pca = pca_project(x, 3);

    // oracle: covariance eigenvectors via Jacobi rotations
    std::vector<double> means(4, 0.0);
    for (std::size_t r = 0; r < 60; ++r)
        for (std::size_t c = 0; c < 4; ++c) means[c] += x(r, c);
    for (auto& m : means) m /= 60.0;
    DenseMatrix cov(4, 4);
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b) {
            double acc = 0.0;
            for (std::size_t r = 0; r < 60; ++r)
                acc += (x(r, a) - means[a]) * (x(r, b) - means[b]);
            cov(a, b) = acc / 59.0;
        }
    auto pairs = oracles::jacobi_eigendecomposition(cov);

    for (std::size_t comp = 0; comp < 3; ++comp) {
        CHECK(pca.eigenvalues[comp] == doctest::Approx(pairs[comp].value).epsilon(1e-8));
        // principal angle between the two unit vectors: |cos| must be 1
        double dot = 0.0;
        for (std::size_t c = 0; c < 4; ++c)
            dot += pca.components(comp, c) * pairs[comp].vector[c];
        CHECK(std::abs(std::abs(dot) - 1.0) < 1e-6);
    }
}

TEST_CASE("isotropic distances are preserved up to rotation") {
    Rng rng(31);
    DenseMatrix x(40, 2);
    for (auto& v : x.values()) v = rng.normal();
    auto pca = pca_project(x, 2);
    // projection onto a complete orthonormal basis preserves pairwise distances
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = i + 1; j < 6; ++j) {
            double orig = std::hypot(x(i, 0) - x(j, 0), x(i, 1) - x(j, 1));
            double proj = std::hypot(pca.projected(i, 0) - pca.projected(j, 0),
                                     pca.projected(i, 1) - pca.projected(j, 1));
            CHECK(orig == doctest::Approx(proj).epsilon(1e-9));
        }
}

TEST_CASE("sign convention: largest-magnitude entry is positive") {
    Rng rng(37);
    DenseMatrix x(30, 3);
    for (auto& v : x.values()) v = rng.uniform_real(-1.0, 1.0);
    auto pca = pca_project(x, 2);
    for (std::size_t comp = 0; comp < 2; ++comp) {
        std::size_t pivot = 0;
        for (std::size_t c = 1; c < 3; ++c)
            if (std::abs(pca.components(comp, c)) > std::abs(pca.components(comp, pivot)))
                pivot = c;
        CHECK(pca.components(comp, pivot) > 0.0);
    }
}

TEST_CASE("dims exceeding the feature count are rejected") {
    DenseMatrix x(5, 2);
    CHECK_THROWS_AS(pca_project(x, 3), Error);
    CHECK_THROWS_AS(pca_project(DenseMatrix(1, 3), 2), Error);
}

TEST_SUITE_END();

TEST_SUITE_BEGIN("eda");

TEST_CASE("correlation matrix is symmetric with unit diagonal") {
    SyntheticParams params;
    params.graph_count = 30;
    params.min_nodes = 8;
    params.max_nodes = 40;
    params.p0 = 0.1;
    params.p1 = 0.4;
    auto ds = generate_synthetic(SyntheticKind::two_density_classes, params, 41);
    auto report = eda_report(ds);
    for (std::size_t a = 0; a < 4; ++a) {
        CHECK(report.correlations[a][a] == 1.0);
        for (std::size_t b = 0; b < 4; ++b)
            CHECK(report.correlations[a][b] == doctest::Approx(report.correlations[b][a]));
    }
    CHECK(report.per_graph.size() == ds.size());

    // hand-check one off-diagonal entry against pearson()
    std::vector<double> nodes, edges;
    for (const auto& s : report.per_graph) {
        nodes.push_back(static_cast<double>(s.node_count));
        edges.push_back(static_cast<double>(s.edge_count));
    }
    CHECK(report.correlations[0][1] == doctest::Approx(pearson(nodes, edges)));
}

TEST_CASE("per-class summaries average the right graphs") {
    GraphDataset ds;
    ds.graphs = {build_graph(3, {{0, 1}, {1, 2}, {0, 2}}), build_graph(3, {{0, 1}, {1, 2}}),
                 build_graph(2, {{0, 1}})};
    ds.labels = {1, 0, 0};
    ds.ids = {0, 1, 2};
    auto report = eda_report(ds);
    CHECK(report.class_summary[1].count == 1);
    CHECK(report.class_summary[1].mean_nodes == doctest::Approx(3.0));
    CHECK(report.class_summary[1].mean_density == doctest::Approx(1.0));
    CHECK(report.class_summary[0].count == 2);
    CHECK(report.class_summary[0].mean_edges == doctest::Approx(1.5));
}

TEST_SUITE_END();
