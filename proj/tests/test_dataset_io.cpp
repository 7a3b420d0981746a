#include <doctest.h>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "stargaze/dataset.hpp"

using namespace stargaze;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("stargaze_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name, const std::string& content) const {
        fs::path p = path / name;
        std::ofstream out(p, std::ios::binary);
        out << content;
        return p.string();
    }
};

}  // namespace

TEST_SUITE_BEGIN("dataset_io");

TEST_CASE("load_dataset joins edges and labels by id") {
    TempDir dir;
    auto edges = dir.file("edges.json", R"({"10": [[0,1],[1,2]], "3": [[0,1],[0,2],[1,2]]})");
    auto labels = dir.file("labels.csv", "id,target\n10,1\n3,0\n");
    auto ds = load_dataset(edges, labels);
    REQUIRE(ds.size() == 2);
    // ids come back ascending
    CHECK(ds.ids == std::vector<long long>{3, 10});
    CHECK(ds.labels == std::vector<int>{0, 1});
    CHECK(ds.graphs[0].edge_count() == 3);
    CHECK(ds.graphs[1].edge_count() == 2);
}

TEST_CASE("node count is max endpoint + 1 and keeps isolated ids") {
    TempDir dir;
    auto edges = dir.file("edges.json", R"({"0": [[0,1],[4,5]]})");
    auto labels = dir.file("labels.csv", "id,target\n0,0\n");
    auto ds = load_dataset(edges, labels);
    REQUIRE(ds.size() == 1);
    CHECK(ds.graphs[0].node_count() == 6);
    CHECK(ds.graphs[0].degree(2) == 0);
    CHECK(ds.graphs[0].degree(3) == 0);
}

TEST_CASE("unmatched id in either file names the id") {
    TempDir dir;
    auto edges = dir.file("edges.json", R"({"1": [[0,1]], "2": [[0,1]]})");
    auto labels = dir.file("labels.csv", "id,target\n1,0\n");
    CHECK_THROWS_WITH_AS(load_dataset(edges, labels), doctest::Contains("id 2"), Error);

    auto labels2 = dir.file("labels2.csv", "id,target\n1,0\n2,1\n7,0\n");
    CHECK_THROWS_WITH_AS(load_dataset(edges, labels2), doctest::Contains("id 7"), Error);
}

TEST_CASE("malformed rows are rejected") {
    TempDir dir;
    auto edges = dir.file("edges.json", R"({"1": [[0,1]]})");
    auto bad_header = dir.file("bad_header.csv", "graph,target\n1,0\n");
    CHECK_THROWS_AS(load_dataset(edges, bad_header), Error);
    auto bad_label = dir.file("bad_label.csv", "id,target\n1,7\n");
    CHECK_THROWS_AS(load_dataset(edges, bad_label), Error);
    auto bad_edges = dir.file("bad_edges.json", R"({"1": [[0,1,2]]})");
    auto labels = dir.file("labels.csv", "id,target\n1,0\n");
    CHECK_THROWS_AS(load_dataset(bad_edges, labels), Error);
}

TEST_CASE("empty edge list is rejected naming the id") {
    TempDir dir;
    auto edges = dir.file("edges.json", R"({"5": []})");
    auto labels = dir.file("labels.csv", "id,target\n5,0\n");
    CHECK_THROWS_WITH_AS(load_dataset(edges, labels), doctest::Contains("id 5"), Error);
}

TEST_CASE("missing files are reported with the path") {
    TempDir dir;
    auto labels = dir.file("labels.csv", "id,target\n");
    CHECK_THROWS_WITH_AS(load_dataset((dir.path / "nope.json").string(), labels),
                         doctest::Contains("nope.json"), Error);
}

TEST_CASE("jsonl fixtures round-trip") {
    SyntheticParams params;
    params.graph_count = 4;
    params.min_nodes = 5;
    params.max_nodes = 12;
    params.p0 = 0.2;
    params.p1 = 0.6;
    auto ds = generate_synthetic(SyntheticKind::two_density_classes, params, 8);
    TempDir dir;
    auto path = (dir.path / "fixture.jsonl").string();
    save_jsonl(ds, path);
    auto loaded = load_jsonl(path);
    REQUIRE(loaded.size() == ds.size());
    CHECK(loaded.ids == ds.ids);
    CHECK(loaded.labels == ds.labels);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(loaded.graphs[i].node_count() == ds.graphs[i].node_count());
        CHECK(loaded.graphs[i].edges() == ds.graphs[i].edges());
    }
}

TEST_SUITE_END();
