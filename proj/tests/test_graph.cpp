#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "anygraph/graph.hpp"
#include "anygraph/matrix_io.hpp"
#include "testkit.hpp"

using namespace anygraph;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("anygraph-test-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int counter;
};
int TempDir::counter = 0;

GraphDataset tiny_graph() {
    GraphDataset g;
    g.name = "tiny";
    g.num_nodes = 3;
    g.edges = {{0, 1}, {1, 2}};
    return g;
}

DenseMatrix to_dense(const CsrMatrix& a) {
    DenseMatrix d(a.rows, a.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p)
            d(i, a.col_idx[p]) += a.values[p];
    return d;
}

}  // namespace

TEST_CASE("canonicalize_edges dedups and symmetrizes") {
    auto out = canonicalize_edges({{0, 1}, {1, 0}, {1, 2}}, 3);
    REQUIRE(out.size() == 2);
    CHECK(out[0] == Edge{0, 1});
    CHECK(out[1] == Edge{1, 2});
    CHECK_THROWS_AS((void)canonicalize_edges({{0, 5}}, 3), ValidationError);
    // self-loops are dropped, not kept
    CHECK(canonicalize_edges({{2, 2}}, 3).empty());
}

TEST_CASE("manifest round-trip through save and load") {
    TempDir tmp;
    GraphDataset g = tiny_graph();
    g.features = DenseMatrix(3, 4, 0.0);
    g.features(0, 0) = 1.5;
    g.features(2, 3) = -2.25;
    g.labels = {0, 1, -1};
    g.label_split = {LabelSplit::Train, LabelSplit::Test, LabelSplit::None};
    const auto manifest = save_dataset(g, tmp.path.string());
    auto h = load_dataset(manifest);
    CHECK(h.name == "tiny");
    CHECK(h.num_nodes == 3);
    CHECK(h.edges == g.edges);
    CHECK(h.features.rows == 3);
    CHECK(h.features.cols == 4);
    CHECK(h.features(0, 0) == 1.5);   // exactly representable in f32
    CHECK(h.features(2, 3) == -2.25);
    CHECK(h.labels == g.labels);
    CHECK(h.label_split == g.label_split);
}

TEST_CASE("load_dataset rejects malformed inputs") {
    TempDir tmp;
    auto write = [&](const char* name, const std::string& body) {
        std::ofstream out(tmp.path / name);
        out << body;
        return (tmp.path / name).string();
    };

    SUBCASE("edge references a node out of range") {
        write("edges.csv", "0,5\n");
        const auto mpath = write(
            "m.json",
            R"({"name":"x","num_nodes":3,"edges":"edges.csv","features":null,"labels":null,"format_version":1})");
        CHECK_THROWS_AS((void)load_dataset(mpath), ValidationError);
    }
    SUBCASE("bad edge line names the location") {
        write("edges.csv", "0,1\nnonsense\n");
        const auto mpath = write(
            "m.json",
            R"({"name":"x","num_nodes":3,"edges":"edges.csv","features":null,"labels":null,"format_version":1})");
        try {
            (void)load_dataset(mpath);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find(":2") != std::string::npos);
        }
    }
    SUBCASE("feature row mismatch") {
        write("edges.csv", "0,1\n");
        DenseMatrix f(4, 2, 0.0);  // graph says 3 nodes
        write_matrix_f32((tmp.path / "feat.bin").string(), f);
        const auto mpath = write(
            "m.json",
            R"({"name":"x","num_nodes":3,"edges":"edges.csv","features":"feat.bin","labels":null,"format_version":1})");
        CHECK_THROWS_AS((void)load_dataset(mpath), ValidationError);
    }
    SUBCASE("unknown manifest key") {
        write("edges.csv", "0,1\n");
        const auto mpath = write(
            "m.json",
            R"({"name":"x","num_nodes":3,"edges":"edges.csv","features":null,"labels":null,"format_version":1,"extra":true})");
        CHECK_THROWS_AS((void)load_dataset(mpath), ParseError);
    }
    SUBCASE("wrong format_version") {
        write("edges.csv", "0,1\n");
        const auto mpath = write(
            "m.json",
            R"({"name":"x","num_nodes":3,"edges":"edges.csv","features":null,"labels":null,"format_version":2})");
        CHECK_THROWS_AS((void)load_dataset(mpath), ParseError);
    }
    SUBCASE("truncated feature file") {
        write("edges.csv", "0,1\n");
        DenseMatrix f(3, 2, 1.0);
        write_matrix_f32((tmp.path / "feat.bin").string(), f);
        fs::resize_file(tmp.path / "feat.bin", 16 + 3);  // cut into row 0
        const auto mpath = write(
            "m.json",
            R"({"name":"x","num_nodes":3,"edges":"edges.csv","features":"feat.bin","labels":null,"format_version":1})");
        CHECK_THROWS_AS((void)load_dataset(mpath), ParseError);
    }
}

TEST_CASE("normalize_adjacency hand-evaluated cases") {
    SUBCASE("one edge with self-loops") {
        GraphDataset g;
        g.name = "pair";
        g.num_nodes = 2;
        g.edges = {{0, 1}};
        auto a = normalize_adjacency(g, true);
        auto d = to_dense(a.mat);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) CHECK(d(i, j) == 0.5);
    }
    SUBCASE("single node with self-loops") {
        GraphDataset g;
        g.name = "dot";
        g.num_nodes = 1;
        auto a = normalize_adjacency(g, true);
        auto d = to_dense(a.mat);
        CHECK(d(0, 0) == 1.0);
    }
    SUBCASE("one edge without self-loops") {
        GraphDataset g;
        g.name = "pair";
        g.num_nodes = 2;
        g.edges = {{0, 1}};
        auto a = normalize_adjacency(g, false);
        auto d = to_dense(a.mat);
        CHECK(d(0, 0) == 0.0);
        CHECK(d(0, 1) == 1.0);
        CHECK(d(1, 0) == 1.0);
        CHECK(d(1, 1) == 0.0);
    }
    SUBCASE("isolated node row is zero without self-loops") {
        auto g = tiny_graph();  // node ids 0,1,2 all covered; add isolated 3
        g.num_nodes = 4;
        auto a = normalize_adjacency(g, false);
        auto d = to_dense(a.mat);
        for (std::size_t j = 0; j < 4; ++j) CHECK(d(3, j) == 0.0);
    }
}

TEST_CASE("normalized adjacency is exactly symmetric") {
    auto g = gen_synthetic("sbm", 60, GenParams{}, 5);
    for (bool loops : {true, false}) {
        auto a = normalize_adjacency(g, loops);
        auto t = csr_transpose(a.mat);
        CHECK(t.row_ptr == a.mat.row_ptr);
        CHECK(t.col_idx == a.mat.col_idx);
        CHECK(t.values == a.mat.values);  // value-level, not approximate
    }
}

TEST_CASE("regular graphs have unit row sums with self-loops") {
    // a cycle is 2-regular
    GraphDataset g;
    g.name = "cycle";
    g.num_nodes = 8;
    for (NodeId i = 0; i < 8; ++i)
        g.edges.emplace_back(std::min<NodeId>(i, (i + 1) % 8),
                             std::max<NodeId>(i, (i + 1) % 8));
    std::sort(g.edges.begin(), g.edges.end());
    auto a = normalize_adjacency(g, true);
    auto d = to_dense(a.mat);
    for (std::size_t i = 0; i < 8; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < 8; ++j) sum += d(i, j);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("split_edges obeys the floor rule and is deterministic") {
    auto g = gen_synthetic("sbm", 40, GenParams{}, 3);
    // make a graph with exactly 10 edges for the cardinality check
    GraphDataset h;
    h.name = "ten";
    h.num_nodes = 11;
    for (NodeId i = 0; i < 10; ++i) h.edges.emplace_back(i, i + 1);

    auto s1 = split_edges(h, 0.2, 7);
    std::size_t n_test = 0;
    for (auto e : s1.edge_split)
        if (e == EdgeSplit::Test) n_test++;
    CHECK(n_test == 2);
    CHECK(s1.train_edges().size() == 8);

    auto s2 = split_edges(h, 0.2, 7);
    CHECK(s1.edge_split == s2.edge_split);
    auto s3 = split_edges(h, 0.2, 8);
    CHECK(s1.edge_split != s3.edge_split);  // overwhelmingly likely

    // union/disjointness
    CHECK(s1.train_edges().size() + s1.test_edges().size() == h.edges.size());
}

TEST_CASE("split_edges error cases") {
    GraphDataset g;
    g.name = "one";
    g.num_nodes = 2;
    g.edges = {{0, 1}};
    CHECK_THROWS_AS((void)split_edges(g, 0.5, 1), ValidationError);  // floor=0
    GraphDataset empty;
    empty.name = "none";
    empty.num_nodes = 2;
    CHECK_THROWS_AS((void)split_edges(empty, 0.5, 1), ValidationError);
    CHECK_THROWS_AS((void)split_edges(g, 1.5, 1), ValidationError);
}

TEST_CASE("split_edges keeps every node covered when achievable") {
    // star graph: node 0 joined to 1..9 plus a 1-2 edge; ratio small enough
    // that the guard can always dodge leaf edges' lasts
    auto g = gen_synthetic("sbm", 50, GenParams{}, 11);
    auto s = split_edges(g, 0.2, 13);
    CHECK(s.train_isolated.empty());
    std::vector<int> deg(g.num_nodes, 0), train_deg(g.num_nodes, 0);
    for (const auto& [a, b] : g.edges) {
        deg[a]++;
        deg[b]++;
    }
    for (const auto& [a, b] : s.train_edges()) {
        train_deg[a]++;
        train_deg[b]++;
    }
    for (std::size_t i = 0; i < g.num_nodes; ++i)
        if (deg[i] > 0) CHECK(train_deg[i] >= 1);
}

TEST_CASE("gen_synthetic family contracts") {
    SUBCASE("grid 5x5 has 40 edges") {
        auto g = gen_synthetic("grid", 25, GenParams{}, 1);
        CHECK(g.num_nodes == 25);
        CHECK(g.edges.size() == 40);
    }
    SUBCASE("ba edge count matches the attachment rule") {
        GenParams p;
        p.m = 2;
        auto g = gen_synthetic("ba", 50, p, 1);
        // clique seed on m nodes + m attachments per remaining node
        const std::size_t want = 1 + (50 - 2) * 2;
        CHECK(g.edges.size() == want);
        CHECK(g.edges.size() == 97);
        // every non-seed node has degree >= m
        std::vector<int> deg(50, 0);
        for (const auto& [a, b] : g.edges) {
            deg[a]++;
            deg[b]++;
        }
        for (std::size_t i = 2; i < 50; ++i) CHECK(deg[i] >= 2);
    }
    SUBCASE("sbm attaches block labels and obeys determinism") {
        GenParams p;
        p.blocks = 4;
        p.feature_dim = 6;
        auto g = gen_synthetic("sbm", 100, p, 1);
        REQUIRE(g.has_labels());
        std::set<std::int32_t> classes(g.labels.begin(), g.labels.end());
        CHECK(classes == std::set<std::int32_t>{0, 1, 2, 3});
        CHECK(g.features.rows == 100);
        CHECK(g.features.cols == 6);
        auto h = gen_synthetic("sbm", 100, p, 1);
        CHECK(g.edges == h.edges);
        CHECK(g.features.data == h.features.data);
        auto k = gen_synthetic("sbm", 100, p, 2);
        CHECK(g.edges != k.edges);
    }
    SUBCASE("sbm favors intra-block edges") {
        GenParams p;
        p.blocks = 4;
        p.p_in = 0.3;
        p.p_out = 0.01;
        auto g = gen_synthetic("sbm", 120, p, 9);
        std::size_t in = 0, out = 0;
        for (const auto& [a, b] : g.edges)
            (g.labels[a] == g.labels[b] ? in : out)++;
        CHECK(in > 3 * out);
    }
    SUBCASE("bipartite has no intra-side edges") {
        GenParams p;
        p.p_edge = 0.2;
        auto g = gen_synthetic("bipartite", 30, p, 4);
        for (const auto& [a, b] : g.edges) {
            CHECK(a < 15);
            CHECK(b >= 15);
        }
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS((void)gen_synthetic("mystery", 10, GenParams{}, 1),
                        ValidationError);
        CHECK_THROWS_AS((void)gen_synthetic("sbm", 1, GenParams{}, 1),
                        ValidationError);
    }
}

TEST_CASE("attach_class_nodes construction") {
    GraphDataset g;
    g.name = "labeled";
    g.num_nodes = 4;
    g.edges = {{0, 1}, {2, 3}};
    g.labels = {0, 1, -1, -1};
    g.label_split = {LabelSplit::Train, LabelSplit::Train, LabelSplit::None,
                     LabelSplit::None};

    auto h = attach_class_nodes(g);
    CHECK(h.num_nodes == 6);
    CHECK(h.class_node_base == 4);
    CHECK(h.num_class_nodes == 2);
    REQUIRE(h.edges.size() == 4);
    CHECK(std::count(h.edges.begin(), h.edges.end(), Edge{0, 4}) == 1);
    CHECK(std::count(h.edges.begin(), h.edges.end(), Edge{1, 5}) == 1);

    SUBCASE("test-labeled nodes gain no class edges") {
        g.label_split[1] = LabelSplit::Test;
        auto k = attach_class_nodes(g);
        CHECK(k.edges.size() == 3);
        CHECK(std::count(k.edges.begin(), k.edges.end(), Edge{1, 5}) == 0);
    }
    SUBCASE("empty train mask leaves class nodes isolated") {
        g.label_split = {LabelSplit::Test, LabelSplit::Test, LabelSplit::None,
                         LabelSplit::None};
        auto k = attach_class_nodes(g);
        CHECK(k.num_nodes == 6);
        CHECK(k.edges.size() == 2);  // only the original edges
    }
    SUBCASE("class-node feature rows are zero") {
        g.features = DenseMatrix(4, 3, 1.0);
        auto k = attach_class_nodes(g);
        REQUIRE(k.features.rows == 6);
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(k.features(4, j) == 0.0);
            CHECK(k.features(5, j) == 0.0);
        }
    }
    SUBCASE("missing labels is an error") {
        GraphDataset plain = tiny_graph();
        CHECK_THROWS_AS((void)attach_class_nodes(plain), ValidationError);
    }
}

TEST_CASE("single class covers every train-labeled node") {
    GraphDataset g;
    g.name = "oneclass";
    g.num_nodes = 5;
    g.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}};
    g.labels.assign(5, 0);
    g.label_split.assign(5, LabelSplit::Train);
    auto h = attach_class_nodes(g);
    CHECK(h.num_nodes == 6);
    std::size_t class_deg = 0;
    for (const auto& [a, b] : h.edges)
        if (b == 5) class_deg++;
    CHECK(class_deg == 5);
}
