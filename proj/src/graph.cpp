#include "anygraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <json.hpp>
#include <numeric>
#include <set>

#include "anygraph/matrix_io.hpp"
#include "anygraph/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace anygraph {

std::size_t GraphDataset::num_classes() const {
    std::int32_t top = -1;
    for (std::int32_t c : labels) top = std::max(top, c);
    return static_cast<std::size_t>(top + 1);
}

std::vector<Edge> GraphDataset::train_edges() const {
    if (edge_split.empty()) return edges;
    std::vector<Edge> out;
    for (std::size_t i = 0; i < edges.size(); ++i)
        if (edge_split[i] == EdgeSplit::Train) out.push_back(edges[i]);
    return out;
}

std::vector<Edge> GraphDataset::test_edges() const {
    std::vector<Edge> out;
    for (std::size_t i = 0; i < edge_split.size(); ++i)
        if (edge_split[i] == EdgeSplit::Test) out.push_back(edges[i]);
    return out;
}

std::vector<Edge> canonicalize_edges(const std::vector<Edge>& raw,
                                     std::size_t num_nodes) {
    std::vector<Edge> out;
    out.reserve(raw.size());
    for (const auto& [s, d] : raw) {
        if (s >= num_nodes || d >= num_nodes)
            throw ValidationError("edge (" + std::to_string(s) + "," +
                                  std::to_string(d) + ") out of range for " +
                                  std::to_string(num_nodes) + " nodes");
        if (s == d) continue;  // simple graph: self-loops dropped
        out.emplace_back(std::min(s, d), std::max(s, d));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void validate_dataset(const GraphDataset& g) {
    if (g.num_nodes == 0)
        throw ValidationError(g.name + ": dataset must have at least one node");
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        const auto& [s, d] = g.edges[i];
        if (s >= g.num_nodes || d >= g.num_nodes)
            throw ValidationError(g.name + ": edge endpoint out of range");
        if (s == d) throw ValidationError(g.name + ": self-loop present");
        if (s > d) throw ValidationError(g.name + ": edge not canonical");
        if (i > 0 && !(g.edges[i - 1] < g.edges[i]))
            throw ValidationError(g.name + ": edges not sorted/unique");
    }
    if (g.has_features() && g.features.rows != g.num_nodes)
        throw ValidationError(
            g.name + ": feature rows (" + std::to_string(g.features.rows) +
            ") do not match node count (" + std::to_string(g.num_nodes) + ")");
    if (g.has_labels()) {
        if (g.labels.size() != g.num_nodes ||
            g.label_split.size() != g.num_nodes)
            throw ValidationError(g.name + ": label arrays must cover all nodes");
        for (std::size_t i = 0; i < g.num_nodes; ++i) {
            const bool labeled = g.labels[i] >= 0;
            const bool masked = g.label_split[i] != LabelSplit::None;
            if (labeled != masked)
                throw ValidationError(g.name +
                                      ": label and split mask disagree at node " +
                                      std::to_string(i));
        }
    }
    if (!g.edge_split.empty() && g.edge_split.size() != g.edges.size())
        throw ValidationError(g.name + ": edge split does not cover edge list");
}

GraphDataset load_dataset(const std::string& manifest_path) {
    json manifest;
    try {
        manifest = json::parse(read_text_file(manifest_path));
    } catch (const json::parse_error& e) {
        throw ParseError(manifest_path + ": " + e.what());
    }
    if (!manifest.is_object())
        throw ParseError(manifest_path + ": manifest must be a JSON object");

    static const std::set<std::string> known = {
        "name", "num_nodes", "edges", "features", "labels", "format_version"};
    for (const auto& item : manifest.items())
        if (!known.count(item.key()))
            throw ParseError(manifest_path + ": unknown manifest key '" +
                             item.key() + "'");
    for (const auto& key : known)
        if (!manifest.contains(key))
            throw ParseError(manifest_path + ": missing manifest key '" + key +
                             "'");
    if (!manifest["format_version"].is_number_integer() ||
        manifest["format_version"].get<int>() != 1)
        throw ParseError(manifest_path + ": unsupported format_version");
    if (!manifest["name"].is_string() ||
        !manifest["num_nodes"].is_number_unsigned() ||
        !manifest["edges"].is_string())
        throw ParseError(manifest_path + ": bad field types in manifest");

    const fs::path base = fs::path(manifest_path).parent_path();
    auto resolve = [&](const std::string& rel) {
        fs::path p(rel);
        return (p.is_absolute() ? p : base / p).string();
    };

    GraphDataset g;
    g.name = manifest["name"].get<std::string>();
    g.num_nodes = manifest["num_nodes"].get<std::size_t>();
    if (g.num_nodes == 0)
        throw ValidationError(manifest_path + ": num_nodes must be >= 1");

    const auto raw = read_edges_csv(resolve(manifest["edges"].get<std::string>()));
    g.edges = canonicalize_edges(raw, g.num_nodes);

    if (!manifest["features"].is_null()) {
        if (!manifest["features"].is_string())
            throw ParseError(manifest_path + ": features must be a path or null");
        g.features = read_matrix_f32(resolve(manifest["features"].get<std::string>()));
        if (g.features.rows != g.num_nodes)
            throw ValidationError(g.name + ": feature rows (" +
                                  std::to_string(g.features.rows) +
                                  ") do not match node count (" +
                                  std::to_string(g.num_nodes) + ")");
    }

    if (!manifest["labels"].is_null()) {
        if (!manifest["labels"].is_string())
            throw ParseError(manifest_path + ": labels must be a path or null");
        const auto rows = read_labels_csv(resolve(manifest["labels"].get<std::string>()));
        g.labels.assign(g.num_nodes, -1);
        g.label_split.assign(g.num_nodes, LabelSplit::None);
        for (const auto& r : rows) {
            if (r.node >= g.num_nodes)
                throw ValidationError(g.name + ": label node id " +
                                      std::to_string(r.node) + " out of range");
            if (r.cls < 0)
                throw ValidationError(g.name + ": negative class id");
            if (g.labels[r.node] >= 0)
                throw ValidationError(g.name + ": duplicate label for node " +
                                      std::to_string(r.node));
            g.labels[r.node] = r.cls;
            g.label_split[r.node] =
                r.train ? LabelSplit::Train : LabelSplit::Test;
        }
    }

    validate_dataset(g);
    return g;
}

std::string save_dataset(const GraphDataset& g, const std::string& dir) {
    validate_dataset(g);
    fs::create_directories(dir);
    const fs::path base(dir);

    write_edges_csv((base / "edges.csv").string(), g.edges);
    json manifest;
    manifest["name"] = g.name;
    manifest["num_nodes"] = g.num_nodes;
    manifest["edges"] = "edges.csv";
    manifest["format_version"] = 1;

    if (g.has_features()) {
        write_matrix_f32((base / "features.bin").string(), g.features);
        manifest["features"] = "features.bin";
    } else {
        manifest["features"] = nullptr;
    }

    if (g.has_labels()) {
        std::vector<LabelRow> rows;
        for (std::size_t i = 0; i < g.num_nodes; ++i)
            if (g.labels[i] >= 0)
                rows.push_back({static_cast<NodeId>(i), g.labels[i],
                                g.label_split[i] == LabelSplit::Train});
        write_labels_csv((base / "labels.csv").string(), rows);
        manifest["labels"] = "labels.csv";
    } else {
        manifest["labels"] = nullptr;
    }

    const std::string path = (base / "manifest.json").string();
    write_text_file(path, manifest.dump(2) + "\n");
    return path;
}

NormalizedAdjacency normalize_adjacency(const GraphDataset& g,
                                        bool add_self_loops) {
    const auto train = g.train_edges();
    std::vector<double> deg(g.num_nodes, add_self_loops ? 1.0 : 0.0);
    for (const auto& [s, d] : train) {
        deg[s] += 1.0;
        deg[d] += 1.0;
    }

    std::vector<std::uint32_t> ri, ci;
    std::vector<double> vals;
    ri.reserve(train.size() * 2 + (add_self_loops ? g.num_nodes : 0));
    ci.reserve(ri.capacity());
    vals.reserve(ri.capacity());
    for (const auto& [s, d] : train) {
        const double v = 1.0 / std::sqrt(deg[s] * deg[d]);
        ri.push_back(s);
        ci.push_back(d);
        vals.push_back(v);
        ri.push_back(d);
        ci.push_back(s);
        vals.push_back(v);
    }
    if (add_self_loops) {
        for (std::size_t i = 0; i < g.num_nodes; ++i) {
            ri.push_back(static_cast<std::uint32_t>(i));
            ci.push_back(static_cast<std::uint32_t>(i));
            vals.push_back(1.0 / deg[i]);
        }
    }

    NormalizedAdjacency out;
    out.self_loops = add_self_loops;
    out.mat = CsrMatrix::from_coo(g.num_nodes, g.num_nodes, ri, ci, vals);
    return out;
}

GraphDataset split_edges(const GraphDataset& g, double test_ratio,
                         std::uint64_t seed) {
    if (g.edges.empty())
        throw ValidationError(g.name + ": cannot split a graph with no edges");
    if (!(test_ratio > 0.0 && test_ratio < 1.0))
        throw ValidationError("test_ratio must lie in (0, 1)");
    const std::size_t n_test = static_cast<std::size_t>(
        std::floor(test_ratio * static_cast<double>(g.edges.size())));
    if (n_test == 0)
        throw ValidationError(g.name + ": empty test set (floor(" +
                              std::to_string(test_ratio) + " * " +
                              std::to_string(g.edges.size()) + ") = 0)");

    std::vector<std::size_t> order(g.edges.size());
    std::iota(order.begin(), order.end(), 0);
    RngStream rng(seed, "dataset:" + g.name + ":split");
    rng.shuffle(order);

    std::vector<std::size_t> deg(g.num_nodes, 0);
    for (const auto& [s, d] : g.edges) {
        deg[s]++;
        deg[d]++;
    }

    GraphDataset out = g;
    out.edge_split.assign(g.edges.size(), EdgeSplit::Train);
    out.train_isolated.clear();
    std::size_t taken = 0;
    // First pass refuses to take a node's last train edge.
    for (std::size_t idx : order) {
        if (taken == n_test) break;
        const auto& [s, d] = g.edges[idx];
        if (deg[s] >= 2 && deg[d] >= 2) {
            out.edge_split[idx] = EdgeSplit::Test;
            deg[s]--;
            deg[d]--;
            taken++;
        }
    }
    // The quota wins over coverage; anything still missing comes from a
    // second unconstrained pass.
    for (std::size_t idx : order) {
        if (taken == n_test) break;
        if (out.edge_split[idx] == EdgeSplit::Test) continue;
        const auto& [s, d] = g.edges[idx];
        out.edge_split[idx] = EdgeSplit::Test;
        deg[s]--;
        deg[d]--;
        taken++;
    }
    for (std::size_t i = 0; i < g.num_nodes; ++i)
        if (deg[i] == 0)
            out.train_isolated.push_back(static_cast<NodeId>(i));
    // deg counted all edges to begin with, so nodes isolated in the input
    // graph also show up here; only split casualties are reported.
    std::vector<std::size_t> full_deg(g.num_nodes, 0);
    for (const auto& [s, d] : g.edges) {
        full_deg[s]++;
        full_deg[d]++;
    }
    std::vector<NodeId> casualties;
    for (NodeId n : out.train_isolated)
        if (full_deg[n] > 0) casualties.push_back(n);
    out.train_isolated = casualties;
    return out;
}

namespace {

void plant_features(GraphDataset& g, const std::vector<std::size_t>& cluster,
                    const GenParams& p, RngStream& rng) {
    if (p.feature_dim == 0) return;
    g.features = DenseMatrix(g.num_nodes, p.feature_dim, 0.0);
    for (std::size_t i = 0; i < g.num_nodes; ++i) {
        g.features(i, cluster[i] % p.feature_dim) = 1.0;
        for (std::size_t j = 0; j < p.feature_dim; ++j)
            g.features(i, j) += p.feature_noise * rng.next_normal();
    }
}

void plant_labels(GraphDataset& g, const std::vector<std::size_t>& cluster,
                  double train_ratio, RngStream& rng) {
    g.labels.resize(g.num_nodes);
    for (std::size_t i = 0; i < g.num_nodes; ++i)
        g.labels[i] = static_cast<std::int32_t>(cluster[i]);
    g.label_split.assign(g.num_nodes, LabelSplit::Test);
    std::vector<std::size_t> order(g.num_nodes);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    const std::size_t n_train = static_cast<std::size_t>(
        std::floor(train_ratio * static_cast<double>(g.num_nodes)));
    for (std::size_t i = 0; i < n_train; ++i)
        g.label_split[order[i]] = LabelSplit::Train;
}

}  // namespace

GraphDataset gen_synthetic(const std::string& family, std::size_t size,
                           const GenParams& params, std::uint64_t seed) {
    if (size < 2)
        throw ValidationError("gen_synthetic: size must be >= 2");

    GraphDataset g;
    g.num_nodes = size;
    g.name = family + "-n" + std::to_string(size) + "-s" + std::to_string(seed);
    std::vector<Edge> raw;
    std::vector<std::size_t> cluster(size, 0);

    if (family == "sbm") {
        if (params.blocks == 0 || params.blocks > size)
            throw ValidationError("sbm: blocks must be in [1, size]");
        const std::size_t chunk = (size + params.blocks - 1) / params.blocks;
        for (std::size_t i = 0; i < size; ++i)
            cluster[i] = std::min(i / chunk, params.blocks - 1);
        RngStream rng(seed, "gen:sbm:" + std::to_string(size));
        for (std::size_t i = 0; i < size; ++i)
            for (std::size_t j = i + 1; j < size; ++j) {
                const double p =
                    cluster[i] == cluster[j] ? params.p_in : params.p_out;
                if (rng.next_real() < p)
                    raw.emplace_back(static_cast<NodeId>(i),
                                     static_cast<NodeId>(j));
            }
    } else if (family == "ba") {
        if (params.m == 0 || params.m >= size)
            throw ValidationError("ba: m must be in [1, size)");
        RngStream rng(seed, "gen:ba:" + std::to_string(size));
        std::vector<NodeId> roulette;  // one entry per edge endpoint
        for (std::size_t i = 0; i < params.m; ++i)
            for (std::size_t j = i + 1; j < params.m; ++j) {
                raw.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
                roulette.push_back(static_cast<NodeId>(i));
                roulette.push_back(static_cast<NodeId>(j));
            }
        if (roulette.empty())  // m == 1: nothing to prefer yet
            roulette.push_back(0);
        for (std::size_t t = params.m; t < size; ++t) {
            std::set<NodeId> targets;
            while (targets.size() < params.m) {
                const NodeId cand =
                    roulette[rng.next_below(roulette.size())];
                targets.insert(cand);
            }
            for (NodeId tgt : targets) {
                raw.emplace_back(static_cast<NodeId>(t), tgt);
                roulette.push_back(static_cast<NodeId>(t));
                roulette.push_back(tgt);
            }
        }
        // hub-distance makes no natural cluster; everything is one cluster
    } else if (family == "bipartite") {
        const std::size_t left = params.left == 0 ? size / 2 : params.left;
        if (left == 0 || left >= size)
            throw ValidationError("bipartite: left side must be in [1, size)");
        RngStream rng(seed, "gen:bipartite:" + std::to_string(size));
        for (std::size_t u = 0; u < left; ++u)
            for (std::size_t v = left; v < size; ++v)
                if (rng.next_real() < params.p_edge)
                    raw.emplace_back(static_cast<NodeId>(u),
                                     static_cast<NodeId>(v));
        for (std::size_t i = 0; i < size; ++i) cluster[i] = i < left ? 0 : 1;
    } else if (family == "grid") {
        std::size_t rows = params.grid_rows;
        if (rows == 0) {
            rows = static_cast<std::size_t>(std::sqrt(static_cast<double>(size)));
            while (rows > 1 && size % rows != 0) rows--;
        }
        if (rows == 0 || size % rows != 0)
            throw ValidationError("grid: size must be divisible by grid_rows");
        const std::size_t cols = size / rows;
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) {
                const NodeId id = static_cast<NodeId>(r * cols + c);
                if (c + 1 < cols) raw.emplace_back(id, id + 1);
                if (r + 1 < rows)
                    raw.emplace_back(id, static_cast<NodeId>(id + cols));
                // quadrants act as the planted cluster structure
                cluster[id] = (r >= rows / 2 ? 2 : 0) + (c >= cols / 2 ? 1 : 0);
            }
    } else {
        throw ValidationError("gen_synthetic: unknown family '" + family + "'");
    }

    g.edges = canonicalize_edges(raw, size);
    {
        RngStream frng(seed, "gen:" + family + ":feat");
        plant_features(g, cluster, params, frng);
    }
    if (family == "sbm") {
        RngStream lrng(seed, "gen:" + family + ":labelsplit");
        plant_labels(g, cluster, params.label_train_ratio, lrng);
    }
    validate_dataset(g);
    return g;
}

GraphDataset attach_class_nodes(const GraphDataset& g) {
    if (!g.has_labels())
        throw ValidationError(g.name + ": attach_class_nodes needs labels");
    const std::size_t c = g.num_classes();
    if (c == 0)
        throw ValidationError(g.name + ": no labeled nodes");

    GraphDataset out = g;
    out.class_node_base = static_cast<NodeId>(g.num_nodes);
    out.num_class_nodes = c;
    out.num_nodes = g.num_nodes + c;
    out.labels.resize(out.num_nodes, -1);
    out.label_split.resize(out.num_nodes, LabelSplit::None);

    std::vector<std::pair<Edge, EdgeSplit>> tagged;
    tagged.reserve(g.edges.size() + g.num_nodes);
    for (std::size_t i = 0; i < g.edges.size(); ++i)
        tagged.emplace_back(g.edges[i], g.edge_split.empty()
                                            ? EdgeSplit::Train
                                            : g.edge_split[i]);
    for (std::size_t i = 0; i < g.num_nodes; ++i)
        if (g.label_split[i] == LabelSplit::Train)
            tagged.emplace_back(
                Edge{static_cast<NodeId>(i),
                     out.class_node_base + static_cast<NodeId>(g.labels[i])},
                EdgeSplit::Train);
    std::sort(tagged.begin(), tagged.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    out.edges.clear();
    out.edge_split.clear();
    for (const auto& [e, s] : tagged) {
        out.edges.push_back(e);
        out.edge_split.push_back(s);
    }
    if (g.edge_split.empty()) out.edge_split.clear();  // stay "unsplit"

    if (g.has_features()) {
        DenseMatrix f(out.num_nodes, g.features.cols, 0.0);
        for (std::size_t i = 0; i < g.features.rows; ++i)
            for (std::size_t j = 0; j < g.features.cols; ++j)
                f(i, j) = g.features(i, j);
        out.features = f;
    }

    validate_dataset(out);
    return out;
}

}  // namespace anygraph
