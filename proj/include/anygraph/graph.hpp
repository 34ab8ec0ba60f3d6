#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "anygraph/common.hpp"
#include "anygraph/csr.hpp"
#include "anygraph/dense.hpp"

namespace anygraph {

using Edge = std::pair<NodeId, NodeId>;  // canonical: src <= dst

enum class EdgeSplit : std::uint8_t { Train = 0, Test = 1 };

/// Per-node label split tag. None = node carries no label.
enum class LabelSplit : std::int8_t { None = -1, Train = 0, Test = 1 };

/// An undirected graph with optional dense features and node labels.
/// Edges are stored once each, canonicalized (src <= dst), sorted and
/// deduplicated; self-loops are dropped at load. Immutable in spirit: all
/// operations return new datasets rather than mutating.
struct GraphDataset {
    std::string name;
    std::size_t num_nodes = 0;
    std::vector<Edge> edges;

    /// Optional |V| x d0 feature matrix; empty when absent.
    DenseMatrix features;

    /// Per-node class ids, -1 for unlabeled. Empty when the dataset has no
    /// labels at all. label_split runs parallel to labels.
    std::vector<std::int32_t> labels;
    std::vector<LabelSplit> label_split;

    /// Parallel to `edges`. Empty means "unsplit": every edge is train.
    std::vector<EdgeSplit> edge_split;

    /// Nodes left without any train edge by split_edges (only populated when
    /// the split had no way to keep them covered).
    std::vector<NodeId> train_isolated;

    /// Set by attach_class_nodes: class c lives at node class_node_base + c.
    NodeId class_node_base = 0;
    std::size_t num_class_nodes = 0;

    bool has_features() const { return !features.empty(); }
    bool has_labels() const { return !labels.empty(); }
    std::size_t num_classes() const;

    std::vector<Edge> train_edges() const;
    std::vector<Edge> test_edges() const;
};

/// Symmetric Laplacian-normalized adjacency in CSR form:
/// A_hat = D^(-1/2) (A [+ I]) D^(-1/2).
struct NormalizedAdjacency {
    CsrMatrix mat;
    bool self_loops = false;
};

/// Canonicalize a raw edge list: symmetrize, drop self-loops, dedup, sort.
/// Throws ValidationError on out-of-range endpoints.
std::vector<Edge> canonicalize_edges(const std::vector<Edge>& raw,
                                     std::size_t num_nodes);

/// Load a dataset from a JSON manifest (see README for the file formats).
/// Referenced paths are resolved relative to the manifest's directory.
GraphDataset load_dataset(const std::string& manifest_path);

/// Write manifest + edges/features/labels files under `dir`; returns the
/// manifest path. Inverse of load_dataset.
std::string save_dataset(const GraphDataset& g, const std::string& dir);

/// Build A_hat from the dataset's *train* edges (all edges when unsplit), so
/// test edges never leak into structural embeddings. Isolated nodes get
/// all-zero rows when self-loops are off.
NormalizedAdjacency normalize_adjacency(const GraphDataset& g,
                                        bool add_self_loops);

/// Uniform random edge split, reproducible from the seed. floor(ratio * |E|)
/// edges go to test. A first pass refuses to orphan nodes (every node keeps
/// >= 1 train edge); if the quota cannot be met that way, a second pass
/// fills it anyway and the orphaned nodes are recorded in train_isolated.
GraphDataset split_edges(const GraphDataset& g, double test_ratio,
                         std::uint64_t seed);

struct GenParams {
    // sbm
    std::size_t blocks = 4;
    double p_in = 0.2;
    double p_out = 0.01;
    // ba (preferential attachment)
    std::size_t m = 2;
    // bipartite
    std::size_t left = 0;  // 0 = half of size
    double p_edge = 0.05;
    // grid
    std::size_t grid_rows = 0;  // 0 = square of size
    // planted features: one cluster-indicator column + Gaussian noise
    std::size_t feature_dim = 0;  // 0 = no features
    double feature_noise = 0.1;
    // fraction of labeled nodes whose label lands in the train mask
    double label_train_ratio = 0.8;
};

/// Deterministic synthetic graph families: "sbm", "ba", "bipartite", "grid".
/// sbm attaches block-id labels; every family can attach planted features.
GraphDataset gen_synthetic(const std::string& family, std::size_t size,
                           const GenParams& params, std::uint64_t seed);

/// Node-classification structure trick: adds one node per class and links
/// every *train*-labeled node to its class node. Class-node feature rows are
/// zero. Test-labeled nodes gain no edges.
GraphDataset attach_class_nodes(const GraphDataset& g);

/// Contract checks for a constructed dataset; throws ValidationError.
void validate_dataset(const GraphDataset& g);

}  // namespace anygraph
