#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "anygraph/dense.hpp"
#include "anygraph/graph.hpp"
#include "anygraph/trainer.hpp"

namespace anygraph {

inline constexpr std::size_t kEvalTopK = 20;

enum class EvalTask { Link, Node };
enum class EvalMode { ZeroShot, FullShot };

std::string to_string(EvalTask t);
std::string to_string(EvalMode m);
EvalTask eval_task_from_string(const std::string& s);
EvalMode eval_mode_from_string(const std::string& s);

/// All nodes except `anchor` and `exclude`, scored by dot product against
/// the anchor's row, sorted descending; ties break toward the lower node id.
/// Throws when every node is excluded.
std::vector<NodeId> rank_candidates(const DenseMatrix& emb, NodeId anchor,
                                    const std::vector<NodeId>& exclude);

/// |relevant ∩ top-k| / |relevant|. `relevant` must be non-empty; callers
/// skip anchors with nothing relevant instead of calling with an empty set.
double recall_at_k(const std::vector<NodeId>& ranking,
                   const std::vector<NodeId>& relevant,
                   std::size_t k = kEvalTopK);

/// DCG/IDCG with gain 1/log2(rank+1) for each relevant hit in the top k.
double ndcg_at_k(const std::vector<NodeId>& ranking,
                 const std::vector<NodeId>& relevant,
                 std::size_t k = kEvalTopK);

struct ClassifyResult {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    std::size_t n_test = 0;
};

/// Class-node classification on an attach_class_nodes graph: each
/// test-labeled node is assigned the class whose class-node row has the
/// highest dot product (ties to the lower class id). Macro-F1 averages
/// per-class F1; classes with neither instances nor predictions are
/// skipped, classes predicted but absent score 0.
ClassifyResult classify_nodes(const DenseMatrix& scored_emb,
                              const GraphDataset& augmented);

struct DatasetMetrics {
    std::string dataset;
    std::size_t expert = 0;
    std::size_t n_test = 0;  // evaluated anchors (link) / test nodes (node)
    std::map<std::string, double> metrics;
};

struct EvalReport {
    EvalTask task = EvalTask::Link;
    EvalMode mode = EvalMode::ZeroShot;
    std::size_t k = kEvalTopK;
    std::vector<DatasetMetrics> per_dataset;
    std::map<std::string, double> aggregate;
    std::size_t total_samples = 0;
};

/// Sample-weighted mean of every metric key (weights = n_test, normalized).
std::map<std::string, double> aggregate_weighted(
    const std::vector<DatasetMetrics>& per_dataset);

struct EvalOptions {
    std::size_t k = kEvalTopK;
    bool exclude_train = true;  // false: rank against the full node set
    std::string cache_dir;      // embedding cache (link task only)
};

/// Frozen-model evaluation. Routes each dataset with the checkpoint's
/// router statistics (training datasets reuse their stored assignment),
/// scores with the routed expert in eval mode, and aggregates
/// sample-weighted. Zero-shot mode refuses datasets that appear in the
/// checkpoint's training roster.
EvalReport evaluate(const CheckpointData& ckpt,
                    std::vector<GraphDataset> datasets, EvalTask task,
                    EvalMode mode, const EvalOptions& opts = {});

std::string report_to_json(const EvalReport& r);
std::string report_to_csv(const EvalReport& r);

}  // namespace anygraph
