#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "anygraph/config.hpp"
#include "anygraph/embed.hpp"
#include "anygraph/expert.hpp"
#include "anygraph/graph.hpp"
#include "anygraph/rng.hpp"
#include "anygraph/router.hpp"

namespace anygraph {

/// Bias-corrected Adam moments, shaped like one expert's parameters.
struct AdamState {
    ExpertGrads m;
    ExpertGrads v;
    std::uint64_t t = 0;
};

AdamState make_adam_state(const ExpertParams& p);

void adam_step(ExpertParams& p, const ExpertGrads& g, AdamState& s, double lr,
               double beta1, double beta2, double eps);

/// One batch slot: edges [lo, hi) of dataset's per-epoch permutation.
struct BatchSlot {
    std::size_t dataset = 0;
    std::size_t lo = 0;
    std::size_t hi = 0;
};

/// Per-epoch plan: each dataset's train edges shuffled, split into
/// ceil(|E_train| / B) chunks, and the chunks of all datasets shuffled
/// together ("mixed together and randomly shuffled").
struct Schedule {
    std::vector<std::vector<Edge>> perm;
    std::vector<BatchSlot> slots;
};

Schedule build_schedule(const std::vector<const GraphDataset*>& datasets,
                        std::size_t batch_size, std::uint64_t seed,
                        std::size_t epoch);

struct LossGrad {
    double loss = 0.0;
    DenseMatrix grad;  // d loss / d emb, same shape as emb
};

/// Subtract-max softmax link loss over a batch of (anchor, positive) pairs.
/// Full mode ranks the positive against every node; sampled mode against
/// {positive} + num_neg uniform draws from `neg_rng`. The subtracted max is
/// the largest score among the batch's denominator terms; rows that underflow
/// it fall back to their own max, which leaves the value unchanged.
LossGrad loss_and_grad(const DenseMatrix& emb,
                       const std::vector<Edge>& batch_pairs, bool full_mode,
                       std::size_t num_neg, RngStream* neg_rng);

/// Working state for one registered training graph.
struct TrainDataset {
    GraphDataset graph;
    NormalizedAdjacency adj;
    InitialEmbedding emb;
    std::uint64_t steps_done = 0;
    std::uint64_t steps_since_reproj = 0;
    bool reprojected_since_reroute = false;
    std::uint64_t reproj_interval = 1;  // ceil(|E_train| / (10 B))
};

struct TrainerState {
    EngineConfig cfg;
    MoeModel model;
    std::vector<AdamState> adam;  // one per expert
    RouterState router;
    std::vector<TrainDataset> data;
    std::uint64_t global_step = 0;
    std::size_t epoch = 0;
    std::size_t slot = 0;  // next slot to run within the current epoch
    std::string cache_dir;  // empty = no embedding cache
};

/// Serializable snapshot of everything train() mutates. Graphs themselves
/// live in their manifests and are re-supplied on resume.
struct DatasetSnapshot {
    std::string name;
    std::size_t num_nodes = 0;
    std::size_t aug_epoch = 0;
    std::uint64_t steps_done = 0;
    std::uint64_t steps_since_reproj = 0;
    bool reprojected_since_reroute = false;
    std::uint64_t reproj_interval = 1;
};

struct CheckpointData {
    EngineConfig cfg;
    MoeModel model;
    std::vector<AdamState> adam;
    RouterState router;
    std::vector<DatasetSnapshot> datasets;
    std::uint64_t global_step = 0;
    std::size_t epoch = 0;
    std::size_t slot = 0;
};

/// Splits (when asked), normalizes, embeds, and routes every graph.
TrainerState init_trainer(const EngineConfig& cfg,
                          std::vector<GraphDataset> graphs,
                          const std::string& cache_dir = "");

CheckpointData snapshot_state(const TrainerState& st);

/// Rebuilds a TrainerState from a snapshot plus the original graphs
/// (matched by name; structural mismatch is an error).
TrainerState resume_trainer(const CheckpointData& data,
                            std::vector<GraphDataset> graphs,
                            const std::string& cache_dir = "");

struct TrainLogEntry {
    std::uint64_t step = 0;
    std::string dataset;
    std::size_t expert = 0;
    double loss = 0.0;
};

struct TrainHooks {
    std::function<void(const TrainLogEntry&)> on_log;
    std::function<void(const TrainerState&)> on_checkpoint;
};

/// Runs the schedule until cfg.train.epochs epochs or train.max_steps
/// batches, whichever comes first. Resumable: picks up at (epoch, slot).
void train(TrainerState& st, const TrainHooks& hooks = {});

}  // namespace anygraph
