#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "anygraph/embed.hpp"
#include "anygraph/expert.hpp"
#include "anygraph/graph.hpp"

namespace anygraph {

/// Book-keeping for expert assignment: per-expert step counters m_k, the
/// dataset -> expert table, and the recalibration scale rho.
struct RouterState {
    std::vector<std::uint64_t> m;
    std::map<std::string, std::size_t> assignment;
    double rho = 0.2;
    std::size_t sample_cap = 1024;  // S = min(sample_cap, |E_train|)
    std::size_t route_epoch = 0;

    std::size_t num_experts() const { return m.size(); }
};

RouterState make_router_state(std::size_t num_experts, double rho,
                              std::size_t sample_cap);

/// Paired probe sets: neg[i] shares its anchor with pos[i].
struct RouteSample {
    std::vector<std::pair<NodeId, NodeId>> pos;
    std::vector<std::pair<NodeId, NodeId>> neg;
};

/// S distinct positive train edges plus anchored negatives drawn from the
/// stream "dataset:<name>:route:<route_epoch>". Negatives resample partners
/// that collide with a train edge, up to 100 retries.
RouteSample draw_route_sample(const GraphDataset& g, std::size_t sample_cap,
                              std::uint64_t seed, std::size_t route_epoch);

/// phi = (1/S) sum sigmoid(e_c . e_p - e_c . e_n), strictly inside (0,1).
double competence(const DenseMatrix& expert_emb,
                  const std::vector<std::pair<NodeId, NodeId>>& pos_pairs,
                  const std::vector<std::pair<NodeId, NodeId>>& neg_pairs);

/// phi'_k = phi_k * ((1 - m_k / sum(m)) * rho + 1 - rho / 2). A zero total
/// treats every share as 1/K.
std::vector<double> recalibrate(const std::vector<double>& phi,
                                const std::vector<std::uint64_t>& m,
                                double rho);

/// Recalibrated score per expert for one dataset; no state mutation.
std::vector<double> route_scores(const MoeModel& model,
                                 const InitialEmbedding& emb,
                                 const GraphDataset& g,
                                 const RouterState& state, std::uint64_t seed);

/// Assigns the dataset to its most competent expert (ties -> lowest index)
/// and records the assignment.
std::size_t route(const MoeModel& model, const InitialEmbedding& emb,
                  const GraphDataset& g, RouterState& state,
                  std::uint64_t seed);

/// One training batch consumed by the given expert.
void record_step(RouterState& state, std::size_t expert);

/// Re-scores every dataset with fresh samples and bumps route_epoch.
void reroute_all(const MoeModel& model,
                 const std::vector<const GraphDataset*>& datasets,
                 const std::vector<const InitialEmbedding*>& embeddings,
                 RouterState& state, std::uint64_t seed);

}  // namespace anygraph
