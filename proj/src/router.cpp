#include "anygraph/router.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "anygraph/rng.hpp"

namespace anygraph {

namespace {

std::uint64_t edge_key(NodeId a, NodeId b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double dot_rows(const DenseMatrix& m, NodeId a, NodeId b) {
    const double* x = m.row(a);
    const double* y = m.row(b);
    double s = 0.0;
    for (std::size_t c = 0; c < m.cols; ++c) s += x[c] * y[c];
    return s;
}

}  // namespace

RouterState make_router_state(std::size_t num_experts, double rho,
                              std::size_t sample_cap) {
    if (num_experts < 1) throw ConfigError("router: need at least one expert");
    if (rho < 0.0 || rho > 2.0)
        throw ConfigError("router: rho must lie in [0, 2]");
    if (sample_cap < 1) throw ConfigError("router: sample_cap must be >= 1");
    RouterState s;
    s.m.assign(num_experts, 0);
    s.rho = rho;
    s.sample_cap = sample_cap;
    return s;
}

RouteSample draw_route_sample(const GraphDataset& g, std::size_t sample_cap,
                              std::uint64_t seed, std::size_t route_epoch) {
    auto train = g.train_edges();
    if (train.empty())
        throw ValidationError("router: dataset '" + g.name +
                              "' has no train edges");
    const std::size_t s_count = std::min(sample_cap, train.size());

    RngStream rng(seed, "dataset:" + g.name + ":route:" +
                            std::to_string(route_epoch));

    std::unordered_set<std::uint64_t> train_set;
    train_set.reserve(train.size() * 2);
    for (const auto& [u, v] : train) train_set.insert(edge_key(u, v));

    RouteSample out;
    out.pos.reserve(s_count);
    out.neg.reserve(s_count);

    // Partial Fisher-Yates: s_count distinct positives, uniform over edges.
    std::vector<std::size_t> idx(train.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < s_count; ++i) {
        const std::size_t j = i + rng.next_below(idx.size() - i);
        std::swap(idx[i], idx[j]);
        out.pos.push_back(train[idx[i]]);
    }

    for (const auto& [anchor, partner] : out.pos) {
        (void)partner;
        NodeId neg = 0;
        for (int attempt = 0; attempt < 100; ++attempt) {
            neg = static_cast<NodeId>(rng.next_below(g.num_nodes));
            if (!train_set.count(edge_key(anchor, neg))) break;
        }
        out.neg.emplace_back(anchor, neg);
    }
    return out;
}

double competence(const DenseMatrix& expert_emb,
                  const std::vector<std::pair<NodeId, NodeId>>& pos_pairs,
                  const std::vector<std::pair<NodeId, NodeId>>& neg_pairs) {
    if (pos_pairs.empty() || pos_pairs.size() != neg_pairs.size())
        throw ValidationError(
            "router: need equal, non-empty positive and negative sets");
    double acc = 0.0;
    for (std::size_t i = 0; i < pos_pairs.size(); ++i) {
        const auto& [c, p] = pos_pairs[i];
        const auto& [c2, n] = neg_pairs[i];
        if (c >= expert_emb.rows || p >= expert_emb.rows ||
            c2 >= expert_emb.rows || n >= expert_emb.rows)
            throw ValidationError("router: pair index out of range");
        acc += sigmoid(dot_rows(expert_emb, c, p) -
                       dot_rows(expert_emb, c2, n));
    }
    return acc / static_cast<double>(pos_pairs.size());
}

std::vector<double> recalibrate(const std::vector<double>& phi,
                                const std::vector<std::uint64_t>& m,
                                double rho) {
    if (phi.size() != m.size())
        throw ValidationError("router: phi and counters disagree on K");
    std::uint64_t total = 0;
    for (auto v : m) total += v;
    std::vector<double> out(phi.size());
    for (std::size_t k = 0; k < phi.size(); ++k) {
        const double share =
            total == 0 ? 1.0 / static_cast<double>(m.size())
                       : static_cast<double>(m[k]) / static_cast<double>(total);
        out[k] = phi[k] * ((1.0 - share) * rho + 1.0 - rho / 2.0);
    }
    return out;
}

std::vector<double> route_scores(const MoeModel& model,
                                 const InitialEmbedding& emb,
                                 const GraphDataset& g,
                                 const RouterState& state,
                                 std::uint64_t seed) {
    if (model.num_experts() != state.num_experts())
        throw ValidationError("router: model and state disagree on K");
    auto sample = draw_route_sample(g, state.sample_cap, seed,
                                    state.route_epoch);
    std::vector<double> phi;
    phi.reserve(model.num_experts());
    for (const auto& expert : model.experts) {
        auto out = forward_eval(expert, emb.e1);
        phi.push_back(competence(out, sample.pos, sample.neg));
    }
    return recalibrate(phi, state.m, state.rho);
}

std::size_t route(const MoeModel& model, const InitialEmbedding& emb,
                  const GraphDataset& g, RouterState& state,
                  std::uint64_t seed) {
    auto scores = route_scores(model, emb, g, state, seed);
    std::size_t best = 0;
    for (std::size_t k = 1; k < scores.size(); ++k)
        if (scores[k] > scores[best]) best = k;  // ties keep the lower index
    state.assignment[g.name] = best;
    return best;
}

void record_step(RouterState& state, std::size_t expert) {
    if (expert >= state.m.size())
        throw ValidationError("router: expert index out of range");
    state.m[expert] += 1;
}

void reroute_all(const MoeModel& model,
                 const std::vector<const GraphDataset*>& datasets,
                 const std::vector<const InitialEmbedding*>& embeddings,
                 RouterState& state, std::uint64_t seed) {
    if (datasets.size() != embeddings.size())
        throw ValidationError("router: datasets and embeddings must pair up");
    for (std::size_t i = 0; i < datasets.size(); ++i)
        (void)route(model, *embeddings[i], *datasets[i], state, seed);
    state.route_epoch += 1;
}

}  // namespace anygraph
