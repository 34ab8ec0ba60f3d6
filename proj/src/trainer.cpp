#include "anygraph/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "anygraph/rng.hpp"

namespace anygraph {

namespace {

void adam_update(std::vector<double>& p, const std::vector<double>& g,
                 std::vector<double>& m, std::vector<double>& v, double lr,
                 double beta1, double beta2, double eps, double bc1,
                 double bc2) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

bool use_full_softmax(NegMode mode, std::size_t num_nodes) {
    switch (mode) {
        case NegMode::Full: return true;
        case NegMode::Sampled: return false;
        case NegMode::Auto: return num_nodes <= 4096;
    }
    throw ConfigError("unreachable neg_mode");
}

InitialEmbedding obtain_embedding(const GraphDataset& g,
                                  const NormalizedAdjacency& adj,
                                  const EmbedConfig& ecfg, std::uint64_t seed,
                                  std::size_t aug_epoch,
                                  const std::string& cache_dir) {
    if (!cache_dir.empty()) {
        InitialEmbedding out;
        if (try_load_embedding(cache_dir, g.name, ecfg, seed, aug_epoch, out))
            return out;
    }
    auto emb = reproject(g, adj, ecfg, seed, aug_epoch);
    if (!cache_dir.empty()) store_embedding(cache_dir, ecfg, seed, emb);
    return emb;
}

}  // namespace

AdamState make_adam_state(const ExpertParams& p) {
    AdamState s;
    s.m = zero_grads(p);
    s.v = zero_grads(p);
    return s;
}

void adam_step(ExpertParams& p, const ExpertGrads& g, AdamState& s, double lr,
               double beta1, double beta2, double eps) {
    if (g.w.size() != p.layers() || s.m.w.size() != p.layers())
        throw ValidationError("adam: gradient/state shape mismatch");
    s.t += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(s.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(s.t));
    for (std::size_t l = 0; l < p.layers(); ++l) {
        if (!g.w[l].same_shape(p.w[l]))
            throw ValidationError("adam: gradient/state shape mismatch");
        adam_update(p.w[l].data, g.w[l].data, s.m.w[l].data, s.v.w[l].data,
                    lr, beta1, beta2, eps, bc1, bc2);
        adam_update(p.b[l], g.b[l], s.m.b[l], s.v.b[l], lr, beta1, beta2, eps,
                    bc1, bc2);
        if (p.affine) {
            adam_update(p.gamma[l], g.gamma[l], s.m.gamma[l], s.v.gamma[l],
                        lr, beta1, beta2, eps, bc1, bc2);
            adam_update(p.beta[l], g.beta[l], s.m.beta[l], s.v.beta[l], lr,
                        beta1, beta2, eps, bc1, bc2);
        }
    }
}

Schedule build_schedule(const std::vector<const GraphDataset*>& datasets,
                        std::size_t batch_size, std::uint64_t seed,
                        std::size_t epoch) {
    if (datasets.empty()) throw ValidationError("schedule: no datasets");
    if (batch_size < 1) throw ConfigError("schedule: batch_size must be >= 1");
    Schedule s;
    s.perm.resize(datasets.size());
    for (std::size_t i = 0; i < datasets.size(); ++i) {
        const GraphDataset& g = *datasets[i];
        auto edges = g.train_edges();
        if (edges.empty())
            throw ValidationError("schedule: dataset '" + g.name +
                                  "' has no train edges");
        RngStream rng(seed, "dataset:" + g.name + ":shuffle:" +
                                std::to_string(epoch));
        rng.shuffle(edges);
        for (std::size_t lo = 0; lo < edges.size(); lo += batch_size)
            s.slots.push_back(
                {i, lo, std::min(lo + batch_size, edges.size())});
        s.perm[i] = std::move(edges);
    }
    RngStream rng(seed, "schedule:" + std::to_string(epoch));
    rng.shuffle(s.slots);
    return s;
}

LossGrad loss_and_grad(const DenseMatrix& emb,
                       const std::vector<Edge>& batch_pairs, bool full_mode,
                       std::size_t num_neg, RngStream* neg_rng) {
    if (batch_pairs.empty()) throw ValidationError("loss: empty batch");
    if (!all_finite(emb)) throw ValidationError("loss: non-finite embedding");
    const std::size_t bsz = batch_pairs.size();
    const std::size_t n = emb.rows;
    const std::size_t d = emb.cols;
    for (const auto& [c, p] : batch_pairs)
        if (c >= n || p >= n)
            throw ValidationError("loss: node id out of range");
    if (!full_mode && (num_neg < 1 || neg_rng == nullptr))
        throw ValidationError("loss: sampled mode needs num_neg and a stream");

    DenseMatrix anchors(bsz, d);
    for (std::size_t i = 0; i < bsz; ++i) {
        const double* src = emb.row(batch_pairs[i].first);
        std::copy(src, src + d, anchors.row(i));
    }

    LossGrad out;
    out.grad = DenseMatrix(n, d, 0.0);

    // Candidate columns: every node (full) or {positive} + draws (sampled).
    std::size_t cols;
    std::vector<NodeId> cand;  // sampled mode only, row-major bsz x cols
    DenseMatrix scores;
    std::vector<std::size_t> pos_col(bsz);
    if (full_mode) {
        cols = n;
        scores = matmul_nt(anchors, emb);
        for (std::size_t i = 0; i < bsz; ++i)
            pos_col[i] = batch_pairs[i].second;
    } else {
        cols = num_neg + 1;
        cand.resize(bsz * cols);
        scores = DenseMatrix(bsz, cols);
        for (std::size_t i = 0; i < bsz; ++i) {
            cand[i * cols] = batch_pairs[i].second;
            for (std::size_t j = 1; j < cols; ++j)
                cand[i * cols + j] =
                    static_cast<NodeId>(neg_rng->next_below(n));
            const double* a = anchors.row(i);
            for (std::size_t j = 0; j < cols; ++j) {
                const double* e = emb.row(cand[i * cols + j]);
                double sum = 0.0;
                for (std::size_t c = 0; c < d; ++c) sum += a[c] * e[c];
                scores(i, j) = sum;
            }
            pos_col[i] = 0;
        }
    }

    double batch_max = scores.data[0];
    for (double v : scores.data) batch_max = std::max(batch_max, v);

    DenseMatrix dscore(bsz, cols, 0.0);
    double loss_sum = 0.0;
    const double inv_b = 1.0 / static_cast<double>(bsz);
    for (std::size_t i = 0; i < bsz; ++i) {
        const double* srow = scores.row(i);
        double base = batch_max;
        double z = 0.0;
        for (std::size_t j = 0; j < cols; ++j) z += std::exp(srow[j] - base);
        if (z == 0.0 || !std::isfinite(z)) {
            // Entire row underflowed the batch max; its own max restores
            // precision and, by shift invariance, the same value.
            base = srow[0];
            for (std::size_t j = 1; j < cols; ++j)
                base = std::max(base, srow[j]);
            z = 0.0;
            for (std::size_t j = 0; j < cols; ++j)
                z += std::exp(srow[j] - base);
        }
        loss_sum += -(srow[pos_col[i]] - base) + std::log(z);
        double* drow = dscore.row(i);
        for (std::size_t j = 0; j < cols; ++j)
            drow[j] = std::exp(srow[j] - base) / z * inv_b;
        drow[pos_col[i]] -= inv_b;
    }
    out.loss = loss_sum * inv_b;

    // d loss / d emb: candidates receive dscore-weighted anchors, anchors
    // receive dscore-weighted candidates.
    if (full_mode) {
        DenseMatrix cand_grad = matmul_tn(dscore, anchors);  // n x d
        add_inplace(out.grad, cand_grad);
        DenseMatrix anchor_grad = matmul(dscore, emb);  // bsz x d
        for (std::size_t i = 0; i < bsz; ++i) {
            double* dst = out.grad.row(batch_pairs[i].first);
            const double* src = anchor_grad.row(i);
            for (std::size_t c = 0; c < d; ++c) dst[c] += src[c];
        }
    } else {
        for (std::size_t i = 0; i < bsz; ++i) {
            const double* a = anchors.row(i);
            const double* drow = dscore.row(i);
            double* ag = out.grad.row(batch_pairs[i].first);
            for (std::size_t j = 0; j < cols; ++j) {
                const NodeId node = cand[i * cols + j];
                const double* e = emb.row(node);
                double* cg = out.grad.row(node);
                const double w = drow[j];
                for (std::size_t c = 0; c < d; ++c) cg[c] += w * a[c];
                for (std::size_t c = 0; c < d; ++c) ag[c] += w * e[c];
            }
        }
    }
    return out;
}

TrainerState init_trainer(const EngineConfig& cfg,
                          std::vector<GraphDataset> graphs,
                          const std::string& cache_dir) {
    validate_config(cfg);
    if (graphs.empty()) throw ValidationError("trainer: no datasets");
    std::set<std::string> names;
    for (const auto& g : graphs)
        if (!names.insert(g.name).second)
            throw ValidationError("trainer: duplicate dataset name '" +
                                  g.name + "'");

    TrainerState st;
    st.cfg = cfg;
    st.cache_dir = cache_dir;
    const std::size_t k_experts = cfg.effective_experts();
    st.model = init_model(cfg.model.dim, cfg.model.layers, k_experts,
                          cfg.seed, cfg.model.affine_layernorm);
    for (const auto& e : st.model.experts)
        st.adam.push_back(make_adam_state(e));
    st.router = make_router_state(k_experts, cfg.effective_rho(),
                                  cfg.router.sample_cap);

    const EmbedConfig ecfg = cfg.embed_config();
    for (auto& g : graphs) {
        if (cfg.data.test_ratio > 0.0 && g.edge_split.empty())
            g = split_edges(g, cfg.data.test_ratio, cfg.seed);
        TrainDataset td;
        td.adj = normalize_adjacency(g, cfg.data.self_loops);
        td.graph = std::move(g);
        const std::size_t e_train = td.graph.train_edges().size();
        if (e_train == 0)
            throw ValidationError("trainer: dataset '" + td.graph.name +
                                  "' has no train edges");
        td.emb = obtain_embedding(td.graph, td.adj, ecfg, cfg.seed, 0,
                                  cache_dir);
        const std::uint64_t denom = 10 * cfg.train.batch_size;
        td.reproj_interval = std::max<std::uint64_t>(
            1, (e_train + denom - 1) / denom);
        st.data.push_back(std::move(td));
    }
    for (auto& td : st.data)
        (void)route(st.model, td.emb, td.graph, st.router, cfg.seed);
    return st;
}

CheckpointData snapshot_state(const TrainerState& st) {
    CheckpointData d;
    d.cfg = st.cfg;
    d.model = st.model;
    d.adam = st.adam;
    d.router = st.router;
    for (const auto& td : st.data)
        d.datasets.push_back({td.graph.name, td.graph.num_nodes,
                              td.emb.aug_epoch, td.steps_done,
                              td.steps_since_reproj,
                              td.reprojected_since_reroute,
                              td.reproj_interval});
    d.global_step = st.global_step;
    d.epoch = st.epoch;
    d.slot = st.slot;
    return d;
}

TrainerState resume_trainer(const CheckpointData& data,
                            std::vector<GraphDataset> graphs,
                            const std::string& cache_dir) {
    validate_config(data.cfg);
    if (data.model.experts.empty() ||
        data.model.dim != data.cfg.model.dim ||
        data.model.layers != data.cfg.model.layers ||
        data.model.num_experts() != data.cfg.effective_experts())
        throw ConfigError("resume: checkpoint model does not match its config");
    if (graphs.size() != data.datasets.size())
        throw ValidationError("resume: expected " +
                              std::to_string(data.datasets.size()) +
                              " datasets, got " +
                              std::to_string(graphs.size()));

    TrainerState st;
    st.cfg = data.cfg;
    st.cache_dir = cache_dir;
    st.model = data.model;
    st.adam = data.adam;
    st.router = data.router;
    st.global_step = data.global_step;
    st.epoch = data.epoch;
    st.slot = data.slot;

    const EmbedConfig ecfg = data.cfg.embed_config();
    for (const auto& snap : data.datasets) {
        auto it = std::find_if(graphs.begin(), graphs.end(),
                               [&](const GraphDataset& g) {
                                   return g.name == snap.name;
                               });
        if (it == graphs.end())
            throw ValidationError("resume: dataset '" + snap.name +
                                  "' not supplied");
        GraphDataset g = std::move(*it);
        graphs.erase(it);
        if (data.cfg.data.test_ratio > 0.0 && g.edge_split.empty())
            g = split_edges(g, data.cfg.data.test_ratio, data.cfg.seed);
        if (g.num_nodes != snap.num_nodes)
            throw ConfigError("resume: dataset '" + snap.name +
                              "' changed shape since the checkpoint");
        TrainDataset td;
        td.adj = normalize_adjacency(g, data.cfg.data.self_loops);
        td.graph = std::move(g);
        td.emb = obtain_embedding(td.graph, td.adj, ecfg, data.cfg.seed,
                                  snap.aug_epoch, cache_dir);
        td.steps_done = snap.steps_done;
        td.steps_since_reproj = snap.steps_since_reproj;
        td.reprojected_since_reroute = snap.reprojected_since_reroute;
        td.reproj_interval = snap.reproj_interval;
        st.data.push_back(std::move(td));
    }
    return st;
}

namespace {

void run_batch(TrainerState& st, const Schedule& sched,
               const TrainHooks& hooks) {
    const EngineConfig& cfg = st.cfg;
    const BatchSlot& bs = sched.slots[st.slot];
    TrainDataset& td = st.data[bs.dataset];
    const std::string& name = td.graph.name;
    const std::size_t expert = st.router.assignment.at(name);

    const auto& perm = sched.perm[bs.dataset];
    std::vector<Edge> pairs(perm.begin() + static_cast<std::ptrdiff_t>(bs.lo),
                            perm.begin() + static_cast<std::ptrdiff_t>(bs.hi));

    ForwardTrace trace;
    auto out = forward_train(st.model.experts[expert], td.emb.e1,
                             cfg.train.dropout, cfg.seed + st.global_step,
                             trace);

    LossGrad lg;
    if (use_full_softmax(cfg.train.neg_mode, td.graph.num_nodes)) {
        lg = loss_and_grad(out, pairs, true, 0, nullptr);
    } else {
        RngStream neg(cfg.seed, "dataset:" + name + ":neg:" +
                                    std::to_string(st.global_step));
        lg = loss_and_grad(out, pairs, false, cfg.train.num_neg, &neg);
    }
    if (!std::isfinite(lg.loss)) {
        std::ostringstream msg;
        msg << "trainer: non-finite loss at step " << st.global_step
            << " (dataset '" << name << "', expert " << expert << ")";
        throw Error(msg.str());
    }

    auto [grads, grad_in] = backward(st.model.experts[expert], trace, lg.grad);
    (void)grad_in;
    adam_step(st.model.experts[expert], grads, st.adam[expert], cfg.train.lr,
              cfg.train.beta1, cfg.train.beta2, cfg.train.adam_eps);
    record_step(st.router, expert);

    st.global_step += 1;
    st.slot += 1;
    td.steps_done += 1;
    td.steps_since_reproj += 1;

    if (!cfg.ablate.aug && td.steps_done >= 100 &&
        td.steps_since_reproj >= td.reproj_interval) {
        td.emb = obtain_embedding(td.graph, td.adj, cfg.embed_config(),
                                  cfg.seed, td.emb.aug_epoch + 1,
                                  st.cache_dir);
        td.steps_since_reproj = 0;
        td.reprojected_since_reroute = true;
        const bool all_cycled =
            std::all_of(st.data.begin(), st.data.end(),
                        [](const TrainDataset& t) {
                            return t.reprojected_since_reroute;
                        });
        if (all_cycled) {
            std::vector<const GraphDataset*> gs;
            std::vector<const InitialEmbedding*> es;
            for (const auto& t : st.data) {
                gs.push_back(&t.graph);
                es.push_back(&t.emb);
            }
            reroute_all(st.model, gs, es, st.router, cfg.seed);
            for (auto& t : st.data) t.reprojected_since_reroute = false;
        }
    }

    if (hooks.on_log && cfg.train.log_every > 0 &&
        st.global_step % cfg.train.log_every == 0)
        hooks.on_log({st.global_step, name, expert, lg.loss});
    if (hooks.on_checkpoint && cfg.train.checkpoint_every > 0 &&
        st.global_step % cfg.train.checkpoint_every == 0)
        hooks.on_checkpoint(st);
}

}  // namespace

void train(TrainerState& st, const TrainHooks& hooks) {
    const EngineConfig& cfg = st.cfg;
    bool capped = false;
    while (st.epoch < cfg.train.epochs && !capped) {
        std::vector<const GraphDataset*> gs;
        for (const auto& td : st.data) gs.push_back(&td.graph);
        auto sched = build_schedule(gs, cfg.train.batch_size, cfg.seed,
                                    st.epoch);
        while (st.slot < sched.slots.size()) {
            if (st.global_step >= cfg.train.max_steps) {
                capped = true;
                break;
            }
            run_batch(st, sched, hooks);
        }
        if (!capped) {
            st.epoch += 1;
            st.slot = 0;
        }
    }
    if (hooks.on_checkpoint) hooks.on_checkpoint(st);
}

}  // namespace anygraph
