#include "anygraph/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "anygraph/embed.hpp"
#include "anygraph/expert.hpp"
#include "anygraph/router.hpp"

namespace anygraph {

using nlohmann::json;

std::string to_string(EvalTask t) {
    return t == EvalTask::Link ? "link" : "node";
}

std::string to_string(EvalMode m) {
    return m == EvalMode::ZeroShot ? "zero_shot" : "full_shot";
}

EvalTask eval_task_from_string(const std::string& s) {
    if (s == "link") return EvalTask::Link;
    if (s == "node") return EvalTask::Node;
    throw ConfigError("unknown eval task '" + s + "' (want link|node)");
}

EvalMode eval_mode_from_string(const std::string& s) {
    if (s == "zero_shot") return EvalMode::ZeroShot;
    if (s == "full_shot") return EvalMode::FullShot;
    throw ConfigError("unknown eval mode '" + s +
                      "' (want zero_shot|full_shot)");
}

std::vector<NodeId> rank_candidates(const DenseMatrix& emb, NodeId anchor,
                                    const std::vector<NodeId>& exclude) {
    const std::size_t n = emb.rows;
    if (anchor >= n) throw ValidationError("rank: anchor out of range");
    std::vector<char> skip(n, 0);
    skip[anchor] = 1;
    for (NodeId e : exclude) {
        if (e >= n) throw ValidationError("rank: excluded node out of range");
        skip[e] = 1;
    }

    const double* a = emb.row(anchor);
    std::vector<std::pair<double, NodeId>> scored;
    scored.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (skip[j]) continue;
        const double* e = emb.row(j);
        double s = 0.0;
        for (std::size_t c = 0; c < emb.cols; ++c) s += a[c] * e[c];
        scored.emplace_back(s, static_cast<NodeId>(j));
    }
    if (scored.empty())
        throw ValidationError("rank: every candidate of anchor " +
                              std::to_string(anchor) + " is excluded");
    std::sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
        if (x.first != y.first) return x.first > y.first;
        return x.second < y.second;
    });
    std::vector<NodeId> order;
    order.reserve(scored.size());
    for (const auto& [s, id] : scored) order.push_back(id);
    return order;
}

namespace {

std::size_t count_hits(const std::vector<NodeId>& ranking,
                       const std::vector<NodeId>& relevant, std::size_t k,
                       std::vector<std::size_t>* hit_ranks) {
    if (relevant.empty())
        throw ValidationError("metric: empty relevant set (skip the anchor)");
    std::unordered_set<NodeId> rel(relevant.begin(), relevant.end());
    std::size_t hits = 0;
    const std::size_t top = std::min(k, ranking.size());
    for (std::size_t r = 0; r < top; ++r)
        if (rel.count(ranking[r])) {
            ++hits;
            if (hit_ranks) hit_ranks->push_back(r + 1);  // 1-based
        }
    return hits;
}

}  // namespace

double recall_at_k(const std::vector<NodeId>& ranking,
                   const std::vector<NodeId>& relevant, std::size_t k) {
    const std::size_t hits = count_hits(ranking, relevant, k, nullptr);
    return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

double ndcg_at_k(const std::vector<NodeId>& ranking,
                 const std::vector<NodeId>& relevant, std::size_t k) {
    std::vector<std::size_t> hit_ranks;
    count_hits(ranking, relevant, k, &hit_ranks);
    double dcg = 0.0;
    for (std::size_t r : hit_ranks)
        dcg += 1.0 / std::log2(static_cast<double>(r) + 1.0);
    const std::size_t ideal = std::min(relevant.size(), k);
    double idcg = 0.0;
    for (std::size_t r = 1; r <= ideal; ++r)
        idcg += 1.0 / std::log2(static_cast<double>(r) + 1.0);
    return dcg / idcg;
}

ClassifyResult classify_nodes(const DenseMatrix& scored_emb,
                              const GraphDataset& augmented) {
    if (augmented.num_class_nodes == 0)
        throw ValidationError(augmented.name +
                              ": classify needs attached class nodes");
    if (!augmented.has_labels())
        throw ValidationError(augmented.name + ": classify needs labels");
    if (scored_emb.rows != augmented.num_nodes)
        throw ValidationError(augmented.name +
                              ": embedding rows != node count");
    const std::size_t c = augmented.num_class_nodes;
    const NodeId base = augmented.class_node_base;

    std::vector<std::size_t> tp(c, 0), fp(c, 0), fn(c, 0);
    std::size_t n_test = 0, correct = 0;
    for (std::size_t i = 0; i < base; ++i) {
        if (augmented.label_split[i] != LabelSplit::Test) continue;
        const std::int32_t truth = augmented.labels[i];
        if (truth < 0 || static_cast<std::size_t>(truth) >= c)
            throw ValidationError(augmented.name +
                                  ": test node with out-of-range label");
        const double* x = scored_emb.row(i);
        std::size_t pred = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t cls = 0; cls < c; ++cls) {
            const double* e = scored_emb.row(base + cls);
            double s = 0.0;
            for (std::size_t j = 0; j < scored_emb.cols; ++j)
                s += x[j] * e[j];
            if (s > best) {  // ties keep the lower class id
                best = s;
                pred = cls;
            }
        }
        ++n_test;
        if (pred == static_cast<std::size_t>(truth)) {
            ++correct;
            ++tp[pred];
        } else {
            ++fp[pred];
            ++fn[static_cast<std::size_t>(truth)];
        }
    }
    if (n_test == 0)
        throw ValidationError(augmented.name + ": no test-labeled nodes");

    double f1_sum = 0.0;
    std::size_t f1_classes = 0;
    for (std::size_t cls = 0; cls < c; ++cls) {
        const std::size_t instances = tp[cls] + fn[cls];
        const std::size_t predictions = tp[cls] + fp[cls];
        if (instances == 0 && predictions == 0) continue;  // absent class
        double f1 = 0.0;
        if (instances > 0 && predictions > 0 && tp[cls] > 0) {
            const double p = static_cast<double>(tp[cls]) /
                             static_cast<double>(predictions);
            const double r = static_cast<double>(tp[cls]) /
                             static_cast<double>(instances);
            f1 = 2.0 * p * r / (p + r);
        }
        f1_sum += f1;
        ++f1_classes;
    }

    ClassifyResult out;
    out.n_test = n_test;
    out.accuracy = static_cast<double>(correct) / static_cast<double>(n_test);
    out.macro_f1 = f1_sum / static_cast<double>(f1_classes);
    return out;
}

std::map<std::string, double> aggregate_weighted(
    const std::vector<DatasetMetrics>& per_dataset) {
    double total = 0.0;
    for (const auto& d : per_dataset) total += static_cast<double>(d.n_test);
    if (total == 0.0)
        throw ValidationError("aggregate: zero test samples overall");
    std::map<std::string, double> out;
    for (const auto& d : per_dataset) {
        const double w = static_cast<double>(d.n_test) / total;
        for (const auto& [key, value] : d.metrics) out[key] += w * value;
    }
    return out;
}

namespace {

InitialEmbedding embedding_for(const GraphDataset& g,
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

DatasetMetrics eval_link_dataset(const CheckpointData& ckpt, GraphDataset g,
                                 RouterState& router, const EvalOptions& opts,
                                 std::size_t aug_epoch) {
    const EngineConfig& cfg = ckpt.cfg;
    if (g.edge_split.empty()) {
        if (cfg.data.test_ratio <= 0.0)
            throw ValidationError(
                g.name + ": link evaluation needs a test split (dataset is "
                         "unsplit and the config has test_ratio 0)");
        g = split_edges(g, cfg.data.test_ratio, cfg.seed);
    }
    const auto test = g.test_edges();
    if (test.empty())
        throw ValidationError(g.name + ": no test edges to evaluate");

    const NormalizedAdjacency adj = normalize_adjacency(g, cfg.data.self_loops);
    const InitialEmbedding emb = embedding_for(
        g, adj, cfg.embed_config(), cfg.seed, aug_epoch, opts.cache_dir);

    std::size_t expert;
    const auto seen = router.assignment.find(g.name);
    if (seen != router.assignment.end())
        expert = seen->second;  // training dataset keeps its assignment
    else
        expert = route(ckpt.model, emb, g, router, cfg.seed);

    const DenseMatrix scored =
        forward_eval(ckpt.model.experts[expert], emb.e1);

    // Anchors: distinct canonical sources of test edges; for each, the
    // relevant set is its test partners and the exclusions its train
    // partners. std::map keeps anchor order (and so the report) stable.
    std::map<NodeId, std::vector<NodeId>> relevant;
    for (const auto& [src, dst] : test) relevant[src].push_back(dst);
    std::unordered_map<NodeId, std::vector<NodeId>> train_partners;
    if (opts.exclude_train)
        for (const auto& [u, v] : g.train_edges()) {
            train_partners[u].push_back(v);
            train_partners[v].push_back(u);
        }

    double recall_sum = 0.0, ndcg_sum = 0.0;
    std::size_t evaluated = 0;
    static const std::vector<NodeId> kNoExclusions;
    for (const auto& [anchor, rel] : relevant) {
        const auto it = train_partners.find(anchor);
        const std::vector<NodeId>& excl =
            it == train_partners.end() ? kNoExclusions : it->second;
        std::vector<NodeId> order;
        try {
            order = rank_candidates(scored, anchor, excl);
        } catch (const ValidationError&) {
            continue;  // every candidate excluded: nothing to rank
        }
        recall_sum += recall_at_k(order, rel, opts.k);
        ndcg_sum += ndcg_at_k(order, rel, opts.k);
        ++evaluated;
    }
    if (evaluated == 0)
        throw ValidationError(g.name + ": no evaluable anchors");

    DatasetMetrics out;
    out.dataset = g.name;
    out.expert = expert;
    out.n_test = evaluated;
    const std::string suffix = "@" + std::to_string(opts.k);
    out.metrics["recall" + suffix] =
        recall_sum / static_cast<double>(evaluated);
    out.metrics["ndcg" + suffix] = ndcg_sum / static_cast<double>(evaluated);
    return out;
}

DatasetMetrics eval_node_dataset(const CheckpointData& ckpt,
                                 const GraphDataset& g, RouterState& router) {
    const EngineConfig& cfg = ckpt.cfg;
    const GraphDataset aug = attach_class_nodes(g);
    const NormalizedAdjacency adj =
        normalize_adjacency(aug, cfg.data.self_loops);
    // Class nodes change the graph, so the cache (keyed by name) would be
    // poisoned; always embed fresh, and always route on the augmented graph.
    const InitialEmbedding emb =
        reproject(aug, adj, cfg.embed_config(), cfg.seed, 0);
    const std::size_t expert = route(ckpt.model, emb, aug, router, cfg.seed);
    const DenseMatrix scored = forward_eval(ckpt.model.experts[expert], emb.e1);
    const ClassifyResult res = classify_nodes(scored, aug);

    DatasetMetrics out;
    out.dataset = g.name;
    out.expert = expert;
    out.n_test = res.n_test;
    out.metrics["acc"] = res.accuracy;
    out.metrics["macro_f1"] = res.macro_f1;
    return out;
}

}  // namespace

EvalReport evaluate(const CheckpointData& ckpt,
                    std::vector<GraphDataset> datasets, EvalTask task,
                    EvalMode mode, const EvalOptions& opts) {
    if (datasets.empty()) throw ValidationError("evaluate: no datasets");
    if (ckpt.model.experts.empty())
        throw ValidationError("evaluate: checkpoint has no experts");
    if (opts.k < 1) throw ConfigError("evaluate: k must be >= 1");
    std::set<std::string> names;
    for (const auto& g : datasets)
        if (!names.insert(g.name).second)
            throw ValidationError("evaluate: duplicate dataset '" + g.name +
                                  "'");
    if (mode == EvalMode::ZeroShot)
        for (const auto& g : datasets)
            for (const auto& snap : ckpt.datasets)
                if (snap.name == g.name)
                    throw ValidationError(
                        "evaluate: dataset '" + g.name +
                        "' is in the training roster; zero-shot evaluation "
                        "refused");

    EvalReport report;
    report.task = task;
    report.mode = mode;
    report.k = opts.k;

    RouterState router = ckpt.router;  // frozen statistics, local assignment
    for (auto& g : datasets) {
        std::size_t aug_epoch = 0;
        for (const auto& snap : ckpt.datasets)
            if (snap.name == g.name) aug_epoch = snap.aug_epoch;
        DatasetMetrics dm =
            task == EvalTask::Link
                ? eval_link_dataset(ckpt, std::move(g), router, opts,
                                    aug_epoch)
                : eval_node_dataset(ckpt, g, router);
        report.total_samples += dm.n_test;
        report.per_dataset.push_back(std::move(dm));
    }
    report.aggregate = aggregate_weighted(report.per_dataset);
    return report;
}

std::string report_to_json(const EvalReport& r) {
    json root;
    root["task"] = to_string(r.task);
    root["mode"] = to_string(r.mode);
    root["k"] = r.k;
    json ds = json::object();
    for (const auto& d : r.per_dataset) {
        json row;
        row["expert"] = d.expert;
        row["n_test"] = d.n_test;
        for (const auto& [key, value] : d.metrics) row[key] = value;
        ds[d.dataset] = row;
    }
    root["datasets"] = ds;
    json agg;
    for (const auto& [key, value] : r.aggregate) agg[key] = value;
    agg["n_test"] = r.total_samples;
    root["aggregate"] = agg;
    return root.dump(2) + "\n";
}

std::string report_to_csv(const EvalReport& r) {
    std::set<std::string> keys;
    for (const auto& d : r.per_dataset)
        for (const auto& [key, value] : d.metrics) keys.insert(key);

    std::ostringstream out;
    out << "dataset,expert,n_test";
    for (const auto& key : keys) out << "," << key;
    out << "\n";
    out.precision(17);
    for (const auto& d : r.per_dataset) {
        out << d.dataset << "," << d.expert << "," << d.n_test;
        for (const auto& key : keys) {
            out << ",";
            const auto it = d.metrics.find(key);
            if (it != d.metrics.end()) out << it->second;
        }
        out << "\n";
    }
    out << "aggregate,," << r.total_samples;
    for (const auto& key : keys) {
        out << ",";
        const auto it = r.aggregate.find(key);
        if (it != r.aggregate.end()) out << it->second;
    }
    out << "\n";
    return out.str();
}

}  // namespace anygraph
