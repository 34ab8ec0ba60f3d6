// anygraph command-line front end: preprocess, train, eval, route,
// gen-synth, and the suite runners. Every failure exits non-zero with a
// one-line machine-readable JSON error on stderr.
#include <sys/wait.h>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "anygraph/checkpoint.hpp"
#include "anygraph/common.hpp"
#include "anygraph/config.hpp"
#include "anygraph/dense.hpp"
#include "anygraph/embed.hpp"
#include "anygraph/eval.hpp"
#include "anygraph/graph.hpp"
#include "anygraph/router.hpp"
#include "anygraph/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace anygraph;

namespace {

void ensure_dir(const fs::path& p) {
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec)
        throw IoError("cannot create directory " + p.string() + ": " +
                      ec.message());
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + p.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("failed writing " + p.string());
}

/// ANYGRAPH_CACHE_DIR always wins over the flag so operators can relocate
/// caches without touching scripts.
std::string resolve_cache_dir(const std::string& flag_value) {
    const char* env = std::getenv("ANYGRAPH_CACHE_DIR");
    if (env != nullptr && *env != '\0') return env;
    return flag_value;
}

std::vector<GraphDataset> load_graphs(const std::vector<std::string>& paths) {
    std::vector<GraphDataset> out;
    out.reserve(paths.size());
    for (const auto& p : paths) out.push_back(load_dataset(p));
    return out;
}

EngineConfig build_config(const std::string& config_path,
                          const std::vector<std::string>& sets) {
    EngineConfig cfg =
        config_path.empty() ? default_config() : load_config(config_path);
    for (const auto& kv : sets) cfg = apply_override(cfg, kv);
    return cfg;
}

/// Mirror the trainer/eval convention: an unsplit dataset gets the config's
/// edge split so structural embeddings never see test edges.
GraphDataset maybe_split(GraphDataset g, const EngineConfig& cfg) {
    if (g.edge_split.empty() && cfg.data.test_ratio > 0.0)
        g = split_edges(g, cfg.data.test_ratio, cfg.seed);
    return g;
}

InitialEmbedding embed_cached(const GraphDataset& g,
                              const NormalizedAdjacency& adj,
                              const EmbedConfig& ecfg, std::uint64_t seed,
                              std::size_t aug_epoch,
                              const std::string& cache_dir) {
    InitialEmbedding emb;
    if (!cache_dir.empty() &&
        try_load_embedding(cache_dir, g.name, ecfg, seed, aug_epoch, emb))
        return emb;
    emb = reproject(g, adj, ecfg, seed, aug_epoch);
    if (!cache_dir.empty()) store_embedding(cache_dir, ecfg, seed, emb);
    return emb;
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    out += "'";
    return out;
}

json gen_params_json(const GenParams& p) {
    return json{{"blocks", p.blocks},
                {"p_in", p.p_in},
                {"p_out", p.p_out},
                {"m", p.m},
                {"left", p.left},
                {"p_edge", p.p_edge},
                {"grid_rows", p.grid_rows},
                {"feature_dim", p.feature_dim},
                {"feature_noise", p.feature_noise},
                {"label_train_ratio", p.label_train_ratio}};
}

/// Self-contained synthetic corpus for the scaling/ablation suites: three
/// training graphs from two families plus one held-out graph for zero-shot
/// scoring.
struct SuiteCorpus {
    std::vector<GraphDataset> train;
    GraphDataset held_out;
};

SuiteCorpus make_suite_corpus(std::uint64_t seed) {
    GenParams sbm;
    sbm.blocks = 4;
    sbm.p_in = 0.35;
    sbm.p_out = 0.02;
    sbm.feature_dim = 8;
    GenParams bip;
    bip.p_edge = 0.06;
    bip.feature_dim = 8;
    SuiteCorpus c;
    c.train.push_back(gen_synthetic("sbm", 120, sbm, seed + 1));
    c.train.push_back(gen_synthetic("sbm", 120, sbm, seed + 2));
    c.train.push_back(gen_synthetic("bipartite", 120, bip, seed + 3));
    c.held_out = gen_synthetic("sbm", 120, sbm, seed + 9);
    return c;
}

EngineConfig suite_base_config(std::uint64_t seed, std::size_t steps,
                               const std::vector<std::string>& sets) {
    EngineConfig cfg = default_config();
    cfg.seed = seed;
    cfg.model.dim = 64;
    cfg.model.layers = 2;
    cfg.model.experts = 4;
    cfg.train.batch_size = 32;
    cfg.train.lr = 1e-3;
    cfg.train.epochs = 1000000;
    cfg.train.max_steps = steps;
    cfg.train.log_every = 0;
    cfg.train.checkpoint_every = 0;
    cfg.data.test_ratio = 0.2;
    for (const auto& kv : sets) cfg = apply_override(cfg, kv);
    validate_config(cfg);
    return cfg;
}

/// Train one suite configuration from scratch and score it zero-shot on the
/// held-out graph. Returns the aggregate metric map.
std::map<std::string, double> suite_run_one(const EngineConfig& cfg,
                                            const std::string& cache_dir) {
    SuiteCorpus corpus = make_suite_corpus(cfg.seed);
    TrainerState st = init_trainer(cfg, std::move(corpus.train), cache_dir);
    train(st);
    CheckpointData ckpt = snapshot_state(st);
    EvalOptions opts;
    opts.cache_dir = cache_dir;
    const EvalReport rep = evaluate(ckpt, {corpus.held_out}, EvalTask::Link,
                                    EvalMode::ZeroShot, opts);
    return rep.aggregate;
}

int run_acceptance_binary(const fs::path& bin, const fs::path& out_dir) {
    if (!fs::exists(bin))
        throw IoError("acceptance binary not found: " + bin.string());
    const std::string cmd = shell_quote(bin.string()) + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr)
        throw IoError("failed to launch acceptance binary: " + bin.string());
    std::string captured;
    char buf[4096];
    std::size_t n = 0;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) captured.append(buf, n);
    const int rc = pclose(pipe);
    std::cout << captured;
    ensure_dir(out_dir);
    write_text(out_dir / "acceptance.txt", captured);
    if (WIFEXITED(rc)) return WEXITSTATUS(rc);
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    std::ios::sync_with_stdio(false);
    const std::string argv0 = argc > 0 ? argv[0] : "anygraph";
    int exit_code = 0;

    CLI::App app{"anygraph: a zero-shot graph foundation-model engine"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "anygraph 0.1.0");

    int workers = 0;
    app.add_option("--workers", workers,
                   "Cap worker threads for parallel-capable stages");

    // ---- preprocess ----------------------------------------------------
    struct {
        std::string config;
        std::vector<std::string> manifests;
        std::vector<std::string> sets;
        std::string cache_dir;
    } pp;
    CLI::App* pre = app.add_subcommand(
        "preprocess", "Compute and cache initial embeddings per dataset");
    pre->fallthrough();
    pre->add_option("--config", pp.config, "Engine config JSON")
        ->check(CLI::ExistingFile);
    pre->add_option("--manifest", pp.manifests, "Dataset manifest (repeat)")
        ->required();
    pre->add_option("--set", pp.sets, "Config override key=value (repeat)");
    pre->add_option("--cache-dir", pp.cache_dir,
                    "Embedding cache directory (default anygraph-cache)");
    pre->callback([&]() {
        if (workers > 0) set_worker_threads(workers);
        EngineConfig cfg = build_config(pp.config, pp.sets);
        std::string cache = resolve_cache_dir(pp.cache_dir);
        if (cache.empty()) cache = "anygraph-cache";
        ensure_dir(cache);
        write_text(fs::path(cache) / "resolved_config.json",
                   config_to_json(cfg));
        const EmbedConfig ecfg = cfg.embed_config();
        for (const auto& mpath : pp.manifests) {
            const GraphDataset g = maybe_split(load_dataset(mpath), cfg);
            const NormalizedAdjacency adj =
                normalize_adjacency(g, cfg.data.self_loops);
            InitialEmbedding emb;
            if (try_load_embedding(cache, g.name, ecfg, cfg.seed, 0, emb)) {
                std::cout << g.name << ": cache hit (" << emb.e1.rows << "x"
                          << emb.e1.cols << ")\n";
            } else {
                emb = reproject(g, adj, ecfg, cfg.seed, 0);
                store_embedding(cache, ecfg, cfg.seed, emb);
                std::cout << g.name << ": computed (" << emb.e1.rows << "x"
                          << emb.e1.cols << ")\n";
            }
        }
    });

    // ---- train ----------------------------------------------------------
    struct {
        std::string config;
        std::string resume;
        std::vector<std::string> manifests;
        std::vector<std::string> sets;
        std::vector<std::string> ablate;
        std::string out;
        std::string cache_dir;
        std::uint64_t seed = 0;
        std::uint64_t max_steps = 0;
    } tr;
    CLI::App* trn = app.add_subcommand("train", "Train a mixture checkpoint");
    trn->fallthrough();
    CLI::Option* trn_config =
        trn->add_option("--config", tr.config, "Engine config JSON")
            ->check(CLI::ExistingFile);
    trn->add_option("--resume", tr.resume, "Continue from a checkpoint")
        ->check(CLI::ExistingFile)
        ->excludes(trn_config);
    trn->add_option("--manifest", tr.manifests, "Dataset manifest (repeat)")
        ->required();
    trn->add_option("--out", tr.out, "Output directory")->required();
    trn->add_option("--set", tr.sets, "Config override key=value (repeat)");
    CLI::Option* trn_seed =
        trn->add_option("--seed", tr.seed, "Override config seed");
    CLI::Option* trn_steps = trn->add_option("--max-steps", tr.max_steps,
                                             "Override train.max_steps");
    trn->add_option("--ablate", tr.ablate, "Disable a component (repeat)")
        ->check(CLI::IsMember({"moe", "feat", "freqreg", "aug"}));
    trn->add_option("--cache-dir", tr.cache_dir, "Embedding cache directory");
    trn->callback([&]() {
        if (workers > 0) set_worker_threads(workers);
        ensure_dir(tr.out);
        const std::string cache = resolve_cache_dir(tr.cache_dir);
        const fs::path out(tr.out);

        auto apply_flag_overrides = [&](EngineConfig& cfg) {
            if (trn_seed->count() > 0) cfg.seed = tr.seed;
            if (trn_steps->count() > 0) cfg.train.max_steps = tr.max_steps;
            for (const auto& a : tr.ablate) {
                if (a == "moe") cfg.ablate.moe = true;
                if (a == "feat") cfg.ablate.feat = true;
                if (a == "freqreg") cfg.ablate.freqreg = true;
                if (a == "aug") cfg.ablate.aug = true;
            }
            validate_config(cfg);
        };

        TrainerState st;
        const bool resuming = !tr.resume.empty();
        if (resuming) {
            CheckpointData data = load_checkpoint(tr.resume);
            for (const auto& kv : tr.sets)
                data.cfg = apply_override(data.cfg, kv);
            apply_flag_overrides(data.cfg);
            write_text(out / "resolved_config.json",
                       config_to_json(data.cfg));
            st = resume_trainer(data, load_graphs(tr.manifests), cache);
        } else {
            EngineConfig cfg = build_config(tr.config, tr.sets);
            apply_flag_overrides(cfg);
            write_text(out / "resolved_config.json", config_to_json(cfg));
            st = init_trainer(cfg, load_graphs(tr.manifests), cache);
        }

        std::ofstream log_out(out / "train_log.jsonl",
                              resuming ? std::ios::app : std::ios::trunc);
        if (!log_out)
            throw IoError("cannot open " + (out / "train_log.jsonl").string());
        const fs::path ckpt_path = out / "checkpoint.bin";
        TrainHooks hooks;
        hooks.on_log = [&](const TrainLogEntry& e) {
            log_out << json{{"step", e.step},
                            {"dataset", e.dataset},
                            {"expert", e.expert},
                            {"loss", e.loss}}
                           .dump()
                    << "\n";
            log_out.flush();
        };
        hooks.on_checkpoint = [&](const TrainerState& s) {
            const CheckpointData snap = snapshot_state(s);
            save_checkpoint(ckpt_path.string(), snap);
            const std::size_t every = s.cfg.train.checkpoint_every;
            if (every > 0 && s.global_step > 0 && s.global_step % every == 0)
                save_checkpoint(
                    (out / ("checkpoint_step" +
                            std::to_string(s.global_step) + ".bin"))
                        .string(),
                    snap);
        };
        train(st, hooks);

        std::vector<std::string> names;
        for (const auto& d : st.data) names.push_back(d.graph.name);
        std::cout << json{{"checkpoint", ckpt_path.string()},
                          {"global_step", st.global_step},
                          {"epoch", st.epoch},
                          {"datasets", names}}
                         .dump(2)
                  << "\n";
    });

    // ---- eval -----------------------------------------------------------
    struct {
        std::string checkpoint;
        std::vector<std::string> manifests;
        std::string task = "link";
        std::string mode = "zero_shot";
        std::string out;
        std::string cache_dir;
        std::size_t k = kEvalTopK;
        bool include_train = false;
    } ev;
    CLI::App* evl =
        app.add_subcommand("eval", "Score a checkpoint on datasets");
    evl->fallthrough();
    evl->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")
        ->required()
        ->check(CLI::ExistingFile);
    evl->add_option("--manifest", ev.manifests, "Dataset manifest (repeat)")
        ->required();
    evl->add_option("--task", ev.task, "link|node");
    evl->add_option("--mode", ev.mode, "zero_shot|full_shot");
    evl->add_option("--out", ev.out, "Output directory")->required();
    evl->add_option("--k", ev.k, "Ranking cutoff (default 20)");
    evl->add_flag("--include-train", ev.include_train,
                  "Keep train partners in the candidate pool");
    evl->add_option("--cache-dir", ev.cache_dir, "Embedding cache directory");
    evl->callback([&]() {
        if (workers > 0) set_worker_threads(workers);
        const CheckpointData ckpt = load_checkpoint(ev.checkpoint);
        const std::vector<GraphDataset> graphs = load_graphs(ev.manifests);
        EvalOptions opts;
        opts.k = ev.k;
        opts.exclude_train = !ev.include_train;
        opts.cache_dir = resolve_cache_dir(ev.cache_dir);
        const EvalReport rep =
            evaluate(ckpt, graphs, eval_task_from_string(ev.task),
                     eval_mode_from_string(ev.mode), opts);
        ensure_dir(ev.out);
        const fs::path out(ev.out);
        write_text(out / "report.json", report_to_json(rep));
        write_text(out / "report.csv", report_to_csv(rep));
        write_text(out / "resolved_config.json", config_to_json(ckpt.cfg));
        std::cout << report_to_json(rep);
    });

    // ---- route ----------------------------------------------------------
    struct {
        std::string checkpoint;
        std::vector<std::string> manifests;
        std::string out;
        std::string cache_dir;
        std::uint64_t seed = 0;
    } rt;
    CLI::App* rte = app.add_subcommand(
        "route", "Emit the dataset x expert competence matrix as CSV");
    rte->fallthrough();
    rte->add_option("--checkpoint", rt.checkpoint, "Checkpoint file")
        ->required()
        ->check(CLI::ExistingFile);
    rte->add_option("--manifest", rt.manifests, "Dataset manifest (repeat)")
        ->required();
    rte->add_option("--out", rt.out, "CSV output file (default stdout only)");
    CLI::Option* rte_seed = rte->add_option(
        "--seed", rt.seed, "Sampling seed (default: checkpoint seed)");
    rte->add_option("--cache-dir", rt.cache_dir, "Embedding cache directory");
    rte->callback([&]() {
        if (workers > 0) set_worker_threads(workers);
        const CheckpointData ckpt = load_checkpoint(rt.checkpoint);
        const std::uint64_t seed =
            rte_seed->count() > 0 ? rt.seed : ckpt.cfg.seed;
        const EmbedConfig ecfg = ckpt.cfg.embed_config();
        const std::string cache = resolve_cache_dir(rt.cache_dir);
        const std::size_t experts = ckpt.model.num_experts();

        std::ostringstream csv;
        csv.precision(17);
        csv << "dataset";
        for (std::size_t k = 0; k < experts; ++k) csv << ",expert_" << k;
        csv << ",argmax\n";
        for (const auto& raw : load_graphs(rt.manifests)) {
            const GraphDataset g = maybe_split(raw, ckpt.cfg);
            const NormalizedAdjacency adj =
                normalize_adjacency(g, ckpt.cfg.data.self_loops);
            const InitialEmbedding emb =
                embed_cached(g, adj, ecfg, ckpt.cfg.seed, 0, cache);
            const std::vector<double> scores =
                route_scores(ckpt.model, emb, g, ckpt.router, seed);
            const std::size_t best = static_cast<std::size_t>(
                std::max_element(scores.begin(), scores.end()) -
                scores.begin());
            csv << g.name;
            for (double s : scores) csv << "," << s;
            csv << "," << best << "\n";
        }
        std::cout << csv.str();
        if (!rt.out.empty()) write_text(rt.out, csv.str());
    });

    // ---- gen-synth -------------------------------------------------------
    struct {
        std::string family;
        std::size_t size = 0;
        std::uint64_t seed = 42;
        std::string out;
        std::string name;
        GenParams params;
    } gs;
    CLI::App* gen = app.add_subcommand(
        "gen-synth", "Generate a synthetic dataset and write its manifest");
    gen->fallthrough();
    gen->add_option("--family", gs.family, "sbm|ba|bipartite|grid")
        ->required();
    gen->add_option("--size", gs.size, "Number of nodes")->required();
    gen->add_option("--seed", gs.seed, "Generator seed");
    gen->add_option("--out", gs.out, "Output directory")->required();
    CLI::Option* gen_name =
        gen->add_option("--name", gs.name, "Override the dataset name");
    gen->add_option("--blocks", gs.params.blocks, "sbm: number of blocks");
    gen->add_option("--p-in", gs.params.p_in, "sbm: within-block edge prob");
    gen->add_option("--p-out", gs.params.p_out, "sbm: cross-block edge prob");
    gen->add_option("--m", gs.params.m, "ba: edges per new node");
    gen->add_option("--left", gs.params.left, "bipartite: left side size");
    gen->add_option("--p-edge", gs.params.p_edge, "bipartite: edge prob");
    gen->add_option("--grid-rows", gs.params.grid_rows, "grid: row count");
    gen->add_option("--feature-dim", gs.params.feature_dim,
                    "Planted feature width (0 = none)");
    gen->add_option("--feature-noise", gs.params.feature_noise,
                    "Feature noise sigma");
    gen->add_option("--label-train-ratio", gs.params.label_train_ratio,
                    "Fraction of labels in the train mask");
    gen->callback([&]() {
        GraphDataset g = gen_synthetic(gs.family, gs.size, gs.params, gs.seed);
        if (gen_name->count() > 0) g.name = gs.name;
        ensure_dir(gs.out);
        const std::string manifest = save_dataset(g, gs.out);
        write_text(fs::path(gs.out) / "resolved_config.json",
                   json{{"command", "gen-synth"},
                        {"family", gs.family},
                        {"size", gs.size},
                        {"seed", gs.seed},
                        {"name", g.name},
                        {"params", gen_params_json(gs.params)}}
                       .dump(2) +
                       "\n");
        std::cout << json{{"name", g.name},
                          {"manifest", manifest},
                          {"nodes", g.num_nodes},
                          {"edges", g.edges.size()}}
                         .dump(2)
                  << "\n";
    });

    // ---- suite ------------------------------------------------------------
    struct {
        std::string name;
        std::string out;
        std::string cache_dir;
        std::string bin;
        std::vector<std::string> sets;
        std::size_t steps = 80;
        std::uint64_t seed = 42;
    } su;
    CLI::App* ste = app.add_subcommand(
        "suite", "Run the scaling ladder, ablation table, or acceptance set");
    ste->fallthrough();
    ste->add_option("name", su.name, "scaling|ablation|acceptance")
        ->required();
    ste->add_option("--out", su.out, "Output directory")->required();
    ste->add_option("--steps", su.steps, "Training steps per configuration");
    ste->add_option("--seed", su.seed, "Base seed");
    ste->add_option("--set", su.sets, "Base-config override (repeat)");
    ste->add_option("--bin", su.bin, "Path to the acceptance binary");
    ste->add_option("--cache-dir", su.cache_dir, "Embedding cache directory");
    ste->callback([&]() {
        if (workers > 0) set_worker_threads(workers);
        if (su.name == "acceptance") {
            const fs::path bin =
                su.bin.empty()
                    ? fs::path(argv0).parent_path() / "acceptance"
                    : fs::path(su.bin);
            exit_code = run_acceptance_binary(bin, su.out);
            return;
        }
        if (su.name != "scaling" && su.name != "ablation")
            throw ValidationError("unknown suite '" + su.name +
                                  "' (want scaling|ablation|acceptance)");
        ensure_dir(su.out);
        std::string cache = resolve_cache_dir(su.cache_dir);
        if (cache.empty()) cache = (fs::path(su.out) / "cache").string();
        const EngineConfig base =
            suite_base_config(su.seed, su.steps, su.sets);
        write_text(fs::path(su.out) / "resolved_config.json",
                   config_to_json(base));

        std::ostringstream csv;
        csv.precision(17);
        if (su.name == "scaling") {
            csv << "dim,layers,experts,params,recall@20,ndcg@20\n";
            for (std::size_t d : {32, 64, 128})
                for (std::size_t l : {1, 2, 4})
                    for (std::size_t k : {1, 2, 4}) {
                        EngineConfig cfg = base;
                        cfg.model.dim = d;
                        cfg.model.layers = l;
                        cfg.model.experts = k;
                        const std::size_t params = k * l * (d * d + d);
                        const auto agg = suite_run_one(cfg, cache);
                        csv << d << "," << l << "," << k << "," << params
                            << "," << agg.at("recall@20") << ","
                            << agg.at("ndcg@20") << "\n";
                    }
        } else {
            csv << "variant,recall@20,ndcg@20\n";
            const std::vector<std::pair<std::string, void (*)(EngineConfig&)>>
                variants = {
                    {"full", [](EngineConfig&) {}},
                    {"-MoE", [](EngineConfig& c) { c.ablate.moe = true; }},
                    {"-Feat", [](EngineConfig& c) { c.ablate.feat = true; }},
                    {"-FreqReg",
                     [](EngineConfig& c) { c.ablate.freqreg = true; }},
                    {"-Aug", [](EngineConfig& c) { c.ablate.aug = true; }},
                };
            for (const auto& [label, mutate] : variants) {
                EngineConfig cfg = base;
                mutate(cfg);
                const auto agg = suite_run_one(cfg, cache);
                csv << label << "," << agg.at("recall@20") << ","
                    << agg.at("ndcg@20") << "\n";
            }
        }
        std::cout << csv.str();
        write_text(fs::path(su.out) / (su.name + ".csv"), csv.str());
    });

    try {
        app.parse(argc, argv);
        return exit_code;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << json{{"kind", "usage"}, {"message", e.what()}}.dump()
                  << "\n";
        return e.get_exit_code();
    } catch (const anygraph::ParseError& e) {
        std::cerr << json{{"kind", "parse"}, {"message", e.what()}}.dump()
                  << "\n";
    } catch (const ValidationError& e) {
        std::cerr << json{{"kind", "validation"}, {"message", e.what()}}.dump()
                  << "\n";
    } catch (const ConfigError& e) {
        std::cerr << json{{"kind", "config"}, {"message", e.what()}}.dump()
                  << "\n";
    } catch (const IoError& e) {
        std::cerr << json{{"kind", "io"}, {"message", e.what()}}.dump()
                  << "\n";
    } catch (const Error& e) {
        std::cerr << json{{"kind", "error"}, {"message", e.what()}}.dump()
                  << "\n";
    } catch (const std::exception& e) {
        std::cerr << json{{"kind", "internal"}, {"message", e.what()}}.dump()
                  << "\n";
    }
    return 1;
}
