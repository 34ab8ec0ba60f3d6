#include "anygraph/embed.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <json.hpp>

#include "anygraph/matrix_io.hpp"
#include "anygraph/rng.hpp"
#include "anygraph/svd.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace anygraph {

DenseMatrix flip_columns(const DenseMatrix& x) {
    DenseMatrix y(x.rows, x.cols);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < x.cols; ++j)
            y(i, x.cols - 1 - j) = x(i, j);
    return y;
}

DenseMatrix pad_to_dim(const DenseMatrix& u, const std::vector<double>& s,
                       std::size_t d) {
    if (u.cols != s.size())
        throw ValidationError("pad_to_dim: factor width does not match spectrum");
    if (u.cols > d)
        throw ValidationError("pad_to_dim: rank exceeds target dimension");
    DenseMatrix y(u.rows, d, 0.0);
    for (std::size_t j = 0; j < u.cols; ++j) {
        const double scale = std::sqrt(s[j]);
        for (std::size_t i = 0; i < u.rows; ++i) y(i, j) = u(i, j) * scale;
    }
    return y;
}

DenseMatrix build_e0(const GraphDataset& g, const NormalizedAdjacency& adj,
                     const EmbedConfig& cfg, std::uint64_t seed,
                     std::size_t aug_epoch) {
    if (cfg.dim < 1) throw ValidationError("build_e0: dim must be >= 1");
    if (adj.mat.rows != g.num_nodes)
        throw ValidationError("build_e0: adjacency does not match dataset");
    const std::string base_tag =
        "dataset:" + g.name + ":svd:" + std::to_string(aug_epoch);

    // Adjacency terms: one SVD yields both U_A sqrt(L) and V_A sqrt(L).
    const std::size_t rank_a = std::min(cfg.dim, g.num_nodes);
    RngStream adj_rng(seed, base_tag + ":adj");
    const SvdFactors fa =
        truncated_svd(adj.mat, rank_a, cfg.power_iters, cfg.oversample, adj_rng);
    DenseMatrix sum = pad_to_dim(fa.u, fa.s, cfg.dim);
    add_inplace(sum, pad_to_dim(fa.v, fa.s, cfg.dim));

    if (cfg.use_features && g.has_features()) {
        DenseMatrix f = g.features;
        if (cfg.center_features) {
            for (std::size_t j = 0; j < f.cols; ++j) {
                double mean = 0.0;
                for (std::size_t i = 0; i < f.rows; ++i) mean += f(i, j);
                mean /= static_cast<double>(f.rows);
                for (std::size_t i = 0; i < f.rows; ++i) f(i, j) -= mean;
            }
        }
        const std::size_t rank_f =
            std::min(cfg.dim, std::min(f.rows, f.cols));
        RngStream feat_rng(seed, base_tag + ":feat");
        const SvdFactors ff =
            truncated_svd(f, rank_f, cfg.power_iters, cfg.oversample, feat_rng);
        add_inplace(sum, flip_columns(pad_to_dim(ff.u, ff.s, cfg.dim)));
    }

    return row_layernorm(sum, cfg.layernorm_eps);
}

DenseMatrix build_e1(const DenseMatrix& e0, const NormalizedAdjacency& adj,
                     std::size_t hops) {
    if (hops < 1) throw ValidationError("build_e1: hops must be >= 1");
    if (adj.mat.cols != e0.rows)
        throw ValidationError("build_e1: adjacency and E0 shapes disagree");
    DenseMatrix cur = e0;
    DenseMatrix e1(e0.rows, e0.cols, 0.0);
    for (std::size_t l = 1; l <= hops; ++l) {
        cur = spmm(adj.mat, cur);
        add_inplace(e1, cur);
    }
    return e1;
}

InitialEmbedding reproject(const GraphDataset& g,
                           const NormalizedAdjacency& adj,
                           const EmbedConfig& cfg, std::uint64_t seed,
                           std::size_t aug_epoch) {
    InitialEmbedding out;
    out.e1 = build_e1(build_e0(g, adj, cfg, seed, aug_epoch), adj, cfg.hops);
    // Round to f32 so an embedding loaded back from the cache carries exactly
    // the same values as one computed in process.
    for (double& v : out.e1.data) v = static_cast<double>(static_cast<float>(v));
    out.dataset = g.name;
    out.aug_epoch = aug_epoch;
    out.dim = cfg.dim;
    out.hops = cfg.hops;
    return out;
}

std::string embed_flags(const EmbedConfig& cfg) {
    std::string flags = cfg.use_features ? "feat" : "nofeat";
    if (cfg.center_features) flags += "+center";
    return flags;
}

std::string embed_cache_basename(const std::string& dataset,
                                 const EmbedConfig& cfg, std::uint64_t seed,
                                 std::size_t aug_epoch) {
    return dataset + "-d" + std::to_string(cfg.dim) + "-L" +
           std::to_string(cfg.hops) + "-e" + std::to_string(aug_epoch) + "-s" +
           std::to_string(seed) + "-" + embed_flags(cfg);
}

bool try_load_embedding(const std::string& cache_dir,
                        const std::string& dataset, const EmbedConfig& cfg,
                        std::uint64_t seed, std::size_t aug_epoch,
                        InitialEmbedding& out) {
    const fs::path base =
        fs::path(cache_dir) / embed_cache_basename(dataset, cfg, seed, aug_epoch);
    const fs::path bin = base.string() + ".e1.bin";
    const fs::path meta = base.string() + ".e1.json";
    if (!fs::exists(bin) || !fs::exists(meta)) return false;
    json side;
    try {
        side = json::parse(read_text_file(meta.string()));
    } catch (const json::parse_error&) {
        return false;  // corrupt sidecar counts as a miss
    }
    if (!side.is_object() || side.value("dataset", "") != dataset ||
        side.value("dim", std::size_t{0}) != cfg.dim ||
        side.value("hops", std::size_t{0}) != cfg.hops ||
        side.value("aug_epoch", std::size_t{999999}) != aug_epoch ||
        side.value("seed", std::uint64_t{0}) != seed ||
        side.value("flags", "") != embed_flags(cfg))
        return false;
    DenseMatrix m = read_matrix_f32(bin.string());
    if (m.cols != cfg.dim) return false;
    out.e1 = std::move(m);
    out.dataset = dataset;
    out.aug_epoch = aug_epoch;
    out.dim = cfg.dim;
    out.hops = cfg.hops;
    return true;
}

void store_embedding(const std::string& cache_dir, const EmbedConfig& cfg,
                     std::uint64_t seed, const InitialEmbedding& emb) {
    fs::create_directories(cache_dir);
    const fs::path base =
        fs::path(cache_dir) /
        embed_cache_basename(emb.dataset, cfg, seed, emb.aug_epoch);
    write_matrix_f32(base.string() + ".e1.bin", emb.e1);
    json side;
    side["dataset"] = emb.dataset;
    side["dim"] = emb.dim;
    side["hops"] = emb.hops;
    side["aug_epoch"] = emb.aug_epoch;
    side["seed"] = seed;
    side["flags"] = embed_flags(cfg);
    write_text_file(base.string() + ".e1.json", side.dump(2) + "\n");
}

}  // namespace anygraph
