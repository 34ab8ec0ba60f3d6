#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "anygraph/dense.hpp"
#include "anygraph/graph.hpp"

namespace anygraph {

struct EmbedConfig {
    std::size_t dim = 512;       // d, the model width
    std::size_t hops = 2;        // L, propagation depth for E1
    std::size_t power_iters = 2; // SVD subspace iterations
    std::size_t oversample = 8;  // SVD sketch slack
    bool use_features = true;    // off = structure-only variant
    bool center_features = false;
    double layernorm_eps = 1e-6;
};

/// The per-dataset initial embedding E1, versioned by augmentation epoch.
struct InitialEmbedding {
    DenseMatrix e1;
    std::string dataset;
    std::size_t aug_epoch = 0;
    std::size_t dim = 0;
    std::size_t hops = 0;
};

/// Column reversal: column j moves to column d-1-j of the output. Aligns the
/// dominant adjacency directions with the least dominant feature directions
/// when composed after pad_to_dim.
DenseMatrix flip_columns(const DenseMatrix& x);

/// u is n x r with singular values s (r <= d). Output column j < r is
///// u[:,j] * sqrt(s[j]); columns r..d-1 are zero.
DenseMatrix pad_to_dim(const DenseMatrix& u, const std::vector<double>& s,
                       std::size_t d);

/// E0 = layernorm( U_A sqrt(L_A) + V_A sqrt(L_A) + flip(U_F sqrt(L_F)) ).
/// The adjacency terms share one SVD; the feature term is dropped when the
/// dataset has no features or use_features is off. Effective SVD rank is
/// min(d, smallest dimension of the factored matrix), applied per matrix.
DenseMatrix build_e0(const GraphDataset& g, const NormalizedAdjacency& adj,
                     const EmbedConfig& cfg, std::uint64_t seed,
                     std::size_t aug_epoch);

/// E1 = sum_{l=1..L} A_hat^l E0. The l = 0 term is excluded.
DenseMatrix build_e1(const DenseMatrix& e0, const NormalizedAdjacency& adj,
                     std::size_t hops);

/// Full projection for one dataset at a given augmentation epoch. All SVD
/// randomness comes from streams tagged "dataset:<name>:svd:<aug_epoch>",
/// so the result is a pure function of (g, cfg, seed, aug_epoch). E1 values
/// are rounded to f32 precision so cached and fresh results are bit-equal.
InitialEmbedding reproject(const GraphDataset& g,
                           const NormalizedAdjacency& adj,
                           const EmbedConfig& cfg, std::uint64_t seed,
                           std::size_t aug_epoch);

/// On-disk embedding cache. Files are keyed by every input that affects the
/// matrix; a stale or mismatched sidecar is treated as a miss.
std::string embed_flags(const EmbedConfig& cfg);
std::string embed_cache_basename(const std::string& dataset,
                                 const EmbedConfig& cfg, std::uint64_t seed,
                                 std::size_t aug_epoch);
bool try_load_embedding(const std::string& cache_dir,
                        const std::string& dataset, const EmbedConfig& cfg,
                        std::uint64_t seed, std::size_t aug_epoch,
                        InitialEmbedding& out);
void store_embedding(const std::string& cache_dir, const EmbedConfig& cfg,
                     std::uint64_t seed, const InitialEmbedding& emb);

}  // namespace anygraph
