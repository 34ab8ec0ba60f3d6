#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "anygraph/common.hpp"
#include "anygraph/dense.hpp"

namespace anygraph {

/// One expert: an L'-layer residual MLP. Each layer computes
///   y = row_layernorm( dropout(relu(x W + b)) + x )
/// with square d x d weights so the residual needs no projection.
struct ExpertParams {
    std::size_t dim = 0;
    std::size_t expert_id = 0;
    bool affine = false;  // learned per-layer scale/shift on the layernorm
    std::vector<DenseMatrix> w;             // L' matrices, d x d
    std::vector<std::vector<double>> b;     // L' vectors, length d
    std::vector<std::vector<double>> gamma; // affine only
    std::vector<std::vector<double>> beta;  // affine only

    std::size_t layers() const { return w.size(); }
};

/// Per-layer cache for backprop. Masks are stored row-major (rows*d).
struct LayerTrace {
    DenseMatrix input;
    DenseMatrix yhat;  // normalized activations before any affine scale
    std::vector<std::uint8_t> relu_mask;
    std::vector<std::uint8_t> drop_mask;  // empty when dropout_p == 0
    std::vector<double> istd;             // per-row 1/sqrt(var + eps)
};

struct ForwardTrace {
    std::vector<LayerTrace> layers;
    double dropout_p = 0.0;
};

/// Gradient accumulator shaped like ExpertParams.
struct ExpertGrads {
    std::vector<DenseMatrix> w;
    std::vector<std::vector<double>> b;
    std::vector<std::vector<double>> gamma;
    std::vector<std::vector<double>> beta;
};

inline constexpr double kExpertLayernormEps = 1e-6;

/// Xavier-uniform weights, a = sqrt(6 / (d + d)); zero biases. Each layer
/// draws from the stream "expert:<id>:init:<layer>".
ExpertParams init_params(std::size_t d, std::size_t layers,
                         std::size_t expert_id, std::uint64_t seed,
                         bool affine = false);

ExpertGrads zero_grads(const ExpertParams& p);

/// Deterministic inference pass: no dropout, no trace.
DenseMatrix forward_eval(const ExpertParams& p, const DenseMatrix& x);

/// Training pass with inverted dropout (kept units scaled by 1/(1-p)).
/// Mask draws come from the stream "expert:<id>:dropout" keyed by `seed`,
/// consumed row-major layer by layer.
DenseMatrix forward_train(const ExpertParams& p, const DenseMatrix& x,
                          double dropout_p, std::uint64_t seed,
                          ForwardTrace& trace);

/// Exact gradients for the traced forward pass. Returns parameter grads and
/// the gradient with respect to the input batch.
std::pair<ExpertGrads, DenseMatrix> backward(const ExpertParams& p,
                                             const ForwardTrace& trace,
                                             const DenseMatrix& grad_out);

/// y_hat(i, j) = dot(emb row i, emb row j).
std::vector<double> score_pairs(
    const DenseMatrix& emb,
    const std::vector<std::pair<NodeId, NodeId>>& pairs);

/// The full mixture: K experts plus shared shape metadata.
struct MoeModel {
    std::size_t dim = 0;
    std::size_t layers = 0;
    bool affine = false;
    std::vector<ExpertParams> experts;

    std::size_t num_experts() const { return experts.size(); }
};

MoeModel init_model(std::size_t d, std::size_t layers,
                    std::size_t num_experts, std::uint64_t seed,
                    bool affine = false);

}  // namespace anygraph
