#include "anygraph/expert.hpp"

#include <cmath>
#include <string>

#include "anygraph/rng.hpp"

namespace anygraph {

namespace {

void check_params(const ExpertParams& p) {
    if (p.dim == 0 || p.w.empty())
        throw ValidationError("expert: empty parameter set");
    for (const auto& w : p.w)
        if (w.rows != p.dim || w.cols != p.dim)
            throw ValidationError("expert: weight matrix is not d x d");
}

// One residual block. `rng` is null in eval mode (or when dropout_p == 0),
// `out_trace` is null in eval mode.
DenseMatrix run_layer(const ExpertParams& p, std::size_t layer,
                      const DenseMatrix& x, double dropout_p, RngStream* rng,
                      LayerTrace* out_trace) {
    const std::size_t d = p.dim;
    DenseMatrix z = matmul(x, p.w[layer]);
    const auto& bias = p.b[layer];
    for (std::size_t i = 0; i < z.rows; ++i) {
        double* zr = z.row(i);
        for (std::size_t j = 0; j < d; ++j) zr[j] += bias[j];
    }

    std::vector<std::uint8_t> relu_mask(z.rows * d);
    for (std::size_t t = 0; t < z.data.size(); ++t) {
        const bool on = z.data[t] > 0.0;  // derivative at exactly 0 is 0
        relu_mask[t] = on ? 1 : 0;
        if (!on) z.data[t] = 0.0;
    }

    std::vector<std::uint8_t> drop_mask;
    if (rng != nullptr && dropout_p > 0.0) {
        drop_mask.resize(z.data.size());
        const double scale = 1.0 / (1.0 - dropout_p);
        for (std::size_t t = 0; t < z.data.size(); ++t) {
            const bool keep = rng->next_real() >= dropout_p;
            drop_mask[t] = keep ? 1 : 0;
            z.data[t] = keep ? z.data[t] * scale : 0.0;
        }
    }

    for (std::size_t t = 0; t < z.data.size(); ++t) z.data[t] += x.data[t];

    // Row layernorm, keeping the statistics backward needs.
    DenseMatrix y(z.rows, d);
    std::vector<double> istd(z.rows);
    for (std::size_t i = 0; i < z.rows; ++i) {
        const double* zr = z.row(i);
        double mean = 0.0;
        for (std::size_t j = 0; j < d; ++j) mean += zr[j];
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j)
            var += (zr[j] - mean) * (zr[j] - mean);
        var /= static_cast<double>(d);
        istd[i] = 1.0 / std::sqrt(var + kExpertLayernormEps);
        double* yr = y.row(i);
        for (std::size_t j = 0; j < d; ++j) yr[j] = (zr[j] - mean) * istd[i];
    }

    if (out_trace != nullptr) {
        out_trace->input = x;
        out_trace->yhat = y;
        out_trace->relu_mask = std::move(relu_mask);
        out_trace->drop_mask = std::move(drop_mask);
        out_trace->istd = std::move(istd);
    }

    if (p.affine) {
        const auto& gamma = p.gamma[layer];
        const auto& beta = p.beta[layer];
        for (std::size_t i = 0; i < y.rows; ++i) {
            double* yr = y.row(i);
            for (std::size_t j = 0; j < d; ++j)
                yr[j] = yr[j] * gamma[j] + beta[j];
        }
    }
    return y;
}

DenseMatrix run_forward(const ExpertParams& p, const DenseMatrix& x,
                        double dropout_p, RngStream* rng,
                        ForwardTrace* trace) {
    check_params(p);
    if (x.cols != p.dim)
        throw ValidationError("expert: input width does not match d");
    if (!all_finite(x)) throw ValidationError("expert: non-finite input");
    if (dropout_p < 0.0 || dropout_p >= 1.0)
        throw ValidationError("expert: dropout_p must lie in [0, 1)");

    if (trace != nullptr) {
        trace->layers.assign(p.layers(), LayerTrace{});
        trace->dropout_p = dropout_p;
    }
    DenseMatrix cur = x;
    for (std::size_t l = 0; l < p.layers(); ++l)
        cur = run_layer(p, l, cur, dropout_p, rng,
                        trace != nullptr ? &trace->layers[l] : nullptr);
    return cur;
}

}  // namespace

ExpertParams init_params(std::size_t d, std::size_t layers,
                         std::size_t expert_id, std::uint64_t seed,
                         bool affine) {
    if (d < 1 || layers < 1)
        throw ConfigError("expert: d and layer count must be at least 1");
    ExpertParams p;
    p.dim = d;
    p.expert_id = expert_id;
    p.affine = affine;
    const double a = std::sqrt(6.0 / static_cast<double>(d + d));
    for (std::size_t l = 0; l < layers; ++l) {
        RngStream rng(seed, "expert:" + std::to_string(expert_id) +
                                ":init:" + std::to_string(l));
        DenseMatrix w(d, d);
        for (double& v : w.data) v = rng.next_uniform(-a, a);
        p.w.push_back(std::move(w));
        p.b.emplace_back(d, 0.0);
        if (affine) {
            p.gamma.emplace_back(d, 1.0);
            p.beta.emplace_back(d, 0.0);
        }
    }
    return p;
}

ExpertGrads zero_grads(const ExpertParams& p) {
    ExpertGrads g;
    for (std::size_t l = 0; l < p.layers(); ++l) {
        g.w.emplace_back(p.dim, p.dim, 0.0);
        g.b.emplace_back(p.dim, 0.0);
        if (p.affine) {
            g.gamma.emplace_back(p.dim, 0.0);
            g.beta.emplace_back(p.dim, 0.0);
        }
    }
    return g;
}

DenseMatrix forward_eval(const ExpertParams& p, const DenseMatrix& x) {
    return run_forward(p, x, 0.0, nullptr, nullptr);
}

DenseMatrix forward_train(const ExpertParams& p, const DenseMatrix& x,
                          double dropout_p, std::uint64_t seed,
                          ForwardTrace& trace) {
    if (dropout_p > 0.0) {
        RngStream rng(seed,
                      "expert:" + std::to_string(p.expert_id) + ":dropout");
        return run_forward(p, x, dropout_p, &rng, &trace);
    }
    return run_forward(p, x, 0.0, nullptr, &trace);
}

std::pair<ExpertGrads, DenseMatrix> backward(const ExpertParams& p,
                                             const ForwardTrace& trace,
                                             const DenseMatrix& grad_out) {
    check_params(p);
    if (trace.layers.size() != p.layers())
        throw ValidationError("expert: trace does not match parameter set");
    const std::size_t d = p.dim;
    const std::size_t rows = trace.layers.front().input.rows;
    if (grad_out.rows != rows || grad_out.cols != d)
        throw ValidationError("expert: grad_out shape mismatch");

    ExpertGrads grads = zero_grads(p);
    const double drop_scale =
        trace.dropout_p > 0.0 ? 1.0 / (1.0 - trace.dropout_p) : 1.0;

    DenseMatrix g = grad_out;
    for (std::size_t l = p.layers(); l-- > 0;) {
        const LayerTrace& t = trace.layers[l];
        if (t.input.rows != rows || t.yhat.rows != rows)
            throw ValidationError("expert: trace shape mismatch");

        if (p.affine) {
            const auto& gamma = p.gamma[l];
            auto& dgamma = grads.gamma[l];
            auto& dbeta = grads.beta[l];
            for (std::size_t i = 0; i < rows; ++i) {
                double* gr = g.row(i);
                const double* yr = t.yhat.row(i);
                for (std::size_t j = 0; j < d; ++j) {
                    dgamma[j] += gr[j] * yr[j];
                    dbeta[j] += gr[j];
                    gr[j] *= gamma[j];
                }
            }
        }

        // Layernorm backward:
        //   ds = istd * (g - mean(g) - yhat * mean(g .* yhat))
        DenseMatrix ds(rows, d);
        for (std::size_t i = 0; i < rows; ++i) {
            const double* gr = g.row(i);
            const double* yr = t.yhat.row(i);
            double mg = 0.0, mgy = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                mg += gr[j];
                mgy += gr[j] * yr[j];
            }
            mg /= static_cast<double>(d);
            mgy /= static_cast<double>(d);
            double* dr = ds.row(i);
            for (std::size_t j = 0; j < d; ++j)
                dr[j] = t.istd[i] * (gr[j] - mg - yr[j] * mgy);
        }

        // Residual splits ds into the branch gradient and a skip term.
        DenseMatrix dz = ds;
        if (!t.drop_mask.empty())
            for (std::size_t idx = 0; idx < dz.data.size(); ++idx)
                dz.data[idx] =
                    t.drop_mask[idx] ? dz.data[idx] * drop_scale : 0.0;
        for (std::size_t idx = 0; idx < dz.data.size(); ++idx)
            if (!t.relu_mask[idx]) dz.data[idx] = 0.0;

        grads.w[l] = matmul_tn(t.input, dz);
        auto& db = grads.b[l];
        for (std::size_t i = 0; i < rows; ++i) {
            const double* dzr = dz.row(i);
            for (std::size_t j = 0; j < d; ++j) db[j] += dzr[j];
        }

        DenseMatrix gin = matmul_nt(dz, p.w[l]);
        add_inplace(gin, ds);
        g = std::move(gin);
    }
    return {std::move(grads), std::move(g)};
}

std::vector<double> score_pairs(
    const DenseMatrix& emb,
    const std::vector<std::pair<NodeId, NodeId>>& pairs) {
    std::vector<double> out;
    out.reserve(pairs.size());
    for (const auto& [i, j] : pairs) {
        if (i >= emb.rows || j >= emb.rows)
            throw ValidationError("score_pairs: node index out of range");
        const double* a = emb.row(i);
        const double* b = emb.row(j);
        double s = 0.0;
        for (std::size_t c = 0; c < emb.cols; ++c) s += a[c] * b[c];
        out.push_back(s);
    }
    return out;
}

MoeModel init_model(std::size_t d, std::size_t layers,
                    std::size_t num_experts, std::uint64_t seed, bool affine) {
    if (num_experts < 1)
        throw ConfigError("model: need at least one expert");
    MoeModel m;
    m.dim = d;
    m.layers = layers;
    m.affine = affine;
    for (std::size_t k = 0; k < num_experts; ++k)
        m.experts.push_back(init_params(d, layers, k, seed, affine));
    return m;
}

}  // namespace anygraph
