#pragma once

#include <cstdint>
#include <string>

#include "anygraph/common.hpp"
#include "anygraph/embed.hpp"

namespace anygraph {

enum class NegMode { Auto, Full, Sampled };

std::string to_string(NegMode m);
NegMode neg_mode_from_string(const std::string& s);

/// Every knob of a run. Serialized as nested JSON; unknown keys anywhere in
/// the document are rejected so typos cannot silently fall back to defaults.
struct EngineConfig {
    std::uint64_t seed = 42;

    struct Model {
        std::size_t dim = 512;
        std::size_t layers = 8;
        std::size_t experts = 8;
        bool affine_layernorm = false;
    } model;

    struct Embed {
        std::size_t hops = 2;
        std::size_t power_iters = 2;
        std::size_t oversample = 8;
        bool use_features = true;
    } embed;

    struct Train {
        std::size_t batch_size = 4096;
        double lr = 1e-4;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double adam_eps = 1e-8;
        std::size_t epochs = 1;
        // Hard cap on total batches; 0 stops at initialization. The default
        // leaves the epoch budget in charge.
        std::size_t max_steps = SIZE_MAX;
        NegMode neg_mode = NegMode::Auto;
        std::size_t num_neg = 256;
        double dropout = 0.1;
        std::size_t checkpoint_every = 0;  // steps; 0 = final only
        std::size_t log_every = 50;
    } train;

    struct Data {
        double test_ratio = 0.0;  // 0 = use the split stored in the manifest
        bool self_loops = true;
    } data;

    struct Router {
        double rho = 0.2;
        std::size_t sample_cap = 1024;
    } router;

    struct Ablate {
        bool moe = false;      // force K = 1
        bool feat = false;     // ignore node features in E0
        bool freqreg = false;  // rho = 0
        bool aug = false;      // no reprojection / rerouting
    } ablate;

    /// The embedding settings with ablations folded in (dim tracks model.dim).
    EmbedConfig embed_config() const;
    /// K after the moe ablation.
    std::size_t effective_experts() const;
    /// rho after the freqreg ablation.
    double effective_rho() const;
};

EngineConfig default_config();

/// Parse + validate. Throws ConfigError on unknown keys, wrong types, or
/// out-of-range values; ParseError on malformed JSON.
EngineConfig parse_config(const std::string& json_text);
EngineConfig load_config(const std::string& path);

/// Apply one "dotted.path=value" override (values parsed as JSON when
/// possible, else taken as strings). Returns the updated config, revalidated.
EngineConfig apply_override(const EngineConfig& cfg,
                            const std::string& assignment);

/// Resolved snapshot: round-trips through parse_config unchanged.
std::string config_to_json(const EngineConfig& cfg);

void validate_config(const EngineConfig& cfg);

}  // namespace anygraph
