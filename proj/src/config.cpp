#include "anygraph/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace anygraph {

using nlohmann::json;

std::string to_string(NegMode m) {
    switch (m) {
        case NegMode::Auto: return "auto";
        case NegMode::Full: return "full";
        case NegMode::Sampled: return "sampled";
    }
    throw ConfigError("unreachable neg_mode");
}

NegMode neg_mode_from_string(const std::string& s) {
    if (s == "auto") return NegMode::Auto;
    if (s == "full") return NegMode::Full;
    if (s == "sampled") return NegMode::Sampled;
    throw ConfigError("neg_mode must be auto, full, or sampled (got '" + s +
                      "')");
}

EmbedConfig EngineConfig::embed_config() const {
    EmbedConfig e;
    e.dim = model.dim;
    e.hops = embed.hops;
    e.power_iters = embed.power_iters;
    e.oversample = embed.oversample;
    e.use_features = embed.use_features && !ablate.feat;
    return e;
}

std::size_t EngineConfig::effective_experts() const {
    return ablate.moe ? 1 : model.experts;
}

double EngineConfig::effective_rho() const {
    return ablate.freqreg ? 0.0 : router.rho;
}

EngineConfig default_config() { return EngineConfig{}; }

namespace {

void expect_keys(const json& obj, const std::string& where,
                 const std::set<std::string>& allowed) {
    if (!obj.is_object())
        throw ConfigError("config: '" + where + "' must be an object");
    for (const auto& item : obj.items())
        if (!allowed.count(item.key()))
            throw ConfigError("config: unknown key '" + where + "." +
                              item.key() + "'");
}

template <typename T>
void read_num(const json& obj, const std::string& where, const char* key,
              T& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean())
            throw ConfigError("config: '" + where + "." + key +
                              "' must be a boolean");
        out = v.get<bool>();
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number())
            throw ConfigError("config: '" + where + "." + key +
                              "' must be a number");
        out = v.get<double>();
    } else {
        if (!v.is_number_unsigned())
            throw ConfigError("config: '" + where + "." + key +
                              "' must be a non-negative integer");
        out = v.get<T>();
    }
}

EngineConfig from_json(const json& root) {
    EngineConfig cfg;
    expect_keys(root, "$",
                {"seed", "model", "embed", "train", "data", "router",
                 "ablate"});
    if (root.contains("seed")) {
        if (!root.at("seed").is_number_unsigned())
            throw ConfigError("config: 'seed' must be a non-negative integer");
        cfg.seed = root.at("seed").get<std::uint64_t>();
    }
    if (root.contains("model")) {
        const json& m = root.at("model");
        expect_keys(m, "model", {"dim", "layers", "experts",
                                 "affine_layernorm"});
        read_num(m, "model", "dim", cfg.model.dim);
        read_num(m, "model", "layers", cfg.model.layers);
        read_num(m, "model", "experts", cfg.model.experts);
        read_num(m, "model", "affine_layernorm", cfg.model.affine_layernorm);
    }
    if (root.contains("embed")) {
        const json& e = root.at("embed");
        expect_keys(e, "embed",
                    {"hops", "power_iters", "oversample", "use_features"});
        read_num(e, "embed", "hops", cfg.embed.hops);
        read_num(e, "embed", "power_iters", cfg.embed.power_iters);
        read_num(e, "embed", "oversample", cfg.embed.oversample);
        read_num(e, "embed", "use_features", cfg.embed.use_features);
    }
    if (root.contains("train")) {
        const json& t = root.at("train");
        expect_keys(t, "train",
                    {"batch_size", "lr", "beta1", "beta2", "adam_eps",
                     "epochs", "max_steps", "neg_mode", "num_neg", "dropout",
                     "checkpoint_every", "log_every"});
        read_num(t, "train", "batch_size", cfg.train.batch_size);
        read_num(t, "train", "lr", cfg.train.lr);
        read_num(t, "train", "beta1", cfg.train.beta1);
        read_num(t, "train", "beta2", cfg.train.beta2);
        read_num(t, "train", "adam_eps", cfg.train.adam_eps);
        read_num(t, "train", "epochs", cfg.train.epochs);
        read_num(t, "train", "max_steps", cfg.train.max_steps);
        read_num(t, "train", "num_neg", cfg.train.num_neg);
        read_num(t, "train", "dropout", cfg.train.dropout);
        read_num(t, "train", "checkpoint_every", cfg.train.checkpoint_every);
        read_num(t, "train", "log_every", cfg.train.log_every);
        if (t.contains("neg_mode")) {
            if (!t.at("neg_mode").is_string())
                throw ConfigError("config: 'train.neg_mode' must be a string");
            cfg.train.neg_mode =
                neg_mode_from_string(t.at("neg_mode").get<std::string>());
        }
    }
    if (root.contains("data")) {
        const json& d = root.at("data");
        expect_keys(d, "data", {"test_ratio", "self_loops"});
        read_num(d, "data", "test_ratio", cfg.data.test_ratio);
        read_num(d, "data", "self_loops", cfg.data.self_loops);
    }
    if (root.contains("router")) {
        const json& r = root.at("router");
        expect_keys(r, "router", {"rho", "sample_cap"});
        read_num(r, "router", "rho", cfg.router.rho);
        read_num(r, "router", "sample_cap", cfg.router.sample_cap);
    }
    if (root.contains("ablate")) {
        const json& a = root.at("ablate");
        expect_keys(a, "ablate", {"moe", "feat", "freqreg", "aug"});
        read_num(a, "ablate", "moe", cfg.ablate.moe);
        read_num(a, "ablate", "feat", cfg.ablate.feat);
        read_num(a, "ablate", "freqreg", cfg.ablate.freqreg);
        read_num(a, "ablate", "aug", cfg.ablate.aug);
    }
    validate_config(cfg);
    return cfg;
}

}  // namespace

void validate_config(const EngineConfig& cfg) {
    if (cfg.model.dim < 1) throw ConfigError("config: model.dim must be >= 1");
    if (cfg.model.layers < 1)
        throw ConfigError("config: model.layers must be >= 1");
    if (cfg.model.experts < 1)
        throw ConfigError("config: model.experts must be >= 1");
    if (cfg.embed.hops < 1)
        throw ConfigError("config: embed.hops must be >= 1");
    if (cfg.train.batch_size < 1)
        throw ConfigError("config: train.batch_size must be >= 1");
    if (!(cfg.train.lr > 0.0))
        throw ConfigError("config: train.lr must be positive");
    if (cfg.train.beta1 < 0.0 || cfg.train.beta1 >= 1.0 ||
        cfg.train.beta2 < 0.0 || cfg.train.beta2 >= 1.0)
        throw ConfigError("config: adam betas must lie in [0, 1)");
    if (!(cfg.train.adam_eps > 0.0))
        throw ConfigError("config: train.adam_eps must be positive");
    if (cfg.train.num_neg < 1)
        throw ConfigError("config: train.num_neg must be >= 1");
    if (cfg.train.dropout < 0.0 || cfg.train.dropout >= 1.0)
        throw ConfigError("config: train.dropout must lie in [0, 1)");
    if (cfg.data.test_ratio < 0.0 || cfg.data.test_ratio >= 1.0)
        throw ConfigError("config: data.test_ratio must lie in [0, 1)");
    if (cfg.router.rho < 0.0 || cfg.router.rho > 2.0)
        throw ConfigError("config: router.rho must lie in [0, 2]");
    if (cfg.router.sample_cap < 1)
        throw ConfigError("config: router.sample_cap must be >= 1");
}

EngineConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config: invalid JSON: ") + e.what());
    }
    return from_json(root);
}

EngineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

EngineConfig apply_override(const EngineConfig& cfg,
                            const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override must look like path.to.key=value (got '" +
                          assignment + "')");
    const std::string path = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);

    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception&) {
        value = raw;  // unquoted strings like neg_mode=full
    }

    json root = json::parse(config_to_json(cfg));
    json* node = &root;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string part = path.substr(
            start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty())
            throw ConfigError("override: empty path segment in '" + path +
                              "'");
        if (dot == std::string::npos) {
            if (!node->contains(part))
                throw ConfigError("override: unknown key '" + path + "'");
            (*node)[part] = value;
            break;
        }
        if (!node->contains(part) || !(*node)[part].is_object())
            throw ConfigError("override: unknown key '" + path + "'");
        node = &(*node)[part];
        start = dot + 1;
    }
    return from_json(root);
}

std::string config_to_json(const EngineConfig& cfg) {
    json root;
    root["seed"] = cfg.seed;
    root["model"] = {{"dim", cfg.model.dim},
                     {"layers", cfg.model.layers},
                     {"experts", cfg.model.experts},
                     {"affine_layernorm", cfg.model.affine_layernorm}};
    root["embed"] = {{"hops", cfg.embed.hops},
                     {"power_iters", cfg.embed.power_iters},
                     {"oversample", cfg.embed.oversample},
                     {"use_features", cfg.embed.use_features}};
    root["train"] = {{"batch_size", cfg.train.batch_size},
                     {"lr", cfg.train.lr},
                     {"beta1", cfg.train.beta1},
                     {"beta2", cfg.train.beta2},
                     {"adam_eps", cfg.train.adam_eps},
                     {"epochs", cfg.train.epochs},
                     {"max_steps", cfg.train.max_steps},
                     {"neg_mode", to_string(cfg.train.neg_mode)},
                     {"num_neg", cfg.train.num_neg},
                     {"dropout", cfg.train.dropout},
                     {"checkpoint_every", cfg.train.checkpoint_every},
                     {"log_every", cfg.train.log_every}};
    root["data"] = {{"test_ratio", cfg.data.test_ratio},
                    {"self_loops", cfg.data.self_loops}};
    root["router"] = {{"rho", cfg.router.rho},
                      {"sample_cap", cfg.router.sample_cap}};
    root["ablate"] = {{"moe", cfg.ablate.moe},
                      {"feat", cfg.ablate.feat},
                      {"freqreg", cfg.ablate.freqreg},
                      {"aug", cfg.ablate.aug}};
    return root.dump(2) + "\n";
}

}  // namespace anygraph
