#include "anygraph/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "anygraph/rng.hpp"

namespace anygraph {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'A', 'G', 'C', 'K', 'P', 'T', '0', '1'};

void append_u64(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
        buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t read_u64(const std::string& buf, std::size_t at) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(
                 static_cast<unsigned char>(buf[at + i]))
             << (8 * i);
    return v;
}

void append_doubles(std::string& buf, const std::vector<double>& xs) {
    for (double x : xs) {
        std::uint64_t bits;
        std::memcpy(&bits, &x, 8);
        append_u64(buf, bits);
    }
}

void append_expert_doubles(std::string& buf, const ExpertParams& p) {
    for (std::size_t l = 0; l < p.layers(); ++l) {
        append_doubles(buf, p.w[l].data);
        append_doubles(buf, p.b[l]);
        if (p.affine) {
            append_doubles(buf, p.gamma[l]);
            append_doubles(buf, p.beta[l]);
        }
    }
}

void append_grads_doubles(std::string& buf, const ExpertGrads& g,
                          bool affine) {
    for (std::size_t l = 0; l < g.w.size(); ++l) {
        append_doubles(buf, g.w[l].data);
        append_doubles(buf, g.b[l]);
        if (affine) {
            append_doubles(buf, g.gamma[l]);
            append_doubles(buf, g.beta[l]);
        }
    }
}

class DoubleReader {
public:
    DoubleReader(const std::string& buf, std::size_t at, std::size_t count)
        : buf_(buf), at_(at), end_(at + count * 8) {}

    void fill(std::vector<double>& out) {
        for (double& x : out) {
            if (at_ + 8 > end_)
                throw ParseError("checkpoint: payload shorter than header "
                                 "promises");
            const std::uint64_t bits = read_u64(buf_, at_);
            std::memcpy(&x, &bits, 8);
            at_ += 8;
        }
    }
    bool exhausted() const { return at_ == end_; }

private:
    const std::string& buf_;
    std::size_t at_;
    std::size_t end_;
};

std::size_t expert_double_count(std::size_t dim, std::size_t layers,
                                bool affine) {
    const std::size_t per_layer = dim * dim + dim + (affine ? 2 * dim : 0);
    return layers * per_layer;
}

}  // namespace

void save_checkpoint(const std::string& path, const CheckpointData& data) {
    const std::size_t dim = data.cfg.model.dim;
    const std::size_t layers = data.cfg.model.layers;
    const bool affine = data.cfg.model.affine_layernorm;
    const std::size_t k_experts = data.model.num_experts();

    json header;
    header["config"] = json::parse(config_to_json(data.cfg));
    header["global_step"] = data.global_step;
    header["epoch"] = data.epoch;
    header["slot"] = data.slot;
    header["model"] = {{"dim", data.model.dim},
                       {"layers", data.model.layers},
                       {"experts", k_experts},
                       {"affine", data.model.affine}};
    json adam_t = json::array();
    for (const auto& a : data.adam) adam_t.push_back(a.t);
    header["adam_t"] = adam_t;
    json assignment = json::object();
    for (const auto& [name, k] : data.router.assignment) assignment[name] = k;
    header["router"] = {{"m", data.router.m},
                        {"assignment", assignment},
                        {"rho", data.router.rho},
                        {"sample_cap", data.router.sample_cap},
                        {"route_epoch", data.router.route_epoch}};
    json dsets = json::array();
    for (const auto& ds : data.datasets)
        dsets.push_back({{"name", ds.name},
                         {"num_nodes", ds.num_nodes},
                         {"aug_epoch", ds.aug_epoch},
                         {"steps_done", ds.steps_done},
                         {"steps_since_reproj", ds.steps_since_reproj},
                         {"reprojected", ds.reprojected_since_reroute},
                         {"reproj_interval", ds.reproj_interval}});
    header["datasets"] = dsets;

    const std::size_t per_expert = 3 * expert_double_count(dim, layers,
                                                           affine);
    header["payload_doubles"] = per_expert * k_experts;

    const std::string head = header.dump();

    std::string buf;
    buf.append(kMagic, 8);
    append_u64(buf, head.size());
    buf.append(head);
    append_u64(buf, per_expert * k_experts);
    for (std::size_t k = 0; k < k_experts; ++k) {
        append_expert_doubles(buf, data.model.experts[k]);
        append_grads_doubles(buf, data.adam[k].m, affine);
        append_grads_doubles(buf, data.adam[k].v, affine);
    }
    append_u64(buf, fnv1a64(buf));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("checkpoint: cannot open '" + path +
                            "' for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("checkpoint: short write to '" + path + "'");
}

CheckpointData load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("checkpoint: cannot open '" + path + "'");
    std::string buf((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
    if (buf.size() < 8 + 8 + 8 + 8)
        throw ParseError("checkpoint: file too small to be valid");
    if (std::memcmp(buf.data(), kMagic, 6) != 0)
        throw ParseError("checkpoint: wrong magic (not a checkpoint file)");
    if (std::memcmp(buf.data(), kMagic, 8) != 0)
        throw ParseError("checkpoint: unsupported container version");

    const std::uint64_t want_sum = read_u64(buf, buf.size() - 8);
    const std::uint64_t have_sum =
        fnv1a64(std::string_view(buf.data(), buf.size() - 8));
    if (want_sum != have_sum)
        throw ParseError("checkpoint: checksum failure (file corrupted)");

    const std::uint64_t head_len = read_u64(buf, 8);
    if (16 + head_len + 16 > buf.size())
        throw ParseError("checkpoint: truncated header");
    json header;
    try {
        header = json::parse(buf.substr(16, head_len));
    } catch (const json::exception& e) {
        throw ParseError(std::string("checkpoint: bad header JSON: ") +
                         e.what());
    }

    CheckpointData data;
    try {
        data.cfg = parse_config(header.at("config").dump());
        data.global_step = header.at("global_step").get<std::uint64_t>();
        data.epoch = header.at("epoch").get<std::size_t>();
        data.slot = header.at("slot").get<std::size_t>();

        const json& m = header.at("model");
        data.model.dim = m.at("dim").get<std::size_t>();
        data.model.layers = m.at("layers").get<std::size_t>();
        data.model.affine = m.at("affine").get<bool>();
        const auto k_experts = m.at("experts").get<std::size_t>();

        const json& r = header.at("router");
        data.router.m = r.at("m").get<std::vector<std::uint64_t>>();
        data.router.rho = r.at("rho").get<double>();
        data.router.sample_cap = r.at("sample_cap").get<std::size_t>();
        data.router.route_epoch = r.at("route_epoch").get<std::size_t>();
        for (const auto& item : r.at("assignment").items())
            data.router.assignment[item.key()] =
                item.value().get<std::size_t>();

        for (const json& ds : header.at("datasets")) {
            DatasetSnapshot snap;
            snap.name = ds.at("name").get<std::string>();
            snap.num_nodes = ds.at("num_nodes").get<std::size_t>();
            snap.aug_epoch = ds.at("aug_epoch").get<std::size_t>();
            snap.steps_done = ds.at("steps_done").get<std::uint64_t>();
            snap.steps_since_reproj =
                ds.at("steps_since_reproj").get<std::uint64_t>();
            snap.reprojected_since_reroute =
                ds.at("reprojected").get<bool>();
            snap.reproj_interval =
                ds.at("reproj_interval").get<std::uint64_t>();
            data.datasets.push_back(std::move(snap));
        }

        const auto adam_t = header.at("adam_t").get<std::vector<
            std::uint64_t>>();
        if (adam_t.size() != k_experts || data.router.m.size() != k_experts)
            throw ParseError("checkpoint: expert count disagreement");

        const std::size_t dim = data.model.dim;
        const std::size_t layers = data.model.layers;
        const bool affine = data.model.affine;
        if (dim != data.cfg.model.dim || layers != data.cfg.model.layers ||
            affine != data.cfg.model.affine_layernorm ||
            k_experts != data.cfg.effective_experts())
            throw ParseError(
                "checkpoint: model shape disagrees with stored config");

        const std::uint64_t payload =
            header.at("payload_doubles").get<std::uint64_t>();
        if (payload != read_u64(buf, 16 + head_len))
            throw ParseError("checkpoint: payload count disagreement");
        if (16 + head_len + 8 + payload * 8 + 8 != buf.size())
            throw ParseError("checkpoint: payload size mismatch");
        if (payload != 3 * expert_double_count(dim, layers, affine) *
                           k_experts)
            throw ParseError("checkpoint: payload does not match the model "
                             "shape");

        DoubleReader reader(buf, 16 + head_len + 8, payload);
        for (std::size_t k = 0; k < k_experts; ++k) {
            ExpertParams p;
            p.dim = dim;
            p.expert_id = k;
            p.affine = affine;
            for (std::size_t l = 0; l < layers; ++l) {
                p.w.emplace_back(dim, dim, 0.0);
                p.b.emplace_back(dim, 0.0);
                if (affine) {
                    p.gamma.emplace_back(dim, 1.0);
                    p.beta.emplace_back(dim, 0.0);
                }
                reader.fill(p.w.back().data);
                reader.fill(p.b.back());
                if (affine) {
                    reader.fill(p.gamma.back());
                    reader.fill(p.beta.back());
                }
            }
            AdamState a = make_adam_state(p);
            a.t = adam_t[k];
            for (std::size_t l = 0; l < layers; ++l) {
                reader.fill(a.m.w[l].data);
                reader.fill(a.m.b[l]);
                if (affine) {
                    reader.fill(a.m.gamma[l]);
                    reader.fill(a.m.beta[l]);
                }
            }
            for (std::size_t l = 0; l < layers; ++l) {
                reader.fill(a.v.w[l].data);
                reader.fill(a.v.b[l]);
                if (affine) {
                    reader.fill(a.v.gamma[l]);
                    reader.fill(a.v.beta[l]);
                }
            }
            data.model.experts.push_back(std::move(p));
            data.adam.push_back(std::move(a));
        }
        if (!reader.exhausted())
            throw ParseError("checkpoint: trailing payload bytes");
    } catch (const json::exception& e) {
        throw ParseError(std::string("checkpoint: malformed header field: ") +
                         e.what());
    }
    return data;
}

}  // namespace anygraph
