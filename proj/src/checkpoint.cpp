// Copyright 2026 the checkerfree authors
// SPDX-License-Identifier: Apache-2.0

#include "ckfree/checkpoint.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace ckfree {

namespace {

constexpr char kMagic[8] = {'C', 'K', 'P', 'T', 'v', '1', '\n', '\0'};

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("checkpoint: truncated header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_record(std::ostream& out, const std::string& name, const Tensor& t) {
    write_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_tensor(out, t);
}

Tensor read_record(std::istream& in, const std::string& want) {
    const std::uint32_t len = read_u32(in);
    std::string name(len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(len));
    if (!in || name != want)
        throw std::runtime_error("checkpoint: expected tensor '" + want + "', found '" + name +
                                 "'");
    return read_tensor(in);
}

double number_or(const nlohmann::json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number())
        throw std::invalid_argument("config: key '" + key + "' must be a number");
    return j.at(key).get<double>();
}

int int_or(const nlohmann::json& j, const std::string& key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer())
        throw std::invalid_argument("config: key '" + key + "' must be an integer");
    return j.at(key).get<int>();
}

std::string string_or(const nlohmann::json& j, const std::string& key, std::string fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_string())
        throw std::invalid_argument("config: key '" + key + "' must be a string");
    return j.at(key).get<std::string>();
}

}  // namespace

UpsamplerKind upsampler_kind_from_name(const std::string& name) {
    if (name == "deconv") return UpsamplerKind::deconv;
    if (name == "subpixel") return UpsamplerKind::subpixel;
    if (name == "resize_conv") return UpsamplerKind::resize_conv;
    throw std::invalid_argument("config: unknown upsampler kind '" + name + "'");
}

Correction correction_from_name(const std::string& name) {
    if (name == "none") return Correction::none;
    if (name == "post_h0") return Correction::post_h0;
    if (name == "inside_h0") return Correction::inside_h0;
    throw std::invalid_argument("config: unknown correction '" + name + "'");
}

void check_known_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                      const std::string& context) {
    if (!j.is_object()) throw std::invalid_argument("config: " + context + " must be an object");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const std::string& k : allowed) known = known || k == item.key();
        if (!known)
            throw std::invalid_argument("config: unknown key '" + item.key() + "' in " +
                                        context);
    }
}

nlohmann::json config_to_json(const NetworkConfig& cfg) {
    return nlohmann::json{
        {"in_channels", cfg.in_channels},
        {"k1", cfg.k1},
        {"n1", cfg.n1},
        {"k2", cfg.k2},
        {"n2", cfg.n2},
        {"upsampler",
         {{"kind", to_string(cfg.upsampler.kind)},
          {"correction", to_string(cfg.upsampler.correction)},
          {"factor", cfg.upsampler.factor},
          {"kernel_size", cfg.upsampler.kernel_size},
          {"dims", cfg.upsampler.dims}}},
        {"output_scale", cfg.output_scale},
        {"seed", cfg.seed},
    };
}

NetworkConfig config_from_json(const nlohmann::json& j) {
    check_known_keys(j, {"in_channels", "k1", "n1", "k2", "n2", "upsampler", "output_scale",
                         "seed"},
                     "network");
    NetworkConfig cfg;
    cfg.in_channels = int_or(j, "in_channels", cfg.in_channels);
    cfg.k1 = int_or(j, "k1", cfg.k1);
    cfg.n1 = int_or(j, "n1", cfg.n1);
    cfg.k2 = int_or(j, "k2", cfg.k2);
    cfg.n2 = int_or(j, "n2", cfg.n2);
    cfg.output_scale = number_or(j, "output_scale", cfg.output_scale);
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();

    nlohmann::json up = j.value("upsampler", nlohmann::json::object());
    check_known_keys(up, {"kind", "correction", "factor", "kernel_size", "dims"},
                     "network.upsampler");
    cfg.upsampler.kind = upsampler_kind_from_name(string_or(up, "kind", "deconv"));
    cfg.upsampler.correction = correction_from_name(string_or(up, "correction", "none"));
    cfg.upsampler.factor = int_or(up, "factor", 4);
    cfg.upsampler.kernel_size =
        int_or(up, "kernel_size", cfg.upsampler.kind == UpsamplerKind::subpixel ? 3 : 9);
    cfg.upsampler.dims = int_or(up, "dims", 2);
    cfg.upsampler.in_channels = cfg.n2;
    cfg.validate();
    return cfg;
}

nlohmann::json train_config_to_json(const TrainConfig& cfg) {
    return nlohmann::json{
        {"learning_rate", cfg.learning_rate},
        {"beta1", cfg.beta1},
        {"beta2", cfg.beta2},
        {"epsilon", cfg.epsilon},
        {"batch_size", cfg.batch_size},
        {"iterations", cfg.iterations},
        {"hr_patch", cfg.hr_patch},
        {"stride", cfg.stride},
    };
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
    check_known_keys(j, {"learning_rate", "beta1", "beta2", "epsilon", "batch_size",
                         "iterations", "hr_patch", "stride"},
                     "train");
    TrainConfig cfg;
    cfg.learning_rate = number_or(j, "learning_rate", cfg.learning_rate);
    cfg.beta1 = number_or(j, "beta1", cfg.beta1);
    cfg.beta2 = number_or(j, "beta2", cfg.beta2);
    cfg.epsilon = number_or(j, "epsilon", cfg.epsilon);
    cfg.batch_size = int_or(j, "batch_size", cfg.batch_size);
    cfg.iterations = int_or(j, "iterations", cfg.iterations);
    cfg.hr_patch = int_or(j, "hr_patch", cfg.hr_patch);
    cfg.stride = int_or(j, "stride", cfg.stride);
    cfg.validate();
    return cfg;
}

void save_checkpoint(const std::string& path, const NetworkConfig& cfg, const SRNetWeights& w) {
    cfg.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("checkpoint: cannot open for writing: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_u32(out, 6);
    write_record(out, "conv1.kernel", w.w1);
    write_record(out, "conv1.bias", w.b1);
    write_record(out, "conv2.kernel", w.w2);
    write_record(out, "conv2.bias", w.b2);
    write_record(out, "up.kernel", w.up.kernel);
    write_record(out, "up.bias", Tensor({w.up.bias.size()}, w.up.bias));
    if (!out) throw std::runtime_error("checkpoint: write failed: " + path);

    nlohmann::json side{{"format_version", 1}, {"network", config_to_json(cfg)}};
    std::ofstream sidecar(path + ".json");
    if (!sidecar) throw std::runtime_error("checkpoint: cannot write sidecar: " + path + ".json");
    sidecar << side.dump(2) << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream sidecar(path + ".json");
    if (!sidecar)
        throw std::runtime_error("checkpoint: missing sidecar " + path +
                                 ".json (weights travel with their configuration)");
    nlohmann::json side;
    try {
        sidecar >> side;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("checkpoint: malformed sidecar " + path + ".json: " + e.what());
    }
    check_known_keys(side, {"format_version", "network"}, "checkpoint sidecar");
    if (side.value("format_version", 0) != 1)
        throw std::runtime_error("checkpoint: unsupported sidecar format version");

    Checkpoint ck;
    ck.config = config_from_json(side.at("network"));

    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open: " + path);
    char magic[sizeof(kMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::string(magic, sizeof(magic)) != std::string(kMagic, sizeof(kMagic)))
        throw std::runtime_error("checkpoint: bad magic in " + path);
    if (read_u32(in) != 6) throw std::runtime_error("checkpoint: unexpected tensor count");

    ck.weights.w1 = read_record(in, "conv1.kernel");
    ck.weights.b1 = read_record(in, "conv1.bias");
    ck.weights.w2 = read_record(in, "conv2.kernel");
    ck.weights.b2 = read_record(in, "conv2.bias");
    ck.weights.up.kernel = read_record(in, "up.kernel");
    ck.weights.up.bias = read_record(in, "up.bias").vec();

    // Shape-check against the configuration; the He initializer is the
    // single source of truth for parameter layouts.
    const SRNetWeights ref = init_he(ck.config, 0);
    if (ck.weights.w1.shape() != ref.w1.shape() || ck.weights.b1.shape() != ref.b1.shape() ||
        ck.weights.w2.shape() != ref.w2.shape() || ck.weights.b2.shape() != ref.b2.shape() ||
        ck.weights.up.kernel.shape() != ref.up.kernel.shape() ||
        ck.weights.up.bias.size() != ref.up.bias.size())
        throw std::runtime_error("checkpoint: tensor shapes do not match the configuration in " +
                                 path + ".json");
    return ck;
}

}  // namespace ckfree
