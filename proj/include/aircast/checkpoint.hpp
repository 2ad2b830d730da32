#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aircast/errors.hpp"
#include "aircast/frame.hpp"
#include "aircast/model.hpp"

namespace aircast {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
    ForecastModel model;
    NormalizationStats stats;
    std::vector<std::string> input_columns;
    std::vector<std::string> target_columns;
    TrainingMeta training;
};

namespace detail {

inline nlohmann::json tensor_to_json(const ad::TensorPtr& t) {
    return {{"shape", t->shape}, {"data", t->data}};
}

inline void tensor_from_json(const nlohmann::json& j, const ad::TensorPtr& t,
                             const std::string& name) {
    const auto shape = j.at("shape").get<std::vector<std::size_t>>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (shape != t->shape || data.size() != t->data.size())
        throw artifact_error("checkpoint: shape mismatch for parameter " + name);
    t->data = data;
}

}  // namespace detail

inline void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    const auto& cfg = ckpt.model.config;
    nlohmann::json j;
    j["format_version"] = kCheckpointVersion;
    j["model"] = {{"input_features", cfg.input_features},
                  {"window", cfg.window},
                  {"hidden", cfg.hidden},
                  {"targets", cfg.targets},
                  {"attention_dim", cfg.attention_dim},
                  {"dropout_p", cfg.dropout_p},
                  {"bn_eps", cfg.bn_eps},
                  {"bn_momentum", cfg.bn_momentum},
                  {"seed", cfg.seed}};
    j["normalization"] = {{"columns", ckpt.stats.column_names},
                          {"mean", ckpt.stats.mean},
                          {"std", ckpt.stats.std_dev}};
    j["input_columns"] = ckpt.input_columns;
    j["target_columns"] = ckpt.target_columns;
    nlohmann::json params;
    for (const auto& [name, p] : ckpt.model.named_parameters())
        params[name] = detail::tensor_to_json(p);
    j["parameters"] = std::move(params);
    j["running_stats"] = {{"norm1.mean", ckpt.model.norm1.running_mean},
                          {"norm1.var", ckpt.model.norm1.running_var},
                          {"norm2.mean", ckpt.model.norm2.running_mean},
                          {"norm2.var", ckpt.model.norm2.running_var}};
    j["training"] = {{"iterations_completed", ckpt.training.iterations_completed},
                     {"final_loss", ckpt.training.final_loss}};

    std::ofstream out(path);
    if (!out) throw data_error("cannot write checkpoint: " + path);
    out << j.dump(2) << "\n";
}

// Loads a checkpoint; the returned model is in eval mode. Round trips are
// bit-identical: values are serialized with shortest round-trip decimals and
// parsed back exactly.
inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot read checkpoint: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw artifact_error("corrupt checkpoint " + path + ": " + e.what());
    }

    try {
        const int version = j.at("format_version").get<int>();
        if (version != kCheckpointVersion)
            throw artifact_error("unsupported checkpoint version " + std::to_string(version));

        ModelConfig cfg;
        const auto& jm = j.at("model");
        cfg.input_features = jm.at("input_features").get<std::size_t>();
        cfg.window = jm.at("window").get<std::size_t>();
        cfg.hidden = jm.at("hidden").get<std::size_t>();
        cfg.targets = jm.at("targets").get<std::size_t>();
        cfg.attention_dim = jm.at("attention_dim").get<std::size_t>();
        cfg.dropout_p = jm.at("dropout_p").get<double>();
        cfg.bn_eps = jm.at("bn_eps").get<double>();
        cfg.bn_momentum = jm.at("bn_momentum").get<double>();
        cfg.seed = jm.at("seed").get<std::uint64_t>();

        Checkpoint ckpt;
        ckpt.model = init_weights(cfg, cfg.seed);
        ckpt.model.mode = Mode::eval;
        for (const auto& [name, p] : ckpt.model.named_parameters())
            detail::tensor_from_json(j.at("parameters").at(name), p, name);

        const auto& jr = j.at("running_stats");
        ckpt.model.norm1.running_mean = jr.at("norm1.mean").get<std::vector<double>>();
        ckpt.model.norm1.running_var = jr.at("norm1.var").get<std::vector<double>>();
        ckpt.model.norm2.running_mean = jr.at("norm2.mean").get<std::vector<double>>();
        ckpt.model.norm2.running_var = jr.at("norm2.var").get<std::vector<double>>();
        if (ckpt.model.norm1.running_mean.size() != cfg.hidden ||
            ckpt.model.norm1.running_var.size() != cfg.hidden ||
            ckpt.model.norm2.running_mean.size() != cfg.hidden ||
            ckpt.model.norm2.running_var.size() != cfg.hidden)
            throw artifact_error("checkpoint: shape mismatch for running statistics");

        const auto& jn = j.at("normalization");
        ckpt.stats.column_names = jn.at("columns").get<std::vector<std::string>>();
        ckpt.stats.mean = jn.at("mean").get<std::vector<double>>();
        ckpt.stats.std_dev = jn.at("std").get<std::vector<double>>();
        ckpt.input_columns = j.at("input_columns").get<std::vector<std::string>>();
        ckpt.target_columns = j.at("target_columns").get<std::vector<std::string>>();
        ckpt.training.iterations_completed = j.at("training").at("iterations_completed").get<std::size_t>();
        ckpt.training.final_loss = j.at("training").at("final_loss").get<double>();
        return ckpt;
    } catch (const nlohmann::json::exception& e) {
        throw artifact_error("corrupt checkpoint " + path + ": " + e.what());
    }
}

inline void write_stats_json(const NormalizationStats& stats, const std::string& path) {
    nlohmann::json j;
    j["columns"] = stats.column_names;
    j["mean"] = stats.mean;
    j["std"] = stats.std_dev;
    std::ofstream out(path);
    if (!out) throw data_error("cannot write stats: " + path);
    out << j.dump(2) << "\n";
}

inline NormalizationStats read_stats_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot read stats: " + path);
    nlohmann::json j;
    try {
        in >> j;
        NormalizationStats stats;
        stats.column_names = j.at("columns").get<std::vector<std::string>>();
        stats.mean = j.at("mean").get<std::vector<double>>();
        stats.std_dev = j.at("std").get<std::vector<double>>();
        return stats;
    } catch (const nlohmann::json::exception& e) {
        throw artifact_error("corrupt stats file " + path + ": " + e.what());
    }
}

}  // namespace aircast
