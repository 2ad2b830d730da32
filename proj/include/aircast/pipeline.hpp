#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "aircast/checkpoint.hpp"
#include "aircast/errors.hpp"
#include "aircast/frame.hpp"
#include "aircast/importance.hpp"
#include "aircast/ingest.hpp"
#include "aircast/metrics.hpp"
#include "aircast/model.hpp"
#include "aircast/predict.hpp"
#include "aircast/schema.hpp"
#include "aircast/series.hpp"
#include "aircast/synth.hpp"
#include "aircast/training.hpp"

namespace aircast {

// Exit-code taxonomy shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;
inline constexpr int kExitArtifact = 5;

struct PreprocessSettings {
    double train_fraction = 0.8;
    std::size_t window = 730;
    std::size_t stride = 30;
};

// One config file drives the whole pipeline; CLI flags override file values.
struct RunConfig {
    std::string noaa_csv;
    std::string epa_csv;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    std::vector<std::string> targets;  // required, subset of the EPA variables
    PreprocessSettings preprocess;
    ModelConfig model;
    TrainConfig train;
    std::size_t importance_repeats = 10;

    void validate() const {
        if (noaa_csv.empty() || epa_csv.empty())
            throw config_error("config: noaa_csv and epa_csv are required");
        if (out_dir.empty()) throw config_error("config: out_dir is required");
        if (targets.empty()) throw config_error("config: targets list is required");
        const auto pollutants = target_pollutant_names();
        for (const auto& t : targets)
            if (std::find(pollutants.begin(), pollutants.end(), t) == pollutants.end())
                throw config_error("config: unknown target pollutant '" + t + "'");
        if (!(preprocess.train_fraction > 0.0 && preprocess.train_fraction < 1.0))
            throw config_error("config: train_fraction must be in (0, 1)");
        if (preprocess.window == 0) throw config_error("config: window must be positive");
        if (preprocess.stride == 0) throw config_error("config: stride must be positive");
        if (!(train.learning_rate > 0.0))
            throw config_error("config: learning_rate must be positive");
        train.validate();
        ModelConfig m = model;
        m.input_features = input_feature_names().size();
        m.window = preprocess.window;
        m.targets = targets.size();
        m.validate();
        if (importance_repeats == 0)
            throw config_error("config: importance_repeats must be >= 1");
    }

    // Model configuration with the data-derived dimensions filled in.
    ModelConfig resolved_model() const {
        ModelConfig m = model;
        m.input_features = input_feature_names().size();
        m.window = preprocess.window;
        m.targets = targets.size();
        m.seed = seed;
        return m;
    }

    TrainConfig resolved_train() const {
        TrainConfig t = train;
        t.seed = seed;
        return t;
    }
};

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw config_error("config parse error in " + path + ": " + e.what());
    }
    try {
        RunConfig cfg;
        cfg.noaa_csv = j.value("noaa_csv", "");
        cfg.epa_csv = j.value("epa_csv", "");
        cfg.out_dir = j.value("out_dir", cfg.out_dir);
        cfg.seed = j.value("seed", cfg.seed);
        if (j.contains("targets")) cfg.targets = j.at("targets").get<std::vector<std::string>>();
        if (j.contains("preprocess")) {
            const auto& p = j.at("preprocess");
            cfg.preprocess.train_fraction = p.value("train_fraction", cfg.preprocess.train_fraction);
            cfg.preprocess.window = p.value("window", cfg.preprocess.window);
            cfg.preprocess.stride = p.value("stride", cfg.preprocess.stride);
        }
        if (j.contains("model")) {
            const auto& m = j.at("model");
            cfg.model.hidden = m.value("hidden", cfg.model.hidden);
            cfg.model.attention_dim = m.value("attention_dim", cfg.model.attention_dim);
            cfg.model.dropout_p = m.value("dropout_p", cfg.model.dropout_p);
            cfg.model.bn_eps = m.value("bn_eps", cfg.model.bn_eps);
            cfg.model.bn_momentum = m.value("bn_momentum", cfg.model.bn_momentum);
        }
        if (j.contains("train")) {
            const auto& t = j.at("train");
            cfg.train.iterations = t.value("iterations", cfg.train.iterations);
            cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
            cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
        }
        cfg.importance_repeats = j.value("importance_repeats", cfg.importance_repeats);
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw config_error("config error in " + path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Shared pipeline stages.
// ---------------------------------------------------------------------------

struct PipelineData {
    AlignedFrame full;         // physical units, gap-free, canonical columns
    AlignedFrame train_frame;  // physical units
    AlignedFrame test_frame;
    NormalizationStats stats;  // computed from the training partition
    WindowedDataset train_windows;  // normalized
    WindowedDataset test_windows;
    ValidationReport validation;
};

// resample -> interpolate -> impute -> split -> normalize(train stats) ->
// window, in that fixed order.
inline PipelineData run_preprocessing(const RunConfig& cfg) {
    const auto& schema = canonical_schema();
    const auto noaa = parse_source_csv(cfg.noaa_csv, schema);
    const auto epa = parse_source_csv(cfg.epa_csv, schema);
    const auto merged = merge_tables(noaa, epa);

    PipelineData data;
    data.validation = validate_schema(merged, schema);
    for (const auto& missing : data.validation.missing_columns)
        throw data_error("missing column: " + missing + " (sources " + cfg.noaa_csv + ", " +
                         cfg.epa_csv + ")");

    const auto daily = resample_daily(merged);
    AlignedFrame frame;
    frame.start_day = daily.start_day;
    frame.column_names = schema_names(schema);
    frame.n_days = daily.series.empty() ? 0 : daily.series[0].size();
    frame.values.resize(frame.n_days * frame.n_columns());
    for (std::size_t c = 0; c < frame.n_columns(); ++c) {
        std::size_t src = 0;
        for (; src < daily.names.size(); ++src)
            if (daily.names[src] == frame.column_names[c]) break;
        const auto filled = impute_mean(interpolate_linear(daily.series[src]));
        for (std::size_t d = 0; d < frame.n_days; ++d) frame.at(d, c) = *filled.x[d];
    }
    data.full = std::move(frame);

    auto [train_frame, test_frame] =
        split_chronological(data.full, cfg.preprocess.train_fraction, cfg.preprocess.window);
    data.stats = compute_stats(train_frame);
    const auto train_z = normalize_zscore(train_frame, data.stats);
    const auto test_z = normalize_zscore(test_frame, data.stats);
    data.train_frame = std::move(train_frame);
    data.test_frame = std::move(test_frame);

    const auto inputs = input_feature_names();
    data.train_windows =
        make_windows(train_z, cfg.preprocess.window, cfg.preprocess.stride, inputs, cfg.targets);
    data.test_windows =
        make_windows(test_z, cfg.preprocess.window, cfg.preprocess.stride, inputs, cfg.targets);
    return data;
}

namespace detail {

inline std::filesystem::path prepare_out_dir(const RunConfig& cfg) {
    std::filesystem::path dir(cfg.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw data_error("cannot create output directory " + cfg.out_dir + ": " + ec.message());
    return dir;
}

template <typename Fn>
int run_command(Fn&& fn) {
    try {
        fn();
        return kExitOk;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const artifact_error& e) {
        std::cerr << "artifact error: " << e.what() << "\n";
        return kExitArtifact;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommands. Each returns a process exit code and writes only inside the
// configured output directory.
// ---------------------------------------------------------------------------

inline int cmd_preprocess(const RunConfig& cfg) {
    return detail::run_command([&] {
        cfg.validate();
        const auto dir = detail::prepare_out_dir(cfg);
        const auto data = run_preprocessing(cfg);
        write_frame_csv(data.full, (dir / "frame.csv").string());
        write_stats_json(data.stats, (dir / "stats.json").string());
        std::ofstream report(dir / "validation.txt");
        if (!report) throw data_error("cannot write validation report");
        report << render_validation(data.validation);
        std::cerr << "preprocess: " << data.full.n_days << " days, "
                  << data.train_windows.n_samples() << " train / "
                  << data.test_windows.n_samples() << " test windows\n";
    });
}

inline int cmd_train(const RunConfig& cfg) {
    return detail::run_command([&] {
        cfg.validate();
        const auto dir = detail::prepare_out_dir(cfg);
        const auto data = run_preprocessing(cfg);

        auto model = init_weights(cfg.resolved_model(), cfg.seed);
        const auto report = train(model, data.train_windows, cfg.resolved_train());

        Checkpoint ckpt;
        ckpt.model = std::move(model);
        ckpt.model.mode = Mode::eval;
        ckpt.stats = data.stats;
        ckpt.input_columns = input_feature_names();
        ckpt.target_columns = cfg.targets;
        ckpt.training = report.meta();
        save_checkpoint(ckpt, (dir / "checkpoint.json").string());

        std::ofstream report_csv(dir / "train_report.csv");
        if (!report_csv) throw data_error("cannot write train report");
        write_train_report_csv(report, report_csv);
        std::cerr << "train: " << report.epoch_loss.size() << " epochs, final loss "
                  << report.meta().final_loss << "\n";
    });
}

inline int cmd_report(const RunConfig& cfg, const std::string& checkpoint_path) {
    return detail::run_command([&] {
        cfg.validate();
        const auto dir = detail::prepare_out_dir(cfg);
        auto ckpt = load_checkpoint(checkpoint_path);
        if (ckpt.target_columns != cfg.targets)
            throw artifact_error(
                "checkpoint/config mismatch: checkpoint predicts " +
                std::to_string(ckpt.target_columns.size()) + " target(s), config lists " +
                std::to_string(cfg.targets.size()));
        if (ckpt.model.config.window != cfg.preprocess.window ||
            ckpt.model.config.hidden != cfg.model.hidden)
            throw artifact_error("checkpoint/config mismatch: model dimensions differ");

        const auto data = run_preprocessing(cfg);
        if (data.test_windows.n_samples() == 0) throw data_error("report: empty test partition");

        // normalized predictions over the held-out windows, using the stats
        // stored in the checkpoint
        const auto& ds = data.test_windows;
        auto preds = predict_windows(ckpt.model, ds.inputs, ds.window, ds.n_features());
        const auto target_cols = stat_columns_for(ckpt.stats, cfg.targets);

        // per-day series in physical units; overlapping windows average
        const std::size_t n_targets = cfg.targets.size();
        std::map<std::int64_t, std::vector<std::pair<double, std::size_t>>> day_acc;
        for (std::size_t s = 0; s < ds.n_samples(); ++s)
            for (std::size_t t = 0; t < ds.window; ++t) {
                auto& acc = day_acc[ds.start_days[s] + static_cast<std::int64_t>(t)];
                acc.resize(n_targets, {0.0, 0});
                for (std::size_t p = 0; p < n_targets; ++p) {
                    const double phys = denormalize_value(preds[s][t * n_targets + p], ckpt.stats,
                                                          target_cols[p]);
                    acc[p].first += phys;
                    acc[p].second += 1;
                }
            }

        std::ofstream series_csv(dir / "predictions.csv");
        if (!series_csv) throw data_error("cannot write predictions.csv");
        series_csv << "date,pollutant,actual,predicted\n";
        char buf[64];
        std::vector<std::vector<double>> pred_series(n_targets), truth_series(n_targets);
        for (const auto& [day, acc] : day_acc) {
            const std::size_t row = static_cast<std::size_t>(day - data.test_frame.start_day);
            for (std::size_t p = 0; p < n_targets; ++p) {
                const double predicted = acc[p].first / static_cast<double>(acc[p].second);
                const double actual =
                    data.test_frame.at(row, data.test_frame.column_index(cfg.targets[p]));
                pred_series[p].push_back(predicted);
                truth_series[p].push_back(actual);
                series_csv << format_date(day) << "," << cfg.targets[p];
                std::snprintf(buf, sizeof(buf), "%.17g", actual);
                series_csv << "," << buf;
                std::snprintf(buf, sizeof(buf), "%.17g", predicted);
                series_csv << "," << buf << "\n";
            }
        }

        const auto metrics =
            compute_metrics(cfg.targets, pred_series, truth_series,
                            format_date(data.test_frame.start_day),
                            format_date(data.test_frame.start_day +
                                        static_cast<std::int64_t>(data.test_frame.n_days) - 1));
        write_metrics_csv(metrics, (dir / "metrics.csv").string());

        const auto importance =
            permutation_importance(ckpt.model, ds, ckpt.stats, cfg.seed, cfg.importance_repeats);
        write_importance_csv(importance, (dir / "importance.csv").string());
        write_importance_repeats_csv(importance, (dir / "importance_repeats.csv").string());

        std::cerr << render_metrics_table(metrics);
    });
}

struct SynthCommandConfig {
    std::string out_dir = "out";
    SynthConfig synth;
};

inline int cmd_synth(const SynthCommandConfig& cfg) {
    return detail::run_command([&] {
        cfg.synth.validate();
        RunConfig dirs;
        dirs.out_dir = cfg.out_dir;
        const auto dir = detail::prepare_out_dir(dirs);
        generate_synthetic_fixture(cfg.synth, (dir / "noaa.csv").string(),
                                   (dir / "epa.csv").string());
        std::cerr << "synth: wrote " << (dir / "noaa.csv").string() << " and "
                  << (dir / "epa.csv").string() << " (" << cfg.synth.days << " days)\n";
    });
}

}  // namespace aircast
