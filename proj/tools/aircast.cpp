// Command-line front end: synth | preprocess | train | report.
// One JSON config file drives a run; flags override file values.

#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aircast/pipeline.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::size_t> iterations;
    std::optional<double> learning_rate;
    std::optional<std::size_t> batch_size;
    std::optional<std::size_t> window;
    std::optional<std::size_t> stride;
    std::optional<double> train_fraction;
    std::optional<std::size_t> hidden;
    std::optional<std::size_t> attention_dim;
    std::optional<double> dropout;
    std::optional<std::size_t> importance_repeats;
    std::vector<std::string> targets;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON run configuration")->required();
    cmd->add_option("--seed", flags.seed, "override the run seed");
    cmd->add_option("--out", flags.out_dir, "override the output directory");
    cmd->add_option("--iterations", flags.iterations, "override training epochs");
    cmd->add_option("--learning-rate", flags.learning_rate, "override the learning rate");
    cmd->add_option("--batch-size", flags.batch_size, "override the batch size");
    cmd->add_option("--window", flags.window, "override the window length in days");
    cmd->add_option("--stride", flags.stride, "override the window stride in days");
    cmd->add_option("--train-fraction", flags.train_fraction,
                    "override the chronological train fraction");
    cmd->add_option("--hidden", flags.hidden, "override LSTM hidden units");
    cmd->add_option("--attention-dim", flags.attention_dim,
                    "override the attention projection width");
    cmd->add_option("--dropout", flags.dropout, "override the dropout probability");
    cmd->add_option("--importance-repeats", flags.importance_repeats,
                    "override permutation-importance repeats");
    cmd->add_option("--targets", flags.targets,
                    "override the target pollutant list (space separated)");
}

// File values first, then flag overrides.
aircast::RunConfig resolve_config(const CommonFlags& flags) {
    auto cfg = aircast::load_run_config(flags.config_path);
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.out_dir) cfg.out_dir = *flags.out_dir;
    if (flags.iterations) cfg.train.iterations = *flags.iterations;
    if (flags.learning_rate) cfg.train.learning_rate = *flags.learning_rate;
    if (flags.batch_size) cfg.train.batch_size = *flags.batch_size;
    if (flags.window) cfg.preprocess.window = *flags.window;
    if (flags.stride) cfg.preprocess.stride = *flags.stride;
    if (flags.train_fraction) cfg.preprocess.train_fraction = *flags.train_fraction;
    if (flags.hidden) cfg.model.hidden = *flags.hidden;
    if (flags.attention_dim) cfg.model.attention_dim = *flags.attention_dim;
    if (flags.dropout) cfg.model.dropout_p = *flags.dropout;
    if (flags.importance_repeats) cfg.importance_repeats = *flags.importance_repeats;
    if (!flags.targets.empty()) cfg.targets = flags.targets;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"aircast: long-horizon air-quality forecasting pipeline"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic two-agency CSV fixture");
    aircast::SynthCommandConfig synth_cfg;
    std::string dependence = "smooth2";
    synth->add_option("--out", synth_cfg.out_dir, "output directory");
    synth->add_option("--days", synth_cfg.synth.days, "number of days to generate");
    synth->add_option("--seed", synth_cfg.synth.seed, "generator seed");
    synth->add_option("--missing-rate", synth_cfg.synth.missing_rate,
                      "fraction of cells left absent");
    synth->add_option("--readings-per-day", synth_cfg.synth.noaa_readings_per_day,
                      "sub-daily NOAA readings per day");
    synth->add_option("--dependence", dependence,
                      "target dependence: smooth2 | single_feature");
    synth->add_option("--start-date", synth_cfg.synth.start_date, "first day (ISO date)");

    // preprocess / train / report share the config flags
    CommonFlags pre_flags, train_flags, report_flags;
    auto* preprocess =
        app.add_subcommand("preprocess", "ingest, align and normalize the input series");
    add_common_flags(preprocess, pre_flags);
    auto* train_cmd = app.add_subcommand("train", "run the full pipeline and train a model");
    add_common_flags(train_cmd, train_flags);
    auto* report = app.add_subcommand("report", "evaluate a checkpoint on the held-out span");
    add_common_flags(report, report_flags);
    std::string checkpoint_path;
    report->add_option("--checkpoint", checkpoint_path,
                       "checkpoint to evaluate (default <out>/checkpoint.json)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            if (dependence == "smooth2") {
                synth_cfg.synth.dependence = aircast::SynthConfig::Dependence::smooth2;
            } else if (dependence == "single_feature") {
                synth_cfg.synth.dependence = aircast::SynthConfig::Dependence::single_feature;
            } else {
                std::cerr << "config error: unknown dependence '" << dependence << "'\n";
                return aircast::kExitConfig;
            }
            return aircast::cmd_synth(synth_cfg);
        }
        if (preprocess->parsed()) return aircast::cmd_preprocess(resolve_config(pre_flags));
        if (train_cmd->parsed()) return aircast::cmd_train(resolve_config(train_flags));
        if (report->parsed()) {
            const auto cfg = resolve_config(report_flags);
            if (checkpoint_path.empty())
                checkpoint_path =
                    (std::filesystem::path(cfg.out_dir) / "checkpoint.json").string();
            return aircast::cmd_report(cfg, checkpoint_path);
        }
    } catch (const aircast::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return aircast::kExitConfig;
    }
    return 0;
}
