#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "aircast/pipeline.hpp"

using namespace aircast;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "aircast_pipeline" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Small but complete run configuration over a generated fixture.
RunConfig small_config(const fs::path& dir, std::uint64_t seed = 7) {
    SynthCommandConfig synth;
    synth.out_dir = (dir / "fixture").string();
    synth.synth.days = 320;
    synth.synth.seed = 3;
    EXPECT_EQ(cmd_synth(synth), kExitOk);

    RunConfig cfg;
    cfg.noaa_csv = (dir / "fixture" / "noaa.csv").string();
    cfg.epa_csv = (dir / "fixture" / "epa.csv").string();
    cfg.out_dir = (dir / "out").string();
    cfg.seed = seed;
    cfg.targets = {"so2_ppb", "co_ppm"};
    cfg.preprocess.window = 32;
    cfg.preprocess.stride = 16;
    cfg.preprocess.train_fraction = 0.8;
    cfg.model.hidden = 8;
    cfg.model.attention_dim = 4;
    cfg.model.dropout_p = 0.1;
    cfg.train.iterations = 3;
    cfg.train.batch_size = 4;
    cfg.importance_repeats = 2;
    return cfg;
}

}  // namespace

TEST(Synth, DeterministicFixture) {
    const auto dir = fresh_dir("synth");
    SynthCommandConfig a, b;
    a.out_dir = (dir / "a").string();
    b.out_dir = (dir / "b").string();
    a.synth.days = 60;
    b.synth.days = 60;
    a.synth.seed = 5;
    b.synth.seed = 5;
    ASSERT_EQ(cmd_synth(a), kExitOk);
    ASSERT_EQ(cmd_synth(b), kExitOk);
    EXPECT_EQ(slurp(dir / "a" / "noaa.csv"), slurp(dir / "b" / "noaa.csv"));
    EXPECT_EQ(slurp(dir / "a" / "epa.csv"), slurp(dir / "b" / "epa.csv"));
    EXPECT_NE(slurp(dir / "a" / "noaa.csv"), "");
}

TEST(Synth, FixtureParsesThroughIngest) {
    const auto dir = fresh_dir("synth_parse");
    SynthCommandConfig synth;
    synth.out_dir = dir.string();
    synth.synth.days = 50;
    synth.synth.missing_rate = 0.05;
    ASSERT_EQ(cmd_synth(synth), kExitOk);
    const auto noaa = parse_source_csv((dir / "noaa.csv").string(), canonical_schema());
    const auto epa = parse_source_csv((dir / "epa.csv").string(), canonical_schema());
    EXPECT_EQ(noaa.columns.size(), 6u);
    EXPECT_EQ(epa.columns.size(), 4u);
    EXPECT_EQ(noaa.n_rows(), 100u);  // two readings per day
    EXPECT_EQ(epa.n_rows(), 50u);
    const auto merged = merge_tables(noaa, epa);
    EXPECT_TRUE(validate_schema(merged, canonical_schema()).ok());
}

TEST(Preprocess, WritesFrameStatsAndValidation) {
    const auto dir = fresh_dir("preprocess");
    const auto cfg = small_config(dir);
    ASSERT_EQ(cmd_preprocess(cfg), kExitOk);
    EXPECT_TRUE(fs::exists(fs::path(cfg.out_dir) / "frame.csv"));
    EXPECT_TRUE(fs::exists(fs::path(cfg.out_dir) / "stats.json"));
    EXPECT_TRUE(fs::exists(fs::path(cfg.out_dir) / "validation.txt"));

    const auto frame_text = slurp(fs::path(cfg.out_dir) / "frame.csv");
    std::istringstream lines(frame_text);
    std::string header;
    std::getline(lines, header);
    EXPECT_EQ(header,
              "date,temperature_c,wind_speed_ms,wind_direction_deg,relative_humidity_pct,"
              "precipitable_water_cm,pressure_mbar,o3_ppm,co_ppm,so2_ppb,no2_ppb");
    // gap-free: every cell parses as a finite double
    std::string line;
    std::size_t rows = 0;
    while (std::getline(lines, line)) {
        ++rows;
        std::istringstream cells(line);
        std::string cell;
        std::getline(cells, cell, ',');  // date
        while (std::getline(cells, cell, ',')) {
            ASSERT_FALSE(cell.empty());
            EXPECT_TRUE(std::isfinite(std::stod(cell)));
        }
    }
    EXPECT_EQ(rows, 320u);

    const auto stats = read_stats_json((fs::path(cfg.out_dir) / "stats.json").string());
    EXPECT_EQ(stats.column_names.size(), 10u);
}

TEST(Preprocess, MissingInputFileExitsThree) {
    const auto dir = fresh_dir("missing_input");
    auto cfg = small_config(dir);
    cfg.noaa_csv = (dir / "nope.csv").string();
    EXPECT_EQ(cmd_preprocess(cfg), kExitData);
}

TEST(Preprocess, MissingTargetsExitsTwo) {
    const auto dir = fresh_dir("missing_targets");
    auto cfg = small_config(dir);
    cfg.targets.clear();
    EXPECT_EQ(cmd_preprocess(cfg), kExitConfig);
}

TEST(Preprocess, UnknownTargetExitsTwo) {
    const auto dir = fresh_dir("bad_target");
    auto cfg = small_config(dir);
    cfg.targets = {"pm25_ugm3"};
    EXPECT_EQ(cmd_preprocess(cfg), kExitConfig);
}

TEST(Train, WritesCheckpointAndReport) {
    const auto dir = fresh_dir("train");
    const auto cfg = small_config(dir);
    ASSERT_EQ(cmd_train(cfg), kExitOk);
    EXPECT_TRUE(fs::exists(fs::path(cfg.out_dir) / "checkpoint.json"));
    const auto report = slurp(fs::path(cfg.out_dir) / "train_report.csv");
    EXPECT_EQ(report.substr(0, report.find('\n')), "epoch,mean_loss,seconds");

    const auto ckpt = load_checkpoint((fs::path(cfg.out_dir) / "checkpoint.json").string());
    EXPECT_EQ(ckpt.target_columns, cfg.targets);
    EXPECT_EQ(ckpt.training.iterations_completed, 3u);
    EXPECT_EQ(ckpt.model.config.hidden, 8u);
}

TEST(Train, NegativeLearningRateExitsTwo) {
    const auto dir = fresh_dir("bad_lr");
    auto cfg = small_config(dir);
    cfg.train.learning_rate = -1.0;
    EXPECT_EQ(cmd_train(cfg), kExitConfig);
}

TEST(Train, ByteIdenticalCheckpointsForSameSeed) {
    const auto dir = fresh_dir("determinism");
    auto cfg = small_config(dir);
    cfg.out_dir = (dir / "run1").string();
    ASSERT_EQ(cmd_train(cfg), kExitOk);
    cfg.out_dir = (dir / "run2").string();
    ASSERT_EQ(cmd_train(cfg), kExitOk);
    EXPECT_EQ(slurp(dir / "run1" / "checkpoint.json"), slurp(dir / "run2" / "checkpoint.json"));

    cfg.out_dir = (dir / "run3").string();
    cfg.seed = 8;
    ASSERT_EQ(cmd_train(cfg), kExitOk);
    EXPECT_NE(slurp(dir / "run1" / "checkpoint.json"), slurp(dir / "run3" / "checkpoint.json"));
}

TEST(Report, WritesAllArtifactsWithDocumentedHeaders) {
    const auto dir = fresh_dir("report");
    const auto cfg = small_config(dir);
    ASSERT_EQ(cmd_train(cfg), kExitOk);
    const auto ckpt_path = (fs::path(cfg.out_dir) / "checkpoint.json").string();
    ASSERT_EQ(cmd_report(cfg, ckpt_path), kExitOk);

    const auto metrics = slurp(fs::path(cfg.out_dir) / "metrics.csv");
    EXPECT_EQ(metrics.substr(0, metrics.find('\n')), "pollutant,mae,rmse,mse,mape_pct");
    std::size_t metric_rows = 0;
    for (char c : metrics) metric_rows += (c == '\n');
    EXPECT_EQ(metric_rows, 1u + cfg.targets.size());

    const auto importance = slurp(fs::path(cfg.out_dir) / "importance.csv");
    EXPECT_EQ(importance.substr(0, importance.find('\n')),
              "feature,base_mae,mean_shuffled_mae,importance");
    for (const auto& feature : input_feature_names())
        EXPECT_NE(importance.find(feature), std::string::npos) << feature;

    const auto repeats = slurp(fs::path(cfg.out_dir) / "importance_repeats.csv");
    EXPECT_EQ(repeats.substr(0, repeats.find('\n')), "feature,repeat,shuffled_mae");

    const auto predictions = slurp(fs::path(cfg.out_dir) / "predictions.csv");
    EXPECT_EQ(predictions.substr(0, predictions.find('\n')), "date,pollutant,actual,predicted");
    EXPECT_NE(predictions.find("so2_ppb"), std::string::npos);
    EXPECT_NE(predictions.find("co_ppm"), std::string::npos);
}

TEST(Report, TargetCountMismatchExitsFive) {
    const auto dir = fresh_dir("mismatch");
    auto cfg = small_config(dir);
    ASSERT_EQ(cmd_train(cfg), kExitOk);
    const auto ckpt_path = (fs::path(cfg.out_dir) / "checkpoint.json").string();
    cfg.targets = {"so2_ppb", "co_ppm", "o3_ppm"};  // checkpoint was trained with 2
    EXPECT_EQ(cmd_report(cfg, ckpt_path), kExitArtifact);
}

TEST(Report, MissingCheckpointExitsThree) {
    const auto dir = fresh_dir("no_ckpt");
    const auto cfg = small_config(dir);
    EXPECT_EQ(cmd_report(cfg, (dir / "absent.json").string()), kExitData);
}

TEST(RunConfigFile, LoadsValuesAndDefaults) {
    const auto dir = fresh_dir("config_file");
    const auto path = dir / "run.json";
    std::ofstream(path) << R"({
        "noaa_csv": "n.csv", "epa_csv": "e.csv", "out_dir": "results",
        "seed": 17,
        "targets": ["o3_ppm"],
        "preprocess": {"window": 128, "stride": 32},
        "model": {"hidden": 32},
        "train": {"iterations": 42}
    })";
    const auto cfg = load_run_config(path.string());
    EXPECT_EQ(cfg.noaa_csv, "n.csv");
    EXPECT_EQ(cfg.seed, 17u);
    EXPECT_EQ(cfg.preprocess.window, 128u);
    EXPECT_DOUBLE_EQ(cfg.preprocess.train_fraction, 0.8);  // default
    EXPECT_EQ(cfg.model.hidden, 32u);
    EXPECT_DOUBLE_EQ(cfg.model.dropout_p, 0.2);  // default
    EXPECT_EQ(cfg.train.iterations, 42u);
    EXPECT_DOUBLE_EQ(cfg.train.learning_rate, 0.001);  // default
    EXPECT_EQ(cfg.train.batch_size, 8u);               // default
    EXPECT_EQ(cfg.importance_repeats, 10u);            // default

    const auto resolved = cfg.resolved_model();
    EXPECT_EQ(resolved.input_features, 6u);
    EXPECT_EQ(resolved.window, 128u);
    EXPECT_EQ(resolved.targets, 1u);
    EXPECT_EQ(resolved.seed, 17u);
}

TEST(RunConfigFile, MalformedJsonIsConfigError) {
    const auto dir = fresh_dir("config_bad");
    const auto path = dir / "bad.json";
    std::ofstream(path) << "{ nope";
    EXPECT_THROW(load_run_config(path.string()), config_error);
    EXPECT_THROW(load_run_config((dir / "absent.json").string()), config_error);
}

TEST(Commands, IdempotentReruns) {
    const auto dir = fresh_dir("idempotent");
    const auto cfg = small_config(dir);
    ASSERT_EQ(cmd_preprocess(cfg), kExitOk);
    const auto frame_first = slurp(fs::path(cfg.out_dir) / "frame.csv");
    const auto stats_first = slurp(fs::path(cfg.out_dir) / "stats.json");
    ASSERT_EQ(cmd_preprocess(cfg), kExitOk);
    EXPECT_EQ(slurp(fs::path(cfg.out_dir) / "frame.csv"), frame_first);
    EXPECT_EQ(slurp(fs::path(cfg.out_dir) / "stats.json"), stats_first);
}

TEST(Cli, FlagsOverrideConfigFileValues) {
    const auto dir = fresh_dir("cli_overrides");
    auto cfg = small_config(dir);
    // config file says 5 iterations; the flag forces 2
    const auto config_path = dir / "run.json";
    std::ofstream(config_path) << nlohmann::json{
        {"noaa_csv", cfg.noaa_csv},
        {"epa_csv", cfg.epa_csv},
        {"out_dir", (dir / "cli_out").string()},
        {"seed", 7},
        {"targets", cfg.targets},
        {"preprocess", {{"window", 32}, {"stride", 16}}},
        {"model", {{"hidden", 8}, {"attention_dim", 4}}},
        {"train", {{"iterations", 5}, {"batch_size", 4}}},
        {"importance_repeats", 2}}.dump();

    const std::string command = std::string(AIRCAST_CLI_PATH) + " train --config " +
                                config_path.string() + " --iterations 2 2>/dev/null";
    ASSERT_EQ(std::system(command.c_str()), 0);
    const auto ckpt = load_checkpoint((dir / "cli_out" / "checkpoint.json").string());
    EXPECT_EQ(ckpt.training.iterations_completed, 2u);
}

TEST(Commands, OutputsConfinedToOutDir) {
    const auto dir = fresh_dir("confined");
    auto cfg = small_config(dir);
    // wipe the default out dir and run everything into a dedicated one
    fs::remove_all(fs::path(cfg.out_dir));
    cfg.out_dir = (dir / "only_here").string();
    ASSERT_EQ(cmd_train(cfg), kExitOk);
    ASSERT_EQ(cmd_report(cfg, (fs::path(cfg.out_dir) / "checkpoint.json").string()), kExitOk);
    // nothing appears beside the fixture and the configured output directory
    std::vector<std::string> entries;
    for (const auto& e : fs::directory_iterator(dir)) entries.push_back(e.path().filename());
    std::sort(entries.begin(), entries.end());
    EXPECT_EQ(entries, (std::vector<std::string>{"fixture", "only_here"}));
}
