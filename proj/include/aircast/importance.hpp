#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "aircast/errors.hpp"
#include "aircast/frame.hpp"
#include "aircast/predict.hpp"
#include "aircast/rng.hpp"

namespace aircast {

struct FeatureImportance {
    std::string feature;
    double base_mae = 0.0;
    double mean_shuffled_mae = 0.0;
    double importance = 0.0;             // mean shuffled MAE - base MAE
    std::vector<double> repeat_mae;      // one entry per repeat
};

struct ImportanceReport {
    double base_mae = 0.0;
    std::size_t repeats = 0;
    std::vector<FeatureImportance> features;
};

namespace detail {

// Copies the dataset inputs with one feature's values rearranged across the
// time axis inside each sample; perms[s] is the permutation for sample s.
inline std::vector<std::vector<double>> permute_feature(
    const WindowedDataset& ds, std::size_t feature,
    const std::vector<std::vector<std::size_t>>& perms) {
    auto inputs = ds.inputs;
    const std::size_t width = ds.n_features();
    for (std::size_t s = 0; s < inputs.size(); ++s) {
        const auto& src = ds.inputs[s];
        auto& dst = inputs[s];
        for (std::size_t t = 0; t < ds.window; ++t)
            dst[t * width + feature] = src[perms[s][t] * width + feature];
    }
    return inputs;
}

inline double mae_of_inputs(ForecastModel& model, const WindowedDataset& ds,
                            const std::vector<std::vector<double>>& inputs,
                            const NormalizationStats& stats,
                            const std::vector<std::size_t>& target_cols) {
    auto preds = predict_windows(model, inputs, ds.window, ds.n_features());
    return physical_mae(preds, ds.targets, stats, target_cols);
}

}  // namespace detail

// Shuffled-feature MAE with caller-supplied permutations; exposed so that an
// identity permutation provably reproduces the base MAE bit for bit.
inline double mae_with_feature_permuted(ForecastModel& model, const WindowedDataset& ds,
                                        const NormalizationStats& stats, std::size_t feature,
                                        const std::vector<std::vector<std::size_t>>& perms) {
    const auto target_cols = stat_columns_for(stats, ds.target_names);
    return detail::mae_of_inputs(model, ds, detail::permute_feature(ds, feature, perms), stats,
                                 target_cols);
}

// Permutation feature importance: for each input feature, shuffle its values
// across time within each sample window (other features and all truths
// untouched), recompute the physical-unit MAE, and average over `repeats`
// draws. Positive importance = shuffling hurts = the feature matters.
// Repeat streams derive from (seed, feature, repeat), so evaluation order
// cannot change the results.
inline ImportanceReport permutation_importance(ForecastModel& model, const WindowedDataset& ds,
                                               const NormalizationStats& stats,
                                               std::uint64_t seed, std::size_t repeats) {
    if (ds.n_samples() == 0) throw data_error("permutation_importance: empty dataset");
    if (repeats == 0) throw config_error("permutation_importance: repeats must be >= 1");
    if (model.mode != Mode::eval)
        throw artifact_error("permutation_importance: model must be in eval mode");

    const auto target_cols = stat_columns_for(stats, ds.target_names);

    ImportanceReport report;
    report.repeats = repeats;
    report.base_mae = detail::mae_of_inputs(model, ds, ds.inputs, stats, target_cols);

    for (std::size_t f = 0; f < ds.n_features(); ++f) {
        FeatureImportance fi;
        fi.feature = ds.input_names[f];
        fi.base_mae = report.base_mae;
        for (std::size_t r = 0; r < repeats; ++r) {
            Rng rng(derive_seed(seed, f + 1, r + 1));
            std::vector<std::vector<std::size_t>> perms;
            perms.reserve(ds.n_samples());
            for (std::size_t s = 0; s < ds.n_samples(); ++s)
                perms.push_back(rng.permutation(ds.window));
            fi.repeat_mae.push_back(detail::mae_of_inputs(
                model, ds, detail::permute_feature(ds, f, perms), stats, target_cols));
        }
        double sum = 0.0;
        for (double v : fi.repeat_mae) sum += v;
        fi.mean_shuffled_mae = sum / static_cast<double>(repeats);
        fi.importance = fi.mean_shuffled_mae - fi.base_mae;
        report.features.push_back(std::move(fi));
    }
    return report;
}

// Fixed schema: feature,base_mae,mean_shuffled_mae,importance
inline void write_importance_csv(const ImportanceReport& report, std::ostream& out) {
    out << "feature,base_mae,mean_shuffled_mae,importance\n";
    char buf[64];
    for (const auto& f : report.features) {
        out << f.feature;
        for (double v : {f.base_mae, f.mean_shuffled_mae, f.importance}) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << "," << buf;
        }
        out << "\n";
    }
}

// Fixed schema: feature,repeat,shuffled_mae
inline void write_importance_repeats_csv(const ImportanceReport& report, std::ostream& out) {
    out << "feature,repeat,shuffled_mae\n";
    char buf[64];
    for (const auto& f : report.features)
        for (std::size_t r = 0; r < f.repeat_mae.size(); ++r) {
            std::snprintf(buf, sizeof(buf), "%.17g", f.repeat_mae[r]);
            out << f.feature << "," << (r + 1) << "," << buf << "\n";
        }
}

inline void write_importance_csv(const ImportanceReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write importance: " + path);
    write_importance_csv(report, out);
}

inline void write_importance_repeats_csv(const ImportanceReport& report,
                                         const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write importance repeats: " + path);
    write_importance_repeats_csv(report, out);
}

}  // namespace aircast
