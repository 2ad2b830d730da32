#pragma once

#include <cstddef>
#include <vector>

#include "aircast/errors.hpp"
#include "aircast/frame.hpp"
#include "aircast/model.hpp"
#include "aircast/tensor.hpp"

namespace aircast {

// Eval-mode predictions for every window, batched for throughput. Each
// returned sample is T x P row-major in normalized units. Eval forward is a
// pure per-sample function, so batch grouping never changes the values.
inline std::vector<std::vector<double>> predict_windows(
    ForecastModel& model, const std::vector<std::vector<double>>& inputs, std::size_t window,
    std::size_t n_features, std::size_t batch_size = 8) {
    if (model.mode != Mode::eval) throw artifact_error("predict_windows: model must be in eval mode");
    std::vector<std::vector<double>> preds;
    preds.reserve(inputs.size());
    const std::size_t n_targets = model.config.targets;
    for (std::size_t begin = 0; begin < inputs.size(); begin += batch_size) {
        const std::size_t count = std::min(batch_size, inputs.size() - begin);
        ad::Tensor batch({count, window, n_features}, 0.0);
        for (std::size_t b = 0; b < count; ++b)
            std::copy(inputs[begin + b].begin(), inputs[begin + b].end(),
                      batch.data.begin() + b * window * n_features);
        ad::Tape tape(/*recording=*/false);
        auto out = model_forward(tape, ad::make_tensor(std::move(batch)), model);
        for (std::size_t b = 0; b < count; ++b)
            preds.emplace_back(out->data.begin() + b * window * n_targets,
                               out->data.begin() + (b + 1) * window * n_targets);
    }
    return preds;
}

// Physical-unit MAE over all (sample, day, target) points. `preds` and
// `targets` hold normalized values; both are denormalized with the training
// statistics before the error is taken.
inline double physical_mae(const std::vector<std::vector<double>>& preds,
                           const std::vector<std::vector<double>>& targets,
                           const NormalizationStats& stats,
                           const std::vector<std::size_t>& target_stat_cols) {
    double abs_sum = 0.0;
    std::size_t n = 0;
    const std::size_t n_targets = target_stat_cols.size();
    for (std::size_t s = 0; s < preds.size(); ++s) {
        for (std::size_t i = 0; i < preds[s].size(); ++i) {
            const std::size_t col = target_stat_cols[i % n_targets];
            const double p = denormalize_value(preds[s][i], stats, col);
            const double t = denormalize_value(targets[s][i], stats, col);
            abs_sum += std::fabs(p - t);
            ++n;
        }
    }
    if (n == 0) throw data_error("physical_mae: no points");
    return abs_sum / static_cast<double>(n);
}

inline std::vector<std::size_t> stat_columns_for(const NormalizationStats& stats,
                                                 const std::vector<std::string>& names) {
    std::vector<std::size_t> idx;
    for (const auto& name : names) {
        std::size_t i = 0;
        for (; i < stats.column_names.size(); ++i)
            if (stats.column_names[i] == name) break;
        if (i == stats.column_names.size())
            throw artifact_error("normalization stats missing column " + name);
        idx.push_back(i);
    }
    return idx;
}

}  // namespace aircast
