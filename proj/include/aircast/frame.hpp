#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "aircast/errors.hpp"
#include "aircast/series.hpp"

namespace aircast {

// Gap-free daily table in canonical column order.
struct AlignedFrame {
    std::int64_t start_day = 0;  // epoch day of row 0
    std::vector<std::string> column_names;
    std::vector<double> values;  // row-major, n_days x n_columns
    std::size_t n_days = 0;

    std::size_t n_columns() const { return column_names.size(); }

    double at(std::size_t day, std::size_t col) const { return values[day * n_columns() + col]; }
    double& at(std::size_t day, std::size_t col) { return values[day * n_columns() + col]; }

    std::size_t column_index(std::string_view name) const {
        for (std::size_t i = 0; i < column_names.size(); ++i)
            if (column_names[i] == name) return i;
        throw data_error("no such column: " + std::string(name));
    }
};

// Per-column z-score statistics, computed from the training partition only.
// Columns whose population deviation falls below `epsilon_std` are stored
// with std 1 so normalization maps them to (x - mean) = 0 instead of
// producing non-finite values.
struct NormalizationStats {
    static constexpr double epsilon_std = 1e-8;

    std::vector<std::string> column_names;
    std::vector<double> mean;
    std::vector<double> std_dev;
};

inline NormalizationStats compute_stats(const AlignedFrame& frame) {
    NormalizationStats stats;
    stats.column_names = frame.column_names;
    const std::size_t cols = frame.n_columns();
    stats.mean.assign(cols, 0.0);
    stats.std_dev.assign(cols, 0.0);
    if (frame.n_days == 0) throw data_error("compute_stats: empty frame");
    for (std::size_t c = 0; c < cols; ++c) {
        double sum = 0.0;
        for (std::size_t d = 0; d < frame.n_days; ++d) sum += frame.at(d, c);
        const double mean = sum / static_cast<double>(frame.n_days);
        double ss = 0.0;
        for (std::size_t d = 0; d < frame.n_days; ++d) {
            const double dev = frame.at(d, c) - mean;
            ss += dev * dev;
        }
        const double pop_std = std::sqrt(ss / static_cast<double>(frame.n_days));
        stats.mean[c] = mean;
        stats.std_dev[c] = pop_std < NormalizationStats::epsilon_std ? 1.0 : pop_std;
    }
    return stats;
}

inline AlignedFrame normalize_zscore(const AlignedFrame& frame, const NormalizationStats& stats) {
    if (stats.column_names != frame.column_names)
        throw data_error("normalize_zscore: column mismatch");
    AlignedFrame out = frame;
    for (std::size_t d = 0; d < frame.n_days; ++d)
        for (std::size_t c = 0; c < frame.n_columns(); ++c)
            out.at(d, c) = (frame.at(d, c) - stats.mean[c]) / stats.std_dev[c];
    return out;
}

inline AlignedFrame denormalize(const AlignedFrame& frame, const NormalizationStats& stats) {
    if (stats.column_names != frame.column_names) throw data_error("denormalize: column mismatch");
    AlignedFrame out = frame;
    for (std::size_t d = 0; d < frame.n_days; ++d)
        for (std::size_t c = 0; c < frame.n_columns(); ++c)
            out.at(d, c) = frame.at(d, c) * stats.std_dev[c] + stats.mean[c];
    return out;
}

inline double denormalize_value(double z, const NormalizationStats& stats, std::size_t col) {
    return z * stats.std_dev[col] + stats.mean[col];
}

// Chronological split: the first floor(n_days * train_fraction) days form the
// training frame, the remainder the test frame. No shuffling. `min_days`
// lets callers reject partitions shorter than one model window.
inline std::pair<AlignedFrame, AlignedFrame> split_chronological(const AlignedFrame& frame,
                                                                 double train_fraction,
                                                                 std::size_t min_days = 1) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw config_error("split_chronological: train_fraction must be in (0, 1)");
    const std::size_t n_train =
        static_cast<std::size_t>(std::floor(static_cast<double>(frame.n_days) * train_fraction));
    const std::size_t n_test = frame.n_days - n_train;
    if (n_train < min_days || n_test < min_days)
        throw data_error("split_chronological: partition shorter than " +
                         std::to_string(min_days) + " days (train " + std::to_string(n_train) +
                         ", test " + std::to_string(n_test) + ")");

    auto take = [&](std::size_t begin, std::size_t count) {
        AlignedFrame part;
        part.start_day = frame.start_day + static_cast<std::int64_t>(begin);
        part.column_names = frame.column_names;
        part.n_days = count;
        part.values.assign(frame.values.begin() + begin * frame.n_columns(),
                           frame.values.begin() + (begin + count) * frame.n_columns());
        return part;
    };
    return {take(0, n_train), take(n_train, n_test)};
}

// Fixed-length windows paired over identical day spans.
struct WindowedDataset {
    std::size_t window = 0;  // T
    std::size_t stride = 0;
    std::vector<std::string> input_names;
    std::vector<std::string> target_names;
    std::vector<std::int64_t> start_days;       // epoch day of each sample's first row
    std::vector<std::vector<double>> inputs;    // each T x F, row-major
    std::vector<std::vector<double>> targets;   // each T x P, row-major

    std::size_t n_samples() const { return inputs.size(); }
    std::size_t n_features() const { return input_names.size(); }
    std::size_t n_targets() const { return target_names.size(); }
};

inline WindowedDataset make_windows(const AlignedFrame& frame, std::size_t window,
                                    std::size_t stride,
                                    const std::vector<std::string>& input_cols,
                                    const std::vector<std::string>& target_cols) {
    if (window == 0) throw config_error("make_windows: window must be positive");
    if (stride == 0) throw config_error("make_windows: stride must be positive");
    if (frame.n_days < window)
        throw data_error("make_windows: frame shorter than window (" +
                         std::to_string(frame.n_days) + " < " + std::to_string(window) + ")");

    std::vector<std::size_t> in_idx, tgt_idx;
    for (const auto& n : input_cols) in_idx.push_back(frame.column_index(n));
    for (const auto& n : target_cols) tgt_idx.push_back(frame.column_index(n));

    WindowedDataset ds;
    ds.window = window;
    ds.stride = stride;
    ds.input_names = input_cols;
    ds.target_names = target_cols;
    for (std::size_t start = 0; start + window <= frame.n_days; start += stride) {
        std::vector<double> in(window * in_idx.size());
        std::vector<double> tg(window * tgt_idx.size());
        for (std::size_t t = 0; t < window; ++t) {
            for (std::size_t f = 0; f < in_idx.size(); ++f)
                in[t * in_idx.size() + f] = frame.at(start + t, in_idx[f]);
            for (std::size_t p = 0; p < tgt_idx.size(); ++p)
                tg[t * tgt_idx.size() + p] = frame.at(start + t, tgt_idx[p]);
        }
        ds.start_days.push_back(frame.start_day + static_cast<std::int64_t>(start));
        ds.inputs.push_back(std::move(in));
        ds.targets.push_back(std::move(tg));
    }
    return ds;
}

// --- dump formats -----------------------------------------------------------

inline void write_frame_csv(const AlignedFrame& frame, std::ostream& out) {
    out << "date";
    for (const auto& n : frame.column_names) out << "," << n;
    out << "\n";
    for (std::size_t d = 0; d < frame.n_days; ++d) {
        out << format_date(frame.start_day + static_cast<std::int64_t>(d));
        for (std::size_t c = 0; c < frame.n_columns(); ++c)
            out << "," << detail::format_value(frame.at(d, c));
        out << "\n";
    }
}

inline void write_frame_csv(const AlignedFrame& frame, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write file: " + path);
    write_frame_csv(frame, out);
}

}  // namespace aircast
