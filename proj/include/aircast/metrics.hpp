#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "aircast/errors.hpp"

namespace aircast {

// MAPE denominator guard; keeps the metric finite on near-zero truth values.
inline constexpr double kMapeEpsilon = 1e-8;

struct PollutantMetrics {
    std::string pollutant;
    double mae = 0.0;
    double rmse = 0.0;
    double mse = 0.0;
    double mape_pct = 0.0;
    std::size_t n_points = 0;
};

struct MetricsReport {
    std::vector<PollutantMetrics> rows;
    std::string span_begin;  // ISO dates of the evaluation span
    std::string span_end;
};

// MAE = mean|e|, MSE = mean e^2, RMSE = sqrt(MSE),
// MAPE = 100 * mean(|e| / max(|truth|, eps)). Inputs are physical-unit
// (denormalized) series.
inline PollutantMetrics compute_pollutant_metrics(const std::string& name,
                                                  const std::vector<double>& pred,
                                                  const std::vector<double>& truth) {
    if (pred.size() != truth.size())
        throw data_error("compute_metrics: length mismatch for " + name);
    if (pred.empty()) throw data_error("compute_metrics: empty series for " + name);

    PollutantMetrics m;
    m.pollutant = name;
    m.n_points = pred.size();
    double abs_sum = 0.0, sq_sum = 0.0, pct_sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double e = pred[i] - truth[i];
        abs_sum += std::fabs(e);
        sq_sum += e * e;
        pct_sum += std::fabs(e) / std::max(std::fabs(truth[i]), kMapeEpsilon);
    }
    const double n = static_cast<double>(pred.size());
    m.mae = abs_sum / n;
    m.mse = sq_sum / n;
    m.rmse = std::sqrt(m.mse);
    m.mape_pct = 100.0 * pct_sum / n;
    return m;
}

inline MetricsReport compute_metrics(const std::vector<std::string>& names,
                                     const std::vector<std::vector<double>>& preds,
                                     const std::vector<std::vector<double>>& truths,
                                     std::string span_begin = "", std::string span_end = "") {
    if (names.size() != preds.size() || names.size() != truths.size())
        throw data_error("compute_metrics: series count mismatch");
    MetricsReport report;
    report.span_begin = std::move(span_begin);
    report.span_end = std::move(span_end);
    for (std::size_t i = 0; i < names.size(); ++i)
        report.rows.push_back(compute_pollutant_metrics(names[i], preds[i], truths[i]));
    return report;
}

// Fixed schema: pollutant,mae,rmse,mse,mape_pct
inline void write_metrics_csv(const MetricsReport& report, std::ostream& out) {
    out << "pollutant,mae,rmse,mse,mape_pct\n";
    char buf[64];
    for (const auto& r : report.rows) {
        out << r.pollutant;
        for (double v : {r.mae, r.rmse, r.mse, r.mape_pct}) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << "," << buf;
        }
        out << "\n";
    }
}

inline void write_metrics_csv(const MetricsReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write metrics: " + path);
    write_metrics_csv(report, out);
}

// Human-readable summary: one pollutant per row, MAE / RMSE / MSE / MAPE
// columns.
inline std::string render_metrics_table(const MetricsReport& report) {
    std::ostringstream os;
    os << std::left << std::setw(12) << "Pollutant" << std::right << std::setw(12) << "MAE"
       << std::setw(12) << "RMSE" << std::setw(12) << "MSE" << std::setw(12) << "MAPE"
       << "\n";
    for (const auto& r : report.rows) {
        os << std::left << std::setw(12) << r.pollutant << std::right << std::fixed
           << std::setprecision(3) << std::setw(12) << r.mae << std::setw(12) << r.rmse
           << std::setw(12) << r.mse << std::setw(11) << std::setprecision(2) << r.mape_pct
           << "%\n";
        os.unsetf(std::ios::fixed);
    }
    if (!report.span_begin.empty())
        os << "evaluation span: " << report.span_begin << " .. " << report.span_end << "\n";
    return os.str();
}

}  // namespace aircast
