#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aircast/errors.hpp"
#include "aircast/ingest.hpp"
#include "aircast/timestamp.hpp"

namespace aircast {

// One variable sampled on consecutive day indices (days since series start);
// values may be absent before the gap-filling steps run.
struct TimeSeries {
    std::vector<std::int64_t> t;  // strictly increasing day indices
    std::vector<std::optional<double>> x;

    std::size_t size() const { return t.size(); }

    std::size_t present_count() const {
        std::size_t n = 0;
        for (const auto& v : x) n += v.has_value();
        return n;
    }
};

struct DailySeries {
    std::int64_t start_day = 0;  // epoch day of index 0
    std::vector<std::string> names;
    std::vector<TimeSeries> series;  // one per name, all on the same day axis
};

// Collapses sub-daily readings to one value per calendar day per column: the
// arithmetic mean of that day's present values, absent when a day has none.
// The day axis spans the full range covered by the table's timestamps.
inline DailySeries resample_daily(const RawTable& raw) {
    if (raw.n_rows() == 0 || raw.columns.empty()) throw data_error("resample_daily: empty table");
    const std::int64_t first_day = epoch_day_of(raw.timestamps.front());
    const std::int64_t last_day = epoch_day_of(raw.timestamps.back());
    const std::size_t n_days = static_cast<std::size_t>(last_day - first_day + 1);

    DailySeries out;
    out.start_day = first_day;
    for (const auto& col : raw.columns) {
        std::vector<double> sum(n_days, 0.0);
        std::vector<std::size_t> count(n_days, 0);
        for (std::size_t r = 0; r < raw.n_rows(); ++r) {
            if (!col.values[r].has_value()) continue;
            const std::size_t d = static_cast<std::size_t>(epoch_day_of(raw.timestamps[r]) - first_day);
            sum[d] += *col.values[r];
            ++count[d];
        }
        TimeSeries s;
        s.t.resize(n_days);
        s.x.resize(n_days);
        for (std::size_t d = 0; d < n_days; ++d) {
            s.t[d] = static_cast<std::int64_t>(d);
            if (count[d] > 0) s.x[d] = sum[d] / static_cast<double>(count[d]);
        }
        out.names.push_back(col.name);
        out.series.push_back(std::move(s));
    }
    return out;
}

// Fills every absent value lying strictly between two present neighbours
// with the point on the line joining them:
//   x(t) = x_i + (t - t_i) / (t_{i+1} - t_i) * (x_{i+1} - x_i)
// Absences before the first or after the last present value are left alone;
// a series with a single present value therefore passes through unchanged.
inline TimeSeries interpolate_linear(const TimeSeries& s) {
    if (s.present_count() == 0) throw data_error("interpolate_linear: no present values");

    TimeSeries out = s;
    std::size_t prev = s.size();  // index of last present value seen
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s.x[i].has_value()) continue;
        if (prev != s.size() && i > prev + 1) {
            const double x0 = *s.x[prev], x1 = *s.x[i];
            const double t0 = static_cast<double>(s.t[prev]), t1 = static_cast<double>(s.t[i]);
            for (std::size_t j = prev + 1; j < i; ++j)
                out.x[j] = x0 + (static_cast<double>(s.t[j]) - t0) / (t1 - t0) * (x1 - x0);
        }
        prev = i;
    }
    return out;
}

// Replaces every remaining absent value with the mean of the present values.
inline TimeSeries impute_mean(const TimeSeries& s) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& v : s.x)
        if (v.has_value()) {
            sum += *v;
            ++n;
        }
    if (n == 0) throw data_error("impute_mean: no data to impute");
    const double mean = sum / static_cast<double>(n);

    TimeSeries out = s;
    for (auto& v : out.x)
        if (!v.has_value()) v = mean;
    return out;
}

}  // namespace aircast
