#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "aircast/errors.hpp"
#include "aircast/ingest.hpp"
#include "aircast/rng.hpp"
#include "aircast/schema.hpp"
#include "aircast/timestamp.hpp"

namespace aircast {

// Synthetic two-agency fixture with a known feature -> target dependence.
// smooth2: every pollutant is a fixed smooth function of the observed
// temperature and pressure plus noise. single_feature: pollutants depend on
// temperature only, which makes permutation importance discriminating.
struct SynthConfig {
    enum class Dependence { smooth2, single_feature };

    std::size_t days = 800;
    std::uint64_t seed = 0;
    std::size_t noaa_readings_per_day = 2;
    double missing_rate = 0.02;
    Dependence dependence = Dependence::smooth2;
    std::string start_date = "2016-01-01";

    void validate() const {
        if (days < 10) throw config_error("synth: days must be >= 10");
        if (noaa_readings_per_day < 1 || noaa_readings_per_day > 24)
            throw config_error("synth: readings per day must be in [1, 24]");
        if (missing_rate < 0.0 || missing_rate > 0.5)
            throw config_error("synth: missing_rate must be in [0, 0.5]");
    }
};

namespace detail {

constexpr double kTau = 6.283185307179586476925286766559;

struct SynthDay {
    double temperature, wind_speed, wind_direction, humidity, water, pressure;
    double o3, co, so2, no2;
};

inline SynthDay synth_day(std::size_t day, SynthConfig::Dependence dep, Rng& rng,
                          double ar_component) {
    const double d = static_cast<double>(day);
    const bool single = dep == SynthConfig::Dependence::single_feature;
    SynthDay s;
    // single_feature mode rides temperature on a persistent stochastic
    // component (passed in by the caller); the targets track it, so the
    // feature cannot be dead-reckoned from seasonal position alone
    s.temperature = single ? 18.0 + 2.0 * std::sin(kTau * d / 91.0 + 0.5) + ar_component +
                                 0.2 * rng.normal()
                           : 18.0 + 8.0 * std::sin(kTau * d / 365.25) +
                                 1.5 * std::sin(kTau * d / 91.0 + 0.5) + 0.3 * rng.normal();
    // in single_feature mode every other variable runs on periods co-prime
    // with the temperature seasonality, so nothing proxies for it
    s.wind_speed = std::max(
        0.1, 3.2 + 1.1 * std::sin(kTau * d / (single ? 59.0 : 140.0) + 1.3) + 0.2 * rng.normal());
    s.wind_direction =
        180.0 + 120.0 * std::sin(kTau * d / (single ? 73.0 : 200.0) + 2.4) + 8.0 * rng.normal();
    s.wind_direction = s.wind_direction - 360.0 * std::floor(s.wind_direction / 360.0);
    s.humidity =
        std::clamp(55.0 + 20.0 * std::sin(kTau * d / (single ? 137.0 : 365.25) + 2.1) +
                       6.0 * std::sin(kTau * d / (single ? 47.0 : 61.0)) + 2.0 * rng.normal(),
                   2.0, 98.0);
    s.water = std::max(0.05, 1.8 + 0.8 * std::sin(kTau * d / (single ? 101.0 : 365.25) + 0.7) +
                                 0.1 * rng.normal());
    s.pressure = 1013.0 + 6.0 * std::sin(kTau * d / (single ? 83.0 : 180.0) + 0.5) +
                 2.0 * std::sin(kTau * d / (single ? 29.0 : 45.0) + 1.0) + 0.8 * rng.normal();

    const double z_t = (s.temperature - 18.0) / (single ? 3.0 : 8.0);
    const double z_p = (s.pressure - 1013.0) / 6.0;
    if (!single) {
        s.o3 = 0.050 + 0.016 * std::tanh(z_t) + 0.010 * z_p + 0.0015 * rng.normal();
        s.co = 1.3 + 0.5 * z_t - 0.35 * z_p + 0.04 * rng.normal();
        s.so2 = 4.5 + 1.5 * std::sin(1.3 * z_t) + 0.9 * z_p + 0.12 * rng.normal();
        s.no2 = 18.0 + 4.5 * z_t + 2.5 * z_p + 0.4 * rng.normal();
    } else {
        s.o3 = 0.050 + 0.018 * std::tanh(z_t) + 0.0005 * rng.normal();
        s.co = 1.3 + 0.55 * z_t + 0.01 * rng.normal();
        s.so2 = 4.5 + 1.6 * std::sin(1.3 * z_t) + 0.03 * rng.normal();
        s.no2 = 18.0 + 5.0 * z_t + 0.1 * rng.normal();
    }
    return s;
}

inline void write_cell(std::ostream& out, double value, Rng& missing_rng, double missing_rate) {
    out << ",";
    if (missing_rng.uniform() < missing_rate) return;  // absent cell
    out << format_value(value);
}

}  // namespace detail

// Writes the NOAA-style and EPA-style CSV exports. NOAA rows are sub-daily
// (readings_per_day per day, symmetric around the daily value so the daily
// mean is recoverable); EPA rows are daily.
inline void generate_synthetic_fixture(const SynthConfig& cfg, const std::string& noaa_path,
                                       const std::string& epa_path) {
    cfg.validate();
    const std::int64_t start = parse_timestamp(cfg.start_date);

    Rng value_rng(derive_seed(cfg.seed, 0x5a17));
    Rng noaa_missing(derive_seed(cfg.seed, 0x5a18));
    Rng epa_missing(derive_seed(cfg.seed, 0x5a19));

    std::ofstream noaa(noaa_path);
    if (!noaa) throw data_error("cannot write file: " + noaa_path);
    std::ofstream epa(epa_path);
    if (!epa) throw data_error("cannot write file: " + epa_path);

    noaa << "timestamp,temperature_c,wind_speed_ms,wind_direction_deg,relative_humidity_pct,"
            "precipitable_water_cm,pressure_mbar\n";
    epa << "timestamp,o3_ppm,co_ppm,so2_ppb,no2_ppb\n";

    const std::size_t readings = cfg.noaa_readings_per_day;
    double ar = 0.0;  // AR(1) driver for single_feature temperature
    for (std::size_t day = 0; day < cfg.days; ++day) {
        ar = 0.9 * ar + 1.0 * value_rng.normal();
        const auto s = detail::synth_day(day, cfg.dependence, value_rng, ar);
        for (std::size_t r = 0; r < readings; ++r) {
            // symmetric intra-day wiggle, zero mean across the day's readings
            const double w =
                readings == 1 ? 0.0
                              : (static_cast<double>(2 * r) / static_cast<double>(readings - 1)) -
                                    1.0;
            const std::int64_t ts =
                start + static_cast<std::int64_t>(day) * 86400 +
                static_cast<std::int64_t>((r + 1) * 86400 / (readings + 1));
            noaa << format_timestamp(ts);
            detail::write_cell(noaa, s.temperature + 0.4 * w, noaa_missing, cfg.missing_rate);
            detail::write_cell(noaa, s.wind_speed + 0.15 * w, noaa_missing, cfg.missing_rate);
            detail::write_cell(noaa, s.wind_direction + 2.0 * w, noaa_missing, cfg.missing_rate);
            detail::write_cell(noaa, s.humidity + 1.0 * w, noaa_missing, cfg.missing_rate);
            detail::write_cell(noaa, s.water + 0.05 * w, noaa_missing, cfg.missing_rate);
            detail::write_cell(noaa, s.pressure + 0.3 * w, noaa_missing, cfg.missing_rate);
            noaa << "\n";
        }
        const std::int64_t ts = start + static_cast<std::int64_t>(day) * 86400 + 43200;
        epa << format_timestamp(ts);
        detail::write_cell(epa, s.o3, epa_missing, cfg.missing_rate);
        detail::write_cell(epa, s.co, epa_missing, cfg.missing_rate);
        detail::write_cell(epa, s.so2, epa_missing, cfg.missing_rate);
        detail::write_cell(epa, s.no2, epa_missing, cfg.missing_rate);
        epa << "\n";
    }
}

}  // namespace aircast
