#include <gtest/gtest.h>

#include <cmath>
#include <optional>

#include "aircast/frame.hpp"
#include "aircast/rng.hpp"
#include "aircast/series.hpp"

using namespace aircast;

namespace {

// Independent naive re-implementations used as oracles. They deliberately
// share no code with the library: for each absent index the neighbours are
// found by linear scan and the formula is evaluated directly.
std::vector<std::optional<double>> naive_interpolate(const std::vector<std::int64_t>& t,
                                                     std::vector<std::optional<double>> x) {
    const auto original = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (original[i].has_value()) continue;
        std::ptrdiff_t left = -1, right = -1;
        for (std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) - 1; j >= 0; --j)
            if (original[j].has_value()) {
                left = j;
                break;
            }
        for (std::size_t j = i + 1; j < x.size(); ++j)
            if (original[j].has_value()) {
                right = static_cast<std::ptrdiff_t>(j);
                break;
            }
        if (left < 0 || right < 0) continue;
        const double x0 = *original[left], x1 = *original[right];
        const double t0 = static_cast<double>(t[left]), t1 = static_cast<double>(t[right]);
        x[i] = x0 + (static_cast<double>(t[i]) - t0) / (t1 - t0) * (x1 - x0);
    }
    return x;
}

std::vector<std::optional<double>> naive_impute(std::vector<std::optional<double>> x) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& v : x)
        if (v.has_value()) {
            sum += *v;
            ++n;
        }
    const double mean = sum / static_cast<double>(n);
    for (auto& v : x)
        if (!v.has_value()) v = mean;
    return x;
}

TimeSeries make_series(std::vector<std::int64_t> t, std::vector<std::optional<double>> x) {
    TimeSeries s;
    s.t = std::move(t);
    s.x = std::move(x);
    return s;
}

AlignedFrame make_frame(std::vector<std::string> names, std::size_t days,
                        std::vector<double> values) {
    AlignedFrame f;
    f.start_day = 16800;
    f.column_names = std::move(names);
    f.n_days = days;
    f.values = std::move(values);
    return f;
}

}  // namespace

TEST(Resample, DailyMeans) {
    RawTable raw;
    raw.timestamps = {parse_timestamp("2016-01-01T06:00:00Z"),
                      parse_timestamp("2016-01-01T18:00:00Z"),
                      parse_timestamp("2016-01-02T12:00:00Z"),
                      parse_timestamp("2016-01-03T09:00:00Z")};
    raw.columns.push_back({"co_ppm", {2.0, 4.0, 7.0, std::nullopt}});

    const auto daily = resample_daily(raw);
    ASSERT_EQ(daily.series.size(), 1u);
    const auto& s = daily.series[0];
    ASSERT_EQ(s.size(), 3u);
    EXPECT_DOUBLE_EQ(*s.x[0], 3.0);  // mean of two readings
    EXPECT_DOUBLE_EQ(*s.x[1], 7.0);  // single reading
    EXPECT_FALSE(s.x[2].has_value());  // no readings that day
    EXPECT_EQ(daily.start_day, epoch_day_of(parse_timestamp("2016-01-01")));
}

TEST(Resample, EmptyTableThrows) {
    EXPECT_THROW(resample_daily(RawTable{}), data_error);
}

TEST(Interpolate, MidpointAndWeighted) {
    // t=[0,1,2], x=[2,absent,10] -> 6
    auto s = interpolate_linear(make_series({0, 1, 2}, {2.0, std::nullopt, 10.0}));
    EXPECT_DOUBLE_EQ(*s.x[1], 6.0);

    // t=[0,1,4], x=[2,absent,10] -> 2 + (1/4)*8 = 4
    s = interpolate_linear(make_series({0, 1, 4}, {2.0, std::nullopt, 10.0}));
    EXPECT_DOUBLE_EQ(*s.x[1], 4.0);
}

TEST(Interpolate, BoundaryAbsencesUntouched) {
    auto s = interpolate_linear(make_series({0, 1}, {std::nullopt, 5.0}));
    EXPECT_FALSE(s.x[0].has_value());
    EXPECT_DOUBLE_EQ(*s.x[1], 5.0);

    s = interpolate_linear(
        make_series({0, 1, 2, 3}, {std::nullopt, 1.0, 2.0, std::nullopt}));
    EXPECT_FALSE(s.x[0].has_value());
    EXPECT_FALSE(s.x[3].has_value());
}

TEST(Interpolate, AllAbsentThrows) {
    EXPECT_THROW(interpolate_linear(make_series({0, 1}, {std::nullopt, std::nullopt})),
                 data_error);
}

TEST(Interpolate, ExactOnLinearData) {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const double a = rng.uniform(-3, 3), b = rng.uniform(-10, 10);
        TimeSeries s;
        std::int64_t t = 0;
        for (int i = 0; i < 40; ++i) {
            t += 1 + static_cast<std::int64_t>(rng.below(3));
            s.t.push_back(t);
            s.x.push_back(a * static_cast<double>(t) + b);
        }
        // punch interior holes
        for (std::size_t i = 1; i + 1 < s.x.size(); ++i)
            if (rng.uniform() < 0.4) s.x[i] = std::nullopt;
        const auto filled = interpolate_linear(s);
        for (std::size_t i = 0; i < filled.size(); ++i) {
            ASSERT_TRUE(filled.x[i].has_value());
            EXPECT_NEAR(*filled.x[i], a * static_cast<double>(s.t[i]) + b, 1e-12);
        }
    }
}

TEST(Impute, MeanOfAvailable) {
    auto s = impute_mean(make_series({0, 1, 2}, {1.0, std::nullopt, 3.0}));
    EXPECT_DOUBLE_EQ(*s.x[0], 1.0);
    EXPECT_DOUBLE_EQ(*s.x[1], 2.0);
    EXPECT_DOUBLE_EQ(*s.x[2], 3.0);
}

TEST(Impute, NoAbsencesIsIdentity) {
    const auto before = make_series({0, 1}, {4.0, 5.0});
    const auto after = impute_mean(before);
    EXPECT_EQ(before.x, after.x);
}

TEST(Impute, AllAbsentThrows) {
    try {
        impute_mean(make_series({0, 1}, {std::nullopt, std::nullopt}));
        FAIL() << "expected data_error";
    } catch (const data_error& e) {
        EXPECT_NE(std::string(e.what()).find("no data to impute"), std::string::npos);
    }
}

TEST(Impute, PreservesPresentValueMean) {
    Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        TimeSeries s;
        double sum = 0.0;
        std::size_t present = 0;
        for (int i = 0; i < 30; ++i) {
            s.t.push_back(i);
            if (rng.uniform() < 0.3) {
                s.x.push_back(std::nullopt);
            } else {
                const double v = rng.uniform(-5, 5);
                s.x.push_back(v);
                sum += v;
                ++present;
            }
        }
        if (present == 0) continue;
        const double present_mean = sum / static_cast<double>(present);
        const auto filled = impute_mean(s);
        double filled_sum = 0.0;
        for (const auto& v : filled.x) filled_sum += *v;
        EXPECT_NEAR(filled_sum / static_cast<double>(filled.size()), present_mean, 1e-12);
    }
}

// 1000 randomized series against the naive oracles, elementwise 1e-12.
TEST(GapFilling, AgreesWithNaiveOracleOnRandomSeries) {
    Rng rng(1000);
    for (int trial = 0; trial < 1000; ++trial) {
        TimeSeries s;
        std::int64_t t = 0;
        const std::size_t len = 5 + rng.below(60);
        std::size_t present = 0;
        for (std::size_t i = 0; i < len; ++i) {
            t += 1 + static_cast<std::int64_t>(rng.below(4));
            s.t.push_back(t);
            if (rng.uniform() < 0.35) {
                s.x.push_back(std::nullopt);
            } else {
                s.x.push_back(rng.uniform(-100, 100));
                ++present;
            }
        }
        if (present < 2) continue;

        const auto lib_interp = interpolate_linear(s);
        const auto naive_interp = naive_interpolate(s.t, s.x);
        for (std::size_t i = 0; i < len; ++i) {
            ASSERT_EQ(lib_interp.x[i].has_value(), naive_interp[i].has_value());
            if (lib_interp.x[i].has_value())
                EXPECT_NEAR(*lib_interp.x[i], *naive_interp[i], 1e-12);
        }

        const auto lib_full = impute_mean(lib_interp);
        const auto naive_full = naive_impute(naive_interp);
        for (std::size_t i = 0; i < len; ++i)
            EXPECT_NEAR(*lib_full.x[i], *naive_full[i], 1e-12);
    }
}

TEST(Normalize, MatchesIndependentStatistics) {
    auto frame = make_frame({"a"}, 3, {1.0, 2.0, 3.0});
    const auto stats = compute_stats(frame);
    // independent recomputation
    const double mean = (1.0 + 2.0 + 3.0) / 3.0;
    double ss = 0.0;
    for (double v : {1.0, 2.0, 3.0}) ss += (v - mean) * (v - mean);
    const double pop_std = std::sqrt(ss / 3.0);
    EXPECT_DOUBLE_EQ(stats.mean[0], 2.0);
    EXPECT_DOUBLE_EQ(stats.std_dev[0], pop_std);
    EXPECT_NEAR(pop_std, std::sqrt(2.0 / 3.0), 1e-15);

    const auto z = normalize_zscore(frame, stats);
    EXPECT_NEAR(z.at(0, 0), -1.2247448713915890, 1e-12);
    EXPECT_NEAR(z.at(1, 0), 0.0, 1e-15);
    EXPECT_NEAR(z.at(2, 0), 1.2247448713915890, 1e-12);
}

TEST(Normalize, ConstantColumnMapsToZeros) {
    auto frame = make_frame({"a"}, 4, {7.5, 7.5, 7.5, 7.5});
    const auto stats = compute_stats(frame);
    EXPECT_DOUBLE_EQ(stats.std_dev[0], 1.0);
    const auto z = normalize_zscore(frame, stats);
    for (std::size_t d = 0; d < 4; ++d) EXPECT_DOUBLE_EQ(z.at(d, 0), 0.0);
}

TEST(Normalize, RoundTripWithinTolerance) {
    Rng rng(21);
    std::vector<double> values;
    for (int i = 0; i < 50 * 3; ++i) values.push_back(rng.uniform(-1000, 1000));
    auto frame = make_frame({"a", "b", "c"}, 50, values);
    const auto stats = compute_stats(frame);
    const auto z = normalize_zscore(frame, stats);
    const auto back = denormalize(z, stats);
    for (std::size_t i = 0; i < frame.values.size(); ++i)
        EXPECT_NEAR(back.values[i], frame.values[i], 1e-12 * std::max(1.0, std::fabs(frame.values[i])));
}

TEST(Normalize, ColumnMismatchThrows) {
    auto frame = make_frame({"a"}, 2, {1.0, 2.0});
    NormalizationStats stats;
    stats.column_names = {"b"};
    stats.mean = {0.0};
    stats.std_dev = {1.0};
    EXPECT_THROW(normalize_zscore(frame, stats), data_error);
}

TEST(Split, EightyTwenty) {
    std::vector<double> values(100, 0.0);
    for (int d = 0; d < 100; ++d) values[d] = d;
    auto frame = make_frame({"a"}, 100, values);
    const auto [train, test] = split_chronological(frame, 0.8);
    EXPECT_EQ(train.n_days, 80u);
    EXPECT_EQ(test.n_days, 20u);
    EXPECT_DOUBLE_EQ(test.at(0, 0), 80.0);
    EXPECT_EQ(test.start_day, frame.start_day + 80);
}

TEST(Split, OrderPreserved) {
    std::vector<double> values(10);
    for (int d = 0; d < 10; ++d) values[d] = d + 1;
    auto frame = make_frame({"a"}, 10, values);
    const auto [train, test] = split_chronological(frame, 0.5);
    ASSERT_EQ(train.n_days, 5u);
    for (int d = 0; d < 5; ++d) {
        EXPECT_DOUBLE_EQ(train.at(d, 0), d + 1.0);
        EXPECT_DOUBLE_EQ(test.at(d, 0), d + 6.0);
    }
}

TEST(Split, FractionOutOfRangeThrows) {
    auto frame = make_frame({"a"}, 10, std::vector<double>(10, 0.0));
    EXPECT_THROW(split_chronological(frame, 1.2), config_error);
    EXPECT_THROW(split_chronological(frame, 0.0), config_error);
}

TEST(Split, PartitionShorterThanWindowThrows) {
    auto frame = make_frame({"a"}, 10, std::vector<double>(10, 0.0));
    EXPECT_THROW(split_chronological(frame, 0.5, /*min_days=*/6), data_error);
}

TEST(Windows, SingleExactWindow) {
    const std::size_t days = 730;
    std::vector<std::string> names{"f1", "f2", "f3", "f4", "f5", "f6", "p1", "p2"};
    std::vector<double> values(days * names.size(), 0.5);
    auto frame = make_frame(names, days, values);
    const auto ds = make_windows(frame, 730, 30, {"f1", "f2", "f3", "f4", "f5", "f6"},
                                 {"p1", "p2"});
    EXPECT_EQ(ds.n_samples(), 1u);
    EXPECT_EQ(ds.inputs[0].size(), 730u * 6u);
    EXPECT_EQ(ds.targets[0].size(), 730u * 2u);
}

TEST(Windows, StrideOneCounting) {
    auto frame = make_frame({"f", "p"}, 731, std::vector<double>(731 * 2, 1.0));
    const auto ds = make_windows(frame, 730, 1, {"f"}, {"p"});
    EXPECT_EQ(ds.n_samples(), 2u);
}

TEST(Windows, ShorterThanWindowThrows) {
    auto frame = make_frame({"f", "p"}, 729, std::vector<double>(729 * 2, 1.0));
    try {
        make_windows(frame, 730, 1, {"f"}, {"p"});
        FAIL() << "expected data_error";
    } catch (const data_error& e) {
        EXPECT_NE(std::string(e.what()).find("shorter than window"), std::string::npos);
    }
}

TEST(Windows, InputAndTargetCoverSameSpan) {
    // values encode (day, column) so alignment is checkable
    const std::size_t days = 20;
    std::vector<double> values(days * 2);
    for (std::size_t d = 0; d < days; ++d) {
        values[d * 2 + 0] = static_cast<double>(d);          // feature
        values[d * 2 + 1] = static_cast<double>(d) + 1000.0;  // target
    }
    auto frame = make_frame({"f", "p"}, days, values);
    const auto ds = make_windows(frame, 8, 4, {"f"}, {"p"});
    ASSERT_EQ(ds.n_samples(), 4u);
    for (std::size_t s = 0; s < ds.n_samples(); ++s)
        for (std::size_t t = 0; t < 8; ++t)
            EXPECT_DOUBLE_EQ(ds.targets[s][t], ds.inputs[s][t] + 1000.0);
}

// Full composition: resample -> interpolate -> impute -> split -> normalize
// -> window leaves no absences and produces finite values only.
TEST(Pipeline, CompositionLeavesNoGaps) {
    Rng rng(77);
    RawTable raw;
    const int days = 60;
    for (int d = 0; d < days; ++d)
        for (int reading = 0; reading < 2; ++reading)
            raw.timestamps.push_back(parse_timestamp("2016-01-01") + d * 86400 + reading * 43200);
    for (const auto& name : {"f1", "p1"}) {
        RawColumn c{name, {}};
        for (std::size_t r = 0; r < raw.timestamps.size(); ++r) {
            if (rng.uniform() < 0.25)
                c.values.push_back(std::nullopt);
            else
                c.values.push_back(rng.uniform(0, 50));
        }
        raw.columns.push_back(std::move(c));
    }

    const auto daily = resample_daily(raw);
    AlignedFrame frame;
    frame.start_day = daily.start_day;
    frame.column_names = daily.names;
    frame.n_days = daily.series[0].size();
    frame.values.resize(frame.n_days * frame.n_columns());
    for (std::size_t c = 0; c < daily.series.size(); ++c) {
        const auto filled = impute_mean(interpolate_linear(daily.series[c]));
        for (std::size_t d = 0; d < frame.n_days; ++d) frame.at(d, c) = *filled.x[d];
    }
    const auto [train, test] = split_chronological(frame, 0.8, 8);
    const auto stats = compute_stats(train);
    const auto train_z = normalize_zscore(train, stats);
    const auto test_z = normalize_zscore(test, stats);
    const auto ds = make_windows(train_z, 8, 4, {"f1"}, {"p1"});
    EXPECT_GT(ds.n_samples(), 0u);
    for (const auto& sample : ds.inputs)
        for (double v : sample) EXPECT_TRUE(std::isfinite(v));
    for (std::size_t d = 0; d < test_z.n_days; ++d) EXPECT_TRUE(std::isfinite(test_z.at(d, 0)));
}
