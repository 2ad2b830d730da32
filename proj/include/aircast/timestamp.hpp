#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "aircast/errors.hpp"

namespace aircast {

// Civil-calendar <-> epoch conversions (proleptic Gregorian), valid far
// beyond the data ranges seen here.
inline std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = static_cast<int>(yr + (m <= 2));
}

// Parses an ISO-8601 date or date-time into epoch seconds. Accepted forms:
//   YYYY-MM-DD
//   YYYY-MM-DD[T ]HH:MM[:SS][Z|+HH:MM|-HH:MM]
// UTC is assumed when no offset is present.
inline std::int64_t parse_timestamp(std::string_view text) {
    auto fail = [&] { throw data_error("unparsable timestamp: '" + std::string(text) + "'"); };

    int y = 0;
    unsigned mo = 0, da = 0;
    unsigned hh = 0, mi = 0, ss = 0;
    int n = 0;
    const std::string s(text);
    if (std::sscanf(s.c_str(), "%d-%2u-%2u%n", &y, &mo, &da, &n) != 3) fail();
    if (mo < 1 || mo > 12 || da < 1 || da > 31) fail();
    std::int64_t offset = 0;
    std::size_t pos = static_cast<std::size_t>(n);
    if (pos < s.size()) {
        if (s[pos] != 'T' && s[pos] != ' ') fail();
        ++pos;
        int n2 = 0;
        if (std::sscanf(s.c_str() + pos, "%2u:%2u%n", &hh, &mi, &n2) != 2) fail();
        pos += static_cast<std::size_t>(n2);
        if (pos < s.size() && s[pos] == ':') {
            ++pos;
            if (std::sscanf(s.c_str() + pos, "%2u%n", &ss, &n2) != 1) fail();
            pos += static_cast<std::size_t>(n2);
        }
        if (hh > 23 || mi > 59 || ss > 60) fail();
        if (pos < s.size()) {
            if (s[pos] == 'Z') {
                ++pos;
            } else if (s[pos] == '+' || s[pos] == '-') {
                const int sign = (s[pos] == '+') ? 1 : -1;
                ++pos;
                unsigned oh = 0, om = 0;
                if (std::sscanf(s.c_str() + pos, "%2u:%2u%n", &oh, &om, &n2) != 2) fail();
                pos += static_cast<std::size_t>(n2);
                offset = -sign * (static_cast<std::int64_t>(oh) * 3600 + om * 60);
            } else {
                fail();
            }
        }
        if (pos != s.size()) fail();
    }
    return days_from_civil(y, mo, da) * 86400 + hh * 3600 + mi * 60 + ss + offset;
}

// Renders epoch seconds as YYYY-MM-DDTHH:MM:SSZ.
inline std::string format_timestamp(std::int64_t epoch_seconds) {
    std::int64_t days = epoch_seconds / 86400;
    std::int64_t rem = epoch_seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    int y;
    unsigned mo, da;
    civil_from_days(days, y, mo, da);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", y, mo, da,
                  static_cast<long long>(rem / 3600), static_cast<long long>((rem % 3600) / 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

// Renders an epoch-day index as YYYY-MM-DD.
inline std::string format_date(std::int64_t epoch_day) {
    int y;
    unsigned mo, da;
    civil_from_days(epoch_day, y, mo, da);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", y, mo, da);
    return buf;
}

// Floor division into calendar days since the epoch.
inline std::int64_t epoch_day_of(std::int64_t epoch_seconds) {
    std::int64_t d = epoch_seconds / 86400;
    if (epoch_seconds % 86400 < 0) --d;
    return d;
}

}  // namespace aircast
