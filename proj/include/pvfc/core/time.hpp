#pragma once

#include "pvfc/core/error.hpp"

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace pvfc {

using Timestamp = std::chrono::sys_seconds;
using Duration = std::chrono::seconds;

inline constexpr Duration kHour{3600};
inline constexpr Duration kDay{86400};

/// Calendar date in the site's local (fixed-offset) time.
struct LocalDate {
    int year = 1970;
    int month = 1;
    int day = 1;

    friend constexpr auto operator<=>(const LocalDate&, const LocalDate&) = default;
};

struct CivilTime {
    LocalDate date;
    int hour = 0;
    int minute = 0;
    int second = 0;
};

namespace detail {

// Howard Hinnant's days-from-civil / civil-from-days (proleptic Gregorian).
constexpr std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

constexpr LocalDate civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return {static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) {
        --q;
    }
    return q;
}

} // namespace detail

constexpr std::int64_t days_since_epoch(const LocalDate& date) {
    return detail::days_from_civil(date.year, date.month, date.day);
}

constexpr LocalDate date_from_days(std::int64_t days) {
    return detail::civil_from_days(days);
}

constexpr LocalDate next_day(const LocalDate& date) {
    return date_from_days(days_since_epoch(date) + 1);
}

inline Timestamp make_utc(const CivilTime& civil) {
    const std::int64_t secs = days_since_epoch(civil.date) * 86400 + civil.hour * 3600 +
                              civil.minute * 60 + civil.second;
    return Timestamp{Duration{secs}};
}

/// Converts a local wall-clock time at fixed offset (minutes east of UTC) to UTC.
inline Timestamp local_to_utc(const CivilTime& local, int utc_offset_minutes) {
    return make_utc(local) - Duration{utc_offset_minutes * 60};
}

inline CivilTime to_civil(Timestamp t, int utc_offset_minutes = 0) {
    const std::int64_t secs = t.time_since_epoch().count() + std::int64_t{utc_offset_minutes} * 60;
    const std::int64_t days = detail::floor_div(secs, 86400);
    const std::int64_t rem = secs - days * 86400;
    CivilTime c;
    c.date = date_from_days(days);
    c.hour = static_cast<int>(rem / 3600);
    c.minute = static_cast<int>((rem % 3600) / 60);
    c.second = static_cast<int>(rem % 60);
    return c;
}

inline LocalDate local_date(Timestamp t, int utc_offset_minutes) {
    return to_civil(t, utc_offset_minutes).date;
}

/// UTC instant of local midnight starting `date`.
inline Timestamp local_midnight(const LocalDate& date, int utc_offset_minutes) {
    return local_to_utc(CivilTime{date, 0, 0, 0}, utc_offset_minutes);
}

inline std::string format_date(const LocalDate& d) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

/// ISO-8601 UTC, e.g. `2020-01-01T00:00:00Z`.
inline std::string format_iso(Timestamp t) {
    const CivilTime c = to_civil(t, 0);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", c.date.year, c.date.month,
                  c.date.day, c.hour, c.minute, c.second);
    return buf;
}

struct ParsedTime {
    CivilTime civil;
    std::optional<int> offset_minutes; // present when the string carried `Z` or `±HH:MM`
};

/// Accepts `YYYY-MM-DD`, `YYYY-MM-DD HH:MM[:SS]`, `YYYY-MM-DDTHH:MM[:SS]` with an
/// optional `Z` or `±HH:MM` suffix.
inline std::optional<ParsedTime> parse_time(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '"')) {
        text.remove_prefix(1);
    }
    while (!text.empty() && (text.back() == ' ' || text.back() == '"' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    auto digits = [&](std::size_t pos, std::size_t n, int& out) {
        if (pos + n > text.size()) {
            return false;
        }
        int v = 0;
        for (std::size_t i = pos; i < pos + n; ++i) {
            if (text[i] < '0' || text[i] > '9') {
                return false;
            }
            v = v * 10 + (text[i] - '0');
        }
        out = v;
        return true;
    };

    ParsedTime p;
    CivilTime& c = p.civil;
    if (!digits(0, 4, c.date.year) || text.size() < 10 || text[4] != '-' || text[7] != '-' ||
        !digits(5, 2, c.date.month) || !digits(8, 2, c.date.day)) {
        return std::nullopt;
    }
    std::size_t pos = 10;
    if (pos < text.size() && (text[pos] == ' ' || text[pos] == 'T')) {
        ++pos;
        if (!digits(pos, 2, c.hour) || pos + 2 >= text.size() || text[pos + 2] != ':' ||
            !digits(pos + 3, 2, c.minute)) {
            return std::nullopt;
        }
        pos += 5;
        if (pos < text.size() && text[pos] == ':') {
            if (!digits(pos + 1, 2, c.second)) {
                return std::nullopt;
            }
            pos += 3;
            // fractional seconds are truncated
            if (pos < text.size() && text[pos] == '.') {
                ++pos;
                while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
                    ++pos;
                }
            }
        }
    }
    if (pos < text.size()) {
        if (text[pos] == 'Z' && pos + 1 == text.size()) {
            p.offset_minutes = 0;
        } else if ((text[pos] == '+' || text[pos] == '-') && text.size() == pos + 6 &&
                   text[pos + 3] == ':') {
            int oh = 0;
            int om = 0;
            if (!digits(pos + 1, 2, oh) || !digits(pos + 4, 2, om)) {
                return std::nullopt;
            }
            p.offset_minutes = (text[pos] == '-' ? -1 : 1) * (oh * 60 + om);
        } else {
            return std::nullopt;
        }
    }
    if (c.date.month < 1 || c.date.month > 12 || c.date.day < 1 || c.date.day > 31 ||
        c.hour > 23 || c.minute > 59 || c.second > 60) {
        return std::nullopt;
    }
    if (date_from_days(days_since_epoch(c.date)) != c.date) {
        return std::nullopt;
    }
    return p;
}

/// Parses a timestamp; strings without an explicit offset are read as local
/// time at `default_offset_minutes`.
inline Timestamp parse_timestamp(std::string_view text, int default_offset_minutes = 0) {
    const auto parsed = parse_time(text);
    if (!parsed) {
        fail(ErrorCode::MalformedTimestamp, "cannot parse '" + std::string(text) + "'");
    }
    return local_to_utc(parsed->civil, parsed->offset_minutes.value_or(default_offset_minutes));
}

} // namespace pvfc
