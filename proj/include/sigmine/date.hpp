// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sigmine/error.hpp"

namespace sigmine {

/// Calendar date, day precision. Time-of-day is discarded at parse time;
/// none of the analyses use finer granularity.
struct Date {
    int y = 1970;
    int m = 1;
    int d = 1;

    friend bool operator==(const Date& a, const Date& b) {
        return a.y == b.y && a.m == b.m && a.d == b.d;
    }
    friend bool operator!=(const Date& a, const Date& b) { return !(a == b); }
    friend bool operator<(const Date& a, const Date& b) {
        if (a.y != b.y) return a.y < b.y;
        if (a.m != b.m) return a.m < b.m;
        return a.d < b.d;
    }
    friend bool operator<=(const Date& a, const Date& b) { return a < b || a == b; }
    friend bool operator>(const Date& a, const Date& b) { return b < a; }
    friend bool operator>=(const Date& a, const Date& b) { return b <= a; }
};

enum class Resolution { day, week, month, year };

inline const char* resolution_name(Resolution r) {
    switch (r) {
        case Resolution::day: return "day";
        case Resolution::week: return "week";
        case Resolution::month: return "month";
        case Resolution::year: return "year";
    }
    return "?";
}

inline std::optional<Resolution> resolution_from_name(const std::string& s) {
    if (s == "day") return Resolution::day;
    if (s == "week") return Resolution::week;
    if (s == "month") return Resolution::month;
    if (s == "year") return Resolution::year;
    return std::nullopt;
}

inline bool is_leap(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

inline int days_in_month(int y, int m) {
    static constexpr std::array<int, 12> len = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return len[static_cast<std::size_t>(m - 1)];
}

inline bool valid_date(int y, int m, int d) {
    return m >= 1 && m <= 12 && d >= 1 && d <= days_in_month(y, m);
}

/// Days since 1970-01-01 (proleptic Gregorian).
inline std::int64_t serial_day(const Date& dt) {
    std::int64_t y = dt.y;
    unsigned m = static_cast<unsigned>(dt.m);
    unsigned d = static_cast<unsigned>(dt.d);
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline Date date_from_serial(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

inline Date add_days(const Date& dt, std::int64_t n) {
    return date_from_serial(serial_day(dt) + n);
}

/// ISO weekday: 1 = Monday ... 7 = Sunday.
inline int iso_weekday(const Date& dt) {
    std::int64_t s = serial_day(dt); // 1970-01-01 was a Thursday
    std::int64_t w = (s + 3) % 7;
    if (w < 0) w += 7;
    return static_cast<int>(w) + 1;
}

struct IsoWeek {
    int year = 0;
    int week = 0;
};

/// ISO-8601 week: the week's Thursday decides the week-year; week 1 is the
/// week containing the first Thursday of that year.
inline IsoWeek iso_week(const Date& dt) {
    std::int64_t s = serial_day(dt);
    std::int64_t thursday = s + (4 - iso_weekday(dt));
    Date th = date_from_serial(thursday);
    std::int64_t jan1 = serial_day(Date{th.y, 1, 1});
    int week = static_cast<int>((thursday - jan1) / 7) + 1;
    return IsoWeek{th.y, week};
}

/// Monday of the given ISO week. Jan 4 always falls in week 1.
inline Date iso_week_monday(int iso_year, int week) {
    Date jan4{iso_year, 1, 4};
    std::int64_t monday1 = serial_day(jan4) - (iso_weekday(jan4) - 1);
    return date_from_serial(monday1 + 7LL * (week - 1));
}

inline std::string format_date(const Date& dt) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", dt.y, dt.m, dt.d);
    return buf;
}

/// Parses `YYYY-MM-DD`; anything after the day (e.g. `THH:MM:SS`) is ignored.
inline std::optional<Date> parse_date(const std::string& s) {
    if (s.size() < 10) return std::nullopt;
    auto digit = [&](std::size_t i) { return s[i] >= '0' && s[i] <= '9'; };
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (!digit(i)) return std::nullopt;
    if (s[4] != '-' || s[7] != '-') return std::nullopt;
    if (s.size() > 10 && s[10] != 'T' && s[10] != ' ') return std::nullopt;
    int y = std::stoi(s.substr(0, 4));
    int m = std::stoi(s.substr(5, 2));
    int d = std::stoi(s.substr(8, 2));
    if (!valid_date(y, m, d)) return std::nullopt;
    return Date{y, m, d};
}

/// Time-bucket key for a date: "YYYY-MM-DD", "GGGG-Www" (ISO week-year),
/// "YYYY-MM" or "YYYY". Keys at one resolution sort chronologically.
inline std::string bucket_key(const Date& dt, Resolution res) {
    char buf[32];
    switch (res) {
        case Resolution::day:
            return format_date(dt);
        case Resolution::week: {
            IsoWeek w = iso_week(dt);
            std::snprintf(buf, sizeof buf, "%04d-W%02d", w.year, w.week);
            return buf;
        }
        case Resolution::month:
            std::snprintf(buf, sizeof buf, "%04d-%02d", dt.y, dt.m);
            return buf;
        case Resolution::year:
            std::snprintf(buf, sizeof buf, "%04d", dt.y);
            return buf;
    }
    throw domain_error("bad resolution");
}

/// Infers the resolution from the key format itself.
inline Resolution key_resolution(const std::string& key) {
    if (key.size() == 4) return Resolution::year;
    if (key.size() == 7 && key[4] == '-' && key[5] != 'W') return Resolution::month;
    if (key.size() == 8 && key[5] == 'W') return Resolution::week;
    if (key.size() == 10) return Resolution::day;
    throw format_error("unrecognized bucket key: " + key);
}

/// First and last calendar day covered by a bucket key.
inline std::pair<Date, Date> bucket_span(const std::string& key) {
    Resolution res = key_resolution(key);
    switch (res) {
        case Resolution::day: {
            auto d = parse_date(key);
            if (!d) throw format_error("bad day key: " + key);
            return {*d, *d};
        }
        case Resolution::week: {
            int y = std::stoi(key.substr(0, 4));
            int w = std::stoi(key.substr(6, 2));
            Date monday = iso_week_monday(y, w);
            return {monday, add_days(monday, 6)};
        }
        case Resolution::month: {
            int y = std::stoi(key.substr(0, 4));
            int m = std::stoi(key.substr(5, 2));
            if (m < 1 || m > 12) throw format_error("bad month key: " + key);
            return {Date{y, m, 1}, Date{y, m, days_in_month(y, m)}};
        }
        case Resolution::year: {
            int y = std::stoi(key);
            return {Date{y, 1, 1}, Date{y, 12, 31}};
        }
    }
    throw domain_error("bad resolution");
}

/// Dense, ordered key list covering [first, last] at the given resolution.
inline std::vector<std::string> bucket_range(const Date& first, const Date& last, Resolution res) {
    std::vector<std::string> keys;
    if (last < first) return keys;
    switch (res) {
        case Resolution::day: {
            for (std::int64_t s = serial_day(first); s <= serial_day(last); ++s)
                keys.push_back(format_date(date_from_serial(s)));
            break;
        }
        case Resolution::week: {
            IsoWeek w0 = iso_week(first);
            Date monday = iso_week_monday(w0.year, w0.week);
            std::int64_t end = serial_day(last);
            for (std::int64_t s = serial_day(monday); s <= end; s += 7)
                keys.push_back(bucket_key(date_from_serial(s), Resolution::week));
            break;
        }
        case Resolution::month: {
            int y = first.y, m = first.m;
            while (y < last.y || (y == last.y && m <= last.m)) {
                keys.push_back(bucket_key(Date{y, m, 1}, Resolution::month));
                if (++m > 12) {
                    m = 1;
                    ++y;
                }
            }
            break;
        }
        case Resolution::year: {
            for (int y = first.y; y <= last.y; ++y)
                keys.push_back(bucket_key(Date{y, 1, 1}, Resolution::year));
            break;
        }
    }
    return keys;
}

/// True when [a1, a2] and [b1, b2] share at least one day.
inline bool spans_intersect(const Date& a1, const Date& a2, const Date& b1, const Date& b2) {
    return !(a2 < b1 || b2 < a1);
}

} // namespace sigmine
