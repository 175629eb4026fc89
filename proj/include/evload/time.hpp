#pragma once

// Civil time, RFC3339 and local-zone handling for the four dataset cities.
// The toolchain's libstdc++ has no chrono tzdb, so the handful of zones we
// need are encoded as explicit offset + DST rules.

#include <cstdint>
#include <cstdio>
#include <cctype>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace evload {

// Seconds since the Unix epoch, always UTC.
using Instant = std::int64_t;

struct CivilDateTime {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31
    int hour = 0;
    int minute = 0;
    int second = 0;
};

// Howard Hinnant's civil-from-days / days-from-civil algorithms.
inline std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yr + (m <= 2));
}

inline Instant instant_from_civil(const CivilDateTime& c) {
    return days_from_civil(c.year, c.month, c.day) * 86400
           + c.hour * 3600 + c.minute * 60 + c.second;
}

inline CivilDateTime civil_from_instant(Instant t) {
    std::int64_t days = t / 86400;
    std::int64_t sod = t % 86400;
    if (sod < 0) { sod += 86400; --days; }
    CivilDateTime c;
    civil_from_days(days, c.year, c.month, c.day);
    c.hour = static_cast<int>(sod / 3600);
    c.minute = static_cast<int>((sod % 3600) / 60);
    c.second = static_cast<int>(sod % 60);
    return c;
}

// 0 = Monday .. 6 = Sunday.
inline int weekday_of(std::int64_t days_since_epoch) {
    // 1970-01-01 was a Thursday (index 3).
    std::int64_t w = (days_since_epoch + 3) % 7;
    if (w < 0) w += 7;
    return static_cast<int>(w);
}

inline int weekday_of_instant(Instant t) {
    std::int64_t days = t / 86400;
    if (t % 86400 < 0) --days;
    return weekday_of(days);
}

// Day of month of the nth (1-based) given weekday in a month.
inline int nth_weekday_of_month(int year, int month, int weekday, int n) {
    int first_wd = weekday_of(days_from_civil(year, month, 1));
    int offset = (weekday - first_wd + 7) % 7;
    return 1 + offset + 7 * (n - 1);
}

inline int days_in_month(int year, int month) {
    static const int d[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2) {
        bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
        return leap ? 29 : 28;
    }
    return d[month - 1];
}

inline int last_weekday_of_month(int year, int month, int weekday) {
    int last = days_in_month(year, month);
    int wd = weekday_of(days_from_civil(year, month, last));
    return last - ((wd - weekday + 7) % 7);
}

// --- time zones ------------------------------------------------------------

enum class DstRule { None, Us, Eu };

struct TimeZone {
    std::string name;
    int std_offset = 0;  // seconds east of UTC
    int dst_offset = 0;  // offset while DST is active (== std_offset when None)
    DstRule rule = DstRule::None;
};

inline const TimeZone& utc_zone() {
    static const TimeZone z{"UTC", 0, 0, DstRule::None};
    return z;
}

inline const TimeZone& find_zone(std::string_view name) {
    static const TimeZone zones[] = {
        {"UTC", 0, 0, DstRule::None},
        {"utc-native", 0, 0, DstRule::None},
        {"America/Los_Angeles", -8 * 3600, -7 * 3600, DstRule::Us},
        {"America/Denver", -7 * 3600, -6 * 3600, DstRule::Us},
        {"Europe/London", 0, 3600, DstRule::Eu},
        {"Australia/Perth", 8 * 3600, 8 * 3600, DstRule::None},
    };
    for (const auto& z : zones)
        if (z.name == name) return z;
    throw std::runtime_error("unknown time zone: " + std::string(name));
}

// DST interval [start, end) in UTC for a given year.
inline std::pair<Instant, Instant> dst_span_utc(const TimeZone& z, int year) {
    switch (z.rule) {
        case DstRule::Us: {
            // Second Sunday of March 02:00 local-std to first Sunday of
            // November 02:00 local-dst.
            int d1 = nth_weekday_of_month(year, 3, 6, 2);
            int d2 = nth_weekday_of_month(year, 11, 6, 1);
            Instant start = days_from_civil(year, 3, d1) * 86400 + 2 * 3600 - z.std_offset;
            Instant end = days_from_civil(year, 11, d2) * 86400 + 2 * 3600 - z.dst_offset;
            return {start, end};
        }
        case DstRule::Eu: {
            // Last Sunday of March to last Sunday of October, 01:00 UTC.
            int d1 = last_weekday_of_month(year, 3, 6);
            int d2 = last_weekday_of_month(year, 10, 6);
            return {days_from_civil(year, 3, d1) * 86400 + 3600,
                    days_from_civil(year, 10, d2) * 86400 + 3600};
        }
        case DstRule::None:
        default:
            return {0, 0};
    }
}

inline bool dst_active(const TimeZone& z, Instant utc) {
    if (z.rule == DstRule::None) return false;
    auto [start, end] = dst_span_utc(z, civil_from_instant(utc).year);
    return utc >= start && utc < end;
}

inline int offset_at(const TimeZone& z, Instant utc) {
    return dst_active(z, utc) ? z.dst_offset : z.std_offset;
}

// Naive local wall time -> UTC. Ambiguous fold resolves to the earlier
// offset (the pre-transition one); nonexistent times shift forward by the
// gap width.
inline Instant to_utc(const CivilDateTime& local, const TimeZone& z) {
    Instant naive = instant_from_civil(local);
    if (z.rule == DstRule::None) return naive - z.std_offset;
    Instant u_dst = naive - z.dst_offset;
    Instant u_std = naive - z.std_offset;
    bool dst_valid = dst_active(z, u_dst);
    bool std_valid = !dst_active(z, u_std);
    if (dst_valid && std_valid) return std::min(u_dst, u_std);  // fold
    if (dst_valid) return u_dst;
    if (std_valid) return u_std;
    return u_std;  // spring-forward gap: shifts local forward by the gap
}

inline CivilDateTime to_local(Instant utc, const TimeZone& z) {
    return civil_from_instant(utc + offset_at(z, utc));
}

// --- RFC3339 ---------------------------------------------------------------

inline std::string format_rfc3339(Instant t) {
    CivilDateTime c = civil_from_instant(t);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ",
                  c.year, c.month, c.day, c.hour, c.minute, c.second);
    return buf;
}

inline std::optional<Instant> parse_rfc3339(std::string_view s) {
    CivilDateTime c;
    int n = 0;
    if (std::sscanf(std::string(s).c_str(), "%d-%d-%dT%d:%d:%d%n",
                    &c.year, &c.month, &c.day, &c.hour, &c.minute, &c.second, &n) != 6)
        return std::nullopt;
    return instant_from_civil(c);
}

// --- timestamp parsing for raw CSVs ---------------------------------------
//
// Minimal strptime-style parser. Supported: %Y %y %m %d %H %I %M %S %p,
// literal characters match exactly (a space matches any run of spaces).
inline std::optional<CivilDateTime> parse_timestamp(std::string_view text,
                                                    std::string_view format) {
    CivilDateTime c{};
    c.year = 0;
    size_t ti = 0;
    bool pm = false, has_ampm = false;
    auto read_int = [&](int max_digits) -> std::optional<int> {
        int v = 0, n = 0;
        while (ti < text.size() && n < max_digits &&
               std::isdigit(static_cast<unsigned char>(text[ti]))) {
            v = v * 10 + (text[ti] - '0');
            ++ti;
            ++n;
        }
        if (n == 0) return std::nullopt;
        return v;
    };
    for (size_t fi = 0; fi < format.size(); ++fi) {
        if (format[fi] == '%' && fi + 1 < format.size()) {
            char code = format[++fi];
            std::optional<int> v;
            switch (code) {
                case 'Y': v = read_int(4); if (!v) return std::nullopt; c.year = *v; break;
                case 'y': v = read_int(2); if (!v) return std::nullopt;
                          c.year = *v + (*v < 70 ? 2000 : 1900); break;
                case 'm': v = read_int(2); if (!v) return std::nullopt; c.month = *v; break;
                case 'd': v = read_int(2); if (!v) return std::nullopt; c.day = *v; break;
                case 'H': v = read_int(2); if (!v) return std::nullopt; c.hour = *v; break;
                case 'I': v = read_int(2); if (!v) return std::nullopt; c.hour = *v; break;
                case 'M': v = read_int(2); if (!v) return std::nullopt; c.minute = *v; break;
                case 'S': v = read_int(2); if (!v) return std::nullopt; c.second = *v; break;
                case 'p': {
                    if (ti + 2 > text.size()) return std::nullopt;
                    char a = static_cast<char>(std::toupper(text[ti]));
                    char b = static_cast<char>(std::toupper(text[ti + 1]));
                    if (b != 'M' || (a != 'A' && a != 'P')) return std::nullopt;
                    pm = a == 'P';
                    has_ampm = true;
                    ti += 2;
                    break;
                }
                case '%':
                    if (ti >= text.size() || text[ti] != '%') return std::nullopt;
                    ++ti;
                    break;
                default:
                    return std::nullopt;
            }
        } else if (format[fi] == ' ') {
            while (ti < text.size() && text[ti] == ' ') ++ti;
        } else {
            if (ti >= text.size() || text[ti] != format[fi]) return std::nullopt;
            ++ti;
        }
    }
    while (ti < text.size() && text[ti] == ' ') ++ti;
    if (ti != text.size()) return std::nullopt;
    if (has_ampm) {
        if (c.hour < 1 || c.hour > 12) return std::nullopt;
        c.hour = c.hour % 12 + (pm ? 12 : 0);
    }
    if (c.year < 1900 || c.month < 1 || c.month > 12 || c.day < 1 ||
        c.day > days_in_month(c.year, c.month) || c.hour > 23 || c.minute > 59 ||
        c.second > 60)
        return std::nullopt;
    return c;
}

}  // namespace evload
