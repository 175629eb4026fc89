#pragma once

// Rasterize sessions onto fixed-interval grids, resample to coarser
// resolutions and aggregate station -> region -> city. Session energy is
// split across overlapped intervals proportionally to overlap duration,
// which keeps total energy conserved.

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "evload/csv.hpp"
#include "evload/ingest.hpp"
#include "evload/time.hpp"

namespace evload {

enum class Resolution { TenMin, Hourly, Daily };

inline std::int64_t resolution_seconds(Resolution r) {
    switch (r) {
        case Resolution::TenMin: return 600;
        case Resolution::Hourly: return 3600;
        default: return 86400;
    }
}

inline std::string resolution_name(Resolution r) {
    switch (r) {
        case Resolution::TenMin: return "10min";
        case Resolution::Hourly: return "hourly";
        default: return "daily";
    }
}

inline Resolution resolution_from_name(const std::string& s) {
    if (s == "10min") return Resolution::TenMin;
    if (s == "hourly") return Resolution::Hourly;
    if (s == "daily") return Resolution::Daily;
    throw std::runtime_error("unknown resolution: " + s);
}

enum class Level { Station, Region, City };

inline std::string level_name(Level l) {
    switch (l) {
        case Level::Station: return "station";
        case Level::Region: return "region";
        default: return "city";
    }
}

inline Level level_from_name(const std::string& s) {
    if (s == "station") return Level::Station;
    if (s == "region") return Level::Region;
    if (s == "city") return Level::City;
    throw std::runtime_error("unknown level: " + s);
}

struct EnergySeries {
    std::string entity_id;
    Level level = Level::Station;
    Resolution resolution = Resolution::TenMin;
    Instant t0 = 0;  // start of first interval, UTC
    std::vector<double> values;  // kWh per interval, gap-free, zeros where idle

    Instant interval_start(std::size_t i) const {
        return t0 + static_cast<std::int64_t>(i) * resolution_seconds(resolution);
    }
};

struct GridSpan {
    Instant begin = 0;  // inclusive
    Instant end = 0;    // exclusive
};

// First session start floored to midnight UTC through last session end
// ceiled to midnight, so daily grids cover whole days.
inline GridSpan span_for_sessions(const std::vector<SessionRecord>& sessions) {
    if (sessions.empty()) throw std::runtime_error("no sessions for grid span");
    Instant lo = sessions[0].start, hi = sessions[0].end;
    for (const auto& s : sessions) {
        lo = std::min(lo, s.start);
        hi = std::max(hi, s.end);
    }
    Instant begin = lo - ((lo % 86400) + 86400) % 86400;
    Instant end = hi + ((86400 - (hi % 86400 + 86400) % 86400) % 86400);
    return {begin, end};
}

struct RasterizeResult {
    std::vector<EnergySeries> series;   // one per station, sorted by entity_id
    double truncated_kwh = 0.0;         // energy beyond the grid end
};

// Sessions are allowed to overhang the grid end; the overhang is truncated
// and reported. Sessions entirely outside the span are an error.
inline RasterizeResult rasterize(const std::vector<SessionRecord>& sessions,
                                 const GridSpan& span) {
    const std::int64_t step = resolution_seconds(Resolution::TenMin);
    if (span.begin % step != 0 || span.end % step != 0 || span.end <= span.begin)
        throw std::runtime_error("grid span misaligned to 10-minute boundaries");
    const std::size_t n = static_cast<std::size_t>((span.end - span.begin) / step);

    std::map<std::string, std::vector<double>> grids;
    double truncated = 0.0;
    for (const auto& s : sessions) {
        if (s.end <= span.begin || s.start >= span.end)
            throw std::runtime_error("session outside grid span for station " + s.station_id);
        auto& grid = grids[s.station_id];
        if (grid.empty()) grid.assign(n, 0.0);
        const double duration = static_cast<double>(s.end - s.start);
        Instant cov_start = std::max(s.start, span.begin);
        Instant cov_end = std::min(s.end, span.end);
        if (s.end > span.end)
            truncated += s.energy_kwh * static_cast<double>(s.end - span.end) / duration;
        if (s.start < span.begin)
            truncated += s.energy_kwh * static_cast<double>(span.begin - s.start) / duration;
        std::size_t i0 = static_cast<std::size_t>((cov_start - span.begin) / step);
        std::size_t i1 = static_cast<std::size_t>((cov_end - 1 - span.begin) / step);
        for (std::size_t i = i0; i <= i1 && i < n; ++i) {
            Instant b = span.begin + static_cast<std::int64_t>(i) * step;
            Instant overlap = std::min(cov_end, b + step) - std::max(cov_start, b);
            grid[i] += s.energy_kwh * static_cast<double>(overlap) / duration;
        }
    }

    RasterizeResult out;
    for (auto& [station, grid] : grids) {
        EnergySeries es;
        es.entity_id = station;
        es.level = Level::Station;
        es.resolution = Resolution::TenMin;
        es.t0 = span.begin;
        es.values = std::move(grid);
        out.series.push_back(std::move(es));
    }
    out.truncated_kwh = truncated;
    return out;
}

inline EnergySeries resample(const EnergySeries& src, Resolution target) {
    const std::int64_t src_step = resolution_seconds(src.resolution);
    const std::int64_t dst_step = resolution_seconds(target);
    if (dst_step <= src_step && target != src.resolution)
        throw std::runtime_error("resample target must be coarser than source");
    if (dst_step % src_step != 0 || src.t0 % dst_step != 0)
        throw std::runtime_error("resample misalignment");
    const std::size_t k = static_cast<std::size_t>(dst_step / src_step);
    EnergySeries out;
    out.entity_id = src.entity_id;
    out.level = src.level;
    out.resolution = target;
    out.t0 = src.t0;
    out.values.assign(src.values.size() / k, 0.0);
    for (std::size_t i = 0; i < out.values.size() * k; ++i)
        out.values[i / k] += src.values[i];
    return out;
}

// Station -> region via the given mapping; any level -> single series via a
// constant mapping. Inputs are summed in entity-id sort order so results are
// bit-reproducible.
inline std::vector<EnergySeries> aggregate(
    const std::vector<EnergySeries>& members,
    const std::map<std::string, std::string>& group_of, Level out_level) {
    if (members.empty()) throw std::runtime_error("aggregate: no input series");
    std::map<std::string, std::vector<const EnergySeries*>> groups;
    for (const auto& s : members) {
        auto it = group_of.find(s.entity_id);
        if (it == group_of.end())
            throw std::runtime_error("aggregate: no group for entity " + s.entity_id);
        groups[it->second].push_back(&s);
    }
    std::vector<EnergySeries> out;
    for (auto& [gid, list] : groups) {
        std::sort(list.begin(), list.end(),
                  [](const EnergySeries* a, const EnergySeries* b) {
                      return a->entity_id < b->entity_id;
                  });
        EnergySeries agg;
        agg.entity_id = gid;
        agg.level = out_level;
        agg.resolution = list[0]->resolution;
        agg.t0 = list[0]->t0;
        agg.values.assign(list[0]->values.size(), 0.0);
        for (const EnergySeries* m : list) {
            if (m->resolution != agg.resolution || m->t0 != agg.t0 ||
                m->values.size() != agg.values.size())
                throw std::runtime_error("aggregate: mismatched grids");
            for (std::size_t i = 0; i < agg.values.size(); ++i)
                agg.values[i] += m->values[i];
        }
        out.push_back(std::move(agg));
    }
    return out;
}

// --- persistence: one CSV per (city, level, resolution) --------------------

inline void write_series_csv(const std::vector<EnergySeries>& series, std::ostream& os) {
    os << "entity_id,interval_start_utc,kwh\n";
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.values.size(); ++i)
            os << csv_join({s.entity_id, format_rfc3339(s.interval_start(i)),
                            format_double(s.values[i], 15)});
}

inline std::vector<EnergySeries> read_series_csv(const std::string& path, Level level,
                                                 Resolution resolution) {
    CsvReader reader(path);
    size_t ei = reader.column("entity_id"), ti = reader.column("interval_start_utc"),
           ki = reader.column("kwh");
    std::map<std::string, EnergySeries> by_entity;
    std::vector<std::string> row;
    const std::int64_t step = resolution_seconds(resolution);
    while (reader.next(row)) {
        auto& s = by_entity[row[ei]];
        auto t = parse_rfc3339(row[ti]);
        if (!t) throw std::runtime_error("bad timestamp in " + path);
        if (s.entity_id.empty()) {
            s.entity_id = row[ei];
            s.level = level;
            s.resolution = resolution;
            s.t0 = *t;
        } else if (*t != s.t0 + static_cast<std::int64_t>(s.values.size()) * step) {
            throw std::runtime_error("series gap in " + path + " at " + row[ti]);
        }
        s.values.push_back(std::stod(row[ki]));
    }
    std::vector<EnergySeries> out;
    for (auto& [_, s] : by_entity) out.push_back(std::move(s));
    return out;
}

}  // namespace evload
