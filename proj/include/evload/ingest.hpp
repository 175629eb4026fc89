#pragma once

// Parse heterogeneous per-city charging-session CSVs into one validated
// schema with UTC timestamps. Rows that fail validation are counted by
// reason so data loss stays auditable.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "evload/csv.hpp"
#include "evload/time.hpp"
#include "json.hpp"

namespace evload {

enum class City { PaloAlto, Boulder, Dundee, Perth, Custom };

inline std::string city_name(City c) {
    switch (c) {
        case City::PaloAlto: return "palo_alto";
        case City::Boulder: return "boulder";
        case City::Dundee: return "dundee";
        case City::Perth: return "perth";
        default: return "custom";
    }
}

inline City city_from_name(const std::string& s) {
    if (s == "palo_alto") return City::PaloAlto;
    if (s == "boulder") return City::Boulder;
    if (s == "dundee") return City::Dundee;
    if (s == "perth") return City::Perth;
    if (s == "custom") return City::Custom;
    throw std::runtime_error("unknown city: " + s);
}

struct SessionRecord {
    std::string station_id;
    std::string region_id;
    City city = City::Custom;
    Instant start = 0;  // UTC
    Instant end = 0;    // UTC
    double energy_kwh = 0.0;
};

enum class DropReason { MissingValue, UnparseableTimestamp, EndNotAfterStart, NegativeEnergy };

inline const char* drop_reason_name(DropReason r) {
    switch (r) {
        case DropReason::MissingValue: return "missing_value";
        case DropReason::UnparseableTimestamp: return "unparseable_timestamp";
        case DropReason::EndNotAfterStart: return "end_not_after_start";
        default: return "negative_energy";
    }
}

// Canonical field -> source column(s). A two-element list means separate
// date and time columns that are concatenated before parsing.
struct ColumnMap {
    std::vector<std::string> station;
    std::vector<std::string> region;
    std::vector<std::string> start;
    std::vector<std::string> end;
    std::vector<std::string> energy;
};

struct DatasetManifest {
    City city = City::Custom;
    std::string source_path;
    ColumnMap column_map;
    std::string timezone = "utc-native";  // IANA name, or "utc-native"
    std::string timestamp_format = "%Y-%m-%d %H:%M:%S";
    std::size_t records_parsed = 0;
    std::map<std::string, std::size_t> records_dropped;

    std::size_t dropped_total() const {
        std::size_t n = 0;
        for (auto& [k, v] : records_dropped) n += v;
        return n;
    }
};

struct RawRow {
    std::optional<std::string> station, region;
    std::optional<Instant> start, end;   // nullopt: missing or unparseable
    bool start_missing = false, end_missing = false;
    std::optional<double> energy;
};

// Total over parsed rows; rejection carries exactly one primary reason,
// checked in order missing -> timestamp order -> negative energy.
inline std::optional<SessionRecord> validate_session(const RawRow& raw, City city,
                                                     DropReason& reason) {
    bool missing = !raw.station || raw.station->empty() || !raw.region ||
                   raw.region->empty() || raw.start_missing || raw.end_missing ||
                   !raw.energy;
    if (missing) {
        reason = DropReason::MissingValue;
        return std::nullopt;
    }
    if (!raw.start || !raw.end) {
        reason = DropReason::UnparseableTimestamp;
        return std::nullopt;
    }
    if (*raw.end <= *raw.start) {
        reason = DropReason::EndNotAfterStart;
        return std::nullopt;
    }
    if (*raw.energy < 0.0) {
        reason = DropReason::NegativeEnergy;
        return std::nullopt;
    }
    return SessionRecord{*raw.station, *raw.region, city, *raw.start, *raw.end, *raw.energy};
}

inline std::vector<SessionRecord> parse_sessions(DatasetManifest& manifest) {
    if (!std::filesystem::exists(manifest.source_path))
        throw std::runtime_error("source file not found: " + manifest.source_path);
    CsvReader reader(manifest.source_path);

    auto resolve = [&](const std::vector<std::string>& cols) {
        if (cols.empty())
            throw std::runtime_error("column_map missing a canonical field for " +
                                     manifest.source_path);
        std::vector<size_t> idx;
        for (const auto& c : cols) idx.push_back(reader.column(c));
        return idx;
    };
    auto station_idx = resolve(manifest.column_map.station);
    auto region_idx = resolve(manifest.column_map.region);
    auto start_idx = resolve(manifest.column_map.start);
    auto end_idx = resolve(manifest.column_map.end);
    auto energy_idx = resolve(manifest.column_map.energy);

    const TimeZone& zone = find_zone(manifest.timezone);

    auto get_str = [](const std::vector<std::string>& row,
                      const std::vector<size_t>& idx) -> std::optional<std::string> {
        std::string joined;
        for (size_t i = 0; i < idx.size(); ++i) {
            if (i) joined += ' ';
            joined += row[idx[i]];
        }
        // trim
        size_t b = joined.find_first_not_of(" \t");
        if (b == std::string::npos) return std::nullopt;
        size_t e = joined.find_last_not_of(" \t");
        return joined.substr(b, e - b + 1);
    };

    manifest.records_parsed = 0;
    manifest.records_dropped.clear();
    std::vector<SessionRecord> out;
    std::vector<std::string> row;
    while (reader.next(row)) {
        RawRow raw;
        raw.station = get_str(row, station_idx);
        raw.region = get_str(row, region_idx);
        auto parse_ts = [&](const std::vector<size_t>& idx, bool& missing) -> std::optional<Instant> {
            auto s = get_str(row, idx);
            if (!s) { missing = true; return std::nullopt; }
            auto civ = parse_timestamp(*s, manifest.timestamp_format);
            if (!civ) return std::nullopt;
            return to_utc(*civ, zone);
        };
        raw.start = parse_ts(start_idx, raw.start_missing);
        raw.end = parse_ts(end_idx, raw.end_missing);
        auto es = get_str(row, energy_idx);
        if (es) {
            try {
                size_t pos = 0;
                double v = std::stod(*es, &pos);
                if (pos == es->size()) raw.energy = v;
            } catch (...) {}
        }
        DropReason reason;
        auto rec = validate_session(raw, manifest.city, reason);
        if (rec) {
            out.push_back(std::move(*rec));
            ++manifest.records_parsed;
        } else {
            ++manifest.records_dropped[drop_reason_name(reason)];
        }
    }
    if (out.empty())
        throw std::runtime_error("zero parseable rows in " + manifest.source_path);
    return out;
}

// --- canonical session table persistence -----------------------------------

inline void write_sessions_csv(const std::vector<SessionRecord>& records, std::ostream& os) {
    os << "city,station_id,region_id,start_utc,end_utc,energy_kwh\n";
    for (const auto& r : records) {
        os << csv_join({city_name(r.city), r.station_id, r.region_id,
                        format_rfc3339(r.start), format_rfc3339(r.end),
                        format_double(r.energy_kwh, 15)});
    }
}

inline std::vector<SessionRecord> read_sessions_csv(const std::string& path) {
    CsvReader reader(path);
    size_t ci = reader.column("city"), si = reader.column("station_id"),
           ri = reader.column("region_id"), bi = reader.column("start_utc"),
           ei = reader.column("end_utc"), ki = reader.column("energy_kwh");
    std::vector<SessionRecord> out;
    std::vector<std::string> row;
    while (reader.next(row)) {
        SessionRecord r;
        r.city = city_from_name(row[ci]);
        r.station_id = row[si];
        r.region_id = row[ri];
        auto s = parse_rfc3339(row[bi]), e = parse_rfc3339(row[ei]);
        if (!s || !e) throw std::runtime_error("bad timestamp in " + path);
        r.start = *s;
        r.end = *e;
        r.energy_kwh = std::stod(row[ki]);
        out.push_back(std::move(r));
    }
    return out;
}

inline nlohmann::json manifest_to_json(const DatasetManifest& m) {
    nlohmann::json j;
    j["city"] = city_name(m.city);
    j["source_path"] = m.source_path;
    j["timezone"] = m.timezone;
    j["timestamp_format"] = m.timestamp_format;
    j["records_parsed"] = m.records_parsed;
    j["records_dropped"] = m.records_dropped;
    j["records_dropped_total"] = m.dropped_total();
    j["column_map"] = {{"station", m.column_map.station},
                       {"region", m.column_map.region},
                       {"start", m.column_map.start},
                       {"end", m.column_map.end},
                       {"energy", m.column_map.energy}};
    return j;
}

}  // namespace evload
