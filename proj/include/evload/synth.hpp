#pragma once

// Deterministic synthetic raw-session generators. Each city file mimics its
// source's schema (column names, timestamp formats, local timezone) at the
// published row and entity counts, including a sprinkle of deliberately
// invalid rows so the ingest drop accounting is exercised end to end.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "evload/ingest.hpp"
#include "evload/rng.hpp"
#include "evload/time.hpp"

namespace evload {

struct SynthSpec {
    City city = City::Custom;
    std::string file_name;
    std::string timezone = "UTC";
    std::string timestamp_format = "%Y-%m-%d %H:%M:%S";
    ColumnMap column_map;
    std::vector<std::string> raw_header;  // full raw schema incl. ignored columns
    int n_stations = 1;
    int n_regions = 1;
    std::size_t total_rows = 0;   // valid + invalid
    std::size_t invalid_rows = 0;
    int year = 2018;
    int n_days = 365;
    std::uint64_t seed = 0;
};

namespace synth_detail {

inline std::string zero_pad(int v, int width) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%0*d", width, v);
    return buf;
}

}  // namespace synth_detail

// Published dataset scale: sessions (Table row counts), station and region
// cardinalities per city. Spans are compressed to one year so raster grids
// stay desk-sized; session counts and entity counts are exact.
inline std::vector<SynthSpec> synth_specs(std::uint64_t seed) {
    std::vector<SynthSpec> specs;

    SynthSpec pa;
    pa.city = City::PaloAlto;
    pa.file_name = "palo_alto_raw.csv";
    pa.timezone = "America/Los_Angeles";
    pa.timestamp_format = "%m/%d/%Y %H:%M";
    pa.raw_header = {"Station Name", "Start Date",  "Start Time", "End Date",
                     "End Time",     "Energy (kWh)", "Port Type",  "Zip/Postal Code"};
    pa.column_map = {{"Station Name"},
                     {"Zip/Postal Code"},
                     {"Start Date", "Start Time"},
                     {"End Date", "End Time"},
                     {"Energy (kWh)"}};
    pa.n_stations = 47;
    pa.n_regions = 3;
    pa.total_rows = 259415;
    pa.invalid_rows = 415;
    pa.seed = seed;
    specs.push_back(pa);

    SynthSpec bo;
    bo.city = City::Boulder;
    bo.file_name = "boulder_raw.csv";
    bo.timezone = "America/Denver";
    bo.timestamp_format = "%Y-%m-%d %H:%M";
    bo.raw_header = {"Station_Name", "Address", "Zip_Code",
                     "Start_Date_Time", "End_Date_Time", "Energy_kWh"};
    bo.column_map = {{"Station_Name"},
                     {"Zip_Code"},
                     {"Start_Date_Time"},
                     {"End_Date_Time"},
                     {"Energy_kWh"}};
    bo.n_stations = 27;
    bo.n_regions = 5;
    bo.total_rows = 24081;
    bo.invalid_rows = 81;
    bo.seed = seed;
    specs.push_back(bo);

    SynthSpec du;
    du.city = City::Dundee;
    du.file_name = "dundee_raw.csv";
    du.timezone = "Europe/London";
    du.timestamp_format = "%d/%m/%Y %H:%M";
    du.raw_header = {"CP ID", "Site", "Start Date", "Start Time",
                     "End Date", "End Time", "Total kWh"};
    du.column_map = {{"CP ID"},
                     {"Site"},
                     {"Start Date", "Start Time"},
                     {"End Date", "End Time"},
                     {"Total kWh"}};
    du.n_stations = 67;
    du.n_regions = 34;
    du.total_rows = 52752;
    du.invalid_rows = 152;
    du.seed = seed;
    specs.push_back(du);

    SynthSpec pe;
    pe.city = City::Perth;
    pe.file_name = "perth_raw.csv";
    pe.timezone = "Australia/Perth";
    pe.timestamp_format = "%d/%m/%Y %H:%M";
    pe.raw_header = {"Charging Station", "Suburb", "Session Start",
                     "Session End", "Energy Consumed (kWh)"};
    pe.column_map = {{"Charging Station"},
                     {"Suburb"},
                     {"Session Start"},
                     {"Session End"},
                     {"Energy Consumed (kWh)"}};
    pe.n_stations = 36;
    pe.n_regions = 22;
    pe.total_rows = 66664;
    pe.invalid_rows = 164;
    pe.seed = seed;
    specs.push_back(pe);

    return specs;
}

// Small single-city fixture for pipeline tests.
inline SynthSpec custom_spec(int n_stations, int n_regions, std::size_t total_rows,
                             std::size_t invalid_rows, int n_days, std::uint64_t seed) {
    SynthSpec s;
    s.city = City::Custom;
    s.file_name = "custom_raw.csv";
    s.timezone = "UTC";
    s.timestamp_format = "%Y-%m-%d %H:%M:%S";
    s.raw_header = {"station", "zone", "plug_in", "plug_out", "kwh"};
    s.column_map = {{"station"}, {"zone"}, {"plug_in"}, {"plug_out"}, {"kwh"}};
    s.n_stations = n_stations;
    s.n_regions = n_regions;
    s.total_rows = total_rows;
    s.invalid_rows = invalid_rows;
    s.n_days = n_days;
    s.seed = seed;
    return s;
}

inline std::string synth_station_id(const SynthSpec& spec, int i) {
    std::string prefix;
    switch (spec.city) {
        case City::PaloAlto: prefix = "PALO ALTO CA / STATION "; break;
        case City::Boulder: prefix = "BOULDER / ST"; break;
        case City::Dundee: prefix = "5130"; break;  // CP ID style numeric keys
        case City::Perth: prefix = "PER-CS-"; break;
        default: prefix = "st"; break;
    }
    return prefix + synth_detail::zero_pad(i + 1, 3);
}

inline std::string synth_region_id(const SynthSpec& spec, int r) {
    switch (spec.city) {
        case City::PaloAlto: return r == 0 ? "94301" : (r == 1 ? "94303" : "94306");
        case City::Boulder: return "8030" + std::to_string(2 + r);
        case City::Dundee: return "Site " + synth_detail::zero_pad(r + 1, 2);
        case City::Perth: return "Suburb " + synth_detail::zero_pad(r + 1, 2);
        default: return "zone" + std::to_string(r + 1);
    }
}

inline int synth_region_of_station(const SynthSpec& spec, int station) {
    return station % spec.n_regions;
}

namespace synth_detail {

inline std::string format_local(Instant t, const TimeZone& zone,
                                std::string_view format) {
    CivilDateTime c = to_local(t, zone);
    std::string out;
    for (std::size_t i = 0; i < format.size(); ++i) {
        if (format[i] == '%' && i + 1 < format.size()) {
            switch (format[++i]) {
                case 'Y': out += zero_pad(c.year, 4); break;
                case 'm': out += zero_pad(c.month, 2); break;
                case 'd': out += zero_pad(c.day, 2); break;
                case 'H': out += zero_pad(c.hour, 2); break;
                case 'M': out += zero_pad(c.minute, 2); break;
                case 'S': out += zero_pad(c.second, 2); break;
                default: out += format[i]; break;
            }
        } else {
            out += format[i];
        }
    }
    return out;
}

// Split a "date time" render into the pieces consumed by two-column maps.
inline std::vector<std::string> timestamp_fields(const std::string& rendered,
                                                 std::size_t n_cols) {
    if (n_cols == 1) return {rendered};
    auto space = rendered.find(' ');
    return {rendered.substr(0, space), rendered.substr(space + 1)};
}

}  // namespace synth_detail

// Write the raw CSV; returns the path. Deterministic in (spec.seed, spec).
inline std::string write_raw_csv(const SynthSpec& spec, const std::string& dir) {
    if (spec.invalid_rows + static_cast<std::size_t>(spec.n_stations) > spec.total_rows)
        throw std::runtime_error("synth: too few rows for requested scale");
    std::filesystem::create_directories(dir);
    const std::string path = dir + "/" + spec.file_name;
    std::ofstream os(path);
    if (!os) throw std::runtime_error("synth: cannot write " + path);

    const TimeZone& zone = find_zone(spec.timezone);
    RngStream rng(spec.seed, "synth-" + city_name(spec.city));
    const Instant span_begin = days_from_civil(spec.year, 1, 1) * 86400;
    const Instant span_seconds = static_cast<Instant>(spec.n_days) * 86400 - 12 * 3600;

    os << csv_join(spec.raw_header);

    // Sessions are biased toward daytime hours with a weekly rhythm so the
    // rasterized series carry the seasonality the models feed on.
    auto draw_start = [&]() {
        Instant day = span_begin + static_cast<Instant>(rng.below(
                                       static_cast<std::uint64_t>(spec.n_days))) * 86400;
        double u = rng.uniform();
        int hour = static_cast<int>(6.0 + 14.0 * u * u);  // skewed into daytime
        if (rng.uniform() < 0.12) hour = static_cast<int>(rng.below(24));
        Instant t = day + hour * 3600 + static_cast<Instant>(rng.below(60)) * 60;
        if (t - span_begin >= span_seconds) t = span_begin + span_seconds - 3600;
        return t;
    };

    const std::size_t valid_rows = spec.total_rows - spec.invalid_rows;
    std::size_t invalid_left = spec.invalid_rows;
    std::size_t rows_left = spec.total_rows;

    auto emit_row = [&](int station, bool invalid) {
        int region = synth_region_of_station(spec, station);
        std::string sid = synth_station_id(spec, station);
        std::string rid = synth_region_id(spec, region);
        Instant start = draw_start();
        Instant duration = 600 + static_cast<Instant>(rng.below(8 * 3600 - 600));
        Instant end = start + duration;
        double kwh = (static_cast<double>(duration) / 3600.0) * rng.uniform(2.0, 8.0);
        char ebuf[32];
        std::snprintf(ebuf, sizeof(ebuf), "%.3f", kwh);
        std::string energy = ebuf;

        std::string start_txt =
            synth_detail::format_local(start, zone, spec.timestamp_format);
        std::string end_txt = synth_detail::format_local(end, zone, spec.timestamp_format);

        if (invalid) {
            switch (rng.below(4)) {
                case 0: energy.clear(); break;                       // missing value
                case 1: end_txt = start_txt; break;                  // end == start
                case 2: energy = "-" + energy; break;                // negative energy
                default: start_txt = "not a timestamp"; break;       // unparseable
            }
        }

        // Assemble by header position so every schema stays self-consistent.
        std::vector<std::string> row(spec.raw_header.size());
        auto place = [&](const std::vector<std::string>& cols,
                         const std::vector<std::string>& vals) {
            for (std::size_t i = 0; i < cols.size(); ++i)
                for (std::size_t h = 0; h < spec.raw_header.size(); ++h)
                    if (spec.raw_header[h] == cols[i]) row[h] = vals[i];
        };
        place(spec.column_map.station, {sid});
        place(spec.column_map.region, {rid});
        place(spec.column_map.start,
              synth_detail::timestamp_fields(start_txt, spec.column_map.start.size()));
        place(spec.column_map.end,
              synth_detail::timestamp_fields(end_txt, spec.column_map.end.size()));
        place(spec.column_map.energy, {energy});
        for (std::size_t h = 0; h < spec.raw_header.size(); ++h)
            if (row[h].empty() && spec.raw_header[h] == "Port Type") row[h] = "Level 2";
            else if (row[h].empty() && spec.raw_header[h] == "Address")
                row[h] = std::to_string(100 + station) + " Main St";
        os << csv_join(row);
    };

    // First pass guarantees every station appears with a valid session.
    for (int s = 0; s < spec.n_stations; ++s, --rows_left) emit_row(s, false);
    std::size_t valid_left = valid_rows - static_cast<std::size_t>(spec.n_stations);
    while (rows_left > 0) {
        bool invalid =
            invalid_left > 0 &&
            (valid_left == 0 || rng.below(rows_left) < invalid_left);
        int station = static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.n_stations)));
        emit_row(station, invalid);
        if (invalid) --invalid_left; else --valid_left;
        --rows_left;
    }
    return path;
}

inline DatasetManifest manifest_for(const SynthSpec& spec, const std::string& path) {
    DatasetManifest m;
    m.city = spec.city;
    m.source_path = path;
    m.column_map = spec.column_map;
    m.timezone = spec.timezone;
    m.timestamp_format = spec.timestamp_format;
    return m;
}

}  // namespace evload
