#pragma once

// Supervised view of the energy series: lagged targets, calendar indicators,
// identity one-hots and z-score scaling fit on the training partition only.

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "evload/csv.hpp"
#include "evload/holidays.hpp"
#include "evload/timeseries.hpp"

namespace evload {

inline const TimeZone& city_zone(City c) {
    switch (c) {
        case City::PaloAlto: return find_zone("America/Los_Angeles");
        case City::Boulder: return find_zone("America/Denver");
        case City::Dundee: return find_zone("Europe/London");
        case City::Perth: return find_zone("Australia/Perth");
        default: return utc_zone();
    }
}

struct LagSpec {
    Resolution resolution = Resolution::Daily;
    std::vector<int> offsets;  // strictly increasing, in intervals

    int max_offset() const { return offsets.empty() ? 0 : offsets.back(); }

    void validate() const {
        if (offsets.empty()) throw std::runtime_error("lag spec has no offsets");
        for (std::size_t i = 0; i < offsets.size(); ++i) {
            if (offsets[i] <= 0 || (i > 0 && offsets[i] <= offsets[i - 1]))
                throw std::runtime_error("lag offsets must be strictly increasing and positive");
        }
    }
};

// Cover the daily and weekly cycles of charging demand at each resolution
// while keeping sequence length small.
inline LagSpec default_lag_spec(Resolution r) {
    switch (r) {
        case Resolution::TenMin: return {r, {1, 2, 3, 6, 144, 1008}};
        case Resolution::Hourly: return {r, {1, 2, 3, 24, 168}};
        default: return {r, {1, 2, 7, 14, 28}};
    }
}

struct Normalizer {
    double mean = 0.0;
    double std = 1.0;
    static constexpr double epsilon = 1e-8;

    double transform(double v) const { return (v - mean) / std::max(std, epsilon); }
    double inverse(double z) const { return z * std::max(std, epsilon) + mean; }
};

inline Normalizer fit_normalizer(const std::vector<double>& train_values) {
    if (train_values.empty()) throw std::runtime_error("fit_normalizer: empty input");
    double mean = 0.0;
    for (double v : train_values) mean += v;
    mean /= static_cast<double>(train_values.size());
    double var = 0.0;
    for (double v : train_values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(train_values.size());  // population variance
    return {mean, std::sqrt(var)};
}

struct SplitRange {
    std::size_t train_begin = 0, train_end = 0;  // [begin, end)
    std::size_t test_begin = 0, test_end = 0;
};

inline SplitRange chronological_split(std::size_t length, double train_fraction,
                                      int max_lag) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::runtime_error("train_fraction must be in (0,1)");
    std::size_t cut = static_cast<std::size_t>(
        std::floor(static_cast<double>(length) * train_fraction));
    if (cut <= static_cast<std::size_t>(max_lag))
        throw std::runtime_error("train partition shorter than max lag + 1");
    if (cut >= length)
        throw std::runtime_error("empty test partition");
    return {0, cut, cut, length};
}

// is_holiday, is_weekend, day-of-week one-hot (Monday=0), month one-hot.
struct CalendarFeatures {
    double values[2 + 7 + 12] = {};

    static constexpr int size() { return 21; }
};

inline CalendarFeatures calendar_of(Instant t, City city, const HolidayTable& holidays) {
    const TimeZone& zone = city_zone(city);
    CivilDateTime local = to_local(t, zone);
    int dow = weekday_of(days_from_civil(local.year, local.month, local.day));
    CalendarFeatures f;
    f.values[0] = holidays.is_holiday(city, local.year, local.month, local.day) ? 1.0 : 0.0;
    f.values[1] = (dow >= 5) ? 1.0 : 0.0;
    f.values[2 + dow] = 1.0;
    f.values[9 + (local.month - 1)] = 1.0;
    return f;
}

// Station/region universe of a city; defines the one-hot layout shared by
// every pooled model regardless of level.
struct EntityIndex {
    std::vector<std::string> stations;  // sorted
    std::vector<std::string> regions;   // sorted
    std::map<std::string, std::string> region_of_station;

    static EntityIndex from_sessions(const std::vector<SessionRecord>& sessions) {
        EntityIndex idx;
        std::map<std::string, std::string> reg;
        for (const auto& s : sessions) {
            auto it = reg.find(s.station_id);
            if (it == reg.end()) reg[s.station_id] = s.region_id;
        }
        std::set<std::string> regions;
        for (auto& [st, r] : reg) {
            idx.stations.push_back(st);
            regions.insert(r);
        }
        idx.regions.assign(regions.begin(), regions.end());
        idx.region_of_station = std::move(reg);
        return idx;
    }

    int station_pos(const std::string& id) const {
        auto it = std::lower_bound(stations.begin(), stations.end(), id);
        if (it == stations.end() || *it != id) return -1;
        return static_cast<int>(it - stations.begin());
    }

    int region_pos(const std::string& id) const {
        auto it = std::lower_bound(regions.begin(), regions.end(), id);
        if (it == regions.end() || *it != id) return -1;
        return static_cast<int>(it - regions.begin());
    }
};

// One-hot identity block for an entity at a given level. Station rows carry
// their station and region bits; region rows carry only the region bit; the
// city row is all zero.
inline void identity_onehot(const EntityIndex& idx, Level level,
                            const std::string& entity_id, double* out) {
    const std::size_t n = idx.stations.size() + idx.regions.size();
    std::fill(out, out + n, 0.0);
    if (level == Level::Station) {
        int sp = idx.station_pos(entity_id);
        if (sp < 0) throw std::runtime_error("unknown station: " + entity_id);
        out[sp] = 1.0;
        int rp = idx.region_pos(idx.region_of_station.at(entity_id));
        if (rp >= 0) out[idx.stations.size() + rp] = 1.0;
    } else if (level == Level::Region) {
        int rp = idx.region_pos(entity_id);
        if (rp < 0) throw std::runtime_error("unknown region: " + entity_id);
        out[idx.stations.size() + rp] = 1.0;
    }
}

struct FeatureMatrix {
    std::vector<std::string> column_names;
    std::size_t n_cols = 0;
    std::vector<double> data;            // row-major
    std::vector<double> target;          // normalized x_t
    std::vector<std::string> entity_ids; // per row
    std::vector<Instant> times;          // per row (time of the target)

    std::size_t rows() const { return target.size(); }
    const double* row(std::size_t i) const { return data.data() + i * n_cols; }
};

// Column order: lags (ascending offset), calendar, station one-hot, region
// one-hot; documented by column_names in the persisted header.
inline FeatureMatrix build_matrix(const std::vector<EnergySeries>& series,
                                  const LagSpec& lags, const Normalizer& norm,
                                  const HolidayTable& holidays, City city,
                                  const EntityIndex& idx,
                                  std::size_t row_begin, std::size_t row_end) {
    lags.validate();
    FeatureMatrix m;
    for (int o : lags.offsets) m.column_names.push_back("lag_" + std::to_string(o));
    m.column_names.push_back("is_holiday");
    m.column_names.push_back("is_weekend");
    for (int i = 0; i < 7; ++i) m.column_names.push_back("dow_" + std::to_string(i));
    for (int i = 1; i <= 12; ++i) m.column_names.push_back("month_" + std::to_string(i));
    for (const auto& s : idx.stations) m.column_names.push_back("station_" + s);
    for (const auto& r : idx.regions) m.column_names.push_back("region_" + r);
    m.n_cols = m.column_names.size();

    const int max_lag = lags.max_offset();
    std::vector<const EnergySeries*> ordered;
    for (const auto& s : series) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(),
              [](const EnergySeries* a, const EnergySeries* b) {
                  return a->entity_id < b->entity_id;
              });

    for (const EnergySeries* s : ordered) {
        std::size_t begin = std::max(row_begin, static_cast<std::size_t>(max_lag));
        std::size_t end = std::min(row_end, s->values.size());
        if (begin >= end)
            throw std::runtime_error("lags unsatisfiable on series " + s->entity_id);
        for (std::size_t t = begin; t < end; ++t) {
            std::size_t base = m.data.size();
            m.data.resize(base + m.n_cols, 0.0);
            double* row = m.data.data() + base;
            std::size_t c = 0;
            for (int o : lags.offsets) row[c++] = norm.transform(s->values[t - o]);
            CalendarFeatures cal = calendar_of(s->interval_start(t), city, holidays);
            for (int i = 0; i < CalendarFeatures::size(); ++i) row[c++] = cal.values[i];
            identity_onehot(idx, s->level, s->entity_id, row + c);
            m.target.push_back(norm.transform(s->values[t]));
            m.entity_ids.push_back(s->entity_id);
            m.times.push_back(s->interval_start(t));
        }
    }
    return m;
}

inline void write_matrix_csv(const FeatureMatrix& m, std::ostream& os) {
    std::vector<std::string> hdr = {"entity_id", "time_utc"};
    hdr.insert(hdr.end(), m.column_names.begin(), m.column_names.end());
    hdr.push_back("target");
    os << csv_join(hdr);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        std::vector<std::string> row = {m.entity_ids[i], format_rfc3339(m.times[i])};
        const double* r = m.row(i);
        for (std::size_t c = 0; c < m.n_cols; ++c) row.push_back(format_double(r[c], 15));
        row.push_back(format_double(m.target[i], 15));
        os << csv_join(row);
    }
}

}  // namespace evload
