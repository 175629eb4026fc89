#pragma once

// Run configuration: datasets, split, seed, model/plan selection and
// training overrides, loaded from JSON. Validation collects every problem
// before reporting so a config is fixed in one pass.

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "evload/engine.hpp"
#include "evload/features.hpp"
#include "evload/ingest.hpp"
#include "evload/rng.hpp"
#include "json.hpp"

namespace evload {

inline const std::vector<std::string>& known_models() {
    static const std::vector<std::string> m{"arima", "gbt", "gru", "lstm", "transformer"};
    return m;
}

struct DatasetConfig {
    City city = City::Custom;
    std::string path;
    std::string timezone = "UTC";
    std::string timestamp_format = "%Y-%m-%d %H:%M:%S";
    ColumnMap column_map;
};

struct RunConfig {
    std::string output_dir;
    std::uint64_t seed = 0;
    bool seed_given = false;
    double train_fraction = 0.8;
    std::vector<std::string> models;
    std::vector<Plan> plans;
    std::map<std::string, std::vector<int>> lag_overrides;  // key: resolution name
    std::string holiday_table;  // optional override file
    int jobs = 1;
    int neural_max_epochs = 200;
    int neural_patience = 20;
    int gbt_max_rounds = 2000;
    int gbt_patience = 200;
    std::vector<DatasetConfig> datasets;

    LagSpec lags_for(Resolution r) const {
        auto it = lag_overrides.find(resolution_name(r));
        if (it == lag_overrides.end()) return default_lag_spec(r);
        return LagSpec{r, it->second};
    }
};

namespace detail {

inline std::vector<std::string> json_strings(const nlohmann::json& j) {
    std::vector<std::string> out;
    if (j.is_string()) out.push_back(j.get<std::string>());
    else for (const auto& v : j) out.push_back(v.get<std::string>());
    return out;
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
    RunConfig c;
    c.output_dir = j.value("output_dir", std::string{});
    if (j.contains("seed")) {
        c.seed = j.at("seed").get<std::uint64_t>();
        c.seed_given = true;
    }
    c.train_fraction = j.value("train_fraction", 0.8);
    if (j.contains("models"))
        for (const auto& m : j.at("models")) c.models.push_back(m.get<std::string>());
    if (j.contains("plans"))
        for (const auto& p : j.at("plans")) c.plans.push_back(plan_from_name(p.get<std::string>()));
    if (j.contains("lag_overrides"))
        for (const auto& [res, offsets] : j.at("lag_overrides").items())
            c.lag_overrides[res] = offsets.get<std::vector<int>>();
    c.holiday_table = j.value("holiday_table", std::string{});
    c.jobs = j.value("jobs", 1);
    if (j.contains("training")) {
        const auto& t = j.at("training");
        c.neural_max_epochs = t.value("neural_max_epochs", c.neural_max_epochs);
        c.neural_patience = t.value("neural_patience", c.neural_patience);
        c.gbt_max_rounds = t.value("gbt_max_rounds", c.gbt_max_rounds);
        c.gbt_patience = t.value("gbt_patience", c.gbt_patience);
    }
    if (j.contains("datasets"))
        for (const auto& d : j.at("datasets")) {
            DatasetConfig ds;
            ds.city = city_from_name(d.at("city").get<std::string>());
            ds.path = d.value("path", std::string{});
            ds.timezone = d.value("timezone", std::string{"UTC"});
            ds.timestamp_format = d.value("timestamp_format", ds.timestamp_format);
            if (d.contains("column_map")) {
                const auto& m = d.at("column_map");
                ds.column_map.station = detail::json_strings(m.value("station", nlohmann::json::array()));
                ds.column_map.region = detail::json_strings(m.value("region", nlohmann::json::array()));
                ds.column_map.start = detail::json_strings(m.value("start", nlohmann::json::array()));
                ds.column_map.end = detail::json_strings(m.value("end", nlohmann::json::array()));
                ds.column_map.energy = detail::json_strings(m.value("energy", nlohmann::json::array()));
            }
            c.datasets.push_back(std::move(ds));
        }
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error("config parse error in " + path + ": " + e.what());
    }
    try {
        return parse_config(j);
    } catch (const std::exception& e) {
        throw std::runtime_error("config error in " + path + ": " + e.what());
    }
}

// Every problem at once; an empty result means the config is usable.
inline std::vector<std::string> validate_config(const RunConfig& c) {
    std::vector<std::string> problems;
    if (c.output_dir.empty()) problems.push_back("output_dir is required");
    if (!c.seed_given) problems.push_back("seed must be explicit (no wall-clock seeding)");
    if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0))
        problems.push_back("train_fraction must be in (0,1)");
    if (c.datasets.empty()) problems.push_back("at least one dataset is required");
    if (c.models.empty()) problems.push_back("at least one model must be enabled");
    for (const auto& m : c.models)
        if (std::find(known_models().begin(), known_models().end(), m) ==
            known_models().end())
            problems.push_back("unknown model: " + m);
    if (c.plans.empty()) problems.push_back("at least one plan is required");
    if (c.jobs < 1) problems.push_back("jobs must be >= 1");
    if (c.neural_max_epochs < 1 || c.neural_patience < 1)
        problems.push_back("neural training budget must be positive");
    if (c.gbt_max_rounds < 1 || c.gbt_patience < 1)
        problems.push_back("gbt training budget must be positive");
    for (const auto& [res, offsets] : c.lag_overrides) {
        try {
            resolution_from_name(res);
        } catch (const std::exception&) {
            problems.push_back("lag_overrides: unknown resolution " + res);
            continue;
        }
        bool ok = !offsets.empty() && offsets.front() >= 1;
        for (std::size_t i = 1; i < offsets.size(); ++i)
            if (offsets[i] <= offsets[i - 1]) ok = false;
        if (!ok)
            problems.push_back("lag_overrides[" + res +
                               "]: offsets must be positive and strictly increasing");
    }
    std::set<City> seen;
    for (std::size_t i = 0; i < c.datasets.size(); ++i) {
        const auto& d = c.datasets[i];
        std::string tag = "datasets[" + std::to_string(i) + "] (" + city_name(d.city) + ")";
        if (d.path.empty()) problems.push_back(tag + ": path is required");
        if (!seen.insert(d.city).second) problems.push_back(tag + ": duplicate city");
        try {
            find_zone(d.timezone);
        } catch (const std::exception&) {
            problems.push_back(tag + ": unknown timezone " + d.timezone);
        }
        if (d.column_map.station.empty() || d.column_map.region.empty() ||
            d.column_map.start.empty() || d.column_map.end.empty() ||
            d.column_map.energy.empty())
            problems.push_back(tag + ": column_map must cover the five canonical fields");
    }
    return problems;
}

// Canonical serialization of the parsed config; its hash guards artifacts
// against silently mixing outputs of different configurations.
inline nlohmann::json config_to_json(const RunConfig& c) {
    nlohmann::json j;
    j["output_dir"] = c.output_dir;
    j["seed"] = c.seed;
    j["train_fraction"] = c.train_fraction;
    j["models"] = c.models;
    std::vector<std::string> plans;
    for (Plan p : c.plans) plans.push_back(plan_name(p));
    j["plans"] = plans;
    j["lag_overrides"] = c.lag_overrides;
    j["holiday_table"] = c.holiday_table;
    j["training"] = {{"neural_max_epochs", c.neural_max_epochs},
                     {"neural_patience", c.neural_patience},
                     {"gbt_max_rounds", c.gbt_max_rounds},
                     {"gbt_patience", c.gbt_patience}};
    j["datasets"] = nlohmann::json::array();
    for (const auto& d : c.datasets)
        j["datasets"].push_back({{"city", city_name(d.city)},
                                 {"path", d.path},
                                 {"timezone", d.timezone},
                                 {"timestamp_format", d.timestamp_format},
                                 {"column_map",
                                  {{"station", d.column_map.station},
                                   {"region", d.column_map.region},
                                   {"start", d.column_map.start},
                                   {"end", d.column_map.end},
                                   {"energy", d.column_map.energy}}}});
    return j;
}

// Note: `jobs` is deliberately excluded — worker count must not invalidate
// artifacts, since outputs are bit-identical for any jobs value.
inline std::string config_hash(const RunConfig& c) {
    nlohmann::json j = config_to_json(c);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(j.dump())));
    return buf;
}

}  // namespace evload
