#pragma once

// MAE/RMSE aggregation over persisted forecast runs and paper-style table
// emission. All metrics live in the normalized domain; station and region
// cells micro-average pooled per-(origin, step) errors across entities.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "evload/csv.hpp"
#include "evload/engine.hpp"

namespace evload {

inline double mae(const std::vector<double>& pred, const std::vector<double>& actual) {
    if (pred.empty()) throw std::runtime_error("mae: empty input");
    if (pred.size() != actual.size()) throw std::runtime_error("mae: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - actual[i]);
    return s / static_cast<double>(pred.size());
}

inline double rmse(const std::vector<double>& pred, const std::vector<double>& actual) {
    if (pred.empty()) throw std::runtime_error("rmse: empty input");
    if (pred.size() != actual.size()) throw std::runtime_error("rmse: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double e = pred[i] - actual[i];
        s += e * e;
    }
    return std::sqrt(s / static_cast<double>(pred.size()));
}

struct MetricCell {
    City dataset = City::Custom;
    std::string model;
    Level level = Level::Station;
    Plan plan = Plan::Long;
    int step = 1;
    double mae = 0.0;
    double rmse = 0.0;
    std::size_t n = 0;
};

namespace detail {

using CellKey = std::tuple<int, std::string, int, int, int>;

inline CellKey cell_key(City c, const std::string& m, Level l, Plan p, int step) {
    return {static_cast<int>(c), m, static_cast<int>(l), static_cast<int>(p), step};
}

}  // namespace detail

// Micro-average: pool every (entity, origin) error for the key before
// averaging, so multi-station cells weight each forecast equally.
inline std::vector<MetricCell> cellize(const std::vector<RunRow>& rows) {
    struct Acc {
        double abs_sum = 0.0;
        double sq_sum = 0.0;
        std::size_t n = 0;
    };
    std::map<detail::CellKey, Acc> acc;
    for (const auto& r : rows) {
        auto& a = acc[detail::cell_key(r.city, r.model, r.level, r.plan, r.step)];
        double e = r.prediction - r.actual;
        a.abs_sum += std::abs(e);
        a.sq_sum += e * e;
        ++a.n;
    }
    std::vector<MetricCell> cells;
    cells.reserve(acc.size());
    for (const auto& [key, a] : acc) {
        MetricCell c;
        c.dataset = static_cast<City>(std::get<0>(key));
        c.model = std::get<1>(key);
        c.level = static_cast<Level>(std::get<2>(key));
        c.plan = static_cast<Plan>(std::get<3>(key));
        c.step = std::get<4>(key);
        c.n = a.n;
        c.mae = a.abs_sum / static_cast<double>(a.n);
        c.rmse = std::sqrt(a.sq_sum / static_cast<double>(a.n));
        cells.push_back(std::move(c));
    }
    return cells;
}

inline std::vector<RunRow> flatten_runs(const std::vector<ForecastRun>& runs) {
    std::vector<RunRow> rows;
    for (const auto& run : runs) {
        const auto plan = plan_for(run.plan);
        for (std::size_t o = 0; o < run.origins.size(); ++o)
            for (std::size_t j = 0; j < plan.report_steps.size(); ++j)
                rows.push_back({run.city, run.model, run.level, run.plan,
                                run.entity_id, run.origins[o], plan.report_steps[j],
                                run.predictions[o][j], run.actuals[o][j]});
    }
    return rows;
}

inline std::vector<MetricCell> cellize(const std::vector<ForecastRun>& runs) {
    return cellize(flatten_runs(runs));
}

// Reproducibility context rendered into every report and metrics header.
struct ReportMeta {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    std::vector<std::string> lag_lines;   // one "level: offsets" line per resolution
    std::vector<std::string> decisions;   // defaulted choices the outputs depend on
};

namespace detail {

inline std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::vector<std::string> header_lines(const ReportMeta& meta) {
    std::vector<std::string> lines;
    lines.push_back("train_fraction=" + format_double(meta.train_fraction, 15));
    lines.push_back("seed=" + std::to_string(meta.seed));
    for (const auto& l : meta.lag_lines) lines.push_back("lags " + l);
    for (const auto& d : meta.decisions) lines.push_back("decision: " + d);
    lines.push_back("aggregation: station/region cells micro-average pooled errors");
    lines.push_back("domain: metrics computed on normalized values (no inverse transform)");
    return lines;
}

inline const MetricCell* find_cell(const std::vector<MetricCell>& cells, City dataset,
                                   const std::string& model, Level level, Plan plan,
                                   int step) {
    for (const auto& c : cells)
        if (c.dataset == dataset && c.model == model && c.level == level &&
            c.plan == plan && c.step == step)
            return &c;
    return nullptr;
}

}  // namespace detail

inline std::vector<std::string> models_in(const std::vector<MetricCell>& cells) {
    std::set<std::string> s;
    for (const auto& c : cells) s.insert(c.model);
    return {s.begin(), s.end()};
}

// Verify the full model x level x report-step grid exists for one
// (dataset, plan) report; names the first missing combination.
inline void check_complete(const std::vector<MetricCell>& cells, City dataset,
                           Plan plan, const std::vector<std::string>& models) {
    if (models.empty()) throw std::runtime_error("report: no models");
    const auto hp = plan_for(plan);
    for (const auto& m : models)
        for (Level level : {Level::Station, Level::Region, Level::City})
            for (int step : hp.report_steps)
                if (!detail::find_cell(cells, dataset, m, level, plan, step))
                    throw std::runtime_error(
                        "report: incomplete grid, missing cell " + city_name(dataset) +
                        "/" + m + "/" + level_name(level) + "/" + plan_name(plan) +
                        "/step " + std::to_string(step));
}

// Markdown table mirroring the paper layout: model x metric rows, step x level
// columns, per-(level, step, metric) minimum bolded (ties all bolded).
inline std::string emit_markdown(const std::vector<MetricCell>& cells, City dataset,
                                 Plan plan, const ReportMeta& meta) {
    const auto models = models_in(cells);
    check_complete(cells, dataset, plan, models);
    const auto hp = plan_for(plan);
    const std::vector<Level> levels{Level::Station, Level::Region, Level::City};

    std::ostringstream os;
    os << "# Forecast accuracy: " << city_name(dataset) << " / " << plan_name(plan)
       << "\n\n";
    for (const auto& l : detail::header_lines(meta)) os << "- " << l << "\n";
    os << "\nLower is better; the best model per column is bold.\n\n";

    os << "| model | metric |";
    for (int step : hp.report_steps)
        for (Level level : levels)
            os << " s" << step << " " << level_name(level) << " |";
    os << "\n|---|---|";
    for (std::size_t i = 0; i < hp.report_steps.size() * levels.size(); ++i)
        os << "---|";
    os << "\n";

    for (const auto& model : models) {
        for (const char* metric : {"mae", "rmse"}) {
            const bool is_mae = std::string(metric) == "mae";
            os << "| " << model << " | " << metric << " |";
            for (int step : hp.report_steps)
                for (Level level : levels) {
                    const auto* c =
                        detail::find_cell(cells, dataset, model, level, plan, step);
                    double v = is_mae ? c->mae : c->rmse;
                    double best = v;
                    for (const auto& other : models) {
                        const auto* oc =
                            detail::find_cell(cells, dataset, other, level, plan, step);
                        best = std::min(best, is_mae ? oc->mae : oc->rmse);
                    }
                    std::string text = detail::fixed2(v);
                    if (v <= best) text = "**" + text + "**";
                    os << " " << text << " |";
                }
            os << "\n";
        }
    }
    return os.str();
}

// Flat full-precision cell list with a '#' header block carrying the same
// reproducibility context as the markdown reports.
inline void write_metrics_csv(const std::vector<MetricCell>& cells, const ReportMeta& meta,
                              std::ostream& os) {
    os << "# evload metrics\n";
    for (const auto& l : detail::header_lines(meta)) os << "# " << l << "\n";
    os << "dataset,model,level,plan,step,mae,rmse,n\n";
    for (const auto& c : cells) {
        std::vector<std::string> row{city_name(c.dataset), c.model,
                                     level_name(c.level), plan_name(c.plan),
                                     std::to_string(c.step), format_double(c.mae, 17),
                                     format_double(c.rmse, 17), std::to_string(c.n)};
        os << csv_join(row);
    }
}

inline std::vector<MetricCell> read_metrics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("metrics csv: cannot open " + path);
    std::string line;
    bool saw_header = false;
    std::vector<MetricCell> cells;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!saw_header) {
            if (line != "dataset,model,level,plan,step,mae,rmse,n")
                throw std::runtime_error("metrics csv: unexpected header: " + line);
            saw_header = true;
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) f.push_back(field);
        if (f.size() != 8)
            throw std::runtime_error("metrics csv: expected 8 fields: " + line);
        MetricCell c;
        c.dataset = city_from_name(f[0]);
        c.model = f[1];
        c.level = level_from_name(f[2]);
        c.plan = plan_from_name(f[3]);
        c.step = std::stoi(f[4]);
        c.mae = std::stod(f[5]);
        c.rmse = std::stod(f[6]);
        c.n = static_cast<std::size_t>(std::stoull(f[7]));
        cells.push_back(std::move(c));
    }
    if (!saw_header) throw std::runtime_error("metrics csv: missing header row");
    return cells;
}

}  // namespace evload
