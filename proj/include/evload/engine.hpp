#pragma once

// Recursive walk-forward forecasting over the three horizon plans. Forecast
// origins stride by one plan step; within an origin, predictions are fed back
// into the lag state and the state is re-seeded from observations before the
// next origin, so origins are independent.

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "evload/csv.hpp"
#include "evload/features.hpp"
#include "evload/timeseries.hpp"

namespace evload {

enum class Plan { Short, Mid, Long };

inline const char* plan_name(Plan p) {
    switch (p) {
        case Plan::Short: return "short";
        case Plan::Mid: return "mid";
        default: return "long";
    }
}

inline Plan plan_from_name(const std::string& s) {
    if (s == "short") return Plan::Short;
    if (s == "mid") return Plan::Mid;
    if (s == "long") return Plan::Long;
    throw std::runtime_error("unknown plan: " + s);
}

struct HorizonPlan {
    Plan label;
    Resolution resolution;
    int depth;                      // recursion depth in base intervals
    std::vector<int> report_steps;  // subset of 1..depth that lands in the report
    int stride;                     // origin stride in base intervals
};

// Short: {10,20,30 min}; Mid: hourly recursion to 8 reported at {2,4,6,8} h;
// Long: {1..5 days}.
inline HorizonPlan plan_for(Plan p) {
    switch (p) {
        case Plan::Short: return {p, Resolution::TenMin, 3, {1, 2, 3}, 1};
        case Plan::Mid: return {p, Resolution::Hourly, 8, {2, 4, 6, 8}, 2};
        default: return {p, Resolution::Daily, 5, {1, 2, 3, 4, 5}, 1};
    }
}

// Fixed-depth ring of the newest normalized values; lag(1) is the newest.
class LagState {
public:
    explicit LagState(int depth) : buf_(depth, 0.0) {}

    int depth() const { return static_cast<int>(buf_.size()); }

    void push(double v) {
        head_ = (head_ + 1) % buf_.size();
        buf_[head_] = v;
        if (filled_ < buf_.size()) ++filled_;
    }

    double lag(int offset) const {
        if (offset < 1 || static_cast<std::size_t>(offset) > filled_)
            throw std::runtime_error("lag state: offset out of range");
        return buf_[(head_ + buf_.size() - (offset - 1)) % buf_.size()];
    }

    bool full() const { return filled_ == buf_.size(); }

    // Re-seed from the newest `depth` normalized observations ending at
    // values[end - 1].
    void seed(const std::vector<double>& values, std::size_t end,
              const Normalizer& norm) {
        if (end < buf_.size())
            throw std::runtime_error("lag state: insufficient history");
        filled_ = 0;
        head_ = buf_.size() - 1;
        for (std::size_t i = end - buf_.size(); i < end; ++i)
            push(norm.transform(values[i]));
    }

private:
    std::vector<double> buf_;
    std::size_t head_ = 0;
    std::size_t filled_ = 0;
};

// Pooled models predict one step at a time from an engineered feature row.
class StepPredictor {
public:
    virtual ~StepPredictor() = default;
    virtual double predict(const double* features, std::size_t n) = 0;
};

// ARIMA-style models emit a whole horizon from the observed history.
class VectorForecaster {
public:
    virtual ~VectorForecaster() = default;
    virtual std::vector<double> forecast(const std::vector<double>& history,
                                         int h) = 0;
};

struct ForecastRun {
    City city = City::Custom;
    std::string model;
    Level level = Level::Station;
    Plan plan = Plan::Long;
    std::string entity_id;
    std::vector<Instant> origins;  // start of each origin's first target interval
    std::vector<std::vector<double>> predictions;  // origins x report_steps
    std::vector<std::vector<double>> actuals;
};

struct EngineContext {
    City city = City::Custom;
    const HolidayTable* holidays = nullptr;
    const EntityIndex* index = nullptr;
    LagSpec lags;
    Normalizer norm;
};

// Mirror of build_matrix's row layout: lags ascending, calendar, identity.
inline void fill_feature_row(const LagState& state, Instant target_time,
                             Level level, const std::string& entity_id,
                             const EngineContext& ctx, double* row) {
    std::size_t c = 0;
    for (int o : ctx.lags.offsets) row[c++] = state.lag(o);
    CalendarFeatures cal = calendar_of(target_time, ctx.city, *ctx.holidays);
    for (int i = 0; i < CalendarFeatures::size(); ++i) row[c++] = cal.values[i];
    identity_onehot(*ctx.index, level, entity_id, row + c);
}

inline std::size_t feature_row_width(const EngineContext& ctx) {
    return ctx.lags.offsets.size() + CalendarFeatures::size() +
           ctx.index->stations.size() + ctx.index->regions.size();
}

namespace detail {

inline void check_walk_inputs(const EnergySeries& series, std::size_t test_begin,
                              const HorizonPlan& plan, int max_lag) {
    if (series.resolution != plan.resolution)
        throw std::runtime_error("walk_forward: series resolution does not match plan");
    if (test_begin < static_cast<std::size_t>(max_lag))
        throw std::runtime_error("walk_forward: insufficient history at first origin");
    if (test_begin + plan.depth > series.values.size())
        throw std::runtime_error("walk_forward: test range shorter than one horizon");
}

}  // namespace detail

// Walk a pooled step-wise model over the test range of one entity's series.
// Predictions and actuals are in the normalized domain.
inline ForecastRun walk_forward(StepPredictor& model, const EnergySeries& series,
                                std::size_t test_begin, const HorizonPlan& plan,
                                const EngineContext& ctx,
                                const std::string& model_name) {
    detail::check_walk_inputs(series, test_begin, plan, ctx.lags.max_offset());
    ForecastRun run{ctx.city, model_name, series.level,
                    plan.label, series.entity_id};

    const std::size_t width = feature_row_width(ctx);
    std::vector<double> row(width);
    LagState state(ctx.lags.max_offset());
    for (std::size_t s = test_begin; s + plan.depth <= series.values.size();
         s += plan.stride) {
        state.seed(series.values, s, ctx.norm);
        std::vector<double> preds, acts;
        for (int k = 1; k <= plan.depth; ++k) {
            std::size_t idx = s + k - 1;
            fill_feature_row(state, series.interval_start(idx), series.level,
                             series.entity_id, ctx, row.data());
            double p = model.predict(row.data(), width);
            if (!std::isfinite(p))
                throw std::runtime_error("walk_forward: non-finite prediction");
            state.push(p);
            if (std::find(plan.report_steps.begin(), plan.report_steps.end(), k) !=
                plan.report_steps.end()) {
                preds.push_back(p);
                acts.push_back(ctx.norm.transform(series.values[idx]));
            }
        }
        run.origins.push_back(series.interval_start(s));
        run.predictions.push_back(std::move(preds));
        run.actuals.push_back(std::move(acts));
    }
    if (run.origins.empty())
        throw std::runtime_error("walk_forward: no forecast origins in test range");
    return run;
}

// Walk a whole-horizon model (ARIMA / persistence). The model sees the
// normalized history up to each origin and returns plan.depth steps.
inline ForecastRun walk_forward(VectorForecaster& model,
                                const EnergySeries& series,
                                std::size_t test_begin, const HorizonPlan& plan,
                                const Normalizer& norm, City city,
                                const std::string& model_name) {
    detail::check_walk_inputs(series, test_begin, plan, 1);
    ForecastRun run{city, model_name, series.level, plan.label, series.entity_id};

    std::vector<double> history;
    history.reserve(series.values.size());
    for (std::size_t i = 0; i < test_begin; ++i)
        history.push_back(norm.transform(series.values[i]));

    for (std::size_t s = test_begin; s + plan.depth <= series.values.size();
         s += plan.stride) {
        while (history.size() < s) history.push_back(norm.transform(series.values[history.size()]));
        auto f = model.forecast(history, plan.depth);
        if (static_cast<int>(f.size()) != plan.depth)
            throw std::runtime_error("walk_forward: model returned wrong horizon");
        std::vector<double> preds, acts;
        for (int k : plan.report_steps) {
            if (!std::isfinite(f[k - 1]))
                throw std::runtime_error("walk_forward: non-finite prediction");
            preds.push_back(f[k - 1]);
            acts.push_back(norm.transform(series.values[s + k - 1]));
        }
        run.origins.push_back(series.interval_start(s));
        run.predictions.push_back(std::move(preds));
        run.actuals.push_back(std::move(acts));
    }
    if (run.origins.empty())
        throw std::runtime_error("walk_forward: no forecast origins in test range");
    return run;
}

// --- persistence ------------------------------------------------------------

// Columns: city,model,level,plan,entity_id,origin_utc,step,prediction,actual.
inline void write_runs_csv(const std::vector<ForecastRun>& runs, std::ostream& os,
                           bool header = true) {
    if (header)
        os << "city,model,level,plan,entity_id,origin_utc,step,prediction,actual\n";
    for (const auto& run : runs) {
        const auto plan = plan_for(run.plan);
        for (std::size_t o = 0; o < run.origins.size(); ++o)
            for (std::size_t j = 0; j < plan.report_steps.size(); ++j) {
                std::vector<std::string> row{
                    city_name(run.city),
                    run.model,
                    level_name(run.level),
                    plan_name(run.plan),
                    run.entity_id,
                    format_rfc3339(run.origins[o]),
                    std::to_string(plan.report_steps[j]),
                    format_double(run.predictions[o][j], 17),
                    format_double(run.actuals[o][j], 17)};
                os << csv_join(row);
            }
    }
}

struct RunRow {
    City city;
    std::string model;
    Level level;
    Plan plan;
    std::string entity_id;
    Instant origin;
    int step;
    double prediction;
    double actual;
};

inline std::vector<RunRow> read_runs_csv(const std::string& path) {
    CsvReader r(path);
    int ci = r.column("city"), mi = r.column("model"), li = r.column("level"),
        pi = r.column("plan"), ei = r.column("entity_id"),
        oi = r.column("origin_utc"), si = r.column("step"),
        pri = r.column("prediction"), ai = r.column("actual");
    std::vector<RunRow> rows;
    std::vector<std::string> f;
    while (r.next(f)) {
        RunRow row;
        row.city = city_from_name(f[ci]);
        row.model = f[mi];
        row.level = level_from_name(f[li]);
        row.plan = plan_from_name(f[pi]);
        row.entity_id = f[ei];
        auto origin = parse_rfc3339(f[oi]);
        if (!origin) throw std::runtime_error("runs csv: bad origin " + f[oi]);
        row.origin = *origin;
        row.step = std::stoi(f[si]);
        row.prediction = std::stod(f[pri]);
        row.actual = std::stod(f[ai]);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace evload
