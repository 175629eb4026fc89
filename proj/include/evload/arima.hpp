#pragma once

// Per-station univariate ARIMA: conditional-sum-of-squares estimation with a
// derivative-free minimizer, AIC selection over the restricted (p,d,q) grid,
// capped training windows, stationarity/invertibility checks and a naive
// persistence fallback when estimation fails.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "evload/timeseries.hpp"

namespace evload {

struct ArimaOrder {
    int p = 0, d = 0, q = 0;

    bool operator==(const ArimaOrder&) const = default;
};

// The restricted grid: p,q in {0,1,2}, d in {0,1}; 18 combinations in
// lexicographic (p,d,q) order.
inline std::vector<ArimaOrder> arima_grid() {
    std::vector<ArimaOrder> g;
    for (int p = 0; p <= 2; ++p)
        for (int d = 0; d <= 1; ++d)
            for (int q = 0; q <= 2; ++q) g.push_back({p, d, q});
    return g;
}

inline int window_cap(Resolution r) {
    switch (r) {
        case Resolution::TenMin: return 2048;
        case Resolution::Hourly: return 1536;
        default: return 730;
    }
}

struct ArimaModel {
    ArimaOrder order;
    double intercept = 0.0;
    std::vector<double> ar;  // phi_1..phi_p
    std::vector<double> ma;  // theta_1..theta_q
    double sigma2 = 0.0;
    double aic = 0.0;
    std::size_t fitted_on = 0;  // points used after capping/differencing
};

inline std::vector<double> difference(std::span<const double> x, int d) {
    if (d == 0) return {x.begin(), x.end()};
    if (d != 1) throw std::runtime_error("difference: d must be 0 or 1");
    if (x.size() < 2) throw std::runtime_error("difference: series too short");
    std::vector<double> out(x.size() - 1);
    for (std::size_t i = 1; i < x.size(); ++i) out[i - 1] = x[i] - x[i - 1];
    return out;
}

// Roots of 1 + c1 z + c2 z^2 all strictly outside the unit circle.
// Degree <= 2 in this grid, so closed form suffices.
inline bool roots_outside_unit_circle(std::span<const double> coeffs) {
    double c1 = coeffs.size() > 0 ? coeffs[0] : 0.0;
    double c2 = coeffs.size() > 1 ? coeffs[1] : 0.0;
    if (std::abs(c2) < 1e-12) {
        if (std::abs(c1) < 1e-12) return true;  // constant polynomial
        return std::abs(1.0 / c1) > 1.0;
    }
    std::complex<double> disc = std::sqrt(std::complex<double>(c1 * c1 - 4.0 * c2, 0.0));
    std::complex<double> r1 = (-c1 + disc) / (2.0 * c2);
    std::complex<double> r2 = (-c1 - disc) / (2.0 * c2);
    return std::abs(r1) > 1.0 && std::abs(r2) > 1.0;
}

inline bool is_stationary(const ArimaModel& m) {
    std::vector<double> c;  // 1 - phi1 z - phi2 z^2
    for (double phi : m.ar) c.push_back(-phi);
    return roots_outside_unit_circle(c);
}

inline bool is_invertible(const ArimaModel& m) {
    return roots_outside_unit_circle(m.ma);  // 1 + theta1 z + theta2 z^2
}

namespace detail {

// Conditional sum of squared one-step residuals. Pre-sample residuals are
// zero and pre-sample observations equal the sample mean.
inline double css(std::span<const double> y, int p, int q,
                  std::span<const double> params, std::vector<double>* resid_out = nullptr) {
    const double c = params[0];
    const double* phi = params.data() + 1;
    const double* theta = params.data() + 1 + p;
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= std::max<std::size_t>(y.size(), 1);
    std::vector<double> e(y.size());
    double ss = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
        double pred = c;
        for (int i = 1; i <= p; ++i)
            pred += phi[i - 1] * (t >= static_cast<std::size_t>(i) ? y[t - i] : mean);
        for (int j = 1; j <= q; ++j)
            pred += theta[j - 1] * (t >= static_cast<std::size_t>(j) ? e[t - j] : 0.0);
        e[t] = y[t] - pred;
        ss += e[t] * e[t];
    }
    if (resid_out) *resid_out = std::move(e);
    return ss;
}

struct NelderMeadResult {
    std::vector<double> x;
    double fx = 0.0;
    bool converged = false;
};

inline NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                                    std::vector<double> start, int max_iter = 500,
                                    double step_tol = 1e-8) {
    const std::size_t n = start.size();
    std::vector<std::vector<double>> simplex(n + 1, start);
    for (std::size_t i = 0; i < n; ++i)
        simplex[i + 1][i] += (std::abs(start[i]) > 1e-4 ? 0.05 * std::abs(start[i]) : 0.1);
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fv[i] = f(simplex[i]);

    auto order = [&]() {
        std::vector<std::size_t> idx(n + 1);
        for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
        std::vector<std::vector<double>> s2;
        std::vector<double> f2;
        for (auto i : idx) {
            s2.push_back(simplex[i]);
            f2.push_back(fv[i]);
        }
        simplex = std::move(s2);
        fv = std::move(f2);
    };

    NelderMeadResult res;
    for (int iter = 0; iter < max_iter; ++iter) {
        order();
        double diameter = 0.0;
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                diameter = std::max(diameter, std::abs(simplex[i][j] - simplex[0][j]));
        if (diameter < step_tol) {
            res.converged = true;
            break;
        }
        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / n;

        auto point = [&](double alpha) {
            std::vector<double> x(n);
            for (std::size_t j = 0; j < n; ++j)
                x[j] = centroid[j] + alpha * (simplex[n][j] - centroid[j]);
            return x;
        };
        auto xr = point(-1.0);
        double fr = f(xr);
        if (fr < fv[0]) {
            auto xe = point(-2.0);
            double fe = f(xe);
            if (fe < fr) {
                simplex[n] = xe;
                fv[n] = fe;
            } else {
                simplex[n] = xr;
                fv[n] = fr;
            }
        } else if (fr < fv[n - 1]) {
            simplex[n] = xr;
            fv[n] = fr;
        } else {
            auto xc = point(fr < fv[n] ? -0.5 : 0.5);
            double fc = f(xc);
            if (fc < std::min(fr, fv[n])) {
                simplex[n] = xc;
                fv[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t j = 0; j < n; ++j)
                        simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
                    fv[i] = f(simplex[i]);
                }
            }
        }
    }
    order();
    res.x = simplex[0];
    res.fx = fv[0];
    return res;
}

}  // namespace detail

// Fit (c, phi, theta) on an already-differenced, standardized series.
// Returns nullopt on optimizer non-convergence or root-check violation.
// extra_starts allows warm starts from nested fits.
inline std::optional<ArimaModel> css_fit(
    std::span<const double> y, ArimaOrder order,
    const std::vector<std::vector<double>>& extra_starts = {}) {
    const int p = order.p, q = order.q;
    if (y.size() < static_cast<std::size_t>(10 * (p + q + 1)))
        return std::nullopt;  // minimum-length heuristic

    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());

    auto objective = [&](std::span<const double> params) {
        return detail::css(y, p, q, params);
    };

    const std::size_t dim = static_cast<std::size_t>(1 + p + q);
    std::vector<std::vector<double>> starts;
    std::vector<double> origin(dim, 0.0);
    origin[0] = mean;
    starts.push_back(origin);
    for (const auto& s : extra_starts)
        if (s.size() == dim) starts.push_back(s);

    std::optional<detail::NelderMeadResult> best;
    for (const auto& s : starts) {
        auto r = detail::nelder_mead(objective, s);
        if (!r.converged) continue;
        if (!best || r.fx < best->fx) best = std::move(r);
    }
    if (!best) return std::nullopt;

    ArimaModel m;
    m.order = order;
    m.intercept = best->x[0];
    m.ar.assign(best->x.begin() + 1, best->x.begin() + 1 + p);
    m.ma.assign(best->x.begin() + 1 + p, best->x.end());
    m.fitted_on = y.size();
    const double n_eff = static_cast<double>(y.size());
    m.sigma2 = best->fx / n_eff;
    if (!(m.sigma2 > 0.0)) return std::nullopt;
    if (!is_stationary(m) || !is_invertible(m)) return std::nullopt;
    const double k = static_cast<double>(p + q + 1 + 1);  // + intercept + variance
    m.aic = n_eff * std::log(m.sigma2) + 2.0 * k;
    return m;
}

// Fit all grid orders on the (possibly differenced) series and return the
// lowest-AIC model. Ties break toward smaller p+q, then smaller d, then
// lexicographic (p,d,q). Larger orders are warm-started from nested fits.
inline std::optional<ArimaModel> select_order(std::span<const double> x) {
    if (x.empty()) return std::nullopt;
    std::optional<ArimaModel> best;
    std::vector<std::pair<ArimaOrder, std::vector<double>>> fitted_params;
    for (const ArimaOrder& o : arima_grid()) {
        std::vector<double> y;
        try {
            y = difference(x, o.d);
        } catch (const std::runtime_error&) {
            continue;
        }
        std::vector<std::vector<double>> warm;
        for (const auto& [fo, params] : fitted_params) {
            if (fo.d != o.d) continue;
            if ((fo.p == o.p && fo.q + 1 == o.q) || (fo.q == o.q && fo.p + 1 == o.p)) {
                // pad the nested parameter vector with a zero coefficient
                std::vector<double> w(1 + o.p + o.q, 0.0);
                w[0] = params[0];
                for (int i = 0; i < fo.p; ++i) w[1 + i] = params[1 + i];
                for (int j = 0; j < fo.q; ++j) w[1 + o.p + j] = params[1 + fo.p + j];
                warm.push_back(std::move(w));
            }
        }
        auto m = css_fit(y, o, warm);
        if (!m) continue;
        std::vector<double> params{m->intercept};
        params.insert(params.end(), m->ar.begin(), m->ar.end());
        params.insert(params.end(), m->ma.begin(), m->ma.end());
        fitted_params.emplace_back(o, std::move(params));
        auto better = [](const ArimaModel& a, const ArimaModel& b) {
            if (a.aic != b.aic) return a.aic < b.aic;
            int ka = a.order.p + a.order.q, kb = b.order.p + b.order.q;
            if (ka != kb) return ka < kb;
            if (a.order.d != b.order.d) return a.order.d < b.order.d;
            return std::tie(a.order.p, a.order.d, a.order.q) <
                   std::tie(b.order.p, b.order.d, b.order.q);
        };
        if (!best || better(*m, *best)) best = std::move(m);
    }
    return best;
}

// Iterated conditional-expectation forecast from a standardized history.
// MA error terms use the in-sample residual tail, then zeros; d=1 forecasts
// are integrated back to levels.
inline std::vector<double> forecast(const ArimaModel& m, std::span<const double> history,
                                    int h) {
    const int p = m.order.p, q = m.order.q, d = m.order.d;
    if (history.size() < static_cast<std::size_t>(std::max({p, q, d})))
        throw std::runtime_error("forecast: history too short");
    std::vector<double> w = difference(history, d);

    std::vector<double> params{m.intercept};
    params.insert(params.end(), m.ar.begin(), m.ar.end());
    params.insert(params.end(), m.ma.begin(), m.ma.end());
    std::vector<double> resid;
    detail::css(w, p, q, params, &resid);

    const std::size_t T = w.size();
    std::vector<double> extended = w;  // observed then forecast differences
    std::vector<double> out;
    for (int k = 1; k <= h; ++k) {
        double pred = m.intercept;
        const std::size_t t = T + k - 1;
        for (int i = 1; i <= p; ++i) {
            std::size_t ti = t - i;
            double val = ti < T ? w[ti] : extended[ti];
            pred += m.ar[i - 1] * val;
        }
        for (int j = 1; j <= q; ++j) {
            std::size_t tj = t - j;
            pred += m.ma[j - 1] * (tj < T ? resid[tj] : 0.0);
        }
        extended.push_back(pred);
        out.push_back(pred);
    }
    if (d == 1) {
        double level = history.back();
        for (double& v : out) {
            level += v;
            v = level;
        }
    }
    return out;
}

inline std::vector<double> persistence_fallback(std::span<const double> history, int h) {
    if (history.empty()) throw std::runtime_error("persistence: empty history");
    return std::vector<double>(static_cast<std::size_t>(h), history.back());
}

// One fitted per-station record, including the fallback flag, for audit.
struct StationArima {
    std::string entity_id;
    bool fallback = false;
    ArimaModel model;  // meaningful only when !fallback
};

// Fit on the capped tail of the standardized training series.
inline StationArima fit_station_arima(const std::string& entity_id,
                                      std::span<const double> train_standardized,
                                      Resolution resolution) {
    const std::size_t cap = static_cast<std::size_t>(window_cap(resolution));
    std::span<const double> tail = train_standardized.size() > cap
                                       ? train_standardized.last(cap)
                                       : train_standardized;
    StationArima out;
    out.entity_id = entity_id;
    auto m = select_order(tail);
    if (m)
        out.model = *m;
    else
        out.fallback = true;
    return out;
}

inline std::string arima_record(const StationArima& s) {
    std::ostringstream os;
    os.precision(12);
    os << s.entity_id << " ";
    if (s.fallback) {
        os << "fallback";
    } else {
        os << "(" << s.model.order.p << "," << s.model.order.d << "," << s.model.order.q
           << ") c=" << s.model.intercept;
        for (std::size_t i = 0; i < s.model.ar.size(); ++i)
            os << " phi" << i + 1 << "=" << s.model.ar[i];
        for (std::size_t i = 0; i < s.model.ma.size(); ++i)
            os << " theta" << i + 1 << "=" << s.model.ma[i];
        os << " sigma2=" << s.model.sigma2 << " aic=" << s.model.aic
           << " n=" << s.model.fitted_on;
    }
    return os.str();
}

}  // namespace evload
