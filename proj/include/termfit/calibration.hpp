#pragma once

/**
 * @file calibration.hpp
 * @brief Per-day estimation: lambda grid search under OLS, condition
 *        number check, and re-estimation via raise (and ridge for
 *        comparison) only when the design is ill conditioned.
 *
 * Step 1  grid-search the shape parameter(s) for the lowest OLS SSE.
 * Step 2  compute the condition number at the optimum.
 * Step 3  if it exceeds the threshold, find the smallest factor k that
 *         pulls the recomputed condition number below the threshold and
 *         re-estimate; otherwise every method reports the OLS fit.
 */

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "termfit/curve_basis.hpp"
#include "termfit/diagnostics.hpp"
#include "termfit/errors.hpp"
#include "termfit/market_data.hpp"
#include "termfit/regression.hpp"

namespace termfit {

struct CalibrationConfig {
    Model model = Model::NS;
    double grid_min = 0.05;
    double grid_max = 10.0;
    double grid_step = 0.05;
    double cn_threshold = 20.0;
    double k_tolerance = 1e-6;
    double k_max = 1e4;
    std::vector<Method> methods{Method::Ols, Method::Ridge, Method::Raise};
    RateUnit rate_unit = RateUnit::Decimal;
    unsigned threads = 1;  // day-level parallelism; output is order independent

    void validate() const {
        if (!(grid_min > 0.0)) throw ConfigError("grid_min must be positive");
        if (!(grid_step > 0.0)) throw ConfigError("grid_step must be positive");
        if (grid_max < grid_min) throw ConfigError("grid_max must be >= grid_min");
        if (!(cn_threshold > 1.0)) throw ConfigError("cn_threshold must exceed 1");
        if (!(k_tolerance > 0.0) || !(k_max > 0.0)) throw ConfigError("bad k search bounds");
        if (methods.empty()) throw ConfigError("at least one method required");
    }

    bool has_method(Method m) const {
        return std::find(methods.begin(), methods.end(), m) != methods.end();
    }

    std::vector<double> grid() const {
        std::vector<double> values;
        const int steps = static_cast<int>(std::floor((grid_max - grid_min) / grid_step + 1e-9));
        values.reserve(steps + 1);
        for (int i = 0; i <= steps; ++i) values.push_back(grid_min + i * grid_step);
        return values;
    }
};

/// Result of one k search.
struct FactorSearch {
    double k = 0.0;
    bool mitigated = true;  // false when even k_max leaves CN above threshold
};

/// Everything estimated for one observation date.
struct DayEstimate {
    std::string date;
    ShapeParams shape;
    std::map<Method, FitResult> fits;
    std::map<Method, double> long_rate;   // beta0
    std::map<Method, double> short_rate;  // beta0 + beta1
    CollinearityReport report;            // at the grid optimum, OLS design
    std::optional<int> raised_column;
    bool mitigation_ran = false;    // condition number exceeded the threshold
    bool ridge_mitigated = true;
    bool raise_mitigated = true;
    bool grid_boundary = false;  // optimum sits on grid_max
    std::optional<double> holdout_30y;
    std::optional<std::string> error;  // set when the day failed entirely
};

/// Panel-level summaries over the successful days.
struct PanelAggregates {
    std::map<Method, double> mean_cn;
    std::map<Method, double> mean_k;  // over days where mitigation ran
    int mitigated_days = 0;
    std::vector<double> mean_vif;  // per non-intercept column
    std::vector<double> mean_cv;
    int days_ok = 0;
    int days_failed = 0;
    int boundary_days = 0;
};

struct EstimationSeries {
    CalibrationConfig config;
    std::vector<DayEstimate> days;  // date order, failed days marked
    PanelAggregates aggregates;
};

/// Step 1: exhaustive search of the shape grid for the lowest OLS SSE.
/// NS scans every lambda; SV scans ordered pairs lambda1 < lambda2.
/// Ties break toward the smaller lambda (then smaller lambda2).
inline std::pair<ShapeParams, FitResult> grid_search_shape(const CurveSnapshot& snapshot,
                                                           const CalibrationConfig& config) {
    config.validate();
    const std::vector<double> taus = snapshot.maturities();
    const Eigen::VectorXd y = snapshot.rates();
    const std::vector<double> grid = config.grid();

    double best_sse = std::numeric_limits<double>::infinity();
    std::optional<ShapeParams> best_shape;

    // two SSEs this close are one exact fit seen through rounding noise;
    // the earlier (smaller-lambda) grid point wins such ties
    const double tie_band = 1e-24 * y.squaredNorm();

    auto consider = [&](const ShapeParams& shape) {
        const DesignMatrix X = build_design_matrix(taus, shape);
        try {
            const auto ls = detail::qr_least_squares(X.values, y);
            if (ls.sse < best_sse - tie_band) {
                best_sse = ls.sse;
                best_shape = shape;
            }
        } catch (const SingularDesignError&) {
            // skip rank-deficient grid points
        }
    };

    if (config.model == Model::NS) {
        for (double lambda : grid) consider(ShapeParams::ns(lambda));
    } else {
        for (std::size_t a = 0; a < grid.size(); ++a)
            for (std::size_t b = a + 1; b < grid.size(); ++b)
                consider(ShapeParams::sv(grid[a], grid[b]));
    }

    if (!best_shape)
        throw CalibrationError("no usable grid point for " + snapshot.date +
                               " (all designs rank deficient)");
    const DesignMatrix X = build_design_matrix(taus, *best_shape);
    return {*best_shape, ols_fit(X, y)};
}

namespace detail {

/// Smallest k in [0, k_max] with cn_at(k) <= threshold, located by
/// bracket doubling then bisection. cn_at must be nonincreasing in k.
template <typename CnAt>
FactorSearch find_smallest_factor(CnAt&& cn_at, double threshold, double k_tolerance,
                                  double k_max) {
    if (cn_at(0.0) <= threshold) return {0.0, true};

    double lo = 0.0;
    double hi = 1.0;
    while (hi < k_max && cn_at(hi) > threshold) {
        lo = hi;
        hi *= 2.0;
    }
    if (hi >= k_max) {
        hi = k_max;
        if (cn_at(hi) > threshold) return {k_max, false};
    }
    while (hi - lo > k_tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (cn_at(mid) <= threshold) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return {hi, true};
}

}  // namespace detail

/// Step 3 (raise): smallest k whose raised design has CN at or below the
/// threshold. Throws UnmitigableCollinearityError when column i is an
/// exact linear combination of the others (raising cannot move it).
inline FactorSearch select_raise_factor(const Eigen::MatrixXd& X, int i, double threshold,
                                        double k_tolerance = 1e-6, double k_max = 1e4) {
    if (condition_number(X) <= threshold) return {0.0, true};
    const RaiseTransform rt = raise_matrix(X, i, 0.0);
    if (!rt.raisable)
        throw UnmitigableCollinearityError("column " + std::to_string(i) +
                                           " is exactly dependent; raising has no effect");
    Eigen::MatrixXd work = X;
    auto cn_at = [&](double k) {
        work.col(i) = X.col(i) + k * rt.residuals;
        return condition_number(work);
    };
    return detail::find_smallest_factor(cn_at, threshold, k_tolerance, k_max);
}

inline FactorSearch select_raise_factor(const DesignMatrix& X, int i, double threshold,
                                        double k_tolerance = 1e-6, double k_max = 1e4) {
    return select_raise_factor(X.values, i, threshold, k_tolerance, k_max);
}

/// Step 3 (ridge comparator): smallest k with ridge CN at or below the
/// threshold, under the same search rule as the raise factor.
inline FactorSearch select_ridge_factor(const Eigen::MatrixXd& X, double threshold,
                                        double k_tolerance = 1e-6, double k_max = 1e4) {
    const Eigen::VectorXd s = detail::scaled_singular_values(X);
    const double xi_max = s(0) * s(0);
    const double xi_min = s(s.size() - 1) * s(s.size() - 1);
    auto cn_at = [&](double k) {
        const double den = xi_min + k;
        if (den <= kRankTolerance * kRankTolerance * (xi_max + k))
            return std::numeric_limits<double>::infinity();
        return std::sqrt((xi_max + k) / den);
    };
    return detail::find_smallest_factor(cn_at, threshold, k_tolerance, k_max);
}

inline FactorSearch select_ridge_factor(const DesignMatrix& X, double threshold,
                                        double k_tolerance = 1e-6, double k_max = 1e4) {
    return select_ridge_factor(X.values, threshold, k_tolerance, k_max);
}

/// Runs the full three-step procedure on one snapshot.
inline DayEstimate estimate_day(const CurveSnapshot& snapshot, const CalibrationConfig& config) {
    config.validate();
    auto [shape, ols] = grid_search_shape(snapshot, config);

    const std::vector<double> taus = snapshot.maturities();
    const Eigen::VectorXd y = snapshot.rates();
    const DesignMatrix X = build_design_matrix(taus, shape);

    DayEstimate day;
    day.date = snapshot.date;
    day.shape = shape;
    day.holdout_30y = snapshot.holdout_30y;
    day.report = analyze_collinearity(X);

    const double half_step = 0.5 * config.grid_step;
    day.grid_boundary = shape.lambda1 > config.grid_max - half_step ||
                        (shape.lambda2 && *shape.lambda2 > config.grid_max - half_step);

    day.mitigation_ran = day.report.cn > config.cn_threshold;

    for (Method m : config.methods) {
        FitResult fit;
        if (m == Method::Ols || !day.mitigation_ran) {
            fit = ols;
            fit.method = m;  // below the threshold every method reports the OLS fit
        } else if (m == Method::Ridge) {
            const FactorSearch fs = select_ridge_factor(X.values, config.cn_threshold,
                                                        config.k_tolerance, config.k_max);
            day.ridge_mitigated = fs.mitigated;
            fit = ridge_fit(X, y, fs.k);
        } else {
            const int column = select_raise_variable(X.values);
            const FactorSearch fs = select_raise_factor(X.values, column, config.cn_threshold,
                                                        config.k_tolerance, config.k_max);
            day.raise_mitigated = fs.mitigated;
            day.raised_column = column;
            fit = raise_fit(X, y, column, fs.k);
        }
        day.long_rate[m] = fit.beta(0);
        day.short_rate[m] = fit.beta(0) + fit.beta(1);
        day.fits.emplace(m, std::move(fit));
    }
    return day;
}

/// Runs estimate_day over a panel (optionally across threads; the output
/// is identical to sequential evaluation) and aggregates diagnostics.
/// Failed days are kept in place with an error marker.
inline EstimationSeries estimate_series(const std::vector<CurveSnapshot>& panel,
                                        const CalibrationConfig& config) {
    config.validate();
    if (panel.empty()) throw CalibrationError("empty panel");

    std::vector<const CurveSnapshot*> ordered;
    ordered.reserve(panel.size());
    for (const CurveSnapshot& s : panel) ordered.push_back(&s);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const CurveSnapshot* a, const CurveSnapshot* b) { return a->date < b->date; });

    EstimationSeries series;
    series.config = config;
    series.days.resize(ordered.size());

    auto run_day = [&](std::size_t i) {
        try {
            series.days[i] = estimate_day(*ordered[i], config);
        } catch (const Error& e) {
            DayEstimate failed;
            failed.date = ordered[i]->date;
            failed.holdout_30y = ordered[i]->holdout_30y;
            failed.error = e.what();
            series.days[i] = std::move(failed);
        }
    };

    const unsigned workers = std::max(1u, config.threads);
    if (workers == 1 || ordered.size() < 2) {
        for (std::size_t i = 0; i < ordered.size(); ++i) run_day(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < ordered.size(); i = next++) run_day(i);
            });
        for (auto& t : pool) t.join();
    }

    // aggregates over the successful days
    PanelAggregates& agg = series.aggregates;
    std::map<Method, double> k_sum;
    for (const DayEstimate& day : series.days) {
        if (day.error) {
            ++agg.days_failed;
            continue;
        }
        ++agg.days_ok;
        if (day.grid_boundary) ++agg.boundary_days;
        if (day.mitigation_ran) ++agg.mitigated_days;
        for (const auto& [m, fit] : day.fits) {
            agg.mean_cn[m] += fit.cn;
            if (day.mitigation_ran) k_sum[m] += fit.k;
        }
        if (agg.mean_vif.empty()) {
            agg.mean_vif.assign(day.report.vif.size(), 0.0);
            agg.mean_cv.assign(day.report.cv.size(), 0.0);
        }
        for (std::size_t j = 0; j < day.report.vif.size(); ++j) agg.mean_vif[j] += day.report.vif[j];
        for (std::size_t j = 0; j < day.report.cv.size(); ++j) agg.mean_cv[j] += day.report.cv[j];
    }
    if (agg.days_ok > 0) {
        for (auto& [m, total] : agg.mean_cn) total /= agg.days_ok;
        for (double& v : agg.mean_vif) v /= agg.days_ok;
        for (double& v : agg.mean_cv) v /= agg.days_ok;
    }
    if (agg.mitigated_days > 0)
        for (const auto& [m, total] : k_sum) agg.mean_k[m] = total / agg.mitigated_days;
    return series;
}

}  // namespace termfit
