#pragma once

/**
 * @file evaluation.hpp
 * @brief Panel-level metrics: descriptive statistics, in-sample MSE,
 *        out-of-sample 30-year MAE, and Newey-West-corrected pairwise
 *        method comparisons.
 *
 * MSE is the mean over days of the per-day SSE; MAE is the mean absolute
 * 30-year extrapolation error against the held-out IRS quote. Both are
 * reported in percent units (percent^2 for MSE). Pairwise differences of
 * per-day absolute errors are tested with a t-statistic whose variance
 * uses the Bartlett-weighted HAC estimator.
 */

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "termfit/calibration.hpp"
#include "termfit/errors.hpp"
#include "termfit/market_data.hpp"

namespace termfit {

/// Two-sided 5% critical value of the standard normal.
inline constexpr double kCritical5pc = 1.959963984540054;

/// Sample statistics of the input rates at one maturity, in percent.
struct DescriptiveRow {
    std::string label;
    double tau = 0.0;
    double mean = 0.0;
    double stddev = 0.0;  // sample (n-1); 0 when n == 1
    double min = 0.0;
    double max = 0.0;
    int n = 0;
};

inline std::string tenor_label(double tau) {
    if (tau < 1.0 - 1e-9) {
        const int months = static_cast<int>(std::lround(tau * 12.0));
        return std::to_string(months) + (months == 1 ? " month" : " months");
    }
    const int years = static_cast<int>(std::lround(tau));
    return std::to_string(years) + (years == 1 ? " year" : " years");
}

/// Mean / sample std / min / max of the observed rates per requested
/// maturity across the panel, in percent. Maturities absent from every
/// snapshot are omitted.
inline std::vector<DescriptiveRow> descriptive_stats(const std::vector<CurveSnapshot>& panel,
                                                     const std::vector<double>& maturities) {
    if (panel.empty()) throw UndefinedMetricError("descriptive stats need a nonempty panel");
    std::vector<DescriptiveRow> rows;
    for (double tau : maturities) {
        std::vector<double> values;
        for (const CurveSnapshot& snap : panel)
            for (const auto& [t, r] : snap.points)
                if (std::abs(t - tau) < 1e-9) values.push_back(r * 100.0);
        if (values.empty()) continue;  // absent everywhere

        DescriptiveRow row;
        row.label = tenor_label(tau);
        row.tau = tau;
        row.n = static_cast<int>(values.size());
        double sum = 0.0;
        row.min = values.front();
        row.max = values.front();
        for (double v : values) {
            sum += v;
            row.min = std::min(row.min, v);
            row.max = std::max(row.max, v);
        }
        row.mean = sum / row.n;
        if (row.n > 1) {
            double ss = 0.0;
            for (double v : values) ss += (v - row.mean) * (v - row.mean);
            row.stddev = std::sqrt(ss / (row.n - 1));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Mean over days of the per-day SSE for one method, in percent^2.
inline double in_sample_mse(const EstimationSeries& series, Method method) {
    double total = 0.0;
    int count = 0;
    for (const DayEstimate& day : series.days) {
        if (day.error) continue;
        const auto it = day.fits.find(method);
        if (it == day.fits.end()) continue;
        total += it->second.sse * 1e4;  // decimal^2 -> percent^2
        ++count;
    }
    if (count == 0) throw UndefinedMetricError("no fitted days for MSE");
    return total / count;
}

/// Per-day absolute 30-year extrapolation errors in percent, over days
/// that have both a holdout quote and a successful fit, in date order.
inline std::vector<double> holdout_abs_errors(const EstimationSeries& series, Method method) {
    std::vector<double> errors;
    for (const DayEstimate& day : series.days) {
        if (day.error || !day.holdout_30y) continue;
        const auto it = day.fits.find(method);
        if (it == day.fits.end()) continue;
        const double predicted = swap_rate_from_curve(it->second, day.shape, 30);
        errors.push_back(std::abs(*day.holdout_30y - predicted) * 100.0);
    }
    return errors;
}

/// Mean absolute 30-year swap error in percent.
inline double out_of_sample_mae(const EstimationSeries& series, Method method) {
    const std::vector<double> errors = holdout_abs_errors(series, method);
    if (errors.empty()) throw UndefinedMetricError("no holdout days for MAE");
    double total = 0.0;
    for (double e : errors) total += e;
    return total / static_cast<double>(errors.size());
}

struct TTestResult {
    double alpha = 0.0;  // mean of the difference series
    double se = 0.0;     // HAC standard error of the mean
    double t = 0.0;
    int lags = 0;
    bool significant = false;
};

/// Newey-West automatic lag rule floor(4 (m/100)^{2/9}).
inline int newey_west_auto_lags(std::size_t m) {
    return static_cast<int>(std::floor(4.0 * std::pow(m / 100.0, 2.0 / 9.0)));
}

/// One-sample t-test of mean(diff) = 0 with Bartlett-weighted HAC
/// variance. With L = 0 this reduces to the classical one-sample t.
/// Throws DegenerateTestError when the variance estimate is zero.
inline TTestResult newey_west_ttest(const std::vector<double>& diff,
                                    std::optional<int> lags = std::nullopt) {
    const std::size_t m = diff.size();
    if (m < 2) throw InsufficientDataError("t-test needs at least two observations");

    int lag = lags ? *lags : newey_west_auto_lags(m);
    lag = std::min<int>(lag, static_cast<int>(m) - 1);
    if (lag < 0) throw DomainError("lag count must be nonnegative");

    double mean = 0.0;
    for (double d : diff) mean += d;
    mean /= static_cast<double>(m);

    std::vector<double> e(m);
    for (std::size_t t = 0; t < m; ++t) e[t] = diff[t] - mean;

    double meat = 0.0;
    for (double v : e) meat += v * v;
    for (int l = 1; l <= lag; ++l) {
        double gamma = 0.0;
        for (std::size_t t = static_cast<std::size_t>(l); t < m; ++t) gamma += e[t] * e[t - l];
        meat += 2.0 * (1.0 - static_cast<double>(l) / (lag + 1)) * gamma;
    }

    // m/(m-1) small-sample correction; at L = 0 the variance becomes s^2/m
    const double variance = meat / (static_cast<double>(m) * (m - 1));
    if (variance <= 0.0)
        throw DegenerateTestError("difference series has no sampling variability");

    TTestResult result;
    result.alpha = mean;
    result.se = std::sqrt(variance);
    result.t = mean / result.se;
    result.lags = lag;
    result.significant = std::abs(result.t) > kCritical5pc;
    return result;
}

/// One pairwise MAE comparison line.
struct ComparisonLine {
    std::string label;  // e.g. "ols-raise"
    double alpha = 0.0;
    double t = 0.0;
    int lags = 0;
    bool significant = false;
    bool degenerate = false;  // methods identical on every day
};

/// Per-model evaluation block.
struct ModelReport {
    Model model = Model::NS;
    std::map<Method, double> mse;                 // percent^2
    std::map<Method, double> mae;                 // percent; empty if no holdouts
    std::vector<ComparisonLine> ttests;           // empty if MAE unavailable
    PanelAggregates aggregates;
    int days = 0;
    int holdout_days = 0;
};

/// All pairwise MAE tests for one estimated series. Pairs follow
/// alpha1 = ols - raise, alpha2 = ridge - raise, alpha3 = ols - ridge.
inline std::vector<ComparisonLine> method_comparison(const EstimationSeries& series,
                                                     std::optional<int> lags = std::nullopt) {
    const std::vector<double> e_ols = holdout_abs_errors(series, Method::Ols);
    const std::vector<double> e_ridge = holdout_abs_errors(series, Method::Ridge);
    const std::vector<double> e_raise = holdout_abs_errors(series, Method::Raise);
    if (e_ols.size() < 2 || e_ols.size() != e_ridge.size() || e_ols.size() != e_raise.size())
        throw UndefinedMetricError("method comparison needs >= 2 common holdout days");

    auto line = [&](const char* label, const std::vector<double>& a,
                    const std::vector<double>& b) {
        std::vector<double> diff(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
        ComparisonLine out;
        out.label = label;
        try {
            const TTestResult tt = newey_west_ttest(diff, lags);
            out.alpha = tt.alpha;
            out.t = tt.t;
            out.lags = tt.lags;
            out.significant = tt.significant;
        } catch (const DegenerateTestError&) {
            double mean = 0.0;
            for (double d : diff) mean += d;
            out.alpha = mean / static_cast<double>(diff.size());
            out.degenerate = true;  // no sampling variability, "no difference"
        }
        return out;
    };

    return {line("ols-raise", e_ols, e_raise), line("ridge-raise", e_ridge, e_raise),
            line("ols-ridge", e_ols, e_ridge)};
}

/// Full evaluation report over one or more estimated series.
struct EvaluationReport {
    std::vector<DescriptiveRow> descriptive;
    std::vector<ModelReport> models;
    int panel_days = 0;
};

inline ModelReport evaluate_series(const EstimationSeries& series,
                                   std::optional<int> lags = std::nullopt) {
    ModelReport report;
    report.model = series.config.model;
    report.aggregates = series.aggregates;
    report.days = series.aggregates.days_ok;
    for (Method m : series.config.methods) report.mse[m] = in_sample_mse(series, m);

    int holdouts = 0;
    for (const DayEstimate& day : series.days)
        if (!day.error && day.holdout_30y) ++holdouts;
    report.holdout_days = holdouts;
    if (holdouts > 0)
        for (Method m : series.config.methods) report.mae[m] = out_of_sample_mae(series, m);
    if (holdouts >= 2 && series.config.has_method(Method::Ols) &&
        series.config.has_method(Method::Ridge) && series.config.has_method(Method::Raise))
        report.ttests = method_comparison(series, lags);
    return report;
}

inline EvaluationReport build_report(const std::vector<CurveSnapshot>& panel,
                                     const std::vector<EstimationSeries>& series_list,
                                     const std::vector<double>& descriptive_taus,
                                     std::optional<int> lags = std::nullopt) {
    EvaluationReport report;
    report.panel_days = static_cast<int>(panel.size());
    report.descriptive = descriptive_stats(panel, descriptive_taus);
    for (const EstimationSeries& series : series_list)
        report.models.push_back(evaluate_series(series, lags));
    return report;
}

}  // namespace termfit
