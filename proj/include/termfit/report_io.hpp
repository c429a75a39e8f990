#pragma once

/**
 * @file report_io.hpp
 * @brief CSV and JSON writers for quotes, per-day fit artifacts and the
 *        evaluation report tables. All writers are deterministic: fixed
 *        column order, fixed float formatting, rows in date order.
 */

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "termfit/calibration.hpp"
#include "termfit/evaluation.hpp"
#include "termfit/market_data.hpp"
#include "termfit/synthetic.hpp"

namespace termfit {

namespace detail {

inline std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string maturity_token(const Quote& q) {
    if (q.instrument == Instrument::OIS)
        return std::to_string(static_cast<int>(std::lround(q.tau_years * 12.0))) + "M";
    return std::to_string(static_cast<int>(std::lround(q.tau_years))) + "Y";
}

}  // namespace detail

/// Writes quotes in the canonical input format (decimal units).
inline void write_quotes_csv(std::ostream& out, const std::vector<Quote>& quotes) {
    out << "date,instrument,maturity,rate,unit\n";
    for (const Quote& q : quotes)
        out << q.date << ',' << to_string(q.instrument) << ',' << detail::maturity_token(q)
            << ',' << detail::fmt(q.rate) << ",decimal\n";
}

/// One row per day: shape, coefficients, standard errors, CN and the
/// mitigation factor for a single method. Failed days keep the date and
/// carry the error message.
inline void write_betas_csv(std::ostream& out, const EstimationSeries& series, Method method) {
    out << "date,lambda1,lambda2,beta0,beta1,beta2,beta3,"
           "se_beta0,se_beta1,se_beta2,se_beta3,cn,k,raised_column,error\n";
    for (const DayEstimate& day : series.days) {
        out << day.date << ',';
        if (day.error) {
            out << ",,,,,,,,,,,,," << *day.error << '\n';
            continue;
        }
        const auto it = day.fits.find(method);
        if (it == day.fits.end()) {
            out << ",,,,,,,,,,,,,method not configured\n";
            continue;
        }
        const FitResult& fit = it->second;
        out << detail::fmt(day.shape.lambda1) << ',';
        if (day.shape.lambda2) out << detail::fmt(*day.shape.lambda2);
        out << ',';
        for (int j = 0; j < 4; ++j) {
            if (j < fit.beta.size()) out << detail::fmt(fit.beta(j));
            out << ',';
        }
        for (int j = 0; j < 4; ++j) {
            if (j < fit.std_errors.size()) out << detail::fmt(fit.std_errors(j));
            out << ',';
        }
        out << detail::fmt(fit.cn) << ',' << detail::fmt(fit.k) << ',';
        if (fit.raised_index) out << *fit.raised_index;
        out << ",\n";
    }
}

inline std::vector<std::string> design_column_roles(Model model) {
    if (model == Model::NS) return {"slope", "curvature"};
    return {"slope", "curvature", "curvature2"};
}

/// Per-day collinearity dump: CN, severity and per-column VIF/CV at the
/// chosen shape, plus the selected mitigation factors.
inline void write_diagnostics_csv(std::ostream& out, const EstimationSeries& series) {
    const auto roles = design_column_roles(series.config.model);
    out << "date,lambda1,lambda2,cn,severity,ridge_k,raise_k,raised_column";
    for (const auto& r : roles) out << ",vif_" << r;
    for (const auto& r : roles) out << ",cv_" << r;
    out << ",error\n";
    for (const DayEstimate& day : series.days) {
        out << day.date << ',';
        if (day.error) {
            out << ",,,,,,";
            for (std::size_t j = 0; j < 2 * roles.size(); ++j) out << ',';
            out << ',' << *day.error << '\n';
            continue;
        }
        out << detail::fmt(day.shape.lambda1) << ',';
        if (day.shape.lambda2) out << detail::fmt(*day.shape.lambda2);
        out << ',' << detail::fmt(day.report.cn) << ',' << to_string(day.report.severity) << ',';
        const auto ridge = day.fits.find(Method::Ridge);
        if (ridge != day.fits.end()) out << detail::fmt(ridge->second.k);
        out << ',';
        const auto raise = day.fits.find(Method::Raise);
        if (raise != day.fits.end()) out << detail::fmt(raise->second.k);
        out << ',';
        if (day.raised_column) out << *day.raised_column;
        for (double v : day.report.vif) out << ',' << detail::fmt(v);
        for (double v : day.report.cv) out << ',' << detail::fmt(v);
        out << ",\n";
    }
}

/// Plot-ready series of one per-method quantity in percent
/// (extractor returns a decimal rate or rate-like value per method).
template <typename Extractor>
inline void write_method_series_csv(std::ostream& out, const EstimationSeries& series,
                                    const std::string& value_name, Extractor&& extract) {
    out << "date";
    for (Method m : series.config.methods) out << ',' << value_name << '_' << to_string(m);
    out << '\n';
    for (const DayEstimate& day : series.days) {
        if (day.error) continue;
        out << day.date;
        for (Method m : series.config.methods)
            out << ',' << detail::fmt(extract(day, m) * 100.0);
        out << '\n';
    }
}

/// 30-year actual vs fitted swap rates in percent, holdout days only.
inline void write_swap30_csv(std::ostream& out, const EstimationSeries& series) {
    out << "date,actual";
    for (Method m : series.config.methods) out << ",swap30_" << to_string(m);
    out << '\n';
    for (const DayEstimate& day : series.days) {
        if (day.error || !day.holdout_30y) continue;
        out << day.date << ',' << detail::fmt(*day.holdout_30y * 100.0);
        for (Method m : series.config.methods) {
            const double s = swap_rate_from_curve(day.fits.at(m), day.shape, 30);
            out << ',' << detail::fmt(s * 100.0);
        }
        out << '\n';
    }
}

/// Report tables as sectioned CSV (descriptive stats, CN means, VIF/CV
/// means, chosen-k means, MSE, MAE, pairwise tests).
inline void write_report_csv(std::ostream& out, const EvaluationReport& report) {
    out << "# descriptive (percent)\n";
    out << "maturity,mean,std,min,max,n\n";
    for (const DescriptiveRow& row : report.descriptive)
        out << row.label << ',' << detail::fmt(row.mean) << ',' << detail::fmt(row.stddev)
            << ',' << detail::fmt(row.min) << ',' << detail::fmt(row.max) << ',' << row.n << '\n';

    out << "\n# mean condition number\n";
    out << "model,ols,ridge,raise\n";
    for (const ModelReport& m : report.models) {
        out << to_string(m.model);
        for (Method method : {Method::Ols, Method::Ridge, Method::Raise}) {
            out << ',';
            const auto it = m.aggregates.mean_cn.find(method);
            if (it != m.aggregates.mean_cn.end()) out << detail::fmt(it->second);
        }
        out << '\n';
    }

    out << "\n# mean vif and cv (ols design)\n";
    out << "model,column,vif,cv\n";
    for (const ModelReport& m : report.models) {
        const auto roles = design_column_roles(m.model);
        for (std::size_t j = 0; j < m.aggregates.mean_vif.size(); ++j)
            out << to_string(m.model) << ',' << roles[j] << ','
                << detail::fmt(m.aggregates.mean_vif[j]) << ','
                << detail::fmt(m.aggregates.mean_cv[j]) << '\n';
    }

    out << "\n# mean mitigation factor (days above threshold)\n";
    out << "model,ridge_k,raise_k,mitigated_days,days\n";
    for (const ModelReport& m : report.models) {
        out << to_string(m.model) << ',';
        const auto kr = m.aggregates.mean_k.find(Method::Ridge);
        if (kr != m.aggregates.mean_k.end()) out << detail::fmt(kr->second);
        out << ',';
        const auto ka = m.aggregates.mean_k.find(Method::Raise);
        if (ka != m.aggregates.mean_k.end()) out << detail::fmt(ka->second);
        out << ',' << m.aggregates.mitigated_days << ',' << m.days << '\n';
    }

    out << "\n# in-sample mse (percent^2)\n";
    out << "model,ols,ridge,raise\n";
    for (const ModelReport& m : report.models) {
        out << to_string(m.model);
        for (Method method : {Method::Ols, Method::Ridge, Method::Raise}) {
            out << ',';
            const auto it = m.mse.find(method);
            if (it != m.mse.end()) out << detail::fmt(it->second);
        }
        out << '\n';
    }

    out << "\n# out-of-sample 30y mae (percent)\n";
    out << "model,ols,ridge,raise,holdout_days\n";
    for (const ModelReport& m : report.models) {
        out << to_string(m.model);
        for (Method method : {Method::Ols, Method::Ridge, Method::Raise}) {
            out << ',';
            const auto it = m.mae.find(method);
            if (it != m.mae.end()) out << detail::fmt(it->second);
        }
        out << ',' << m.holdout_days << '\n';
    }

    out << "\n# pairwise mae tests (newey-west)\n";
    out << "model,pair,alpha,t,lags,significant,degenerate\n";
    for (const ModelReport& m : report.models)
        for (const ComparisonLine& line : m.ttests)
            out << to_string(m.model) << ',' << line.label << ',' << detail::fmt(line.alpha)
                << ',' << detail::fmt(line.t) << ',' << line.lags << ','
                << (line.significant ? 1 : 0) << ',' << (line.degenerate ? 1 : 0) << '\n';
}

inline nlohmann::json report_to_json(const EvaluationReport& report) {
    nlohmann::json j;
    j["panel_days"] = report.panel_days;
    j["descriptive"] = nlohmann::json::array();
    for (const DescriptiveRow& row : report.descriptive)
        j["descriptive"].push_back({{"maturity", row.label},
                                    {"tau_years", row.tau},
                                    {"mean", row.mean},
                                    {"std", row.stddev},
                                    {"min", row.min},
                                    {"max", row.max},
                                    {"n", row.n}});
    j["models"] = nlohmann::json::array();
    for (const ModelReport& m : report.models) {
        nlohmann::json jm;
        jm["model"] = to_string(m.model);
        jm["days"] = m.days;
        jm["holdout_days"] = m.holdout_days;
        jm["days_failed"] = m.aggregates.days_failed;
        jm["boundary_days"] = m.aggregates.boundary_days;
        jm["mitigated_days"] = m.aggregates.mitigated_days;
        auto method_map = [](const std::map<Method, double>& values) {
            nlohmann::json out;
            for (const auto& [method, v] : values)
                out[to_string(method)] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
            return out;
        };
        jm["mean_cn"] = method_map(m.aggregates.mean_cn);
        jm["mean_k"] = method_map(m.aggregates.mean_k);
        const auto roles = design_column_roles(m.model);
        jm["mean_vif"] = nlohmann::json::object();
        jm["mean_cv"] = nlohmann::json::object();
        for (std::size_t c = 0; c < m.aggregates.mean_vif.size(); ++c) {
            const double v = m.aggregates.mean_vif[c];
            jm["mean_vif"][roles[c]] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
            jm["mean_cv"][roles[c]] = m.aggregates.mean_cv[c];
        }
        jm["mse_percent2"] = method_map(m.mse);
        if (!m.mae.empty()) jm["mae_percent"] = method_map(m.mae);
        jm["ttests"] = nlohmann::json::array();
        for (const ComparisonLine& line : m.ttests)
            jm["ttests"].push_back({{"pair", line.label},
                                    {"alpha", line.alpha},
                                    {"t", line.t},
                                    {"lags", line.lags},
                                    {"significant", line.significant},
                                    {"degenerate", line.degenerate}});
        j["models"].push_back(std::move(jm));
    }
    return j;
}

/// Snapshot export: date, fitted points and the optional holdout.
inline nlohmann::json snapshot_to_json(const CurveSnapshot& snap) {
    nlohmann::json j;
    j["date"] = snap.date;
    j["points"] = nlohmann::json::array();
    for (const auto& [tau, rate] : snap.points)
        j["points"].push_back({{"tau_years", tau}, {"rate", rate}});
    if (snap.holdout_30y)
        j["holdout_30y"] = *snap.holdout_30y;
    else
        j["holdout_30y"] = nullptr;
    return j;
}

inline nlohmann::json truth_to_json(const SynthPanel& panel) {
    nlohmann::json j;
    j["model"] = to_string(panel.shape.model);
    j["lambda1"] = panel.shape.lambda1;
    if (panel.shape.lambda2) j["lambda2"] = *panel.shape.lambda2;
    j["days"] = nlohmann::json::array();
    for (const SynthDayTruth& day : panel.truth)
        j["days"].push_back({{"date", day.date}, {"beta", day.beta}});
    return j;
}

}  // namespace termfit
