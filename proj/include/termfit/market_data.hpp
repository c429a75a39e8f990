#pragma once

/**
 * @file market_data.hpp
 * @brief Quote ingestion, swap-curve bootstrapping and panel assembly.
 *
 * Input is a CSV of daily OIS and IRS quotes. OIS quotes (1 to 11
 * months) enter the fitted curve directly as zero rates. IRS par rates
 * for years 1 to 10 are bootstrapped into zero rates with annual fixed
 * legs and annual compounding, D(t) = (1 + r)^-t. The 30-year IRS par
 * rate is kept aside as the extrapolation holdout and is never fitted.
 */

#include <cmath>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "termfit/curve_basis.hpp"
#include "termfit/errors.hpp"
#include "termfit/regression.hpp"

namespace termfit {

enum class RateUnit { Decimal, Percent };
enum class Instrument { OIS, IRS };

inline const char* to_string(Instrument i) { return i == Instrument::OIS ? "OIS" : "IRS"; }

/// One market quote row. Rates are stored as decimals.
struct Quote {
    std::string date;  // ISO-8601
    Instrument instrument = Instrument::OIS;
    double tau_years = 0.0;
    double rate = 0.0;
};

/// One observation date ready for fitting: ascending (tau, zero rate)
/// points plus the optional 30-year par-rate holdout.
struct CurveSnapshot {
    std::string date;
    std::vector<std::pair<double, double>> points;  // (tau years, zero rate decimal)
    std::optional<double> holdout_30y;              // 30y IRS par rate, decimal

    std::vector<double> maturities() const {
        std::vector<double> taus;
        taus.reserve(points.size());
        for (const auto& [tau, rate] : points) taus.push_back(tau);
        return taus;
    }

    Eigen::VectorXd rates() const {
        Eigen::VectorXd y(static_cast<Eigen::Index>(points.size()));
        for (std::size_t i = 0; i < points.size(); ++i) y(static_cast<Eigen::Index>(i)) = points[i].second;
        return y;
    }
};

namespace detail {

inline bool looks_like_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (s[i] < '0' || s[i] > '9') return false;
    const int month = (s[5] - '0') * 10 + (s[6] - '0');
    const int day = (s[8] - '0') * 10 + (s[9] - '0');
    return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

inline std::string strip(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace detail

/// Parses the quote CSV `date,instrument,maturity,rate,unit`.
/// Maturity tokens are `<n>M` (months, OIS only, 1-11) or `<n>Y`
/// (years, IRS only, 1-30). The unit field may be omitted row-wise, in
/// which case `default_unit` applies. Returns quotes in file order.
inline std::vector<Quote> parse_quotes(std::istream& in, RateUnit default_unit = RateUnit::Decimal) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<Quote> quotes;

    if (!std::getline(in, line)) return quotes;  // empty stream: empty panel
    ++line_no;
    if (detail::strip(line) != "date,instrument,maturity,rate,unit")
        throw ParseError("expected header 'date,instrument,maturity,rate,unit'", line_no);

    while (std::getline(in, line)) {
        ++line_no;
        if (detail::strip(line).empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != 4 && fields.size() != 5)
            throw ParseError("expected 4 or 5 fields, got " + std::to_string(fields.size()), line_no);

        Quote q;
        q.date = detail::strip(fields[0]);
        if (!detail::looks_like_iso_date(q.date))
            throw ParseError("bad date '" + q.date + "' (want YYYY-MM-DD)", line_no);

        const std::string instr = detail::strip(fields[1]);
        if (instr == "OIS") {
            q.instrument = Instrument::OIS;
        } else if (instr == "IRS") {
            q.instrument = Instrument::IRS;
        } else {
            throw ParseError("unknown instrument '" + instr + "'", line_no);
        }

        const std::string tok = detail::strip(fields[2]);
        if (tok.size() < 2) throw ParseError("bad maturity token '" + tok + "'", line_no);
        const char kind = tok.back();
        int count = 0;
        try {
            std::size_t used = 0;
            count = std::stoi(tok, &used);
            if (used != tok.size() - 1) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ParseError("bad maturity token '" + tok + "'", line_no);
        }
        if (kind == 'M') {
            if (q.instrument != Instrument::OIS)
                throw ParseError("month maturities are OIS only", line_no);
            if (count < 1 || count > 11)
                throw ParseError("OIS maturity must be 1M..11M, got '" + tok + "'", line_no);
            q.tau_years = count / 12.0;
        } else if (kind == 'Y') {
            if (q.instrument != Instrument::IRS)
                throw ParseError("year maturities are IRS only", line_no);
            if (count < 1 || count > 30)
                throw ParseError("IRS maturity must be 1Y..30Y, got '" + tok + "'", line_no);
            q.tau_years = count;
        } else {
            throw ParseError("maturity token must end in M or Y", line_no);
        }

        try {
            std::size_t used = 0;
            q.rate = std::stod(detail::strip(fields[3]), &used);
        } catch (const std::exception&) {
            throw ParseError("bad rate '" + fields[3] + "'", line_no);
        }

        RateUnit unit = default_unit;
        if (fields.size() == 5) {
            const std::string u = detail::strip(fields[4]);
            if (u == "percent") {
                unit = RateUnit::Percent;
            } else if (u == "decimal") {
                unit = RateUnit::Decimal;
            } else if (!u.empty()) {
                throw ParseError("unit must be 'percent' or 'decimal', got '" + u + "'", line_no);
            }
        }
        if (unit == RateUnit::Percent) q.rate /= 100.0;

        quotes.push_back(std::move(q));
    }
    return quotes;
}

/// Bootstraps zero rates (annual compounding) from a contiguous run of
/// annual par swap rates starting at year 1. Discount factors follow
/// D(n) = (1 - s_n sum_{i<n} D(i)) / (1 + s_n) and every D(n) must stay
/// inside (0, 2).
inline std::map<int, double> bootstrap_zero_curve(const std::map<int, double>& par_rates) {
    if (par_rates.empty()) throw CurveGapError("no par rates to bootstrap");
    if (par_rates.begin()->first != 1)
        throw CurveGapError("par rates must start at year 1");
    int expected = 1;
    for (const auto& [year, rate] : par_rates) {
        if (year != expected)
            throw CurveGapError("missing par rate for year " + std::to_string(expected));
        ++expected;
    }

    std::map<int, double> zeros;
    double sum_d = 0.0;
    for (const auto& [year, s] : par_rates) {
        const double d = (1.0 - s * sum_d) / (1.0 + s);
        if (d <= 0.0 || d >= 2.0)
            throw ArbitrageError("discount factor out of (0,2) at year " + std::to_string(year));
        sum_d += d;
        zeros[year] = std::pow(d, -1.0 / year) - 1.0;
    }
    return zeros;
}

/// Par swap rate s = (1 - D(M)) / sum_i D(i) of annual zero rates for
/// years 1..M (annual compounding, annual fixed leg).
inline double par_swap_rate(const std::vector<double>& zeros) {
    if (zeros.empty()) throw DomainError("par swap rate needs at least one year");
    double sum_d = 0.0;
    double d_last = 1.0;
    for (std::size_t i = 0; i < zeros.size(); ++i) {
        if (zeros[i] <= -1.0)
            throw DomainError("zero rate at or below -100% at year " + std::to_string(i + 1));
        d_last = std::pow(1.0 + zeros[i], -static_cast<double>(i + 1));
        sum_d += d_last;
    }
    return (1.0 - d_last) / sum_d;
}

/// Inverse of bootstrap_zero_curve: annual par rates implied by a
/// contiguous annual zero curve starting at year 1.
inline std::map<int, double> par_from_zero_curve(const std::map<int, double>& zeros) {
    if (zeros.empty() || zeros.begin()->first != 1)
        throw CurveGapError("zero curve must start at year 1");
    std::vector<double> flat;
    int expected = 1;
    for (const auto& [year, r] : zeros) {
        if (year != expected)
            throw CurveGapError("missing zero rate for year " + std::to_string(expected));
        flat.push_back(r);
        ++expected;
    }
    std::map<int, double> par;
    for (std::size_t m = 1; m <= flat.size(); ++m)
        par[static_cast<int>(m)] = par_swap_rate({flat.begin(), flat.begin() + static_cast<long>(m)});
    return par;
}

/// Par swap rate of the fitted curve at an integer maturity: fitted zero
/// rates at years 1..M are turned into discounts and priced as a par swap.
inline double swap_rate_from_curve(const FitResult& fit, const ShapeParams& shape,
                                   int maturity_years) {
    if (maturity_years < 1) throw DomainError("swap maturity must be >= 1 year");
    std::vector<double> zeros;
    zeros.reserve(static_cast<std::size_t>(maturity_years));
    for (int year = 1; year <= maturity_years; ++year)
        zeros.push_back(model_rate(fit.beta, year, shape));
    return par_swap_rate(zeros);
}

/// Panel assembly outcome: usable snapshots plus the days that were
/// dropped, with reasons, and non-fatal warnings.
struct PanelBuildResult {
    std::vector<CurveSnapshot> snapshots;                 // date order
    std::vector<std::pair<std::string, std::string>> flagged;  // (date, reason)
    std::vector<std::string> warnings;
};

/// Groups quotes by date and builds fit-ready snapshots. A usable day
/// needs an OIS segment and a contiguous IRS run from year 1 (capped at
/// 10 years); the 30-year IRS quote becomes the holdout. Days with
/// duplicate tenors, bootstrap failures or fewer than `min_points`
/// points are flagged and excluded.
inline PanelBuildResult build_panel(const std::vector<Quote>& quotes, int min_points = 5) {
    struct DayQuotes {
        std::map<int, double> ois_months;
        std::map<int, double> irs_years;
        bool duplicate = false;
    };
    std::map<std::string, DayQuotes> by_date;
    for (const Quote& q : quotes) {
        DayQuotes& day = by_date[q.date];
        if (q.instrument == Instrument::OIS) {
            const int month = static_cast<int>(std::lround(q.tau_years * 12.0));
            if (!day.ois_months.emplace(month, q.rate).second) day.duplicate = true;
        } else {
            const int year = static_cast<int>(std::lround(q.tau_years));
            if (!day.irs_years.emplace(year, q.rate).second) day.duplicate = true;
        }
    }

    PanelBuildResult result;
    for (const auto& [date, day] : by_date) {
        if (day.duplicate) {
            result.flagged.emplace_back(date, "duplicate tenor quote");
            continue;
        }
        if (day.ois_months.empty()) {
            result.flagged.emplace_back(date, "missing OIS segment");
            continue;
        }

        std::map<int, double> fit_years;
        std::optional<double> holdout;
        for (const auto& [year, rate] : day.irs_years) {
            if (year <= 10) {
                fit_years[year] = rate;
            } else if (year == 30) {
                holdout = rate;
            } else {
                result.warnings.push_back(date + ": ignored IRS tenor " +
                                          std::to_string(year) + "Y");
            }
        }
        if (fit_years.empty()) {
            result.flagged.emplace_back(date, "missing IRS segment");
            continue;
        }

        CurveSnapshot snap;
        snap.date = date;
        snap.holdout_30y = holdout;
        try {
            const auto zeros = bootstrap_zero_curve(fit_years);
            for (const auto& [month, rate] : day.ois_months)
                snap.points.emplace_back(month / 12.0, rate);
            for (const auto& [year, rate] : zeros)
                snap.points.emplace_back(static_cast<double>(year), rate);
        } catch (const Error& e) {
            result.flagged.emplace_back(date, e.what());
            continue;
        }

        if (static_cast<int>(snap.points.size()) < min_points) {
            result.flagged.emplace_back(date, "insufficient points (" +
                                                  std::to_string(snap.points.size()) + ")");
            continue;
        }
        result.snapshots.push_back(std::move(snap));
    }
    return result;
}

}  // namespace termfit
