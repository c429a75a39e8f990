#pragma once

/**
 * @file synthetic.hpp
 * @brief Synthetic quote panels generated from known coefficient paths.
 *
 * Coefficients follow a Gaussian random walk around their start values
 * while the shape parameters stay fixed, so the generating curve is
 * known exactly on every day. Quotes are laid out like the market
 * panel: OIS zero rates at 1..11 months, IRS par rates at 1..10 years,
 * and a 30-year IRS par rate priced off the true curve as the holdout.
 * Optional Gaussian noise lands on the quoted rates.
 */

#include <array>
#include <cstdint>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "termfit/curve_basis.hpp"
#include "termfit/market_data.hpp"

namespace termfit {

struct SynthConfig {
    int days = 250;
    std::uint64_t seed = 42;
    ShapeParams shape = ShapeParams::ns(2.0);
    std::array<double, 4> beta_start{0.03, -0.015, 0.01, 0.005};  // decimal rates
    double beta_walk_std = 2e-4;  // daily random-walk step, decimal
    double noise_std = 0.0;       // quote noise, decimal (1bp = 1e-4)
    std::string start_date = "2011-08-02";
    bool include_holdout = true;
};

/// Generating path for one day.
struct SynthDayTruth {
    std::string date;
    std::vector<double> beta;
};

struct SynthPanel {
    std::vector<Quote> quotes;        // parse_quotes/build_panel compatible
    std::vector<SynthDayTruth> truth; // day order
    ShapeParams shape;
};

namespace detail {

// civil-date helpers (proleptic Gregorian), days since 1970-01-01
inline long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

inline void civil_from_days(long z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<int>(yoe) + static_cast<int>(era) * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

inline std::string iso_date_offset(const std::string& start, int offset_days) {
    const int y = std::stoi(start.substr(0, 4));
    const int m = std::stoi(start.substr(5, 2));
    const int d = std::stoi(start.substr(8, 2));
    int oy;
    unsigned om, od;
    civil_from_days(days_from_civil(y, m, d) + offset_days, oy, om, od);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", oy, om, od);
    return buf;
}

}  // namespace detail

/// Builds a synthetic daily quote panel from the configured paths.
/// Deterministic for a given config.
inline SynthPanel generate_panel(const SynthConfig& config) {
    if (config.days < 1) throw ConfigError("synthetic panel needs at least one day");
    if (config.beta_walk_std < 0.0 || config.noise_std < 0.0)
        throw ConfigError("noise levels must be nonnegative");

    const int p = config.shape.num_columns();
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> walk(0.0, config.beta_walk_std);
    std::normal_distribution<double> noise(0.0, config.noise_std);

    auto perturb = [&](double rate) { return config.noise_std > 0.0 ? rate + noise(rng) : rate; };

    SynthPanel panel;
    panel.shape = config.shape;
    std::vector<double> beta(config.beta_start.begin(), config.beta_start.begin() + p);

    for (int day = 0; day < config.days; ++day) {
        const std::string date = detail::iso_date_offset(config.start_date, day);
        Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(beta.data(), p);

        // noise lands on the observed zero rates, so the fitted points
        // carry iid disturbances; IRS quotes encode the noisy annual
        // zeros as par rates, which the bootstrap inverts exactly
        for (int month = 1; month <= 11; ++month) {
            Quote q;
            q.date = date;
            q.instrument = Instrument::OIS;
            q.tau_years = month / 12.0;
            q.rate = perturb(model_rate(b, month / 12.0, config.shape));
            panel.quotes.push_back(std::move(q));
        }

        std::map<int, double> observed_zeros;
        for (int year = 1; year <= 10; ++year)
            observed_zeros[year] = perturb(model_rate(b, year, config.shape));
        const std::map<int, double> par = par_from_zero_curve(observed_zeros);
        for (int year = 1; year <= 10; ++year) {
            Quote q;
            q.date = date;
            q.instrument = Instrument::IRS;
            q.tau_years = year;
            q.rate = par.at(year);
            panel.quotes.push_back(std::move(q));
        }

        if (config.include_holdout) {
            // 30-year par swap priced off the true curve
            std::map<int, double> true_zeros;
            for (int year = 1; year <= 30; ++year)
                true_zeros[year] = model_rate(b, year, config.shape);
            Quote q;
            q.date = date;
            q.instrument = Instrument::IRS;
            q.tau_years = 30;
            q.rate = perturb(par_from_zero_curve(true_zeros).at(30));
            panel.quotes.push_back(std::move(q));
        }

        panel.truth.push_back({date, beta});

        if (config.beta_walk_std > 0.0)
            for (double& coef : beta) coef += walk(rng);
    }
    return panel;
}

}  // namespace termfit
