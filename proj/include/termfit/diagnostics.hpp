#pragma once

/**
 * @file diagnostics.hpp
 * @brief Collinearity diagnostics: condition number on the unit-length
 *        scale, per-column VIF and coefficient of variation, and the
 *        rule for picking which column to raise.
 *
 * The condition number is computed after every column of X is rescaled
 * to unit Euclidean norm (intercept included). With xi_max and xi_min
 * the extreme eigenvalues of the scaled cross-product,
 *
 *     K(X) = sqrt(xi_max / xi_min)
 *
 * Thresholds: below 20 no concern, 20 to 30 moderate, above 30 strong.
 * VIF above 10 flags essential collinearity; CV below 0.1002 flags
 * non-essential collinearity (association with the intercept).
 */

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "termfit/curve_basis.hpp"
#include "termfit/errors.hpp"

namespace termfit {

/// Relative singular-value cutoff below which a design counts as rank deficient.
inline constexpr double kRankTolerance = 1e-10;

/// Moderate / strong condition-number thresholds.
inline constexpr double kCnModerate = 20.0;
inline constexpr double kCnStrong = 30.0;

enum class Severity { None, Moderate, Strong };

inline const char* to_string(Severity s) {
    switch (s) {
        case Severity::None: return "none";
        case Severity::Moderate: return "moderate";
        default: return "strong";
    }
}

inline Severity severity_of(double cn) {
    if (cn < kCnModerate) return Severity::None;
    if (cn <= kCnStrong) return Severity::Moderate;
    return Severity::Strong;
}

/// Rescales every column of X to unit Euclidean norm.
inline Eigen::MatrixXd unit_length_scale(const Eigen::MatrixXd& X) {
    Eigen::MatrixXd scaled = X;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double norm = X.col(j).norm();
        if (norm == 0.0)
            throw DegenerateColumnError("column " + std::to_string(j) + " is identically zero");
        scaled.col(j) /= norm;
    }
    return scaled;
}

namespace detail {

/// Singular values of the unit-length-scaled matrix, descending.
inline Eigen::VectorXd scaled_singular_values(const Eigen::MatrixXd& X) {
    return Eigen::JacobiSVD<Eigen::MatrixXd>(unit_length_scale(X)).singularValues();
}

}  // namespace detail

/// Condition number sqrt(xi_max/xi_min) of the unit-length-scaled design.
/// Returns +infinity when the scaled design is rank deficient.
inline double condition_number(const Eigen::MatrixXd& X) {
    const Eigen::VectorXd s = detail::scaled_singular_values(X);
    const double s_max = s(0);
    const double s_min = s(s.size() - 1);
    if (s_min <= kRankTolerance * s_max)
        return std::numeric_limits<double>::infinity();
    return s_max / s_min;
}

inline double condition_number(const DesignMatrix& X) { return condition_number(X.values); }

/// Condition number of the ridge-transformed design,
/// sqrt((xi_max + k)/(xi_min + k)) with xi from the unit-length scale.
/// Decreasing in k; equals condition_number(X) at k = 0 and tends to 1.
inline double ridge_condition_number(const Eigen::MatrixXd& X, double k) {
    if (k < 0.0) throw DomainError("ridge factor k must be nonnegative");
    const Eigen::VectorXd s = detail::scaled_singular_values(X);
    const double num = s(0) * s(0) + k;
    const double den = s(s.size() - 1) * s(s.size() - 1) + k;
    if (den <= kRankTolerance * kRankTolerance * num)
        return std::numeric_limits<double>::infinity();
    return std::sqrt(num / den);
}

inline double ridge_condition_number(const DesignMatrix& X, double k) {
    return ridge_condition_number(X.values, k);
}

/// Variance inflation factors of the non-intercept columns.
/// VIF_i = 1/(1 - R2_i) with R2_i from regressing column i on all other
/// columns (intercept included). A perfect auxiliary fit yields +infinity.
inline std::vector<double> vif(const Eigen::MatrixXd& X) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (n <= p) throw InsufficientDataError("VIF needs more rows than columns");

    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(p - 1));
    Eigen::MatrixXd rest(n, p - 1);
    for (Eigen::Index j = 1; j < p; ++j) {
        Eigen::Index c = 0;
        for (Eigen::Index l = 0; l < p; ++l)
            if (l != j) rest.col(c++) = X.col(l);

        const Eigen::VectorXd target = X.col(j);
        const Eigen::VectorXd centered = target.array() - target.mean();
        const double sst = centered.squaredNorm();

        // ColPiv handles a rank-deficient remainder (duplicated columns).
        const Eigen::VectorXd resid =
            target - rest * rest.colPivHouseholderQr().solve(target);
        const double sse = resid.squaredNorm();

        if (sst <= 0.0 || sse <= 1e-12 * sst) {
            out.push_back(std::numeric_limits<double>::infinity());
        } else {
            out.push_back(sst / sse);  // 1/(1 - R2) = SST/SSE
        }
    }
    return out;
}

inline std::vector<double> vif(const DesignMatrix& X) { return vif(X.values); }

/// Coefficients of variation (sample std / |mean|) of the non-intercept
/// columns. A zero-mean column yields the +infinity sentinel.
inline std::vector<double> cv(const Eigen::MatrixXd& X) {
    const Eigen::Index n = X.rows();
    if (n < 2) throw InsufficientDataError("CV needs at least two rows");

    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(X.cols() - 1));
    for (Eigen::Index j = 1; j < X.cols(); ++j) {
        const double mean = X.col(j).mean();
        const double ss = (X.col(j).array() - mean).matrix().squaredNorm();
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        if (mean == 0.0) {
            out.push_back(std::numeric_limits<double>::infinity());
        } else {
            out.push_back(sd / std::abs(mean));
        }
    }
    return out;
}

inline std::vector<double> cv(const DesignMatrix& X) { return cv(X.values); }

/// Full collinearity diagnosis of one design.
struct CollinearityReport {
    double cn = 1.0;
    std::vector<double> vif;  // per non-intercept column
    std::vector<double> cv;   // per non-intercept column
    double xi_max = 1.0;
    double xi_min = 1.0;
    Severity severity = Severity::None;
};

inline CollinearityReport analyze_collinearity(const Eigen::MatrixXd& X) {
    const Eigen::VectorXd s = detail::scaled_singular_values(X);
    CollinearityReport report;
    report.xi_max = s(0) * s(0);
    report.xi_min = s(s.size() - 1) * s(s.size() - 1);
    report.cn = (s(s.size() - 1) <= kRankTolerance * s(0))
                    ? std::numeric_limits<double>::infinity()
                    : s(0) / s(s.size() - 1);
    report.severity = severity_of(report.cn);
    report.vif = vif(X);
    report.cv = cv(X);
    return report;
}

inline CollinearityReport analyze_collinearity(const DesignMatrix& X) {
    return analyze_collinearity(X.values);
}

/// Picks the column to raise: highest VIF, ties (1e-6 relative) broken by
/// lowest CV, remaining ties by lowest index. Returns a column index of X
/// (never 0, the intercept).
inline int select_raise_variable(const Eigen::MatrixXd& X) {
    if (X.cols() < 3)
        throw ConfigError("raising needs at least two non-intercept columns");
    const std::vector<double> vifs = vif(X);
    const std::vector<double> cvs = cv(X);

    double top = -1.0;
    for (double v : vifs) top = std::max(top, v);

    int best = -1;
    double best_cv = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < vifs.size(); ++j) {
        const bool tied = std::isinf(top) ? std::isinf(vifs[j])
                                          : vifs[j] >= top * (1.0 - 1e-6);
        if (tied && (best < 0 || cvs[j] < best_cv)) {
            best_cv = cvs[j];
            best = static_cast<int>(j);
        }
    }
    return best + 1;  // vif/cv vectors start at column 1
}

inline int select_raise_variable(const DesignMatrix& X) {
    return select_raise_variable(X.values);
}

}  // namespace termfit
