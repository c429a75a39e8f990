#pragma once

/**
 * @file regression.hpp
 * @brief OLS, ridge and raise estimators for Y = X b + u.
 *
 * The primary solve path is an orthogonal (QR) decomposition; normal
 * equations never appear outside tests. Ridge operates on centered,
 * unit-length columns and reports a reconstructed intercept. Raise
 * replaces one column X_i by X_i + k e_i, where e_i is the residual of
 * regressing X_i on the remaining columns; the span of the design is
 * unchanged, so fitted values and SSE match OLS for every k >= 0.
 */

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "termfit/curve_basis.hpp"
#include "termfit/diagnostics.hpp"
#include "termfit/errors.hpp"

namespace termfit {

enum class Method { Ols, Ridge, Raise };

inline const char* to_string(Method m) {
    switch (m) {
        case Method::Ols: return "ols";
        case Method::Ridge: return "ridge";
        default: return "raise";
    }
}

/// Output of one estimator run.
struct FitResult {
    Method method = Method::Ols;
    Eigen::VectorXd beta;
    Eigen::VectorXd std_errors;
    Eigen::VectorXd fitted;
    double sse = 0.0;
    double sigma2 = 0.0;
    double k = 0.0;                   // shrinkage or raising factor, 0 for OLS
    std::optional<int> raised_index;  // raise only
    double cn = std::numeric_limits<double>::quiet_NaN();
    std::optional<ShapeParams> shape;
};

namespace detail {

/// Throws SingularDesignError naming the columns loading the smallest
/// singular direction when X is rank deficient.
inline void require_full_rank(const Eigen::MatrixXd& X, const char* what) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    if (s(s.size() - 1) > kRankTolerance * s(0)) return;

    const Eigen::VectorXd v = svd.matrixV().col(s.size() - 1).cwiseAbs();
    const double vmax = v.maxCoeff();
    std::vector<int> cols;
    for (Eigen::Index j = 0; j < v.size(); ++j)
        if (v(j) >= 0.5 * vmax) cols.push_back(static_cast<int>(j));

    std::string msg = std::string(what) + ": design is rank deficient (columns";
    for (int c : cols) msg += " " + std::to_string(c);
    msg += ")";
    throw SingularDesignError(msg, std::move(cols));
}

struct LeastSquares {
    Eigen::VectorXd beta;
    Eigen::VectorXd fitted;
    double sse = 0.0;
    Eigen::MatrixXd r;  // p x p upper triangular factor, X = Q r
};

/// QR least squares with the rank guard. Shared by the public estimators
/// and the grid search, which needs only beta and SSE.
inline LeastSquares qr_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (y.size() != n) throw DimensionError("response length does not match design rows");
    if (n <= p) throw InsufficientDataError("need n > p observations");
    require_full_rank(X, "least squares");

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    LeastSquares ls;
    ls.beta = qr.solve(y);
    ls.fitted = X * ls.beta;
    ls.sse = (y - ls.fitted).squaredNorm();
    ls.r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
    return ls;
}

}  // namespace detail

/// Ordinary least squares with coefficient standard errors from
/// sigma2 (X'X)^-1, computed through the triangular factor.
inline FitResult ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    auto ls = detail::qr_least_squares(X, y);
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();

    FitResult fit;
    fit.method = Method::Ols;
    fit.beta = std::move(ls.beta);
    fit.fitted = std::move(ls.fitted);
    fit.sse = ls.sse;
    fit.sigma2 = ls.sse / static_cast<double>(n - p);

    const Eigen::MatrixXd r_inv =
        ls.r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    fit.std_errors = (fit.sigma2 * (r_inv * r_inv.transpose()).diagonal()).cwiseSqrt();
    fit.cn = condition_number(X);
    return fit;
}

inline FitResult ols_fit(const DesignMatrix& X, const Eigen::VectorXd& y) {
    FitResult fit = ols_fit(X.values, y);
    fit.shape = X.shape;
    return fit;
}

/// Ridge regression with factor k >= 0.
///
/// The non-intercept columns are centered and rescaled to unit length,
/// the response is centered, and the shrunk slopes solve the augmented
/// least-squares system [Z; sqrt(k) I] b = [y_c; 0]. Slopes are mapped
/// back to the original scale and the intercept is reconstructed as
/// mean(y) - slopes' column means, so a level coefficient is always
/// reported. Standard errors come from the sandwich
/// sigma2 (Z'Z + kI)^-1 Z'Z (Z'Z + kI)^-1 on the scaled coordinates.
/// At k = 0 every output coincides with ols_fit.
inline FitResult ridge_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double k) {
    if (k < 0.0) throw DomainError("ridge factor k must be nonnegative");
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (y.size() != n) throw DimensionError("response length does not match design rows");
    if (n <= p) throw InsufficientDataError("need n > p observations");
    if (k == 0.0) {
        // exact OLS reproduction, including its error behavior
        FitResult fit = ols_fit(X, y);
        fit.method = Method::Ridge;
        return fit;
    }

    const Eigen::Index q = p - 1;
    const double y_mean = y.mean();
    const Eigen::VectorXd y_c = y.array() - y_mean;

    Eigen::VectorXd means(q), norms(q);
    Eigen::MatrixXd z(n, q);
    for (Eigen::Index j = 0; j < q; ++j) {
        means(j) = X.col(j + 1).mean();
        z.col(j) = X.col(j + 1).array() - means(j);
        norms(j) = z.col(j).norm();
        if (norms(j) == 0.0)
            throw SingularDesignError("ridge: column " + std::to_string(j + 1) +
                                          " is constant and collinear with the intercept",
                                      {0, static_cast<int>(j + 1)});
        z.col(j) /= norms(j);
    }

    Eigen::MatrixXd aug(n + q, q);
    aug.topRows(n) = z;
    aug.bottomRows(q) = std::sqrt(k) * Eigen::MatrixXd::Identity(q, q);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + q);
    rhs.head(n) = y_c;

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(aug);
    const Eigen::VectorXd b_scaled = qr.solve(rhs);

    FitResult fit;
    fit.method = Method::Ridge;
    fit.k = k;
    fit.beta.resize(p);
    fit.beta.tail(q) = b_scaled.cwiseQuotient(norms);
    fit.beta(0) = y_mean - fit.beta.tail(q).dot(means);
    fit.fitted = X * fit.beta;
    fit.sse = (y - fit.fitted).squaredNorm();
    fit.sigma2 = fit.sse / static_cast<double>(n - p);

    // (Z'Z + kI)^-1 through the augmented triangular factor
    const Eigen::MatrixXd r =
        qr.matrixQR().topRows(q).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv =
        r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(q, q));
    const Eigen::MatrixXd shrink_inv = r_inv * r_inv.transpose();
    const Eigen::MatrixXd ztz = z.transpose() * z;
    const Eigen::MatrixXd cov_scaled = fit.sigma2 * shrink_inv * ztz * shrink_inv;
    const Eigen::MatrixXd cov_slopes = norms.cwiseInverse().asDiagonal() * cov_scaled *
                                       norms.cwiseInverse().asDiagonal();

    fit.std_errors.resize(p);
    fit.std_errors.tail(q) = cov_slopes.diagonal().cwiseSqrt();
    fit.std_errors(0) =
        std::sqrt(fit.sigma2 / static_cast<double>(n) + means.dot(cov_slopes * means));
    fit.cn = ridge_condition_number(X, k);
    return fit;
}

inline FitResult ridge_fit(const DesignMatrix& X, const Eigen::VectorXd& y, double k) {
    FitResult fit = ridge_fit(X.values, y, k);
    fit.shape = X.shape;
    return fit;
}

/// Residuals e_i of the auxiliary regression of column i on the other
/// columns. e_i is orthogonal to every remaining column. The intercept
/// (column 0) cannot be the target.
inline Eigen::VectorXd auxiliary_residuals(const Eigen::MatrixXd& X, int i) {
    const Eigen::Index p = X.cols();
    if (i == 0) throw UnsupportedOperationError("the intercept column is never raised");
    if (i < 0 || i >= p) throw DimensionError("column index out of range");

    Eigen::MatrixXd rest(X.rows(), p - 1);
    Eigen::Index c = 0;
    for (Eigen::Index l = 0; l < p; ++l)
        if (l != i) rest.col(c++) = X.col(l);
    detail::require_full_rank(rest, "auxiliary regression");

    return X.col(i) - rest * rest.householderQr().solve(X.col(i));
}

inline Eigen::VectorXd auxiliary_residuals(const DesignMatrix& X, int i) {
    return auxiliary_residuals(X.values, i);
}

/// One raise transformation: X with column i replaced by X_i + k e_i.
struct RaiseTransform {
    int index = 0;
    Eigen::VectorXd residuals;  // e_i
    double k = 0.0;
    Eigen::MatrixXd raised;
    bool raisable = true;  // false when e_i = 0 (column exactly dependent)
};

inline RaiseTransform raise_matrix(const Eigen::MatrixXd& X, int i, double k) {
    if (k < 0.0) throw DomainError("raising factor k must be nonnegative");
    RaiseTransform rt;
    rt.index = i;
    rt.k = k;
    rt.residuals = auxiliary_residuals(X, i);
    rt.raisable = rt.residuals.norm() > 1e-12 * X.col(i).norm();
    rt.raised = X;
    rt.raised.col(i) += k * rt.residuals;
    return rt;
}

inline RaiseTransform raise_matrix(const DesignMatrix& X, int i, double k) {
    return raise_matrix(X.values, i, k);
}

/// Condition number of the raised design, rescaled to unit length after
/// the transformation.
inline double raise_condition_number(const RaiseTransform& rt) {
    return condition_number(rt.raised);
}

/// Raise regression: OLS on the raised design. Fitted values and SSE
/// equal the plain OLS ones; the raised coefficient equals the OLS one
/// divided by (1 + k).
inline FitResult raise_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int i, double k) {
    const RaiseTransform rt = raise_matrix(X, i, k);
    FitResult fit = ols_fit(rt.raised, y);
    fit.method = Method::Raise;
    fit.k = k;
    fit.raised_index = i;
    return fit;
}

inline FitResult raise_fit(const DesignMatrix& X, const Eigen::VectorXd& y, int i, double k) {
    FitResult fit = raise_fit(X.values, y, i, k);
    fit.shape = X.shape;
    return fit;
}

}  // namespace termfit
