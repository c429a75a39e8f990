#pragma once

/**
 * @file curve_basis.hpp
 * @brief Nelson-Siegel and Svensson factor loadings and design matrices.
 *
 * The spot rate at time to maturity tau is a linear combination of basis
 * functions ("loadings") of x = tau/lambda:
 *
 *     level     r0 = 1
 *     slope     r1 = (1 - exp(-x)) / x
 *     curvature r2 = r1 - exp(-x)
 *
 * The Svensson extension adds a second curvature term r3 built from a
 * second shape parameter lambda2. Stacking the loading vectors of a set
 * of maturities row-wise gives the design matrix of the linear model.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "termfit/errors.hpp"

namespace termfit {

enum class Model { NS, SV };

inline const char* to_string(Model m) { return m == Model::NS ? "ns" : "sv"; }

/// Shape (decay) parameters of a curve model. lambda2 is present iff
/// model == SV. lambda1 == lambda2 is representable but makes the two
/// curvature columns identical; fits on such designs fail as singular.
struct ShapeParams {
    Model model = Model::NS;
    double lambda1 = 1.0;
    std::optional<double> lambda2;

    static ShapeParams ns(double lambda) {
        if (!(lambda > 0.0)) throw DomainError("shape parameter must be positive");
        return {Model::NS, lambda, std::nullopt};
    }

    static ShapeParams sv(double lambda1, double lambda2) {
        if (!(lambda1 > 0.0) || !(lambda2 > 0.0))
            throw DomainError("shape parameters must be positive");
        return {Model::SV, lambda1, lambda2};
    }

    /// Number of design columns: 3 for NS, 4 for SV.
    int num_columns() const { return model == Model::NS ? 3 : 4; }
};

/// Slope loading (1 - exp(-x))/x evaluated at x = tau/lambda.
/// Switches to the series 1 - x/2 + x^2/6 below x = 1e-4 where the
/// direct quotient cancels.
inline double slope_loading_at(double x) {
    if (x < 1e-4) return 1.0 - x / 2.0 + x * x / 6.0;
    return -std::expm1(-x) / x;
}

/// Curvature loading (1 - exp(-x))/x - exp(-x).
inline double curvature_loading_at(double x) {
    return slope_loading_at(x) - std::exp(-x);
}

/// Level, slope and curvature loadings for one maturity.
inline std::array<double, 3> ns_loadings(double tau, double lambda) {
    if (!(tau > 0.0)) throw DomainError("tau must be positive");
    if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
    const double x = tau / lambda;
    const double slope = slope_loading_at(x);
    return {1.0, slope, slope - std::exp(-x)};
}

/// Loading quadruple of the Svensson model. The first three entries equal
/// ns_loadings(tau, lambda1); the fourth is the curvature loading at
/// x = tau/lambda2.
inline std::array<double, 4> sv_loadings(double tau, const ShapeParams& shape) {
    if (shape.model != Model::SV || !shape.lambda2)
        throw ConfigError("sv_loadings requires a Svensson shape with lambda2");
    const auto base = ns_loadings(tau, shape.lambda1);
    return {base[0], base[1], base[2], curvature_loading_at(tau / *shape.lambda2)};
}

/// Loadings matrix of a maturity vector: column 0 is the intercept,
/// then slope, curvature and (SV only) the second curvature.
struct DesignMatrix {
    Eigen::MatrixXd values;          // n x p
    std::vector<double> maturities;  // ascending, size n
    ShapeParams shape;
    bool duplicate_maturities = false;
};

/// Builds the design matrix for the given maturities (sorted ascending).
/// Needs at least p distinct maturities to span the columns; the
/// estimators additionally demand n > p so the residual variance is
/// estimable. Duplicates are kept but flagged.
inline DesignMatrix build_design_matrix(std::vector<double> maturities,
                                        const ShapeParams& shape) {
    for (double tau : maturities)
        if (!(tau > 0.0)) throw DomainError("maturities must be positive");
    std::sort(maturities.begin(), maturities.end());

    const int p = shape.num_columns();
    const int n = static_cast<int>(maturities.size());
    int distinct = n == 0 ? 0 : 1;
    for (int i = 1; i < n; ++i)
        if (maturities[i] != maturities[i - 1]) ++distinct;
    if (distinct < p)
        throw InsufficientDataError("need at least " + std::to_string(p) +
                                    " distinct maturities, got " +
                                    std::to_string(distinct));

    DesignMatrix dm;
    dm.shape = shape;
    dm.duplicate_maturities = distinct != n;
    dm.values.resize(n, p);
    for (int i = 0; i < n; ++i) {
        if (shape.model == Model::NS) {
            const auto row = ns_loadings(maturities[i], shape.lambda1);
            for (int j = 0; j < 3; ++j) dm.values(i, j) = row[j];
        } else {
            const auto row = sv_loadings(maturities[i], shape);
            for (int j = 0; j < 4; ++j) dm.values(i, j) = row[j];
        }
    }
    dm.maturities = std::move(maturities);
    return dm;
}

/// Spot rate as the dot product of coefficients and loadings.
inline double spot_rate(const Eigen::VectorXd& beta, const Eigen::VectorXd& loadings) {
    if (beta.size() != loadings.size())
        throw DimensionError("coefficient and loading vectors differ in length");
    return beta.dot(loadings);
}

/// Fitted zero rate of a coefficient vector at one maturity.
inline double model_rate(const Eigen::VectorXd& beta, double tau, const ShapeParams& shape) {
    if (shape.model == Model::NS) {
        const auto l = ns_loadings(tau, shape.lambda1);
        if (beta.size() != 3) throw DimensionError("NS curve needs 3 coefficients");
        return beta[0] * l[0] + beta[1] * l[1] + beta[2] * l[2];
    }
    const auto l = sv_loadings(tau, shape);
    if (beta.size() != 4) throw DimensionError("SV curve needs 4 coefficients");
    return beta[0] * l[0] + beta[1] * l[1] + beta[2] * l[2] + beta[3] * l[3];
}

}  // namespace termfit
