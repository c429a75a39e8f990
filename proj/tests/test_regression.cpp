#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "termfit/curve_basis.hpp"
#include "termfit/regression.hpp"

using namespace termfit;

TEST_CASE("ols recovers exact linear data", "[regression]") {
    std::mt19937_64 rng(1001);
    const Eigen::MatrixXd x = oracle::random_design(rng, 10, 3);
    Eigen::VectorXd truth(3);
    truth << 1.0, 2.0, -3.0;
    const Eigen::VectorXd y = x * truth;

    const FitResult fit = ols_fit(x, y);
    CHECK((fit.beta - truth).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK(fit.sse < 1e-20);
    CHECK(fit.sigma2 < 1e-20);
    CHECK(fit.method == Method::Ols);
    CHECK(fit.k == 0.0);
    CHECK_FALSE(fit.raised_index.has_value());
}

TEST_CASE("ols intercept-only fit is the mean", "[regression]") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Ones(3, 1);
    Eigen::VectorXd y(3);
    y << 1.0, 2.0, 3.0;
    const FitResult fit = ols_fit(x, y);
    CHECK_THAT(fit.beta(0), Catch::Matchers::WithinAbs(2.0, 1e-12));
    CHECK_THAT(fit.sse, Catch::Matchers::WithinAbs(2.0, 1e-12));
}

TEST_CASE("ols rejects singular and undersized designs", "[regression]") {
    SECTION("degenerate sv design, lambda1 == lambda2") {
        const auto dm = build_design_matrix({0.25, 0.5, 1.0, 2.0, 5.0, 10.0},
                                            ShapeParams::sv(2.0, 2.0));
        Eigen::VectorXd y = Eigen::VectorXd::Constant(6, 0.02);
        try {
            ols_fit(dm, y);
            FAIL("expected SingularDesignError");
        } catch (const SingularDesignError& e) {
            // the two identical curvature columns carry the dependency
            CHECK(e.columns == std::vector<int>{2, 3});
        }
    }
    SECTION("n <= p") {
        Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 3);
        Eigen::VectorXd y = Eigen::VectorXd::Random(3);
        CHECK_THROWS_AS(ols_fit(x, y), InsufficientDataError);
    }
    SECTION("length mismatch") {
        Eigen::MatrixXd x = Eigen::MatrixXd::Random(8, 3);
        Eigen::VectorXd y = Eigen::VectorXd::Random(7);
        CHECK_THROWS_AS(ols_fit(x, y), DimensionError);
    }
}

TEST_CASE("ols matches the normal-equations oracle", "[regression]") {
    std::mt19937_64 rng(1002);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int p = 2 + static_cast<int>(rng() % 3);  // p in {2,3,4}
        const Eigen::MatrixXd x = oracle::random_design(rng, 15, p);
        Eigen::VectorXd y(15);
        for (int i = 0; i < 15; ++i) y(i) = g(rng);

        const FitResult fit = ols_fit(x, y);
        const auto ref = oracle::normal_equations(x, y);
        const Eigen::VectorXd ref_se = oracle::ols_std_errors(x, y);

        REQUIRE((fit.beta - ref.beta).lpNorm<Eigen::Infinity>() < 1e-8);
        REQUIRE_THAT(fit.sse, Catch::Matchers::WithinRel(ref.sse, 1e-10));
        REQUIRE((fit.std_errors - ref_se).lpNorm<Eigen::Infinity>() < 1e-8);

        // normal equations: residuals orthogonal to every column
        const Eigen::VectorXd resid = y - fit.fitted;
        REQUIRE((x.transpose() * resid).lpNorm<Eigen::Infinity>() < 1e-8);
    }
}

TEST_CASE("ridge at k = 0 reproduces ols", "[regression]") {
    std::mt19937_64 rng(1003);
    std::normal_distribution<double> g(0.0, 1.0);
    const Eigen::MatrixXd x = oracle::random_design(rng, 12, 3);
    Eigen::VectorXd y(12);
    for (int i = 0; i < 12; ++i) y(i) = 0.02 + 0.01 * g(rng);

    const FitResult ols = ols_fit(x, y);
    const FitResult ridge = ridge_fit(x, y, 0.0);
    CHECK(ridge.method == Method::Ridge);
    CHECK((ridge.beta - ols.beta).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK((ridge.std_errors - ols.std_errors).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK_THAT(ridge.sse, Catch::Matchers::WithinRel(ols.sse, 1e-10));
}

TEST_CASE("ridge sandwich matches ols covariance through the back-transform", "[regression]") {
    // with positive k the standardized sandwich still reduces correctly:
    // probe k = tiny against OLS
    std::mt19937_64 rng(1004);
    std::normal_distribution<double> g(0.0, 1.0);
    const Eigen::MatrixXd x = oracle::random_design(rng, 20, 4);
    Eigen::VectorXd y(20);
    for (int i = 0; i < 20; ++i) y(i) = g(rng);
    const FitResult almost_ols = ridge_fit(x, y, 1e-14);
    const FitResult ols = ols_fit(x, y);
    CHECK((almost_ols.std_errors - ols.std_errors).lpNorm<Eigen::Infinity>() < 1e-7);
}

TEST_CASE("ridge total shrinkage limit", "[regression]") {
    std::mt19937_64 rng(1005);
    std::normal_distribution<double> g(0.0, 1.0);
    const Eigen::MatrixXd x = oracle::random_design(rng, 12, 3);
    Eigen::VectorXd y(12);
    for (int i = 0; i < 12; ++i) y(i) = 0.05 + 0.02 * g(rng);

    const FitResult fit = ridge_fit(x, y, 1e12);
    CHECK(std::abs(fit.beta(1)) < 1e-8);
    CHECK(std::abs(fit.beta(2)) < 1e-8);
    CHECK_THAT(fit.beta(0), Catch::Matchers::WithinAbs(y.mean(), 1e-8));
}

TEST_CASE("ridge sse is nondecreasing in k and bounded below by ols", "[regression]") {
    std::mt19937_64 rng(1006);
    std::normal_distribution<double> g(0.0, 1.0);
    const Eigen::MatrixXd x = oracle::random_design(rng, 15, 3);
    Eigen::VectorXd y(15);
    for (int i = 0; i < 15; ++i) y(i) = g(rng);

    const double sse_ols = ols_fit(x, y).sse;
    double prev = -1.0;
    for (double k : {0.0, 0.001, 0.01, 0.1, 1.0}) {
        const double sse = ridge_fit(x, y, k).sse;
        REQUIRE(sse >= sse_ols - 1e-12);
        REQUIRE(sse >= prev - 1e-12);
        prev = sse;
    }
    CHECK(ridge_fit(x, y, 0.01).sse >= sse_ols);
}

TEST_CASE("ridge rejects negative k", "[regression]") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Ones(5, 2);
    x.col(1) << 1, 2, 3, 4, 5;
    Eigen::VectorXd y = Eigen::VectorXd::Random(5);
    CHECK_THROWS_AS(ridge_fit(x, y, -0.1), DomainError);
}

TEST_CASE("auxiliary residuals are orthogonal to the remaining columns", "[regression]") {
    std::mt19937_64 rng(1007);
    for (int trial = 0; trial < 30; ++trial) {
        const Eigen::MatrixXd x = oracle::random_design(rng, 12, 3);
        for (int i = 1; i < 3; ++i) {
            const Eigen::VectorXd e = auxiliary_residuals(x, i);
            Eigen::MatrixXd rest(12, 2);
            Eigen::Index c = 0;
            for (Eigen::Index l = 0; l < 3; ++l)
                if (l != i) rest.col(c++) = x.col(l);
            const double scale = x.col(i).norm();
            REQUIRE((rest.transpose() * e).lpNorm<Eigen::Infinity>() < 1e-8 * scale);

            // independent normal-equations residual
            const auto aux = oracle::normal_equations(rest, x.col(i));
            REQUIRE((e - (x.col(i) - aux.fitted)).lpNorm<Eigen::Infinity>() < 1e-10);
        }
    }
}

TEST_CASE("auxiliary residuals special cases", "[regression]") {
    SECTION("column orthogonal to the others and mean-zero is untouched") {
        Eigen::MatrixXd x(4, 3);
        x.col(0).setOnes();
        x.col(1) << 1, 1, -1, -1;
        x.col(2) << 1, -1, 1, -1;  // orthogonal to both, mean zero
        const Eigen::VectorXd e = auxiliary_residuals(x, 2);
        CHECK((e - x.col(2)).lpNorm<Eigen::Infinity>() < 1e-12);
    }
    SECTION("exact linear combination gives a zero residual") {
        std::mt19937_64 rng(1008);
        Eigen::MatrixXd x = oracle::random_design(rng, 10, 3);
        x.col(2) = 2.0 * x.col(0) - 0.5 * x.col(1);
        const Eigen::VectorXd e = auxiliary_residuals(x, 2);
        CHECK(e.lpNorm<Eigen::Infinity>() < 1e-10);
    }
    SECTION("the intercept cannot be the target") {
        std::mt19937_64 rng(1009);
        const Eigen::MatrixXd x = oracle::random_design(rng, 10, 3);
        CHECK_THROWS_AS(auxiliary_residuals(x, 0), UnsupportedOperationError);
        CHECK_THROWS_AS(auxiliary_residuals(x, 3), DimensionError);
    }
}

TEST_CASE("raise transform geometry", "[regression]") {
    std::mt19937_64 rng(1010);
    const Eigen::MatrixXd x = oracle::near_collinear_design(rng, 12, 3, 0.05);

    SECTION("k = 0 reproduces the design exactly") {
        const RaiseTransform rt = raise_matrix(x, 2, 0.0);
        CHECK(rt.raised == x);
        CHECK(rt.raisable);
    }
    SECTION("the angle to the other columns is nondecreasing in k") {
        double prev_cos = 1.1;
        for (double k : {0.0, 1.0, 10.0}) {
            const RaiseTransform rt = raise_matrix(x, 2, k);
            const double c = oracle::cos_principal_angle(rt.raised, 2);
            REQUIRE(c <= prev_cos + 1e-12);
            prev_cos = c;
        }
    }
    SECTION("exactly dependent column is flagged unraisable") {
        Eigen::MatrixXd bad = x;
        bad.col(2) = bad.col(0) + 3.0 * bad.col(1);
        const RaiseTransform rt = raise_matrix(bad, 2, 5.0);
        CHECK_FALSE(rt.raisable);
        CHECK((rt.raised - bad).lpNorm<Eigen::Infinity>() < 1e-9);
    }
    SECTION("negative k is rejected") {
        CHECK_THROWS_AS(raise_matrix(x, 2, -1.0), DomainError);
    }
}

TEST_CASE("raise fit identities", "[regression]") {
    std::mt19937_64 rng(1011);
    std::normal_distribution<double> g(0.0, 1.0);

    for (int trial = 0; trial < 40; ++trial) {
        const int p = 3 + static_cast<int>(rng() % 2);
        const Eigen::MatrixXd x = oracle::near_collinear_design(rng, 15, p, 0.1);
        Eigen::VectorXd y(15);
        for (int i = 0; i < 15; ++i) y(i) = g(rng);
        const int column = 1 + static_cast<int>(rng() % (p - 1));
        const double k = std::uniform_real_distribution<double>(0.0, 10.0)(rng);

        const FitResult ols = ols_fit(x, y);
        const FitResult raised = raise_fit(x, y, column, k);

        REQUIRE(raised.method == Method::Raise);
        REQUIRE(raised.raised_index == column);
        REQUIRE(raised.k == k);

        // span unchanged: fitted values and SSE match OLS
        const double fit_scale = ols.fitted.lpNorm<Eigen::Infinity>();
        REQUIRE((raised.fitted - ols.fitted).lpNorm<Eigen::Infinity>() < 1e-9 * fit_scale);
        REQUIRE_THAT(raised.sse, Catch::Matchers::WithinRel(ols.sse, 1e-10));

        // raised coefficient absorbs exactly the (1+k) factor
        REQUIRE_THAT(raised.beta(column) * (1.0 + k),
                     Catch::Matchers::WithinAbs(ols.beta(column), 1e-8));
    }
}

TEST_CASE("raise fit at k = 0 equals ols", "[regression]") {
    std::mt19937_64 rng(1012);
    std::normal_distribution<double> g(0.0, 1.0);
    const Eigen::MatrixXd x = oracle::random_design(rng, 12, 3);
    Eigen::VectorXd y(12);
    for (int i = 0; i < 12; ++i) y(i) = g(rng);

    const FitResult ols = ols_fit(x, y);
    const FitResult raised = raise_fit(x, y, 1, 0.0);
    CHECK((raised.beta - ols.beta).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK_THAT(raised.sse, Catch::Matchers::WithinRel(ols.sse, 1e-12));
}
