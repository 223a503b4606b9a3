#include "preint/model.hpp"

#include "preint/gaussian.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>

using namespace preint;

namespace {

Eigen::VectorXd random_vector(int d, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<> normal(0.0, scale);
    Eigen::VectorXd y(d);
    for (int j = 0; j < d; ++j) y[j] = normal(rng);
    return y;
}

}  // namespace

TEST_SUITE_BEGIN("model");

TEST_CASE("covariance builders") {
    const auto spec = CovarianceSpec::parse("equicorr:3:1:0.5");
    const auto sigma = covariance_matrix(spec);
    CHECK(sigma(0, 0) == 1.0);
    CHECK(sigma(1, 2) == 0.5);
    CHECK(sigma(2, 1) == 0.5);

    const auto recip = covariance_matrix(CovarianceSpec::parse("recipmax:4"));
    CHECK(recip(0, 0) == 1.0);
    CHECK(recip(2, 3) == 0.25);
    CHECK(recip(3, 2) == 0.25);
    CHECK(recip(1, 1) == 0.5);

    CHECK(CovarianceSpec::parse("dense:some/file.txt").path == "some/file.txt");
    CHECK_THROWS_AS(CovarianceSpec::parse("equicorr:3"), std::invalid_argument);
    CHECK_THROWS_AS(CovarianceSpec::parse("recipmax:0"), std::invalid_argument);
    CHECK_THROWS_AS(CovarianceSpec::parse("nonsense"), std::invalid_argument);
}

TEST_CASE("pca_factorize 2x2 equicorrelated") {
    Eigen::MatrixXd sigma(2, 2);
    sigma << 1.0, 0.5, 0.5, 1.0;
    const auto factor = pca_factorize(sigma);
    CHECK(factor.eigenvalues[0] == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(factor.eigenvalues[1] == doctest::Approx(0.5).epsilon(1e-14));
    const double s34 = std::sqrt(0.75);
    CHECK(factor.a(0, 0) == doctest::Approx(s34).epsilon(1e-12));
    CHECK(factor.a(1, 0) == doctest::Approx(s34).epsilon(1e-12));
    CHECK(factor.a(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(factor.a(1, 1) == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("pca_factorize identity") {
    const auto factor = pca_factorize(Eigen::MatrixXd::Identity(3, 3));
    CHECK((factor.a * factor.a.transpose() - Eigen::MatrixXd::Identity(3, 3))
              .cwiseAbs()
              .maxCoeff() <= 1e-14);
    for (int k = 0; k < 3; ++k) CHECK(factor.eigenvalues[k] == doctest::Approx(1.0));
}

TEST_CASE("pca residuals for the shipped covariance families") {
    for (const char* text : {"equicorr:32:1:0.5", "recipmax:64", "equicorr:16:1:0.5"}) {
        const auto sigma = covariance_matrix(CovarianceSpec::parse(text));
        const auto factor = pca_factorize(sigma);
        CHECK((factor.a * factor.a.transpose() - sigma).cwiseAbs().maxCoeff() <= 1e-10);
        for (Eigen::Index k = 1; k < factor.eigenvalues.size(); ++k) {
            CHECK(factor.eigenvalues[k] <= factor.eigenvalues[k - 1] + 1e-14);
        }
        CHECK(check_monotone(factor).ok);
    }
}

TEST_CASE("pca_factorize input validation") {
    Eigen::MatrixXd asym(2, 2);
    asym << 1.0, 0.2, 0.3, 1.0;
    CHECK_THROWS_AS(pca_factorize(asym), std::invalid_argument);

    Eigen::MatrixXd indef(2, 2);
    indef << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3, -1
    CHECK_THROWS_AS(pca_factorize(indef), std::invalid_argument);

    CHECK_THROWS_AS(pca_factorize(Eigen::MatrixXd::Ones(2, 3)), std::invalid_argument);
}

TEST_CASE("check_monotone diagnostics") {
    const auto good = pca_factorize(covariance_matrix(CovarianceSpec::parse("equicorr:8:1:0.5")));
    CHECK(check_monotone(good).ok);

    FactorMatrix bad = good;
    bad.a(0, 0) = -0.1;
    const auto check = check_monotone(bad);
    CHECK_FALSE(check.ok);
    REQUIRE(check.offending_rows.size() == 1);
    CHECK(check.offending_rows[0] == 0);

    FactorMatrix zero = good;
    zero.a.col(0).setZero();
    const auto zcheck = check_monotone(zero);
    CHECK_FALSE(zcheck.ok);
    CHECK(zcheck.message.find("independent of y0") != std::string::npos);
}

TEST_CASE("lognormal model evaluation") {
    FactorMatrix unit;
    unit.a = Eigen::MatrixXd::Identity(1, 1);
    const LognormalSumModel scalar(unit);
    CHECK(scalar.dimension() == 0);
    CHECK(scalar.phi(0.0, Eigen::VectorXd(0)) == 1.0);
    CHECK(scalar.dphi0(0.0, Eigen::VectorXd(0)) == 1.0);

    FactorMatrix eye2;
    eye2.a = Eigen::MatrixXd::Identity(2, 2);
    const LognormalSumModel model(eye2);
    Eigen::VectorXd y(1);
    y << 0.0;
    CHECK(model.phi(1.0, y) == doctest::Approx(3.718281828459045).epsilon(1e-15));

    const auto fiber = model.make_fiber();
    y << 0.3;
    fiber->bind(y);
    CHECK(fiber->eval(0.0) == doctest::Approx(1.0 + 1.3498588075760032).epsilon(1e-14));
    CHECK(fiber->lower_limit() == doctest::Approx(std::exp(0.3)).epsilon(1e-15));
}

TEST_CASE("lognormal rejects non-monotone factors") {
    FactorMatrix bad;
    bad.a = Eigen::MatrixXd::Identity(2, 2);
    bad.a(0, 0) = -1.0;
    CHECK_THROWS_AS(LognormalSumModel{bad}, std::invalid_argument);
}

TEST_CASE("linear gaussian model") {
    Eigen::VectorXd c1(1);
    c1 << 1.0;
    const LinearGaussianModel unit(c1, 0.0);
    CHECK(unit.exact_cdf(0.7) == gaussian::cdf(0.7));

    Eigen::VectorXd c2(2);
    c2 << 2.0, 0.0;
    const LinearGaussianModel two(c2, 1.0);
    const auto fiber = two.make_fiber();
    Eigen::VectorXd y(1);
    y << 123.0;  // dead coordinate
    fiber->bind(y);
    // phi(xi) = t solved by xi = (t-1)/2 regardless of y
    CHECK(fiber->eval(0.5 * (3.0 - 1.0)) == 3.0);
    CHECK(fiber->deriv(0.0) == 2.0);

    Eigen::VectorXd c11(2);
    c11 << 1.0, 1.0;
    const LinearGaussianModel sym(c11, 0.0);
    CHECK(sym.exact_cdf(0.0) == 0.5);

    Eigen::VectorXd neg(1);
    neg << -1.0;
    CHECK_THROWS_AS(LinearGaussianModel(neg, 0.0), std::invalid_argument);
}

TEST_CASE("fiber consistency against phi on random points") {
    const auto factor = pca_factorize(covariance_matrix(CovarianceSpec::parse("equicorr:8:1:0.5")));
    const LognormalSumModel model(factor);
    const auto fiber = model.make_fiber();
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto y = random_vector(model.dimension(), rng);
        const double y0 = random_vector(1, rng)[0];
        fiber->bind(y);
        CHECK(fiber->eval(y0) == doctest::Approx(model.phi(y0, y)).epsilon(1e-12));
        CHECK(fiber->deriv(y0) == doctest::Approx(model.dphi0(y0, y)).epsilon(1e-12));
    }
}

TEST_CASE("derivative matches central differences") {
    const auto factor = pca_factorize(covariance_matrix(CovarianceSpec::parse("recipmax:8")));
    const LognormalSumModel model(factor);
    std::mt19937_64 rng(32);
    const double h = 1e-6;
    for (int trial = 0; trial < 200; ++trial) {
        const auto y = random_vector(model.dimension(), rng);
        const double y0 = random_vector(1, rng)[0];
        const double fd = (model.phi(y0 + h, y) - model.phi(y0 - h, y)) / (2.0 * h);
        const double exact = model.dphi0(y0, y);
        CHECK(std::abs(fd - exact) <= 1e-5 * (1.0 + std::abs(exact)));
    }
}

TEST_CASE("fibers are strictly increasing in y0") {
    const auto factor = pca_factorize(covariance_matrix(CovarianceSpec::parse("equicorr:6:1:0.5")));
    const LognormalSumModel model(factor);
    const auto fiber = model.make_fiber();
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 100; ++trial) {
        fiber->bind(random_vector(model.dimension(), rng));
        double prev = fiber->eval(-3.0);
        for (double y0 = -2.5; y0 <= 3.0; y0 += 0.5) {
            const double v = fiber->eval(y0);
            CHECK(v > prev);
            prev = v;
        }
    }
}

TEST_CASE("fiber cost contract: exp calls per eval stay O(d+1)") {
    const auto factor = pca_factorize(covariance_matrix(CovarianceSpec::parse("equicorr:16:1:0.5")));
    const LognormalSumModel model(factor);
    const auto fiber = model.make_fiber();
    std::mt19937_64 rng(34);
    fiber->bind(random_vector(model.dimension(), rng));

    // LognormalFiber is internal; observe the contract through counters on
    // the base class plus timing-free eval accounting: repeated evals must
    // not trigger rebinds.
    const auto binds_before = fiber->bind_count();
    for (int i = 0; i < 1000; ++i) (void)fiber->eval(0.1 * i);
    CHECK(fiber->bind_count() == binds_before);
    CHECK(fiber->eval_count() >= 1000);
}

TEST_CASE("load_covariance round trip") {
    const std::string path = "model_test_cov.txt";
    {
        std::ofstream out(path);
        out << "2\n1.0 0.25\n0.25 1.0\n";
    }
    const auto sigma = load_covariance(path);
    CHECK(sigma(0, 1) == 0.25);
    const auto factor = pca_factorize(sigma);
    CHECK((factor.a * factor.a.transpose() - sigma).cwiseAbs().maxCoeff() <= 1e-12);
    std::remove(path.c_str());

    {
        std::ofstream out(path);
        out << "3\n1 0 0\n0 1\n";
    }
    CHECK_THROWS_AS((void)load_covariance(path), std::runtime_error);
    std::remove(path.c_str());
    CHECK_THROWS_AS((void)load_covariance("missing_cov_file.txt"), std::runtime_error);
}

TEST_SUITE_END();
