#include "preint/gaussian.hpp"

#include "test_oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using preint::gaussian::cdf;
using preint::gaussian::pdf;
using preint::gaussian::quantile;

TEST_SUITE_BEGIN("gaussian");

TEST_CASE("pdf reference values") {
    CHECK(pdf(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-15));
    // frozen from the long-double oracle: e^{-1/2}/sqrt(2*pi)
    CHECK(oracle::norm_pdf(1.0) == doctest::Approx(0.24197072451914337).epsilon(1e-15));
    CHECK(pdf(1.0) == doctest::Approx(0.24197072451914337).epsilon(1e-14));
    for (double y = -6.0; y <= 6.0; y += 0.37) {
        CHECK(pdf(y) == pdf(-y));
    }
}

TEST_CASE("cdf reference values and symmetry") {
    CHECK(cdf(0.0) == 0.5);
    CHECK(oracle::norm_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-15));
    CHECK(cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-14));
    for (double y = 0.0; y <= 6.0; y += 0.11) {
        CHECK(std::abs(cdf(-y) - (1.0 - cdf(y))) <= 1e-14);
    }
    // against the series oracle across the accuracy interval
    for (double y = -5.0; y <= 5.0; y += 0.23) {
        CHECK(std::abs(cdf(y) - oracle::norm_cdf(y)) <= 1e-14);
    }
}

TEST_CASE("quantile reference values") {
    CHECK(quantile(0.5) == 0.0);
    CHECK(std::abs(quantile(0.8413447460685429) - 1.0) <= 1e-8);
    CHECK(std::abs(quantile(0.8413447460685429) - oracle::norm_quantile(0.8413447460685429)) <=
          1e-8);
    for (double u = 0.01; u < 0.5; u += 0.037) {
        CHECK(std::abs(quantile(u) + quantile(1.0 - u)) <= 1e-10);
    }
    CHECK_THROWS_AS((void)quantile(0.0), std::domain_error);
    CHECK_THROWS_AS((void)quantile(1.0), std::domain_error);
    CHECK_THROWS_AS((void)quantile(-0.5), std::domain_error);
}

TEST_CASE("round trip quantile(cdf(y))") {
    for (int i = 0; i <= 10000; ++i) {
        const double y = -6.0 + 12.0 * i / 10000.0;
        CHECK(std::abs(quantile(cdf(y)) - y) <= 1e-8);
    }
}

TEST_CASE("cdf/pdf derivative consistency") {
    const double h = 1e-5;
    for (double y = -4.0; y <= 4.0; y += 0.057) {
        const double fd = (cdf(y + h) - cdf(y - h)) / (2.0 * h);
        CHECK(std::abs(fd - pdf(y)) <= 1e-6);
    }
}

TEST_CASE("monotonicity on dense grids") {
    double prev = cdf(-8.0);
    for (int i = 1; i <= 20000; ++i) {
        const double y = -8.0 + 16.0 * i / 20000.0;
        const double c = cdf(y);
        CHECK(c >= prev);
        prev = c;
    }
    prev = quantile(1e-9);
    for (int i = 1; i <= 20000; ++i) {
        const double u = 1e-9 + (1.0 - 2e-9) * i / 20000.0;
        const double q = quantile(u);
        CHECK(q > prev);
        prev = q;
    }
}

TEST_SUITE_END();
