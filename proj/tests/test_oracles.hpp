#pragma once

// Reference implementations used only by tests. These deliberately avoid
// the library's code paths: the normal cdf is a long-double Taylor series,
// its inverse is plain bisection, and the two-lognormal cdf is adaptive
// Simpson quadrature with a bisection root solve inside the integrand.

#include <cmath>
#include <functional>
#include <stdexcept>

namespace oracle {

// erf by Taylor series in long double; ample for |x| <= 5.
inline long double erf_series(long double x) {
    const long double two_over_sqrt_pi = 1.1283791670955125738961589L;
    long double term = x;
    long double sum = x;
    const long double x2 = x * x;
    for (int n = 1; n < 200; ++n) {
        term *= -x2 / n;
        const long double add = term / (2 * n + 1);
        sum += add;
        if (std::abs(add) < 1e-25L * std::abs(sum)) break;
    }
    return two_over_sqrt_pi * sum;
}

inline double norm_cdf(double y) {
    const long double inv_sqrt2 = 0.70710678118654752440084436L;
    return static_cast<double>(0.5L * (1.0L + erf_series(y * inv_sqrt2)));
}

inline double norm_pdf(double y) {
    const long double inv_sqrt_2pi = 0.39894228040143267793994606L;
    return static_cast<double>(inv_sqrt_2pi * std::exp(-0.5L * static_cast<long double>(y) *
                                                       static_cast<long double>(y)));
}

inline double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
    double flo = f(lo);
    if (flo > 0.0) throw std::runtime_error("oracle::bisect: bad bracket");
    for (int i = 0; i < 200 && hi - lo > tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) <= 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

inline double norm_quantile(double u) {
    // the Taylor-series cdf is accurate for |y| <= 8; ample bracket for the
    // central u this oracle is used with
    return bisect([u](double y) { return norm_cdf(y) - u; }, -8.0, 8.0, 1e-12);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive_simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    return adaptive_simpson(f, a, b, f(a), f(m), f(b), tol, 18);
}

// cdf of X = e^{Y0} + e^{Y1}, Y i.i.d. standard normal:
// F(t) = int_{e^s < t} Phi(xi(t,s)) rho(s) ds with xi found by bisection on
// e^{y0} + e^{s} - t (no Newton, no shared solver code).
inline double lognormal2_cdf(double t) {
    if (t <= 0.0) return 0.0;
    const double s_max = std::log(t);
    auto integrand = [t](double s) {
        const double rest = std::exp(s);
        if (rest >= t) return 0.0;
        const double xi = bisect([&](double y0) { return std::exp(y0) + rest - t; }, -46.0, 46.0,
                                 1e-13);
        return norm_cdf(xi) * norm_pdf(s);
    };
    const double lo = -10.0;
    const double hi = std::min(s_max, 10.0);
    if (hi <= lo) return 0.0;
    return integrate(integrand, lo, hi, 1e-10);
}

inline double lognormal2_pdf(double t, double h = 1e-4) {
    return (lognormal2_cdf(t + h) - lognormal2_cdf(t - h)) / (2.0 * h);
}

}  // namespace oracle
