#include "preint/interp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace preint {

ChebyshevGrid chebyshev_grid(double a, double b, int m) {
    if (!(a < b)) throw std::invalid_argument("chebyshev_grid: need a < b");
    if (m < 0) throw std::invalid_argument("chebyshev_grid: degree must be >= 0");

    ChebyshevGrid grid;
    grid.a = a;
    grid.b = b;
    grid.degree = m;
    grid.nodes.resize(m + 1);
    grid.bary_weights.resize(m + 1);
    if (m == 0) {
        grid.nodes[0] = 0.5 * (a + b);
        grid.bary_weights[0] = 1.0;
        return grid;
    }
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (int k = 0; k <= m; ++k) {
        grid.nodes[k] = mid + half * std::cos(k * std::numbers::pi / m);
        const double delta = (k == 0 || k == m) ? 0.5 : 1.0;
        grid.bary_weights[k] = (k % 2 == 0) ? delta : -delta;
    }
    // cos(0) and cos(pi) are exact, so the endpoints are hit exactly; pin
    // them against rounding in the affine map.
    grid.nodes[0] = b;
    grid.nodes[m] = a;
    return grid;
}

Interpolant::Interpolant(ChebyshevGrid grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.nodes.size()) {
        throw std::invalid_argument("Interpolant: values/nodes size mismatch");
    }
}

double Interpolant::operator()(double t) const {
    if (std::isnan(t)) throw std::invalid_argument("Interpolant: NaN argument");
    const auto n = grid_.nodes.size();
    double numer = 0.0;
    double denom = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double diff = t - grid_.nodes[k];
        if (diff == 0.0) return values_[k];
        const double w = grid_.bary_weights[k] / diff;
        numer += w * values_[k];
        denom += w;
    }
    return numer / denom;
}

double interp_error_bound(int sigma, int m, double l1_norm) {
    if (sigma < 1) throw std::invalid_argument("interp_error_bound: sigma must be >= 1");
    if (m <= sigma) throw std::invalid_argument("interp_error_bound: need M > sigma");
    if (l1_norm < 0.0) throw std::invalid_argument("interp_error_bound: negative norm");
    return 4.0 * l1_norm / (std::numbers::pi * sigma * std::pow(m - sigma, sigma));
}

}  // namespace preint
