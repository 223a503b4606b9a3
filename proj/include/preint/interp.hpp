#pragma once

#include <Eigen/Core>
#include <utility>

namespace preint {

/// Chebyshev points of the second kind on [a, b] (endpoints included),
/// listed in decreasing order, with their barycentric weights.
struct ChebyshevGrid {
    double a = 0.0;
    double b = 1.0;
    int degree = 0;            // M; the grid has M+1 nodes
    Eigen::VectorXd nodes;     // node k = (a+b)/2 + (b-a)/2 * cos(k*pi/M)
    Eigen::VectorXd bary_weights;  // (-1)^k * delta_k, delta = 1/2 at endpoints
};

[[nodiscard]] ChebyshevGrid chebyshev_grid(double a, double b, int m);

/// Polynomial interpolant of the values at the grid nodes, evaluated in
/// barycentric form. Exact (bitwise) at the nodes; evaluation outside
/// [a, b] extrapolates the same formula.
class Interpolant {
  public:
    Interpolant() = default;
    Interpolant(ChebyshevGrid grid, Eigen::VectorXd values);

    [[nodiscard]] double operator()(double t) const;

    [[nodiscard]] const ChebyshevGrid& grid() const { return grid_; }
    [[nodiscard]] const Eigen::VectorXd& values() const { return values_; }
    [[nodiscard]] bool extrapolates(double t) const { return t < grid_.a || t > grid_.b; }

  private:
    ChebyshevGrid grid_;
    Eigen::VectorXd values_;
};

/// Chebyshev interpolation error bound 4*|g^(sigma+1)|_L1 / (pi*sigma*(M-sigma)^sigma)
/// for M > sigma >= 1.
[[nodiscard]] double interp_error_bound(int sigma, int m, double l1_norm);

}  // namespace preint
