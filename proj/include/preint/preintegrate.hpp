#pragma once

#include "preint/lattice.hpp"
#include "preint/model.hpp"

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace preint {

struct RootConfig {
    double tol = 1e-10;  // |phi(xi) - t| stopping threshold
    int max_newton = 100;
    int max_bracket_expansions = 60;
    double initial_guess = 0.0;
};

enum class RootStatus { root, no_root, failed };

struct RootResult {
    RootStatus status = RootStatus::failed;
    double xi = 0.0;
    int iterations = 0;
    std::string reason;  // set on failed
};

/// Solves phi(xi, y) = t on a bound fiber by safeguarded Newton iteration:
/// a bracket is grown geometrically from the initial guess, and Newton
/// steps that leave the current bracket are replaced by bisection.
/// Returns no_root iff t <= fiber.lower_limit() + tol.
[[nodiscard]] RootResult find_xi(const ModelFiber& fiber, double t, const RootConfig& cfg);

enum class EstimatorKind { cdf, pdf };

/// Numerical failure inside an estimator loop, tagged with the offending
/// point (and node, in batch mode).
class EstimatorError : public std::runtime_error {
  public:
    EstimatorError(const std::string& what, std::uint64_t point_index, int node_index)
        : std::runtime_error(what), point_index(point_index), node_index(node_index) {}

    std::uint64_t point_index;
    int node_index;
};

/// Per-node estimates over a common point set. Each point's fiber is bound
/// once and reused for every node; the root search at node m+1 warm-starts
/// from the root found at node m. Accumulation is compensated in fixed
/// 4096-point chunks merged in index order, so the result is bitwise
/// independent of the worker count.
[[nodiscard]] Eigen::VectorXd batch_curve(const Model& model, EstimatorKind kind,
                                          const Eigen::VectorXd& nodes,
                                          const TransformedPointSet& points,
                                          const RootConfig& cfg, int workers = 1);

/// Single-node estimators (Algorithms with one t): cdf averages
/// Phi0(xi(t, tau_n)), pdf averages rho0(xi)/D0phi(xi, tau_n); points whose
/// fiber never reaches t contribute 0.
[[nodiscard]] double pointwise_cdf(const Model& model, double t,
                                   const TransformedPointSet& points, const RootConfig& cfg,
                                   int workers = 1);
[[nodiscard]] double pointwise_pdf(const Model& model, double t,
                                   const TransformedPointSet& points, const RootConfig& cfg,
                                   int workers = 1);

}  // namespace preint
