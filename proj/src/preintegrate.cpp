#include "preint/preintegrate.hpp"

#include "preint/gaussian.hpp"
#include "preint/summation.hpp"

#include <atomic>
#include <cmath>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace preint {

namespace {

constexpr std::uint64_t kChunk = 4096;  // fixed, so sums never depend on worker count

struct Bracket {
    double lo = 0.0;
    double hi = 0.0;
    double start_x = 0.0;  // Newton start: a bracket endpoint with known,
    double start_f = 0.0;  // finite residual
    bool found = false;
    double hit = 0.0;  // probe landed within tol of the root
    bool hit_root = false;
};

// Grows [lo, hi] with eval(lo) < t <= eval(hi) by doubling steps away from
// the guess. Assumes the fiber is increasing and unbounded above. A probe
// whose residual is already within tol short-circuits as the root.
Bracket expand_bracket(const ModelFiber& fiber, double t, double x, double fx, double tol,
                       int max_expansions) {
    Bracket out;
    out.start_x = x;
    out.start_f = fx;
    double step = 1.0;
    if (fx > 0.0) {
        out.hi = x;
        for (int k = 0; k < max_expansions; ++k) {
            const double lo = x - step;
            const double flo = fiber.eval(lo) - t;
            if (std::abs(flo) <= tol) {
                out.hit = lo;
                out.hit_root = true;
                return out;
            }
            if (flo < 0.0) {
                out.lo = lo;
                out.start_x = lo;
                out.start_f = flo;
                out.found = true;
                return out;
            }
            out.hi = lo;
            out.start_x = lo;
            out.start_f = flo;
            step *= 2.0;
        }
        return out;
    }
    out.lo = x;
    for (int k = 0; k < max_expansions; ++k) {
        const double hi = x + step;
        const double fhi = fiber.eval(hi) - t;
        if (std::abs(fhi) <= tol) {
            out.hit = hi;
            out.hit_root = true;
            return out;
        }
        if (fhi >= 0.0) {
            out.hi = hi;
            out.found = true;
            if (std::isfinite(fhi)) {
                out.start_x = hi;
                out.start_f = fhi;
            }
            return out;
        }
        out.lo = hi;
        out.start_x = hi;
        out.start_f = fhi;
        step *= 2.0;
    }
    return out;
}

}  // namespace

RootResult find_xi(const ModelFiber& fiber, double t, const RootConfig& cfg) {
    RootResult result;

    const double lower = fiber.lower_limit();
    if (std::isfinite(lower) && t <= lower + cfg.tol) {
        result.status = RootStatus::no_root;
        return result;
    }

    double x = cfg.initial_guess;
    double fx = fiber.eval(x) - t;
    if (std::abs(fx) <= cfg.tol) {
        result.status = RootStatus::root;
        result.xi = x;
        return result;
    }

    Bracket bracket = expand_bracket(fiber, t, x, fx, cfg.tol, cfg.max_bracket_expansions);
    if (bracket.hit_root) {
        result.status = RootStatus::root;
        result.xi = bracket.hit;
        return result;
    }
    if (!bracket.found) {
        result.reason = "no bracket after " + std::to_string(cfg.max_bracket_expansions) +
                        " expansions (t=" + std::to_string(t) + ")";
        return result;
    }
    x = bracket.start_x;
    fx = bracket.start_f;

    for (int k = 1; k <= cfg.max_newton; ++k) {
        double next = x - fx / fiber.deriv(x);
        if (!(next > bracket.lo && next < bracket.hi)) {
            next = 0.5 * (bracket.lo + bracket.hi);
        }
        const double fnext = fiber.eval(next) - t;
        result.iterations = k;
        if (std::abs(fnext) <= cfg.tol) {
            result.status = RootStatus::root;
            result.xi = next;
            return result;
        }
        if (fnext > 0.0) {
            bracket.hi = next;
        } else {
            bracket.lo = next;
        }
        x = next;
        fx = fnext;
    }
    result.reason = "no convergence in " + std::to_string(cfg.max_newton) +
                    " iterations (t=" + std::to_string(t) + ")";
    return result;
}

Eigen::VectorXd batch_curve(const Model& model, EstimatorKind kind, const Eigen::VectorXd& nodes,
                            const TransformedPointSet& points, const RootConfig& cfg,
                            int workers) {
    const auto node_count = nodes.size();
    if (node_count == 0) throw std::invalid_argument("batch_curve: empty node list");
    if (points.dim() != model.dimension()) {
        throw std::invalid_argument("batch_curve: point dimension " +
                                    std::to_string(points.dim()) + " does not match model d=" +
                                    std::to_string(model.dimension()));
    }

    const std::uint64_t n_points = points.size();
    const std::uint64_t n_chunks = (n_points + kChunk - 1) / kChunk;
    std::vector<std::vector<CompensatedSum>> partials(
        n_chunks, std::vector<CompensatedSum>(static_cast<std::size_t>(node_count)));

    std::atomic<std::uint64_t> next_chunk{0};
    std::atomic<bool> has_error{false};
    std::mutex error_mutex;
    std::unique_ptr<EstimatorError> first_error;

    auto record_error = [&](const EstimatorError& e) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error || e.point_index < first_error->point_index) {
            first_error = std::make_unique<EstimatorError>(e);
        }
        has_error.store(true);
    };

    auto run = [&]() {
        const auto fiber = model.make_fiber();
        Eigen::VectorXd tau(points.dim());
        RootConfig local = cfg;
        std::uint64_t chunk;
        while ((chunk = next_chunk.fetch_add(1)) < n_chunks) {
            if (has_error.load()) return;
            auto& acc = partials[chunk];
            const std::uint64_t begin = chunk * kChunk;
            const std::uint64_t end = std::min(begin + kChunk, n_points);
            for (std::uint64_t n = begin; n < end; ++n) {
                points.point(n, tau);
                fiber->bind(tau);
                local.initial_guess = cfg.initial_guess;
                for (Eigen::Index m = 0; m < node_count; ++m) {
                    const RootResult root = find_xi(*fiber, nodes[m], local);
                    switch (root.status) {
                        case RootStatus::no_root:
                            break;  // indicator never fires on this fiber
                        case RootStatus::root: {
                            local.initial_guess = root.xi;  // warm start for the next node
                            if (kind == EstimatorKind::cdf) {
                                acc[static_cast<std::size_t>(m)].add(gaussian::cdf(root.xi));
                            } else {
                                const double slope = fiber->deriv(root.xi);
                                if (!(slope > 0.0)) {
                                    record_error(EstimatorError(
                                        "pdf estimator: nonpositive derivative at root "
                                        "(monotonicity breach) at point " +
                                            std::to_string(n),
                                        n, static_cast<int>(m)));
                                    return;
                                }
                                acc[static_cast<std::size_t>(m)].add(gaussian::pdf(root.xi) /
                                                                     slope);
                            }
                            break;
                        }
                        case RootStatus::failed:
                            record_error(EstimatorError("root search failed at point " +
                                                            std::to_string(n) + ": " +
                                                            root.reason,
                                                        n, static_cast<int>(m)));
                            return;
                    }
                }
            }
        }
    };

    if (workers <= 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(run);
        for (auto& th : pool) th.join();
    }
    if (first_error) throw *first_error;

    Eigen::VectorXd estimates(node_count);
    for (Eigen::Index m = 0; m < node_count; ++m) {
        CompensatedSum total;
        for (std::uint64_t c = 0; c < n_chunks; ++c) {
            total.merge(partials[c][static_cast<std::size_t>(m)]);
        }
        double value = total.value() / static_cast<double>(n_points);
        // Every term lies in [0,1] (cdf) or [0,inf) (pdf); pin the average
        // back into range against last-bit rounding of the merge.
        value = std::max(value, 0.0);
        if (kind == EstimatorKind::cdf) value = std::min(value, 1.0);
        estimates[m] = value;
    }
    return estimates;
}

double pointwise_cdf(const Model& model, double t, const TransformedPointSet& points,
                     const RootConfig& cfg, int workers) {
    Eigen::VectorXd node(1);
    node[0] = t;
    return batch_curve(model, EstimatorKind::cdf, node, points, cfg, workers)[0];
}

double pointwise_pdf(const Model& model, double t, const TransformedPointSet& points,
                     const RootConfig& cfg, int workers) {
    Eigen::VectorXd node(1);
    node[0] = t;
    return batch_curve(model, EstimatorKind::pdf, node, points, cfg, workers)[0];
}

}  // namespace preint
