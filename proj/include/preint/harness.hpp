#pragma once

#include "preint/interp.hpp"
#include "preint/lattice.hpp"
#include "preint/model.hpp"
#include "preint/preintegrate.hpp"

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace preint {

struct HarnessConfig {
    RootConfig root;
    int workers = 1;
};

/// Shift-averaged estimate of F(t) or f(t): the estimator value under each
/// random shift, their mean, and the standard error of the mean.
struct PointEstimate {
    Eigen::VectorXd per_shift;
    double mean = 0.0;
    double std_error = 0.0;  // sample std over shifts / sqrt(R); 0 when R = 1
    double rel_rmse = std::numeric_limits<double>::quiet_NaN();  // std_error/|mean|
    double wall_time_s = 0.0;
};

/// QMC with preintegration at a single t, averaged over r random shifts.
[[nodiscard]] PointEstimate estimate_point(const Model& model, EstimatorKind kind, double t,
                                           const GeneratingVector& z, std::uint64_t n, int r,
                                           std::uint64_t seed, const HarnessConfig& cfg = {});

/// Plain QMC baseline: the lattice rule applied directly to ind(t - phi)
/// over d+1 dimensions, no preintegration. cdf only.
[[nodiscard]] PointEstimate estimate_point_plain(const Model& model, double t,
                                                 const GeneratingVector& z, std::uint64_t n,
                                                 int r, std::uint64_t seed,
                                                 const HarnessConfig& cfg = {});

/// Plain Monte Carlo cdf baseline over one pool of total_samples i.i.d.
/// standard normal vectors; std_error is the sample std over the pool
/// divided by sqrt(total_samples). There is no MC pdf baseline: without
/// preintegration the density integrand is a distribution, not a function.
[[nodiscard]] PointEstimate mc_baseline(const Model& model, double t, std::uint64_t total_samples,
                                        std::uint64_t seed);

/// Interpolated curve estimate on [a, b]: Chebyshev node values per shift,
/// their average as the reported curve.
struct CurveEstimate {
    Interpolant curve;  // node values averaged over shifts
    std::vector<Interpolant> per_shift;
    EstimatorKind kind = EstimatorKind::cdf;
    double a = 0.0;
    double b = 1.0;
    std::uint64_t n = 0;
    int m = 0;
    std::uint64_t seed = 0;
    double wall_time_s = 0.0;
};

[[nodiscard]] CurveEstimate estimate_curve(const Model& model, EstimatorKind kind, double a,
                                           double b, int m, const GeneratingVector& z,
                                           std::uint64_t n, int r, std::uint64_t seed,
                                           const HarnessConfig& cfg = {});

/// sqrt of the mean over the curve's shifts of the L2 distance squared to
/// the reference's mean curve, integrated by composite Gauss-Legendre with
/// quad_points nodes. Throws if the intervals differ.
[[nodiscard]] double estimate_rmise(const CurveEstimate& curve, const CurveEstimate& reference,
                                    int quad_points = 256);

struct QuadratureRule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] (Golub-Welsch).
[[nodiscard]] QuadratureRule gauss_legendre(int n);

/// Composite rule on [a, b] built from 8-point panels, total_points nodes.
[[nodiscard]] QuadratureRule composite_gauss_legendre(double a, double b, int total_points);

struct StudyRow {
    std::string method;
    std::uint64_t n = 0;
    int m = -1;  // interpolation degree; -1 for pointwise rows
    std::string t_or_interval;
    double estimate = std::numeric_limits<double>::quiet_NaN();
    double std_error = std::numeric_limits<double>::quiet_NaN();
    double rel_rmse = std::numeric_limits<double>::quiet_NaN();
    double rmise = std::numeric_limits<double>::quiet_NaN();
    std::string slope;  // per-method fitted slope, "exact" or "nan"
    double wall_time_s = 0.0;
    bool failed = false;
    std::string failure;
};

struct ConvergenceReport {
    std::vector<StudyRow> rows;
    std::map<std::string, std::string> slopes;
    std::uint64_t slope_min_n = 4096;  // pre-asymptotic rows below this are not fitted
};

struct StudyConfig {
    std::vector<std::uint64_t> n_list;       // strictly increasing, doubling
    std::vector<std::string> methods;        // subset of {mc, qmc_plain, qmc_preint}
    EstimatorKind kind = EstimatorKind::cdf;
    double t = 0.0;
    int r = 8;
    std::uint64_t seed = 1;
};

[[nodiscard]] ConvergenceReport convergence_study(const Model& model, const StudyConfig& study,
                                                  const GeneratingVector& z,
                                                  const HarnessConfig& cfg = {});

struct RmiseStudyConfig {
    std::vector<std::uint64_t> n_list;
    EstimatorKind kind = EstimatorKind::cdf;
    double a = 0.0;
    double b = 1.0;
    int r = 8;
    std::uint64_t seed = 1;
    std::uint64_t reference_n = 0;  // 0: 4 * max(n_list)
    int reference_m = 42;
    int reference_r = 16;
    int quad_points = 256;
};

/// Curve convergence: degree M = ceil(N^{1/4}) + 10 per N, RMISE against a
/// higher-precision reference curve.
[[nodiscard]] ConvergenceReport rmise_study(const Model& model, const RmiseStudyConfig& study,
                                            const GeneratingVector& z,
                                            const HarnessConfig& cfg = {});

struct TimingRow {
    std::uint64_t n = 0;
    double qmc_cdf_s = 0.0;
    double preint_cdf_s = 0.0;
    double preint_pdf_s = 0.0;
    double increase_factor = 0.0;  // preint_cdf_s / qmc_cdf_s
};

/// CPU times for plain QMC cdf versus preintegration cdf/pdf, one shift,
/// single worker (enforced here regardless of cfg).
[[nodiscard]] std::vector<TimingRow> timing_study(const Model& model, double t,
                                                  const GeneratingVector& z,
                                                  const std::vector<std::uint64_t>& n_list,
                                                  std::uint64_t seed,
                                                  const RootConfig& root = {});

/// Locates t with F(t) approximately p by bisection on a pilot estimate
/// (cdf at n_pilot points, r_pilot shifts).
[[nodiscard]] double quantile_pilot(const Model& model, double p, const GeneratingVector& z,
                                    std::uint64_t n_pilot, int r_pilot, std::uint64_t seed,
                                    const HarnessConfig& cfg = {});

/// Metadata stamped into every CSV header comment.
struct CsvMeta {
    std::string config_text;  // canonical config line; hashed into the header
    std::uint64_t seed = 0;
    std::string lattice_source;
};

void write_convergence_csv(std::ostream& out, const ConvergenceReport& report,
                           const CsvMeta& meta);
void write_timing_csv(std::ostream& out, const std::vector<TimingRow>& rows, const CsvMeta& meta);
void write_curve_csv(std::ostream& out, const CurveEstimate& curve, int sample_count,
                     const CsvMeta& meta);

/// 17-significant-digit serialization used by all CSV output.
[[nodiscard]] std::string format_double(double x);

[[nodiscard]] std::uint64_t fnv1a_hash(const std::string& text);

/// Deterministic stream splitter for deriving per-row sub-seeds.
[[nodiscard]] std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace preint
