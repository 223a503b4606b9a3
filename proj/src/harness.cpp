#include "preint/harness.hpp"

#include "preint/gaussian.hpp"
#include "preint/summation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

namespace preint {

namespace {

constexpr std::uint64_t kChunk = 4096;

double wall_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// Average seconds per run, repeating until the measurement window is long
// enough to trust. Wall time on a pinned single worker stands in for CPU
// time; the process-cputime clock does not advance in some containers.
template <typename Fn>
double measure_seconds(Fn&& fn, double min_window = 0.05) {
    int reps = 1;
    for (;;) {
        const double t0 = wall_seconds();
        for (int i = 0; i < reps; ++i) fn();
        const double elapsed = wall_seconds() - t0;
        if (elapsed >= min_window || reps >= (1 << 20)) {
            return elapsed / static_cast<double>(reps);
        }
        const double grow =
            elapsed > 0.0 ? std::clamp(1.2 * min_window / elapsed, 2.0, 64.0) : 64.0;
        reps = static_cast<int>(static_cast<double>(reps) * grow);
    }
}

void finalize(PointEstimate& est) {
    const auto r = est.per_shift.size();
    CompensatedSum sum;
    for (Eigen::Index k = 0; k < r; ++k) sum.add(est.per_shift[k]);
    est.mean = sum.value() / static_cast<double>(r);
    if (r >= 2) {
        CompensatedSum sq;
        for (Eigen::Index k = 0; k < r; ++k) {
            const double d = est.per_shift[k] - est.mean;
            sq.add(d * d);
        }
        est.std_error = std::sqrt(sq.value() / static_cast<double>(r - 1)) /
                        std::sqrt(static_cast<double>(r));
    } else {
        est.std_error = 0.0;
    }
    est.rel_rmse = est.mean != 0.0 ? est.std_error / std::abs(est.mean)
                                   : std::numeric_limits<double>::quiet_NaN();
}

// ind(t - phi) averaged over a (d+1)-dimensional transformed lattice, with
// the same fixed-chunk deterministic reduction as the preintegrated path.
double plain_indicator_mean(const Model& model, double t, const TransformedPointSet& points,
                            int workers) {
    const std::uint64_t n_points = points.size();
    const std::uint64_t n_chunks = (n_points + kChunk - 1) / kChunk;
    std::vector<std::uint64_t> counts(n_chunks, 0);
    std::atomic<std::uint64_t> next_chunk{0};

    auto run = [&]() {
        Eigen::VectorXd tau(points.dim());
        Eigen::VectorXd y(points.dim() - 1);
        std::uint64_t chunk;
        while ((chunk = next_chunk.fetch_add(1)) < n_chunks) {
            const std::uint64_t begin = chunk * kChunk;
            const std::uint64_t end = std::min(begin + kChunk, n_points);
            std::uint64_t hits = 0;
            for (std::uint64_t n = begin; n < end; ++n) {
                points.point(n, tau);
                y = tau.tail(tau.size() - 1);
                if (model.phi(tau[0], y) <= t) ++hits;
            }
            counts[chunk] = hits;
        }
    };

    if (workers <= 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(run);
        for (auto& th : pool) th.join();
    }

    std::uint64_t total = 0;
    for (const auto c : counts) total += c;
    return static_cast<double>(total) / static_cast<double>(n_points);
}

int interp_degree_for(std::uint64_t n) {
    return static_cast<int>(std::ceil(std::pow(static_cast<double>(n), 0.25) - 1e-9)) + 10;
}

std::string fit_slope(const std::vector<std::pair<std::uint64_t, double>>& points,
                      std::uint64_t min_n) {
    std::vector<std::pair<double, double>> usable;
    bool any_in_window = false;
    bool all_zero = true;
    for (const auto& [n, err] : points) {
        if (n < min_n) continue;
        any_in_window = true;
        if (err > 0.0 && std::isfinite(err)) {
            all_zero = false;
            usable.emplace_back(std::log2(static_cast<double>(n)), std::log2(err));
        }
    }
    if (any_in_window && all_zero) return "exact";
    if (usable.size() < 2) return "nan";
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [x, y] : usable) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double count = static_cast<double>(usable.size());
    const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    return format_double(slope);
}

}  // namespace

PointEstimate estimate_point(const Model& model, EstimatorKind kind, double t,
                             const GeneratingVector& z, std::uint64_t n, int r,
                             std::uint64_t seed, const HarnessConfig& cfg) {
    const double t0 = wall_seconds();
    const int d = model.dimension();
    const auto shifts = draw_shifts(r, d, seed);
    PointEstimate est;
    est.per_shift.resize(r);
    for (int k = 0; k < r; ++k) {
        const auto points =
            transform_points(lattice_points(z, n, d, shifts[static_cast<std::size_t>(k)]),
                             gaussian::quantile);
        est.per_shift[k] = kind == EstimatorKind::cdf
                               ? pointwise_cdf(model, t, points, cfg.root, cfg.workers)
                               : pointwise_pdf(model, t, points, cfg.root, cfg.workers);
    }
    finalize(est);
    est.wall_time_s = wall_seconds() - t0;
    return est;
}

PointEstimate estimate_point_plain(const Model& model, double t, const GeneratingVector& z,
                                   std::uint64_t n, int r, std::uint64_t seed,
                                   const HarnessConfig& cfg) {
    const double t0 = wall_seconds();
    const int d1 = model.dimension() + 1;
    const auto shifts = draw_shifts(r, d1, seed);
    PointEstimate est;
    est.per_shift.resize(r);
    for (int k = 0; k < r; ++k) {
        const auto points =
            transform_points(lattice_points(z, n, d1, shifts[static_cast<std::size_t>(k)]),
                             gaussian::quantile);
        est.per_shift[k] = plain_indicator_mean(model, t, points, cfg.workers);
    }
    finalize(est);
    est.wall_time_s = wall_seconds() - t0;
    return est;
}

PointEstimate mc_baseline(const Model& model, double t, std::uint64_t total_samples,
                          std::uint64_t seed) {
    if (total_samples < 2) throw std::invalid_argument("mc_baseline: need at least 2 samples");
    const double t0 = wall_seconds();
    const int d = model.dimension();

    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      0x6d63u};  // "mc"
    std::mt19937_64 eng(seq);
    auto draw_normal = [&eng]() {
        const double u = (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
        return gaussian::quantile(u);
    };

    Eigen::VectorXd y(d);
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < total_samples; ++i) {
        const double y0 = draw_normal();
        for (int j = 0; j < d; ++j) y[j] = draw_normal();
        if (model.phi(y0, y) <= t) ++hits;
    }

    PointEstimate est;
    const double count = static_cast<double>(total_samples);
    const double k = static_cast<double>(hits);
    est.mean = k / count;
    const double sample_var = (k - k * k / count) / (count - 1.0);
    est.std_error = std::sqrt(sample_var / count);
    est.rel_rmse = est.mean != 0.0 ? est.std_error / est.mean
                                   : std::numeric_limits<double>::quiet_NaN();
    est.wall_time_s = wall_seconds() - t0;
    return est;
}

CurveEstimate estimate_curve(const Model& model, EstimatorKind kind, double a, double b, int m,
                             const GeneratingVector& z, std::uint64_t n, int r,
                             std::uint64_t seed, const HarnessConfig& cfg) {
    if (m < 1) throw std::invalid_argument("estimate_curve: degree must be >= 1");
    const double t0 = wall_seconds();
    const int d = model.dimension();
    const auto grid = chebyshev_grid(a, b, m);
    const auto shifts = draw_shifts(r, d, seed);

    CurveEstimate result;
    result.kind = kind;
    result.a = a;
    result.b = b;
    result.n = n;
    result.m = m;
    result.seed = seed;
    result.per_shift.reserve(static_cast<std::size_t>(r));

    std::vector<CompensatedSum> node_sums(static_cast<std::size_t>(m + 1));
    for (int k = 0; k < r; ++k) {
        const auto points =
            transform_points(lattice_points(z, n, d, shifts[static_cast<std::size_t>(k)]),
                             gaussian::quantile);
        Eigen::VectorXd values = batch_curve(model, kind, grid.nodes, points, cfg.root,
                                             cfg.workers);
        for (int j = 0; j <= m; ++j) node_sums[static_cast<std::size_t>(j)].add(values[j]);
        result.per_shift.emplace_back(grid, std::move(values));
    }

    Eigen::VectorXd mean_values(m + 1);
    for (int j = 0; j <= m; ++j) {
        mean_values[j] = node_sums[static_cast<std::size_t>(j)].value() / static_cast<double>(r);
    }
    result.curve = Interpolant(grid, std::move(mean_values));
    result.wall_time_s = wall_seconds() - t0;
    return result;
}

QuadratureRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1");
    QuadratureRule rule;
    if (n == 1) {
        rule.nodes = Eigen::VectorXd::Zero(1);
        rule.weights = Eigen::VectorXd::Constant(1, 2.0);
        return rule;
    }
    // Golub-Welsch: eigen-decompose the Jacobi matrix of the Legendre
    // three-term recurrence.
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double beta = k / std::sqrt(4.0 * k * k - 1.0);
        jacobi(k, k - 1) = beta;
        jacobi(k - 1, k) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    rule.nodes = solver.eigenvalues();
    rule.weights = 2.0 * solver.eigenvectors().row(0).transpose().array().square();
    return rule;
}

QuadratureRule composite_gauss_legendre(double a, double b, int total_points) {
    if (!(a < b)) throw std::invalid_argument("composite_gauss_legendre: need a < b");
    if (total_points < 8) total_points = 8;
    const int panels = total_points / 8;
    const auto base = gauss_legendre(8);
    QuadratureRule rule;
    rule.nodes.resize(panels * 8);
    rule.weights.resize(panels * 8);
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        for (int j = 0; j < 8; ++j) {
            rule.nodes[p * 8 + j] = lo + 0.5 * h * (base.nodes[j] + 1.0);
            rule.weights[p * 8 + j] = 0.5 * h * base.weights[j];
        }
    }
    return rule;
}

double estimate_rmise(const CurveEstimate& curve, const CurveEstimate& reference,
                      int quad_points) {
    if (curve.a != reference.a || curve.b != reference.b) {
        throw std::invalid_argument("estimate_rmise: mismatched intervals");
    }
    const auto rule = composite_gauss_legendre(curve.a, curve.b, quad_points);
    CompensatedSum shift_mean;
    for (const auto& shifted : curve.per_shift) {
        CompensatedSum integral;
        for (Eigen::Index q = 0; q < rule.nodes.size(); ++q) {
            const double diff = shifted(rule.nodes[q]) - reference.curve(rule.nodes[q]);
            integral.add(rule.weights[q] * diff * diff);
        }
        shift_mean.add(integral.value());
    }
    return std::sqrt(std::max(0.0, shift_mean.value() / static_cast<double>(curve.per_shift.size())));
}

ConvergenceReport convergence_study(const Model& model, const StudyConfig& study,
                                    const GeneratingVector& z, const HarnessConfig& cfg) {
    ConvergenceReport report;
    if (study.kind == EstimatorKind::pdf) {
        for (const auto& method : study.methods) {
            if (method != "qmc_preint") {
                throw std::invalid_argument("convergence_study: method '" + method +
                                            "' cannot estimate a pdf pointwise");
            }
        }
    }

    std::uint64_t row_index = 0;
    for (const auto& method : study.methods) {
        std::vector<std::pair<std::uint64_t, double>> errs;
        const std::size_t first_row = report.rows.size();
        for (const auto n : study.n_list) {
            StudyRow row;
            row.method = method;
            row.n = n;
            row.t_or_interval = format_double(study.t);
            const double t0 = wall_seconds();
            try {
                if (method == "qmc_preint") {
                    const auto est = estimate_point(model, study.kind, study.t, z, n, study.r,
                                                    study.seed, cfg);
                    row.estimate = est.mean;
                    row.std_error = est.std_error;
                    row.rel_rmse = est.rel_rmse;
                } else if (method == "qmc_plain") {
                    const auto est =
                        estimate_point_plain(model, study.t, z, n, study.r, study.seed, cfg);
                    row.estimate = est.mean;
                    row.std_error = est.std_error;
                    row.rel_rmse = est.rel_rmse;
                } else if (method == "mc") {
                    const auto est = mc_baseline(model, study.t,
                                                 n * static_cast<std::uint64_t>(study.r),
                                                 mix_seed(study.seed, row_index + 0x4d43));
                    row.estimate = est.mean;
                    row.std_error = est.std_error;
                    row.rel_rmse = est.rel_rmse;
                } else {
                    throw std::invalid_argument("convergence_study: unknown method '" + method +
                                                "'");
                }
            } catch (const EstimatorError& e) {
                row.failed = true;
                row.failure = e.what();
            }
            row.wall_time_s = wall_seconds() - t0;
            if (!row.failed) errs.emplace_back(n, row.rel_rmse);
            report.rows.push_back(std::move(row));
            ++row_index;
        }
        const std::string slope = fit_slope(errs, report.slope_min_n);
        report.slopes[method] = slope;
        for (std::size_t i = first_row; i < report.rows.size(); ++i) {
            report.rows[i].slope = slope;
        }
    }
    return report;
}

ConvergenceReport rmise_study(const Model& model, const RmiseStudyConfig& study,
                              const GeneratingVector& z, const HarnessConfig& cfg) {
    if (study.n_list.empty()) throw std::invalid_argument("rmise_study: empty N list");
    ConvergenceReport report;

    const std::uint64_t max_n = *std::max_element(study.n_list.begin(), study.n_list.end());
    const std::uint64_t ref_n = study.reference_n != 0 ? study.reference_n : 4 * max_n;
    const auto reference =
        estimate_curve(model, study.kind, study.a, study.b, study.reference_m, z, ref_n,
                       study.reference_r, mix_seed(study.seed, 0x524546), cfg);

    const std::string method =
        study.kind == EstimatorKind::cdf ? "qmc_preint_curve_cdf" : "qmc_preint_curve_pdf";
    const std::string interval = format_double(study.a) + ":" + format_double(study.b);
    std::vector<std::pair<std::uint64_t, double>> errs;
    for (const auto n : study.n_list) {
        StudyRow row;
        row.method = method;
        row.n = n;
        row.m = interp_degree_for(n);
        row.t_or_interval = interval;
        const double t0 = wall_seconds();
        try {
            const auto curve = estimate_curve(model, study.kind, study.a, study.b, row.m, z, n,
                                              study.r, study.seed, cfg);
            row.rmise = estimate_rmise(curve, reference, study.quad_points);
            row.estimate = curve.curve(0.5 * (study.a + study.b));
            errs.emplace_back(n, row.rmise);
        } catch (const EstimatorError& e) {
            row.failed = true;
            row.failure = e.what();
        }
        row.wall_time_s = wall_seconds() - t0;
        report.rows.push_back(std::move(row));
    }
    const std::string slope = fit_slope(errs, report.slope_min_n);
    report.slopes[method] = slope;
    for (auto& row : report.rows) row.slope = slope;
    return report;
}

std::vector<TimingRow> timing_study(const Model& model, double t, const GeneratingVector& z,
                                    const std::vector<std::uint64_t>& n_list, std::uint64_t seed,
                                    const RootConfig& root) {
    HarnessConfig cfg;
    cfg.root = root;
    cfg.workers = 1;  // single processor, by contract
    std::vector<TimingRow> rows;
    rows.reserve(n_list.size());
    for (const auto n : n_list) {
        TimingRow row;
        row.n = n;
        row.qmc_cdf_s =
            measure_seconds([&]() { (void)estimate_point_plain(model, t, z, n, 1, seed, cfg); });
        row.preint_cdf_s = measure_seconds(
            [&]() { (void)estimate_point(model, EstimatorKind::cdf, t, z, n, 1, seed, cfg); });
        row.preint_pdf_s = measure_seconds(
            [&]() { (void)estimate_point(model, EstimatorKind::pdf, t, z, n, 1, seed, cfg); });
        row.increase_factor = row.preint_cdf_s / row.qmc_cdf_s;
        rows.push_back(row);
    }
    return rows;
}

double quantile_pilot(const Model& model, double p, const GeneratingVector& z,
                      std::uint64_t n_pilot, int r_pilot, std::uint64_t seed,
                      const HarnessConfig& cfg) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile_pilot: p must be in (0,1)");
    auto cdf_at = [&](double t) {
        return estimate_point(model, EstimatorKind::cdf, t, z, n_pilot, r_pilot, seed, cfg).mean;
    };

    double hi = 1.0;
    int guard = 0;
    while (cdf_at(hi) < p) {
        hi *= 2.0;
        if (++guard > 60) throw std::runtime_error("quantile_pilot: no upper bracket");
    }
    double lo = -1.0;
    guard = 0;
    while (cdf_at(lo) >= p) {
        lo *= 2.0;
        if (++guard > 60) throw std::runtime_error("quantile_pilot: no lower bracket");
    }
    for (int i = 0; i < 60 && hi - lo > 1e-6 * (1.0 + std::abs(hi)); ++i) {
        const double mid = 0.5 * (lo + hi);
        (cdf_at(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

void write_convergence_csv(std::ostream& out, const ConvergenceReport& report,
                           const CsvMeta& meta) {
    char hash[20];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(fnv1a_hash(meta.config_text)));
    out << "# config_hash=" << hash << " seed=" << meta.seed << " lattice=" << meta.lattice_source
        << "\n";
    out << "# slope fit window: N >= " << report.slope_min_n << "\n";
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        if (report.rows[i].failed) {
            out << "# row " << i << " failed: " << report.rows[i].failure << "\n";
        }
    }
    out << "method,N,M,t_or_interval,estimate,stderr,rel_rmse,rmise,slope_window,wall_time_s\n";
    for (const auto& row : report.rows) {
        out << row.method << ',' << row.n << ',';
        if (row.m >= 0) out << row.m;
        out << ',' << row.t_or_interval << ',' << format_double(row.estimate) << ','
            << format_double(row.std_error) << ',' << format_double(row.rel_rmse) << ','
            << format_double(row.rmise) << ',' << row.slope << ','
            << format_double(row.wall_time_s) << "\n";
    }
}

void write_timing_csv(std::ostream& out, const std::vector<TimingRow>& rows,
                      const CsvMeta& meta) {
    char hash[20];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(fnv1a_hash(meta.config_text)));
    out << "# config_hash=" << hash << " seed=" << meta.seed << " lattice=" << meta.lattice_source
        << "\n";
    out << "N,qmc_cdf_s,preint_cdf_s,preint_pdf_s,increase_factor\n";
    for (const auto& row : rows) {
        out << row.n << ',' << format_double(row.qmc_cdf_s) << ','
            << format_double(row.preint_cdf_s) << ',' << format_double(row.preint_pdf_s) << ','
            << format_double(row.increase_factor) << "\n";
    }
}

void write_curve_csv(std::ostream& out, const CurveEstimate& curve, int sample_count,
                     const CsvMeta& meta) {
    char hash[20];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(fnv1a_hash(meta.config_text)));
    out << "# config_hash=" << hash << " seed=" << meta.seed << " lattice=" << meta.lattice_source
        << "\n";
    out << "# kind=" << (curve.kind == EstimatorKind::cdf ? "cdf" : "pdf") << " N=" << curve.n
        << " M=" << curve.m << " interval=" << format_double(curve.a) << ":"
        << format_double(curve.b) << " shifts=" << curve.per_shift.size() << "\n";
    out << "section,index,t,value,stderr\n";

    const auto& nodes = curve.curve.grid().nodes;
    const auto r = curve.per_shift.size();
    for (Eigen::Index k = 0; k < nodes.size(); ++k) {
        double se = 0.0;
        if (r >= 2) {
            const double mean = curve.curve.values()[k];
            double sq = 0.0;
            for (const auto& shifted : curve.per_shift) {
                const double d = shifted.values()[k] - mean;
                sq += d * d;
            }
            se = std::sqrt(sq / static_cast<double>(r - 1)) / std::sqrt(static_cast<double>(r));
        }
        out << "node," << k << ',' << format_double(nodes[k]) << ','
            << format_double(curve.curve.values()[k]) << ',' << format_double(se) << "\n";
    }
    for (int i = 0; i < sample_count; ++i) {
        const double t =
            curve.a + (curve.b - curve.a) * static_cast<double>(i) /
                          static_cast<double>(sample_count - 1);
        out << "sample," << i << ',' << format_double(t) << ',' << format_double(curve.curve(t))
            << ",nan\n";
    }
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    // splitmix64 step over the combined value
    std::uint64_t x = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}

}  // namespace preint
