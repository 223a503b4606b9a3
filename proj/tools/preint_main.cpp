// Command-line front end: point/curve estimates, convergence and timing
// studies, and a model invariant checker. All output is CSV with a header
// comment recording the config hash, seed, and lattice source.

#include "preint/gaussian.hpp"
#include "preint/harness.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace preint;

struct CommonOptions {
    std::string model = "lognormal";
    std::string cov = "equicorr:16:1:0.5";
    std::vector<double> coeffs;
    double offset = 0.0;
    std::string kind = "cdf";
    std::string lattice_file;
    std::uint64_t korobov_a = 1571;
    int r = 8;
    std::uint64_t seed = 1;
    double tol = 1e-10;
    int workers = 1;
    std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& opt, bool with_kind = true) {
    cmd->set_config("--config", "", "key = value config file; flags override");
    cmd->add_option("--model", opt.model, "model family")
        ->check(CLI::IsMember({"lognormal", "linear"}));
    cmd->add_option("--cov", opt.cov,
                    "covariance spec: equicorr:<dim>:<diag>:<offdiag>, recipmax:<dim>, "
                    "dense:<path>");
    cmd->add_option("--coeffs", opt.coeffs, "linear model coefficients c0 c1 ...");
    cmd->add_option("--offset", opt.offset, "linear model offset b");
    if (with_kind) {
        cmd->add_option("--kind", opt.kind, "estimator kind")
            ->check(CLI::IsMember({"cdf", "pdf"}));
    }
    cmd->add_option("--lattice", opt.lattice_file, "generating vector file");
    cmd->add_option("--korobov-a", opt.korobov_a, "Korobov parameter when no file is given");
    cmd->add_option("--r", opt.r, "number of random shifts");
    cmd->add_option("--seed", opt.seed, "rng seed (env PREINT_SEED overrides)");
    cmd->add_option("--tol", opt.tol, "root-finder residual tolerance");
    cmd->add_option("--workers", opt.workers, "worker threads per shift");
    cmd->add_option("--out", opt.out, "output file (default: stdout)");
}

std::unique_ptr<Model> build_model(const CommonOptions& opt) {
    if (opt.model == "linear") {
        if (opt.coeffs.empty()) {
            throw CLI::ValidationError("--coeffs", "linear model needs coefficients");
        }
        Eigen::VectorXd c(static_cast<Eigen::Index>(opt.coeffs.size()));
        for (std::size_t i = 0; i < opt.coeffs.size(); ++i) {
            c[static_cast<Eigen::Index>(i)] = opt.coeffs[i];
        }
        return linear_gaussian_model(std::move(c), opt.offset);
    }
    const auto factor = pca_factorize(CovarianceSpec::parse(opt.cov));
    return lognormal_sum_model(factor);
}

GeneratingVector build_vector(const CommonOptions& opt, int d_needed, std::uint64_t n_needed) {
    if (!opt.lattice_file.empty()) {
        auto z = load_generating_vector(opt.lattice_file);
        if (z.d_max() < d_needed || z.n_max < n_needed) {
            throw CLI::ValidationError("--lattice", "vector capacity below requested N or d");
        }
        return z;
    }
    std::uint64_t n_max = 1 << 20;
    while (n_max < n_needed) n_max <<= 1;
    return korobov_vector(opt.korobov_a, n_max, d_needed);
}

bool power_of_two(std::uint64_t n) { return n != 0 && (n & (n - 1)) == 0; }

void require_powers_of_two(const std::vector<std::uint64_t>& ns) {
    for (const auto n : ns) {
        if (!power_of_two(n)) {
            throw CLI::ValidationError("--n", "N must be a power of two, got " +
                                                  std::to_string(n));
        }
    }
}

std::uint64_t effective_seed(const CommonOptions& opt) {
    if (const char* env = std::getenv("PREINT_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return opt.seed;
}

std::string canonical_config(const std::string& cmd, const CommonOptions& opt,
                             const std::string& extra) {
    std::ostringstream text;
    text << "cmd=" << cmd << " model=" << opt.model << " cov=" << opt.cov << " coeffs=";
    for (const auto c : opt.coeffs) text << c << ";";
    text << " offset=" << opt.offset << " kind=" << opt.kind << " lattice=" << opt.lattice_file
         << " korobov_a=" << opt.korobov_a << " r=" << opt.r << " tol=" << opt.tol << " "
         << extra;
    return text.str();
}

class OutputStream {
  public:
    explicit OutputStream(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw CLI::ValidationError("--out", "cannot open " + path);
        }
    }
    std::ostream& get() { return file_.is_open() ? file_ : std::cout; }

  private:
    std::ofstream file_;
};

EstimatorKind parse_kind(const std::string& kind) {
    return kind == "pdf" ? EstimatorKind::pdf : EstimatorKind::cdf;
}

int run_point(const CommonOptions& opt, double t, std::uint64_t n) {
    require_powers_of_two({n});
    const auto model = build_model(opt);
    const auto z = build_vector(opt, model->dimension(), n);
    HarnessConfig cfg;
    cfg.root.tol = opt.tol;
    cfg.workers = opt.workers;
    const auto seed = effective_seed(opt);
    const auto est = estimate_point(*model, parse_kind(opt.kind), t, z, n, opt.r, seed, cfg);

    OutputStream out(opt.out);
    const CsvMeta meta{canonical_config("point", opt, "t=" + format_double(t) +
                                                          " n=" + std::to_string(n)),
                       seed, z.source};
    char hash[20];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(fnv1a_hash(meta.config_text)));
    out.get() << "# config_hash=" << hash << " seed=" << seed << " lattice=" << z.source << "\n";
    out.get() << "kind,t,N,R,estimate,stderr,rel_rmse,wall_time_s\n";
    out.get() << opt.kind << ',' << format_double(t) << ',' << n << ',' << opt.r << ','
              << format_double(est.mean) << ',' << format_double(est.std_error) << ','
              << format_double(est.rel_rmse) << ',' << format_double(est.wall_time_s) << "\n";
    return 0;
}

int run_curve(const CommonOptions& opt, double a, double b, int m, std::uint64_t n, int samples) {
    require_powers_of_two({n});
    const auto model = build_model(opt);
    const auto z = build_vector(opt, model->dimension(), n);
    HarnessConfig cfg;
    cfg.root.tol = opt.tol;
    cfg.workers = opt.workers;
    const auto seed = effective_seed(opt);
    const auto curve =
        estimate_curve(*model, parse_kind(opt.kind), a, b, m, z, n, opt.r, seed, cfg);

    OutputStream out(opt.out);
    const CsvMeta meta{canonical_config("curve", opt,
                                        "a=" + format_double(a) + " b=" + format_double(b) +
                                            " m=" + std::to_string(m) + " n=" + std::to_string(n)),
                       seed, z.source};
    write_curve_csv(out.get(), curve, samples, meta);
    return 0;
}

int run_converge(const CommonOptions& opt, const std::vector<std::uint64_t>& n_list,
                 const std::string& methods_csv, double t, double quantile_p, bool rmise,
                 double a, double b) {
    require_powers_of_two(n_list);
    const auto model = build_model(opt);
    const std::uint64_t max_n = *std::max_element(n_list.begin(), n_list.end());
    const auto z = build_vector(opt, model->dimension() + 1, rmise ? 4 * max_n : max_n);
    HarnessConfig cfg;
    cfg.root.tol = opt.tol;
    cfg.workers = opt.workers;
    const auto seed = effective_seed(opt);

    ConvergenceReport report;
    std::string extra;
    if (rmise) {
        RmiseStudyConfig study;
        study.n_list = n_list;
        study.kind = parse_kind(opt.kind);
        study.a = a;
        study.b = b;
        study.r = opt.r;
        study.seed = seed;
        report = rmise_study(*model, study, z, cfg);
        extra = "rmise a=" + format_double(a) + " b=" + format_double(b);
    } else {
        StudyConfig study;
        study.n_list = n_list;
        std::stringstream in(methods_csv);
        std::string item;
        while (std::getline(in, item, ',')) study.methods.push_back(item);
        study.kind = parse_kind(opt.kind);
        if (quantile_p > 0.0) {
            t = quantile_pilot(*model, quantile_p, z, 1 << 10, 2, mix_seed(seed, 0x70), cfg);
        }
        study.t = t;
        study.r = opt.r;
        study.seed = seed;
        report = convergence_study(*model, study, z, cfg);
        extra = "methods=" + methods_csv + " t=" + format_double(t);
    }

    OutputStream out(opt.out);
    const CsvMeta meta{canonical_config("converge", opt, extra), seed, z.source};
    write_convergence_csv(out.get(), report, meta);
    return 0;
}

int run_time(const CommonOptions& opt, const std::vector<std::uint64_t>& n_list, double t) {
    require_powers_of_two(n_list);
    const auto model = build_model(opt);
    const std::uint64_t max_n = *std::max_element(n_list.begin(), n_list.end());
    const auto z = build_vector(opt, model->dimension() + 1, max_n);
    RootConfig root;
    root.tol = opt.tol;
    const auto seed = effective_seed(opt);
    const auto rows = timing_study(*model, t, z, n_list, seed, root);

    OutputStream out(opt.out);
    const CsvMeta meta{canonical_config("time", opt, "t=" + format_double(t)), seed, z.source};
    write_timing_csv(out.get(), rows, meta);
    return 0;
}

int run_check(const CommonOptions& opt) {
    const auto seed = effective_seed(opt);
    int failures = 0;
    auto report = [&failures](const std::string& name, bool ok) {
        std::cout << (ok ? "PASS " : "FAIL ") << name << "\n";
        if (!ok) ++failures;
    };

    const auto model = build_model(opt);
    const int d = model->dimension();

    if (opt.model == "lognormal") {
        const auto factor = pca_factorize(CovarianceSpec::parse(opt.cov));
        const auto sigma = covariance_matrix(CovarianceSpec::parse(opt.cov));
        report("pca residual |AA^T - Sigma| <= 1e-10",
               (factor.a * factor.a.transpose() - sigma).cwiseAbs().maxCoeff() <= 1e-10);
        const auto mono = check_monotone(factor);
        report("monotonicity (D0 phi > 0)", mono.ok);
        if (!mono.ok) std::cout << "  " << mono.message << "\n";
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<> normal(0.0, 1.0);
    const auto fiber = model->make_fiber();
    bool fiber_ok = true;
    bool deriv_ok = true;
    bool mono_fiber_ok = true;
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::VectorXd y(d);
        for (int j = 0; j < d; ++j) y[j] = normal(rng);
        const double y0 = normal(rng);
        fiber->bind(y);
        const double direct = model->phi(y0, y);
        fiber_ok =
            fiber_ok && std::abs(fiber->eval(y0) - direct) <= 1e-12 * (1.0 + std::abs(direct));
        const double h = 1e-6;
        const double fd = (fiber->eval(y0 + h) - fiber->eval(y0 - h)) / (2.0 * h);
        const double slope = fiber->deriv(y0);
        deriv_ok = deriv_ok && std::abs(fd - slope) <= 1e-4 * (1.0 + std::abs(slope));
        mono_fiber_ok = mono_fiber_ok && fiber->eval(y0 + 0.5) > fiber->eval(y0);
    }
    report("fiber eval matches phi", fiber_ok);
    report("fiber derivative matches finite differences", deriv_ok);
    report("fibers increase in y0", mono_fiber_ok);

    const auto z = build_vector(opt, std::max(d, 1), 1 << 12);
    RootConfig root;
    root.tol = opt.tol;
    bool roots_ok = true;
    const double t_mid = quantile_pilot(*model, 0.5, z, 1 << 10, 2, mix_seed(seed, 0x63), {});
    for (int trial = 0; trial < 200 && roots_ok; ++trial) {
        Eigen::VectorXd y(d);
        for (int j = 0; j < d; ++j) y[j] = normal(rng);
        fiber->bind(y);
        const auto res = find_xi(*fiber, t_mid, root);
        if (res.status == RootStatus::root) {
            roots_ok = std::abs(fiber->eval(res.xi) - t_mid) <= root.tol;
        } else {
            roots_ok = res.status == RootStatus::no_root;
        }
    }
    report("root residual <= tol at the median level", roots_ok);

    bool round_trip = true;
    for (int i = 1; i < 1000; ++i) {
        const double u = static_cast<double>(i) / 1000.0;
        round_trip = round_trip && std::abs(gaussian::cdf(gaussian::quantile(u)) - u) <= 1e-12;
    }
    report("gaussian quantile/cdf round trip", round_trip);

    return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cdf/pdf estimation by preintegrated quasi-Monte Carlo"};
    app.require_subcommand(1);

    CommonOptions opt;

    auto* point = app.add_subcommand("point", "pointwise cdf/pdf estimate");
    double t = 0.0;
    std::uint64_t n = 1 << 12;
    add_common(point, opt);
    point->add_option("--t", t, "evaluation point")->required();
    point->add_option("--n", n, "lattice size (power of two)");

    auto* curve = app.add_subcommand("curve", "interpolated cdf/pdf curve");
    double a = 0.0, b = 1.0;
    int degree = 16, samples = 201;
    add_common(curve, opt);
    curve->add_option("--a", a, "interval left end")->required();
    curve->add_option("--b", b, "interval right end")->required();
    curve->add_option("--m", degree, "interpolation degree");
    curve->add_option("--n", n, "lattice size (power of two)");
    curve->add_option("--samples", samples, "sampled curve resolution");

    auto* converge = app.add_subcommand("converge", "convergence study CSV");
    std::vector<std::uint64_t> n_list;
    std::string methods = "mc,qmc_plain,qmc_preint";
    double quantile_p = 0.0;
    bool rmise = false;
    add_common(converge, opt);
    converge->add_option("--n-list", n_list, "lattice sizes (powers of two)")->required();
    converge->add_option("--methods", methods, "comma list of mc,qmc_plain,qmc_preint");
    converge->add_option("--t", t, "evaluation point");
    converge->add_option("--t-quantile", quantile_p,
                         "locate t at this quantile with a pilot run");
    converge->add_flag("--rmise", rmise, "curve RMISE study instead of pointwise");
    converge->add_option("--a", a, "curve interval left end");
    converge->add_option("--b", b, "curve interval right end");

    auto* timing = app.add_subcommand("time", "CPU timing study CSV");
    add_common(timing, opt);
    timing->add_option("--n-list", n_list, "lattice sizes (powers of two)")->required();
    timing->add_option("--t", t, "evaluation point")->required();

    auto* check = app.add_subcommand("check", "run the model invariant suite");
    add_common(check, opt, false);

    try {
        app.parse(argc, argv);
        if (point->parsed()) return run_point(opt, t, n);
        if (curve->parsed()) return run_curve(opt, a, b, degree, n, samples);
        if (converge->parsed()) {
            return run_converge(opt, n_list, methods, t, quantile_p, rmise, a, b);
        }
        if (timing->parsed()) return run_time(opt, n_list, t);
        if (check->parsed()) return run_check(opt);
        return 2;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const CLI::Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const preint::EstimatorError& e) {
        std::cerr << "numerical failure at point " << e.point_index << ": " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
