#include "preint/model.hpp"

#include "preint/gaussian.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace preint {

namespace {

class LognormalFiber final : public ModelFiber {
  public:
    LognormalFiber(const Eigen::MatrixXd& a, const Eigen::VectorXd& col0)
        : a_(a), col0_(col0), log_weights_(a.rows()), weights_(a.rows()), bw_(a.rows()) {
        for (Eigen::Index i = 0; i < col0_.size(); ++i) {
            if (col0_[i] == 0.0) zero_rows_.push_back(i);
        }
    }

    void bind(const Eigen::VectorXd& y) override {
        ++binds_;
        log_weights_.noalias() = a_.rightCols(a_.cols() - 1) * y;
        weights_ = log_weights_.array().exp();
        exp_calls_ += static_cast<std::uint64_t>(weights_.size());
        bw_ = col0_.cwiseProduct(weights_);
        lower_ = 0.0;
        for (const auto i : zero_rows_) lower_ += weights_[i];
    }

    [[nodiscard]] double eval(double y0) const override {
        ++evals_;
        exp_calls_ += static_cast<std::uint64_t>(weights_.size());
        return (weights_.array() * (col0_.array() * y0).exp()).sum();
    }

    [[nodiscard]] double deriv(double y0) const override {
        ++evals_;
        exp_calls_ += static_cast<std::uint64_t>(weights_.size());
        return (bw_.array() * (col0_.array() * y0).exp()).sum();
    }

    [[nodiscard]] double lower_limit() const override { return lower_; }

    [[nodiscard]] std::uint64_t exp_count() const { return exp_calls_; }

  private:
    const Eigen::MatrixXd& a_;
    const Eigen::VectorXd& col0_;
    Eigen::VectorXd log_weights_;
    Eigen::VectorXd weights_;  // e^{s_i}
    Eigen::VectorXd bw_;       // A_{i,0} * e^{s_i}
    std::vector<Eigen::Index> zero_rows_;
    double lower_ = 0.0;
    mutable std::uint64_t exp_calls_ = 0;
};

class LinearFiber final : public ModelFiber {
  public:
    LinearFiber(const Eigen::VectorXd& c, double b) : c_(c), b_(b) {}

    void bind(const Eigen::VectorXd& y) override {
        ++binds_;
        rest_ = c_.tail(c_.size() - 1).dot(y) + b_;
    }

    [[nodiscard]] double eval(double y0) const override {
        ++evals_;
        return c_[0] * y0 + rest_;
    }

    [[nodiscard]] double deriv(double) const override {
        ++evals_;
        return c_[0];
    }

    [[nodiscard]] double lower_limit() const override {
        return -std::numeric_limits<double>::infinity();
    }

  private:
    const Eigen::VectorXd& c_;
    double b_;
    double rest_ = 0.0;
};

}  // namespace

CovarianceSpec CovarianceSpec::parse(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ':')) parts.push_back(item);
    if (parts.empty()) throw std::invalid_argument("covariance spec is empty");

    CovarianceSpec spec;
    try {
        if (parts[0] == "equicorr" && parts.size() == 4) {
            spec.kind = Kind::equicorrelated;
            spec.dim = std::stoi(parts[1]);
            spec.diag = std::stod(parts[2]);
            spec.offdiag = std::stod(parts[3]);
        } else if (parts[0] == "recipmax" && parts.size() == 2) {
            spec.kind = Kind::reciprocal_max;
            spec.dim = std::stoi(parts[1]);
        } else if (parts[0] == "dense" && parts.size() >= 2) {
            spec.kind = Kind::dense;
            spec.path = text.substr(std::string("dense:").size());
        } else {
            throw std::invalid_argument("");
        }
    } catch (const std::exception&) {
        throw std::invalid_argument(
            "bad covariance spec '" + text +
            "' (expected equicorr:<dim>:<diag>:<offdiag>, recipmax:<dim> or dense:<path>)");
    }
    if (spec.kind != Kind::dense && spec.dim < 1) {
        throw std::invalid_argument("covariance spec '" + text + "': dimension must be >= 1");
    }
    return spec;
}

Eigen::MatrixXd load_covariance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open covariance file: " + path);
    int n = 0;
    if (!(in >> n) || n < 1) {
        throw std::runtime_error(path + ": bad dimension header");
    }
    Eigen::MatrixXd sigma(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (!(in >> sigma(i, j))) {
                throw std::runtime_error(path + ": truncated matrix at row " + std::to_string(i));
            }
        }
    }
    return sigma;
}

Eigen::MatrixXd covariance_matrix(const CovarianceSpec& spec) {
    switch (spec.kind) {
        case CovarianceSpec::Kind::equicorrelated: {
            Eigen::MatrixXd sigma =
                Eigen::MatrixXd::Constant(spec.dim, spec.dim, spec.offdiag);
            sigma.diagonal().setConstant(spec.diag);
            return sigma;
        }
        case CovarianceSpec::Kind::reciprocal_max: {
            Eigen::MatrixXd sigma(spec.dim, spec.dim);
            for (int i = 0; i < spec.dim; ++i)
                for (int j = 0; j < spec.dim; ++j)
                    sigma(i, j) = 1.0 / static_cast<double>(std::max(i, j) + 1);
            return sigma;
        }
        case CovarianceSpec::Kind::dense:
            return load_covariance(spec.path);
    }
    throw std::logic_error("unreachable covariance kind");
}

FactorMatrix pca_factorize(const Eigen::MatrixXd& sigma) {
    if (sigma.rows() != sigma.cols()) {
        throw std::invalid_argument("pca_factorize: matrix is not square");
    }
    const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw std::invalid_argument("pca_factorize: matrix is not symmetric");
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sigma);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("pca_factorize: eigendecomposition failed");
    }

    const Eigen::Index n = sigma.rows();
    FactorMatrix factor;
    factor.eigenvalues = solver.eigenvalues().reverse();
    Eigen::MatrixXd u = solver.eigenvectors().rowwise().reverse();

    for (Eigen::Index k = 0; k < n; ++k) {
        if (factor.eigenvalues[k] < -1e-12 * scale) {
            throw std::invalid_argument("pca_factorize: matrix is not positive semidefinite "
                                        "(eigenvalue " +
                                        std::to_string(factor.eigenvalues[k]) + ")");
        }
        if (factor.eigenvalues[k] < 0.0) factor.eigenvalues[k] = 0.0;

        // Sign convention: entry sum >= 0, ties broken by the first entry
        // that is not numerically zero.
        double s = u.col(k).sum();
        if (std::abs(s) <= 1e-12) {
            s = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (std::abs(u(i, k)) > 1e-12) {
                    s = u(i, k);
                    break;
                }
            }
        }
        if (s < 0.0) u.col(k) = -u.col(k);
    }

    factor.a = u * factor.eigenvalues.cwiseSqrt().asDiagonal();
    return factor;
}

FactorMatrix pca_factorize(const CovarianceSpec& spec) {
    return pca_factorize(covariance_matrix(spec));
}

MonotoneCheck check_monotone(const FactorMatrix& factor) {
    MonotoneCheck check;
    const auto col0 = factor.a.col(0);
    double max_entry = 0.0;
    for (Eigen::Index i = 0; i < col0.size(); ++i) {
        if (col0[i] < 0.0) check.offending_rows.push_back(static_cast<int>(i));
        max_entry = std::max(max_entry, col0[i]);
    }
    if (!check.offending_rows.empty()) {
        check.message = "negative y0 coefficient in rows:";
        for (const int r : check.offending_rows) check.message += " " + std::to_string(r);
        return check;
    }
    if (max_entry <= 0.0) {
        check.message = "phi independent of y0 (column 0 of A is zero)";
        return check;
    }
    check.ok = true;
    return check;
}

LognormalSumModel::LognormalSumModel(FactorMatrix factor) {
    if (const auto check = check_monotone(factor); !check.ok) {
        throw std::invalid_argument("lognormal_sum_model: monotonicity fails: " + check.message);
    }
    a_ = std::move(factor.a);
    col0_ = a_.col(0);
}

double LognormalSumModel::phi(double y0, const Eigen::VectorXd& y) const {
    return (col0_ * y0 + a_.rightCols(a_.cols() - 1) * y).array().exp().sum();
}

double LognormalSumModel::dphi0(double y0, const Eigen::VectorXd& y) const {
    return (col0_.array() * (col0_ * y0 + a_.rightCols(a_.cols() - 1) * y).array().exp()).sum();
}

std::unique_ptr<ModelFiber> LognormalSumModel::make_fiber() const {
    return std::make_unique<LognormalFiber>(a_, col0_);
}

LinearGaussianModel::LinearGaussianModel(Eigen::VectorXd coeffs, double offset)
    : c_(std::move(coeffs)), b_(offset), norm_(c_.norm()) {
    if (c_.size() < 1 || c_[0] <= 0.0) {
        throw std::invalid_argument("linear_gaussian_model: c0 must be positive");
    }
}

double LinearGaussianModel::phi(double y0, const Eigen::VectorXd& y) const {
    return c_[0] * y0 + c_.tail(c_.size() - 1).dot(y) + b_;
}

std::unique_ptr<ModelFiber> LinearGaussianModel::make_fiber() const {
    return std::make_unique<LinearFiber>(c_, b_);
}

double LinearGaussianModel::exact_cdf(double t) const {
    return gaussian::cdf((t - b_) / norm_);
}

double LinearGaussianModel::exact_pdf(double t) const {
    return gaussian::pdf((t - b_) / norm_) / norm_;
}

std::unique_ptr<Model> lognormal_sum_model(FactorMatrix factor) {
    return std::make_unique<LognormalSumModel>(std::move(factor));
}

std::unique_ptr<Model> linear_gaussian_model(Eigen::VectorXd coeffs, double offset) {
    return std::make_unique<LinearGaussianModel>(std::move(coeffs), offset);
}

}  // namespace preint
