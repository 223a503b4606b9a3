#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace preint {

/// Univariate restriction phi(., y) with the contribution of y precomputed.
/// bind() costs O(d^2) for the lognormal model; eval/deriv afterwards cost
/// O(d+1) independent of how often they are called. Fibers are per-worker
/// values; the counters are instrumentation for the cost-contract tests.
class ModelFiber {
  public:
    virtual ~ModelFiber() = default;

    /// Recomputes the cached contribution for a new y.
    virtual void bind(const Eigen::VectorXd& y) = 0;

    [[nodiscard]] virtual double eval(double y0) const = 0;
    [[nodiscard]] virtual double deriv(double y0) const = 0;

    /// Infimum of eval over the real line (-inf when unbounded below).
    [[nodiscard]] virtual double lower_limit() const = 0;

    [[nodiscard]] std::uint64_t bind_count() const { return binds_; }
    [[nodiscard]] std::uint64_t eval_count() const { return evals_; }

  protected:
    std::uint64_t binds_ = 0;
    mutable std::uint64_t evals_ = 0;
};

/// A transformation phi(y0, y) that is strictly increasing in y0 and tends
/// to +inf as y0 -> +inf. Immutable after construction and shareable across
/// workers; fibers carry all per-point state.
class Model {
  public:
    virtual ~Model() = default;

    /// Number of remaining variables d (y0 excluded).
    [[nodiscard]] virtual int dimension() const = 0;

    [[nodiscard]] virtual double phi(double y0, const Eigen::VectorXd& y) const = 0;
    [[nodiscard]] virtual double dphi0(double y0, const Eigen::VectorXd& y) const = 0;

    [[nodiscard]] virtual std::unique_ptr<ModelFiber> make_fiber() const = 0;
};

/// Factor A of a covariance matrix, Sigma = A A^T. Column 0 multiplies y0;
/// columns are ordered by nonincreasing eigenvalue.
struct FactorMatrix {
    Eigen::MatrixXd a;
    Eigen::VectorXd eigenvalues;  // nonincreasing
};

struct CovarianceSpec {
    enum class Kind { equicorrelated, reciprocal_max, dense };
    Kind kind = Kind::equicorrelated;
    int dim = 0;
    double diag = 1.0;     // equicorrelated only
    double offdiag = 0.5;  // equicorrelated only
    std::string path;      // dense only

    /// Parses "equicorr:<dim>:<diag>:<offdiag>", "recipmax:<dim>" or
    /// "dense:<path>".
    static CovarianceSpec parse(const std::string& text);
};

[[nodiscard]] Eigen::MatrixXd covariance_matrix(const CovarianceSpec& spec);

/// Reads a dense covariance file: line 1 the dimension n, then n rows of n
/// space-separated reals.
[[nodiscard]] Eigen::MatrixXd load_covariance(const std::string& path);

/// PCA factorization A = U diag(sqrt(lambda)) with eigenvalues in
/// nonincreasing order. Each eigenvector's sign is chosen so its entry sum
/// is >= 0 (tie broken by the first nonzero entry). Throws if sigma is not
/// symmetric or has an eigenvalue below -1e-12.
[[nodiscard]] FactorMatrix pca_factorize(const Eigen::MatrixXd& sigma);
[[nodiscard]] FactorMatrix pca_factorize(const CovarianceSpec& spec);

struct MonotoneCheck {
    bool ok = false;
    std::vector<int> offending_rows;
    std::string message;
};

/// Sufficient monotonicity condition for the exponential-sum model: all
/// entries of column 0 of A nonnegative and at least one positive.
[[nodiscard]] MonotoneCheck check_monotone(const FactorMatrix& factor);

/// X = sum_i exp(A_i . Y): sum of d+1 lognormals driven by i.i.d. standard
/// normals through the factor A. Rejects factors failing check_monotone.
class LognormalSumModel final : public Model {
  public:
    explicit LognormalSumModel(FactorMatrix factor);

    [[nodiscard]] int dimension() const override { return static_cast<int>(a_.cols()) - 1; }
    [[nodiscard]] double phi(double y0, const Eigen::VectorXd& y) const override;
    [[nodiscard]] double dphi0(double y0, const Eigen::VectorXd& y) const override;
    [[nodiscard]] std::unique_ptr<ModelFiber> make_fiber() const override;

    [[nodiscard]] const Eigen::MatrixXd& factor() const { return a_; }

  private:
    Eigen::MatrixXd a_;
    Eigen::VectorXd col0_;  // coefficients of y0, all >= 0, max > 0
};

/// X = c . Y + b with c0 > 0. Normal with mean b and variance |c|^2, so the
/// exact cdf and pdf are available for oracle tests.
class LinearGaussianModel final : public Model {
  public:
    LinearGaussianModel(Eigen::VectorXd coeffs, double offset);

    [[nodiscard]] int dimension() const override { return static_cast<int>(c_.size()) - 1; }
    [[nodiscard]] double phi(double y0, const Eigen::VectorXd& y) const override;
    [[nodiscard]] double dphi0(double, const Eigen::VectorXd&) const override { return c_[0]; }
    [[nodiscard]] std::unique_ptr<ModelFiber> make_fiber() const override;

    [[nodiscard]] double exact_cdf(double t) const;
    [[nodiscard]] double exact_pdf(double t) const;

  private:
    Eigen::VectorXd c_;
    double b_;
    double norm_;
};

[[nodiscard]] std::unique_ptr<Model> lognormal_sum_model(FactorMatrix factor);
[[nodiscard]] std::unique_ptr<Model> linear_gaussian_model(Eigen::VectorXd coeffs, double offset);

}  // namespace preint
