#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace preint {

/// Rank-1 lattice generating vector z with the capacity it was built for.
struct GeneratingVector {
    std::vector<std::uint64_t> components;  // z_j in {1,...,n_max-1}
    std::uint64_t n_max = 0;
    std::string source;  // file path or "korobov:a" tag, for report headers

    [[nodiscard]] int d_max() const { return static_cast<int>(components.size()); }
};

/// Uniform random shift in [0,1)^d.
struct Shift {
    Eigen::VectorXd delta;
};

/// Reads a generating vector file: first data line n_max, then one component
/// per line. Lines starting with '#' are ignored. Throws std::runtime_error
/// on malformed input or components outside {1,...,n_max-1}.
[[nodiscard]] GeneratingVector load_generating_vector(const std::string& path);

/// Korobov vector z_j = a^{j-1} mod n. Requires gcd(a, n) = 1.
[[nodiscard]] GeneratingVector korobov_vector(std::uint64_t a, std::uint64_t n, int d);

/// r reproducible shifts in [0,1)^d; each shift index gets its own
/// deterministic substream of the seed.
[[nodiscard]] std::vector<Shift> draw_shifts(int r, int d, std::uint64_t seed);

/// Shifted rank-1 lattice point set {frac(n z / N + delta)}. Points are
/// produced on demand by index; nothing of size N*d is materialized.
class UnitPointSet {
  public:
    UnitPointSet(const GeneratingVector& z, std::uint64_t n, int d, Shift shift);

    [[nodiscard]] std::uint64_t size() const { return n_; }
    [[nodiscard]] int dim() const { return static_cast<int>(z_.size()); }

    [[nodiscard]] double coord(std::uint64_t index, int j) const {
        const double u = static_cast<double>((index * z_[static_cast<std::size_t>(j)]) % n_) * inv_n_ +
                         delta_[j];
        return u >= 1.0 ? u - 1.0 : u;
    }

    void point(std::uint64_t index, Eigen::Ref<Eigen::VectorXd> out) const {
        for (int j = 0; j < dim(); ++j) out[j] = coord(index, j);
    }

    [[nodiscard]] Eigen::VectorXd point(std::uint64_t index) const {
        Eigen::VectorXd p(dim());
        point(index, p);
        return p;
    }

  private:
    std::vector<std::uint64_t> z_;  // first d components, reduced mod n
    Eigen::VectorXd delta_;
    std::uint64_t n_;
    double inv_n_;
};

/// Lattice points mapped to R^d through a componentwise quantile function.
/// Coordinates that land exactly on 0 are clamped to 2^-53 before the
/// transform when clamping is enabled; otherwise they raise.
class TransformedPointSet {
  public:
    TransformedPointSet(UnitPointSet base, std::function<double(double)> quantile,
                        bool clamp_zero = true)
        : base_(std::move(base)), quantile_(std::move(quantile)), clamp_zero_(clamp_zero) {}

    [[nodiscard]] std::uint64_t size() const { return base_.size(); }
    [[nodiscard]] int dim() const { return base_.dim(); }

    [[nodiscard]] double coord(std::uint64_t index, int j) const;

    void point(std::uint64_t index, Eigen::Ref<Eigen::VectorXd> out) const {
        for (int j = 0; j < dim(); ++j) out[j] = coord(index, j);
    }

    [[nodiscard]] Eigen::VectorXd point(std::uint64_t index) const {
        Eigen::VectorXd p(dim());
        point(index, p);
        return p;
    }

  private:
    UnitPointSet base_;
    std::function<double(double)> quantile_;
    bool clamp_zero_;
};

[[nodiscard]] UnitPointSet lattice_points(const GeneratingVector& z, std::uint64_t n, int d,
                                          Shift shift);

[[nodiscard]] TransformedPointSet transform_points(UnitPointSet points,
                                                   std::function<double(double)> quantile,
                                                   bool clamp_zero = true);

}  // namespace preint
