#include "preint/lattice.hpp"

#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace preint {

namespace {

bool is_comment_or_blank(const std::string& line) {
    const auto pos = line.find_first_not_of(" \t\r");
    return pos == std::string::npos || line[pos] == '#';
}

std::uint64_t parse_positive(const std::string& line, const std::string& path, int lineno) {
    std::istringstream in(line);
    long long v = 0;
    std::string rest;
    if (!(in >> v) || (in >> rest)) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed line '" +
                                 line + "'");
    }
    if (v <= 0) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": component out of range: " + std::to_string(v));
    }
    return static_cast<std::uint64_t>(v);
}

}  // namespace

GeneratingVector load_generating_vector(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open generating vector file: " + path);
    }
    GeneratingVector z;
    z.source = path;
    std::string line;
    int lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (is_comment_or_blank(line)) continue;
        const std::uint64_t v = parse_positive(line, path, lineno);
        if (!have_header) {
            z.n_max = v;
            have_header = true;
            continue;
        }
        if (v >= z.n_max) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": component out of range: " + std::to_string(v) +
                                     " (n_max " + std::to_string(z.n_max) + ")");
        }
        z.components.push_back(v);
    }
    if (!have_header) {
        throw std::runtime_error(path + ": missing n_max header");
    }
    if (z.components.empty()) {
        throw std::runtime_error(path + ": no components");
    }
    return z;
}

GeneratingVector korobov_vector(std::uint64_t a, std::uint64_t n, int d) {
    if (n < 2 || d < 1) {
        throw std::invalid_argument("korobov_vector: need n >= 2 and d >= 1");
    }
    if (std::gcd(a, n) != 1) {
        throw std::invalid_argument("korobov_vector: a and n must be coprime (a=" +
                                    std::to_string(a) + ", n=" + std::to_string(n) + ")");
    }
    GeneratingVector z;
    z.n_max = n;
    z.source = "korobov:" + std::to_string(a);
    z.components.resize(static_cast<std::size_t>(d));
    std::uint64_t power = 1;  // a^0
    for (int j = 0; j < d; ++j) {
        z.components[static_cast<std::size_t>(j)] = power;
        power = (power * (a % n)) % n;
    }
    return z;
}

std::vector<Shift> draw_shifts(int r, int d, std::uint64_t seed) {
    if (r < 1) throw std::invalid_argument("draw_shifts: r must be >= 1");
    std::vector<Shift> shifts(static_cast<std::size_t>(r));
    for (int k = 0; k < r; ++k) {
        // One engine per shift index: substreams stay disjoint and a given
        // (seed, k) always yields the same shift regardless of r.
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(k), 0x9e3779b9u};
        std::mt19937_64 eng(seq);
        Eigen::VectorXd delta(d);
        for (int j = 0; j < d; ++j) {
            delta[j] = static_cast<double>(eng() >> 11) * 0x1.0p-53;
        }
        shifts[static_cast<std::size_t>(k)].delta = std::move(delta);
    }
    return shifts;
}

UnitPointSet::UnitPointSet(const GeneratingVector& z, std::uint64_t n, int d, Shift shift)
    : delta_(std::move(shift.delta)), n_(n), inv_n_(1.0 / static_cast<double>(n)) {
    if (n == 0 || n > z.n_max) {
        throw std::invalid_argument("lattice_points: N=" + std::to_string(n) +
                                    " exceeds vector capacity n_max=" + std::to_string(z.n_max));
    }
    if (n > (std::uint64_t{1} << 32)) {
        throw std::invalid_argument("lattice_points: N above 2^32 is not supported");
    }
    if (d < 0 || d > z.d_max()) {
        throw std::invalid_argument("lattice_points: dimension " + std::to_string(d) +
                                    " exceeds vector capacity d_max=" + std::to_string(z.d_max()));
    }
    if (delta_.size() != d) {
        throw std::invalid_argument("lattice_points: shift length does not match dimension");
    }
    z_.assign(z.components.begin(), z.components.begin() + d);
    for (auto& c : z_) c %= n_;  // keeps index*z_j below 2^64
}

double TransformedPointSet::coord(std::uint64_t index, int j) const {
    double u = base_.coord(index, j);
    if (u <= 0.0 || u >= 1.0) {
        if (!clamp_zero_) {
            throw std::domain_error("transform_points: coordinate " + std::to_string(u) +
                                    " at point " + std::to_string(index) +
                                    " is outside (0,1) and clamping is disabled");
        }
        u = u <= 0.0 ? 0x1.0p-53 : 1.0 - 0x1.0p-53;
    }
    return quantile_(u);
}

UnitPointSet lattice_points(const GeneratingVector& z, std::uint64_t n, int d, Shift shift) {
    return UnitPointSet(z, n, d, std::move(shift));
}

TransformedPointSet transform_points(UnitPointSet points, std::function<double(double)> quantile,
                                     bool clamp_zero) {
    return TransformedPointSet(std::move(points), std::move(quantile), clamp_zero);
}

}  // namespace preint
