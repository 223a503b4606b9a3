#pragma once

#include <cmath>

namespace preint {

/// Neumaier-compensated accumulator. Accumulation order is part of the
/// contract: summing the same values in the same order gives the same bits.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }

    /// Folds another accumulator in, preserving the fixed-order merge contract.
    void merge(const CompensatedSum& other) {
        add(other.sum);
        add(other.comp);
    }

    [[nodiscard]] double value() const { return sum + comp; }
};

}  // namespace preint
