#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "specsense/bpdn.hpp"

namespace specsense {

/// Per-subband busy/idle verdict at threshold lambda.
struct DecisionVector {
    std::vector<std::uint8_t> d_hat;
    double threshold = 0.0;
};

/// d_hat[l] = 1 iff x_hat[l] > lambda. Equality counts as idle.
inline DecisionVector decide(std::span<const double> x_hat, double lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("decide: lambda must be nonnegative");
    DecisionVector d;
    d.threshold = lambda;
    d.d_hat.resize(x_hat.size());
    for (std::size_t i = 0; i < x_hat.size(); ++i) d.d_hat[i] = x_hat[i] > lambda ? 1 : 0;
    return d;
}

inline DecisionVector decide(const RecoveredLevels& rec, double lambda) {
    return decide(std::span<const double>(rec.x_hat), lambda);
}

}  // namespace specsense
