// Shared fixtures for the test binaries.
#pragma once

#include "ssmgic/models.hpp"
#include "ssmgic/types.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace ssmgic::testing {

inline double rel_err(double value, double reference, double floor) {
    return std::abs(value - reference) / std::max(std::abs(reference), floor);
}

inline double max_rel_err(const Matrix& value, const Matrix& reference, double floor) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < value.rows(); ++i) {
        for (Eigen::Index j = 0; j < value.cols(); ++j) {
            worst = std::max(worst, rel_err(value(i, j), reference(i, j), floor));
        }
    }
    return worst;
}

struct Family {
    std::string name;
    ModelConfig config;
};

/// The families exercised by the property sweeps.
inline std::vector<Family> all_families() {
    return {
        {"trend k=1", TrendConfig{1}},
        {"trend k=2", TrendConfig{2}},
        {"seasonal s=12", SeasonalConfig{2, 12}},
        {"seasonal-ar m3=1", SeasonalArConfig{{2, 12}, 1}},
        {"seasonal-ar m3=2", SeasonalArConfig{{2, 12}, 2}},
    };
}

/// Random admissible theta: log-variances in [-4, 0.5] away from zero and a
/// stationary AR part with roots of modulus in [0.3, 0.8].
inline Vector random_theta(const ModelBuilder& builder, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> log_var(-4.0, 0.5);
    std::uniform_real_distribution<double> root(0.3, 0.8);
    std::bernoulli_distribution flip(0.5);
    const auto p = static_cast<Eigen::Index>(builder.param_dim());
    Vector theta(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        double v = log_var(rng);
        while (std::abs(v) < 0.05) v = log_var(rng);
        theta[j] = v;
    }
    const auto ar = builder.ar_indices();
    if (ar.size() == 1) {
        theta[static_cast<Eigen::Index>(ar[0])] = (flip(rng) ? 1.0 : -1.0) * root(rng);
    } else if (ar.size() == 2) {
        const double r1 = (flip(rng) ? 1.0 : -1.0) * root(rng);
        const double r2 = (flip(rng) ? 1.0 : -1.0) * root(rng);
        theta[static_cast<Eigen::Index>(ar[0])] = r1 + r2;
        theta[static_cast<Eigen::Index>(ar[1])] = -r1 * r2;
    }
    return theta;
}

/// Simulated series started from a unit-variance initial state.
inline TimeSeries simulated(const ModelSpec& spec, std::size_t n, std::uint64_t seed) {
    FilterInit init;
    init.V0 = Matrix::Identity(static_cast<Eigen::Index>(spec.state_dim), static_cast<Eigen::Index>(spec.state_dim));
    return simulate(spec, init, n, seed);
}

}  // namespace ssmgic::testing
