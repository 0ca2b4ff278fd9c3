// Kalman filter and the prediction-error decomposition of the log-likelihood.
#pragma once

#include "ssmgic/types.hpp"

#include <cmath>
#include <vector>

namespace ssmgic {

inline constexpr double kLog2Pi = 1.8378770664093454836;

struct FilterOutput {
    std::vector<FilterStep> steps;
    double loglik = 0.0;
    std::vector<double> per_step_loglik;
};

/// -0.5 * (log 2pi + log r + eps^2 / r)
[[nodiscard]] inline double gaussian_log_density(double innovation, double variance) noexcept {
    return -0.5 * (kLog2Pi + std::log(variance) + innovation * innovation / variance);
}

/// Runs the filter over y. Covariances are symmetrized after every update.
/// Throws FilterDivergence if r_n <= 0 or any quantity becomes non-finite.
[[nodiscard]] FilterOutput filter(const ModelSpec& spec, const FilterInit& init, const TimeSeries& y);

/// Log-likelihood only; same recursion as filter() without storing the steps.
[[nodiscard]] double log_likelihood(const ModelSpec& spec, const FilterInit& init, const TimeSeries& y);

/// Joint-Gaussian log-density of y_1..y_N computed from the dense N x N
/// covariance implied by (x0, V0) and the model. Independent of the filter
/// recursion; intended as a test oracle for short series (N <= 50).
[[nodiscard]] double brute_force_loglik(const ModelSpec& spec, const FilterInit& init, const TimeSeries& y);

}  // namespace ssmgic
