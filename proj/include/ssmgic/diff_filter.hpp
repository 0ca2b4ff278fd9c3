// Differential Kalman filter: propagates first and second parameter
// derivatives of the filter quantities alongside the Kalman recursion and
// yields the exact gradient and Hessian of the log-likelihood.
//
// G and H are taken to be parameter-free and d2F is honoured when F depends on
// the parameters. When F_is_constant is set every dF-bearing term is skipped.
#pragma once

#include "ssmgic/types.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ssmgic {

/// Raised when a propagated derivative becomes non-finite.
class DerivativeDivergence : public FilterDivergence {
public:
    DerivativeDivergence(std::size_t step, const std::string& component)
        : FilterDivergence(step, "non-finite derivative with respect to " + component) {}
};

/// Index of the unordered pair (i, j) in packed upper-triangle storage.
[[nodiscard]] constexpr std::size_t packed_index(std::size_t i, std::size_t j, std::size_t p) noexcept {
    if (i > j) std::swap(i, j);
    return i * p - i * (i + 1) / 2 + j;
}

/// Derivatives of the filter quantities at one time step. First derivatives
/// are stored one column / matrix per parameter; second derivatives as the
/// p(p+1)/2 packed upper-triangle pairs (use packed_index).
struct DerivativeState {
    Matrix dx_pred;                 // m x p
    std::vector<Matrix> dV_pred;    // p of m x m
    Matrix dx_filt;                 // m x p
    std::vector<Matrix> dV_filt;    // p of m x m
    Matrix dK;                      // m x p
    Vector d_eps;                   // p
    Vector d_r;                     // p

    std::vector<Vector> d2x_pred;   // packed pairs of m
    std::vector<Matrix> d2V_pred;   // packed pairs of m x m
    std::vector<Vector> d2x_filt;
    std::vector<Matrix> d2V_filt;
    std::vector<Vector> d2K;
    Matrix d2_eps;                  // p x p (full)
    Matrix d2_r;                    // p x p (full)

    /// Zero derivatives at the initial state (the initialization does not
    /// depend on theta). Second-order blocks are allocated only if requested.
    static DerivativeState zero(std::size_t m, std::size_t p, bool second_order);
};

struct LikelihoodEvaluation {
    double loglik = 0.0;
    Vector gradient;
    /// Present only for hessian_filter().
    std::optional<Matrix> hessian;
    /// N x p; row n holds d log g_n / d theta.
    Matrix scores;
};

/// Log-likelihood, gradient and per-observation scores.
[[nodiscard]] LikelihoodEvaluation gradient_filter(const ModelSpec& spec, const FilterInit& init,
                                                   const TimeSeries& y);

/// As gradient_filter, plus the Hessian of the log-likelihood.
[[nodiscard]] LikelihoodEvaluation hessian_filter(const ModelSpec& spec, const FilterInit& init,
                                                  const TimeSeries& y);

}  // namespace ssmgic
