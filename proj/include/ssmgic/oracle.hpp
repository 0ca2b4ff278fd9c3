// Central finite-difference derivatives, used as an independent check of the
// differential filter.
#pragma once

#include "ssmgic/types.hpp"

#include <functional>

namespace ssmgic {

/// Step for component j is max(rel_step * |theta_j|, abs_floor).
struct FdConfig {
    double rel_step = 1e-4;
    double abs_floor = 1e-8;
};

using ScalarFn = std::function<double(const Vector&)>;
using GradientFn = std::function<Vector(const Vector&)>;

/// (f(theta + h e_j) - f(theta - h e_j)) / 2h for each j; exactly 2p calls.
[[nodiscard]] Vector fd_gradient(const ScalarFn& loglik, const Vector& theta, const FdConfig& cfg = {});

/// Central differences of an analytic gradient, symmetrized; exactly 2p calls.
[[nodiscard]] Matrix fd_hessian(const GradientFn& grad, const Vector& theta, const FdConfig& cfg = {});

/// Step actually used for component value `theta_j`.
[[nodiscard]] double fd_step(double theta_j, const FdConfig& cfg);

}  // namespace ssmgic
