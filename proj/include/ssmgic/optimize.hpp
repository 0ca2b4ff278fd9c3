// Quasi-Newton (BFGS) maximum likelihood estimation driven by the analytic
// gradient of the differential filter.
#pragma once

#include "ssmgic/criteria.hpp"
#include "ssmgic/models.hpp"
#include "ssmgic/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ssmgic {

inline constexpr double kLoglikTie = 1e-9;

struct OptimizerConfig {
    int max_iters = 200;
    /// Convergence when |grad loglik|_inf < grad_tol.
    double grad_tol = 1e-8;
    double step_shrink = 0.5;
    double armijo_c = 1e-4;
    /// Relative rounding level of the log-likelihood. Steps whose value change
    /// is below it are judged by the approximate Wolfe slope test instead.
    double value_noise = 1e-12;
    int max_line_search = 60;
    /// Largest working-scale change of any single component per trial step.
    double max_step = 2.0;
    /// Lower bound applied to log-variance entries of theta.
    double log_variance_floor = -60.0;
    /// Starting inverse-Hessian approximation; identity when unset.
    std::optional<Matrix> initial_inverse_hessian;

    void validate(std::size_t p) const;
};

struct TrajectoryPoint {
    Vector theta;
    double loglik = 0.0;
};

struct FitResult {
    ParameterVector theta_hat;
    double loglik = 0.0;
    Vector gradient{};
    double gradient_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string message{};
    std::vector<TrajectoryPoint> trajectory{};
    /// Hessian of the log-likelihood at theta_hat.
    std::optional<Matrix> hessian{};
    /// Absent only if the Hessian evaluation at theta_hat failed.
    std::optional<CriteriaReport> criteria{};
};

/// Maximizes the log-likelihood from theta0 (working scale). Throws
/// FilterDivergence if the likelihood cannot be evaluated at theta0.
[[nodiscard]] FitResult fit(const ModelBuilder& builder, const TimeSeries& y, const Vector& theta0,
                            const OptimizerConfig& cfg = {}, const FilterInit& init = {});

/// Runs fit() from every start and returns the successful results sorted by
/// log-likelihood, best first. Results within kLoglikTie * max(1, |l|) of the
/// best count as tied for the head position, which goes to a converged one
/// with the smallest gradient. Starts that diverge are dropped; throws
/// FilterDivergence if every start diverges.
[[nodiscard]] std::vector<FitResult> multi_start_fit(const ModelBuilder& builder, const TimeSeries& y,
                                                     const std::vector<Vector>& starts,
                                                     const OptimizerConfig& cfg = {},
                                                     const FilterInit& init = {});

}  // namespace ssmgic
