// Information criteria from the differential-filter output.
//
// I is estimated from per-observation scores, J from the total Hessian, and
// the GIC bias correction is tr(I J^{-1}). For maximum likelihood estimates
// this is the TIC.
#pragma once

#include "ssmgic/diff_filter.hpp"
#include "ssmgic/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ssmgic {

/// Condition numbers of J above this are treated as singular.
inline constexpr double kMaxJCondition = 1e12;

struct CriteriaReport {
    double loglik = 0.0;
    std::size_t p = 0;
    Matrix I_hat;
    Matrix J_hat;
    /// Empty when J_hat is singular or too ill-conditioned to invert.
    std::optional<double> b_gic;
    std::optional<double> gic;
    double aic = 0.0;
    double j_condition = 0.0;

    [[nodiscard]] bool j_singular() const noexcept { return !b_gic.has_value(); }
};

/// (1/N) sum_n s_n s_n^T over the rows of `scores` (N x p).
[[nodiscard]] Matrix fisher_information(const Matrix& scores);

/// -(1/N) * hessian, where `hessian` is the total over N observations.
[[nodiscard]] Matrix neg_hessian_estimate(const Matrix& hessian, std::size_t n_obs);

/// Assembles AIC and GIC; b_gic is left empty if J_hat cannot be inverted.
[[nodiscard]] CriteriaReport gic(double loglik, const Matrix& I_hat, const Matrix& J_hat);

/// Convenience: criteria straight from a hessian_filter() evaluation.
[[nodiscard]] CriteriaReport criteria_from(const LikelihoodEvaluation& eval);

struct LabeledReport {
    std::string label;
    CriteriaReport report;
};

struct ComparisonRow {
    std::size_t rank = 0;
    std::string label;
    double loglik = 0.0;
    std::size_t p = 0;
    std::optional<double> b_gic;
    double aic = 0.0;
    std::optional<double> gic;
};

/// Rows sorted by GIC ascending (undefined GIC last), then AIC, then label.
[[nodiscard]] std::vector<ComparisonRow> compare_models(const std::vector<LabeledReport>& reports);

}  // namespace ssmgic
