// Core value types shared by the filter, derivative filter, optimizer and CLI.
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssmgic {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

/// Raised for malformed inputs (dimensions, non-finite values, bad configs).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a recursion produces a non-positive innovation variance or a
/// non-finite quantity. `step` is 1-based, matching observation indices.
class FilterDivergence : public std::runtime_error {
public:
    FilterDivergence(std::size_t step, const std::string& what)
        : std::runtime_error("filter diverged at step " + std::to_string(step) + ": " + what),
          step_(step) {}

    [[nodiscard]] std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Univariate observation sequence y_1..y_N. Always non-empty and finite.
class TimeSeries {
public:
    explicit TimeSeries(std::vector<double> values);

    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double operator[](std::size_t n) const noexcept { return values_[n]; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

private:
    std::vector<double> values_;
};

/// Parameters on the working scale. Entries flagged `log_scale` are
/// log-variances whose natural value is exp(theta_j); the rest are used as-is.
class ParameterVector {
public:
    ParameterVector(Vector theta, std::vector<std::string> names, std::vector<bool> log_scale);

    /// Builds from natural-scale values (variances > 0 for log-scale entries).
    static ParameterVector from_natural(const Vector& natural, std::vector<std::string> names,
                                        std::vector<bool> log_scale);

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(theta_.size()); }
    [[nodiscard]] const Vector& theta() const noexcept { return theta_; }
    [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }
    [[nodiscard]] const std::vector<bool>& log_scale() const noexcept { return log_scale_; }
    [[nodiscard]] Vector natural_scale() const;

    /// Same metadata, new working-scale values.
    [[nodiscard]] ParameterVector with_theta(Vector theta) const;

private:
    Vector theta_;
    std::vector<std::string> names_;
    std::vector<bool> log_scale_;
};

/// Time-invariant linear Gaussian state-space model with univariate
/// observations, together with the first and second parameter derivatives of
/// its system matrices.
///
///   x_n = F x_{n-1} + G v_n,   v_n ~ N(0, Q)
///   y_n = H x_n + w_n,         w_n ~ N(0, R)
///
/// G and H never depend on the parameters; F may (AR coefficients). The
/// second-derivative families are indexed [i][j] and stored in full.
struct ModelSpec {
    std::size_t state_dim = 0;
    std::size_t noise_dim = 0;
    std::size_t param_dim = 0;

    Matrix F;
    Matrix G;
    RowVector H;
    Matrix Q;
    double R = 0.0;

    std::vector<Matrix> dF;
    std::vector<Matrix> dQ;
    std::vector<double> dR;

    std::vector<std::vector<Matrix>> d2F;
    std::vector<std::vector<Matrix>> d2Q;
    std::vector<std::vector<double>> d2R;

    bool F_is_constant = true;
    bool G_is_constant = true;
    bool H_is_constant = true;
};

/// Every violated ModelSpec invariant, one human-readable line each.
/// An empty result means the spec is internally consistent.
[[nodiscard]] std::vector<std::string> validate_model(const ModelSpec& spec);

/// Throws InvalidInput carrying the joined violations when the spec is invalid.
void require_valid(const ModelSpec& spec);

/// Initial filter state x_{0|0}, V_{0|0}. Unset members default to zero and
/// kappa * I sized to the model.
struct FilterInit {
    std::optional<Vector> x0;
    std::optional<Matrix> V0;
    double kappa = 1.0e4;

    [[nodiscard]] Vector initial_state(std::size_t m) const;
    [[nodiscard]] Matrix initial_covariance(std::size_t m) const;
};

/// Per-observation Kalman quantities.
struct FilterStep {
    Vector x_pred;
    Matrix V_pred;
    Vector x_filt;
    Matrix V_filt;
    Vector gain;
    double innovation = 0.0;
    double innovation_var = 0.0;
};

inline void symmetrize(Matrix& m) { m = 0.5 * (m + m.transpose()).eval(); }

}  // namespace ssmgic
