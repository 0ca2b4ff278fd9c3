// Builders for the trend, seasonal-adjustment and seasonal-adjustment-with-AR
// families, plus a simulator for any ModelSpec.
//
// All builders take parameters on the working scale: variances enter as their
// logarithms, AR coefficients enter directly. Derivative families are exact.
#pragma once

#include "ssmgic/types.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace ssmgic {

/// (1 - B)^order T_n = v_n,  y_n = T_n + w_n.  theta = (log tau^2, log sigma^2).
struct TrendConfig {
    int order = 1;
};

/// Trend of order `trend_order` plus a dummy-seasonal component of period s.
/// theta = (log tau1^2, log tau2^2, log sigma^2).
struct SeasonalConfig {
    int trend_order = 2;
    int period = 12;
};

/// Seasonal model plus an AR(ar_order) component.
/// theta = (log tau1^2, log tau2^2, log tau3^2, log sigma^2, a_1, ..., a_m3).
struct SeasonalArConfig {
    SeasonalConfig seasonal;
    int ar_order = 1;
};

using ModelConfig = std::variant<TrendConfig, SeasonalConfig, SeasonalArConfig>;

[[nodiscard]] ModelSpec build_trend(const TrendConfig& cfg, const Vector& theta);
[[nodiscard]] ModelSpec build_seasonal(const SeasonalConfig& cfg, const Vector& theta);
[[nodiscard]] ModelSpec build_seasonal_ar(const SeasonalArConfig& cfg, const Vector& theta);

/// Type-erased builder: maps working-scale theta to a ModelSpec and carries
/// the parameter metadata the optimizer and reports need.
class ModelBuilder {
public:
    explicit ModelBuilder(ModelConfig cfg);

    [[nodiscard]] ModelSpec operator()(const Vector& theta) const;

    [[nodiscard]] const ModelConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] std::size_t param_dim() const noexcept { return names_.size(); }
    [[nodiscard]] std::size_t state_dim() const noexcept { return state_dim_; }
    [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }
    [[nodiscard]] const std::vector<bool>& log_scale() const noexcept { return log_scale_; }

    /// Short identifier, e.g. "trend(k=2)" or "seasonal-ar(m1=2,s=12,m3=1)".
    [[nodiscard]] std::string label() const;

    /// (m1, m2, m3) orders as tabulated in model comparisons; m2 = 0 for trend.
    [[nodiscard]] std::array<int, 3> orders() const;

    [[nodiscard]] ParameterVector parameters(const Vector& theta) const;
    [[nodiscard]] ParameterVector parameters_from_natural(const Vector& natural) const;

    /// Indices of the AR coefficients within theta (empty for non-AR models).
    [[nodiscard]] std::vector<std::size_t> ar_indices() const;

private:
    ModelConfig cfg_;
    std::vector<std::string> names_;
    std::vector<bool> log_scale_;
    std::size_t state_dim_ = 0;
};

/// Moduli of the roots of z^m - a_1 z^{m-1} - ... - a_m (eigenvalues of the
/// AR companion block), sorted descending. All < 1 iff the AR part is stationary.
[[nodiscard]] std::vector<double> ar_root_moduli(const std::vector<double>& coefficients);

/// Draws x_0 ~ N(x0, V0) then iterates the state and observation equations.
/// Deterministic for a given seed on a given standard library.
[[nodiscard]] TimeSeries simulate(const ModelSpec& spec, const FilterInit& init, std::size_t n,
                                  std::uint64_t seed);

}  // namespace ssmgic
