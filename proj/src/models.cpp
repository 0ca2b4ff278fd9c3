#include "ssmgic/models.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace ssmgic {

namespace {

ModelSpec skeleton(std::size_t m, std::size_t k, std::size_t p) {
    const auto mm = static_cast<Eigen::Index>(m);
    const auto kk = static_cast<Eigen::Index>(k);
    ModelSpec s;
    s.state_dim = m;
    s.noise_dim = k;
    s.param_dim = p;
    s.F = Matrix::Zero(mm, mm);
    s.G = Matrix::Zero(mm, kk);
    s.H = RowVector::Zero(mm);
    s.Q = Matrix::Zero(kk, kk);
    s.dF.assign(p, Matrix::Zero(mm, mm));
    s.dQ.assign(p, Matrix::Zero(kk, kk));
    s.dR.assign(p, 0.0);
    s.d2F.assign(p, std::vector<Matrix>(p, Matrix::Zero(mm, mm)));
    s.d2Q.assign(p, std::vector<Matrix>(p, Matrix::Zero(kk, kk)));
    s.d2R.assign(p, std::vector<double>(p, 0.0));
    return s;
}

void require_theta(const Vector& theta, std::size_t p, const char* family) {
    if (static_cast<std::size_t>(theta.size()) != p) {
        std::ostringstream os;
        os << family << " model expects " << p << " parameters, got " << theta.size();
        throw InvalidInput(os.str());
    }
    if (!theta.allFinite()) throw InvalidInput(std::string(family) + " parameters must be finite");
}

// Writes the trend companion block at (offset, offset); returns its size.
std::size_t place_trend(Matrix& F, int order, std::size_t offset) {
    const auto o = static_cast<Eigen::Index>(offset);
    if (order == 1) {
        F(o, o) = 1.0;
        return 1;
    }
    F(o, o) = 2.0;
    F(o, o + 1) = -1.0;
    F(o + 1, o) = 1.0;
    return 2;
}

// Dummy-seasonal block of size s-1: first row all -1, unit subdiagonal.
void place_seasonal(Matrix& F, int period, std::size_t offset) {
    const auto o = static_cast<Eigen::Index>(offset);
    const Eigen::Index n = period - 1;
    for (Eigen::Index j = 0; j < n; ++j) F(o, o + j) = -1.0;
    for (Eigen::Index j = 1; j < n; ++j) F(o + j, o + j - 1) = 1.0;
}

// Variance entry `channel` of Q driven by log-variance parameter `param`.
void set_log_variance(ModelSpec& s, std::size_t channel, std::size_t param, double log_var) {
    const double v = std::exp(log_var);
    const auto c = static_cast<Eigen::Index>(channel);
    s.Q(c, c) = v;
    s.dQ[param](c, c) = v;
    s.d2Q[param][param](c, c) = v;
}

void set_observation_variance(ModelSpec& s, std::size_t param, double log_var) {
    const double v = std::exp(log_var);
    s.R = v;
    s.dR[param] = v;
    s.d2R[param][param] = v;
}

void check_seasonal(const SeasonalConfig& cfg) {
    if (cfg.trend_order != 1 && cfg.trend_order != 2) {
        throw InvalidInput("seasonal model trend order must be 1 or 2, got " + std::to_string(cfg.trend_order));
    }
    if (cfg.period < 2) throw InvalidInput("seasonal period must be at least 2, got " + std::to_string(cfg.period));
}

// Shared trend + seasonal structure; returns the offset after the seasonal block.
std::size_t place_trend_seasonal(ModelSpec& s, const SeasonalConfig& cfg) {
    const std::size_t trend = place_trend(s.F, cfg.trend_order, 0);
    place_seasonal(s.F, cfg.period, trend);
    const auto t = static_cast<Eigen::Index>(trend);
    s.G(0, 0) = 1.0;
    s.G(t, 1) = 1.0;
    s.H(0) = 1.0;
    s.H(t) = 1.0;
    return trend + static_cast<std::size_t>(cfg.period - 1);
}

}  // namespace

ModelSpec build_trend(const TrendConfig& cfg, const Vector& theta) {
    if (cfg.order != 1 && cfg.order != 2) {
        throw InvalidInput("trend order must be 1 or 2, got " + std::to_string(cfg.order));
    }
    require_theta(theta, 2, "trend");
    const auto m = static_cast<std::size_t>(cfg.order);
    ModelSpec s = skeleton(m, 1, 2);
    place_trend(s.F, cfg.order, 0);
    s.G(0, 0) = 1.0;
    s.H(0) = 1.0;
    set_log_variance(s, 0, 0, theta[0]);
    set_observation_variance(s, 1, theta[1]);
    return s;
}

ModelSpec build_seasonal(const SeasonalConfig& cfg, const Vector& theta) {
    check_seasonal(cfg);
    require_theta(theta, 3, "seasonal");
    const auto m = static_cast<std::size_t>(cfg.trend_order + cfg.period - 1);
    ModelSpec s = skeleton(m, 2, 3);
    place_trend_seasonal(s, cfg);
    set_log_variance(s, 0, 0, theta[0]);
    set_log_variance(s, 1, 1, theta[1]);
    set_observation_variance(s, 2, theta[2]);
    return s;
}

ModelSpec build_seasonal_ar(const SeasonalArConfig& cfg, const Vector& theta) {
    check_seasonal(cfg.seasonal);
    if (cfg.ar_order < 1) throw InvalidInput("AR order must be at least 1, got " + std::to_string(cfg.ar_order));
    const auto ar = static_cast<std::size_t>(cfg.ar_order);
    const std::size_t p = 4 + ar;
    require_theta(theta, p, "seasonal-ar");

    const auto m = static_cast<std::size_t>(cfg.seasonal.trend_order + cfg.seasonal.period - 1) + ar;
    ModelSpec s = skeleton(m, 3, p);
    const auto o = static_cast<Eigen::Index>(place_trend_seasonal(s, cfg.seasonal));

    for (std::size_t i = 0; i < ar; ++i) {
        const auto c = o + static_cast<Eigen::Index>(i);
        s.F(o, c) = theta[static_cast<Eigen::Index>(4 + i)];
        s.dF[4 + i](o, c) = 1.0;
        if (i > 0) s.F(c, c - 1) = 1.0;
    }
    s.G(o, 2) = 1.0;
    s.H(o) = 1.0;
    s.F_is_constant = false;

    set_log_variance(s, 0, 0, theta[0]);
    set_log_variance(s, 1, 1, theta[1]);
    set_log_variance(s, 2, 2, theta[2]);
    set_observation_variance(s, 3, theta[3]);
    return s;
}

ModelBuilder::ModelBuilder(ModelConfig cfg) : cfg_(std::move(cfg)) {
    std::visit(
        [this](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, TrendConfig>) {
                if (c.order != 1 && c.order != 2) throw InvalidInput("trend order must be 1 or 2");
                names_ = {"log_tau2", "log_sigma2"};
                state_dim_ = static_cast<std::size_t>(c.order);
            } else if constexpr (std::is_same_v<T, SeasonalConfig>) {
                check_seasonal(c);
                names_ = {"log_tau1_2", "log_tau2_2", "log_sigma2"};
                state_dim_ = static_cast<std::size_t>(c.trend_order + c.period - 1);
            } else {
                check_seasonal(c.seasonal);
                if (c.ar_order < 1) throw InvalidInput("AR order must be at least 1");
                names_ = {"log_tau1_2", "log_tau2_2", "log_tau3_2", "log_sigma2"};
                for (int i = 1; i <= c.ar_order; ++i) names_.push_back("a" + std::to_string(i));
                state_dim_ = static_cast<std::size_t>(c.seasonal.trend_order + c.seasonal.period - 1 + c.ar_order);
            }
        },
        cfg_);
    log_scale_.assign(names_.size(), true);
    for (auto i : ar_indices()) log_scale_[i] = false;
}

ModelSpec ModelBuilder::operator()(const Vector& theta) const {
    return std::visit(
        [&theta](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, TrendConfig>) {
                return build_trend(c, theta);
            } else if constexpr (std::is_same_v<T, SeasonalConfig>) {
                return build_seasonal(c, theta);
            } else {
                return build_seasonal_ar(c, theta);
            }
        },
        cfg_);
}

std::string ModelBuilder::label() const {
    return std::visit(
        [](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            std::ostringstream os;
            if constexpr (std::is_same_v<T, TrendConfig>) {
                os << "trend(k=" << c.order << ")";
            } else if constexpr (std::is_same_v<T, SeasonalConfig>) {
                os << "seasonal(m1=" << c.trend_order << ",s=" << c.period << ")";
            } else {
                os << "seasonal-ar(m1=" << c.seasonal.trend_order << ",s=" << c.seasonal.period
                   << ",m3=" << c.ar_order << ")";
            }
            return os.str();
        },
        cfg_);
}

std::array<int, 3> ModelBuilder::orders() const {
    return std::visit(
        [](const auto& c) -> std::array<int, 3> {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, TrendConfig>) {
                return {c.order, 0, 0};
            } else if constexpr (std::is_same_v<T, SeasonalConfig>) {
                return {c.trend_order, 1, 0};
            } else {
                return {c.seasonal.trend_order, 1, c.ar_order};
            }
        },
        cfg_);
}

ParameterVector ModelBuilder::parameters(const Vector& theta) const {
    return ParameterVector(theta, names_, log_scale_);
}

ParameterVector ModelBuilder::parameters_from_natural(const Vector& natural) const {
    return ParameterVector::from_natural(natural, names_, log_scale_);
}

std::vector<std::size_t> ModelBuilder::ar_indices() const {
    std::vector<std::size_t> out;
    if (const auto* c = std::get_if<SeasonalArConfig>(&cfg_)) {
        for (int i = 0; i < c->ar_order; ++i) out.push_back(4 + static_cast<std::size_t>(i));
    }
    return out;
}

std::vector<double> ar_root_moduli(const std::vector<double>& coefficients) {
    const auto m = static_cast<Eigen::Index>(coefficients.size());
    if (m == 0) return {};
    Matrix companion = Matrix::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) companion(0, i) = coefficients[static_cast<std::size_t>(i)];
    for (Eigen::Index i = 1; i < m; ++i) companion(i, i - 1) = 1.0;
    Eigen::EigenSolver<Matrix> eig(companion, false);
    std::vector<double> out;
    for (Eigen::Index i = 0; i < m; ++i) out.push_back(std::abs(eig.eigenvalues()[i]));
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

namespace {

// Symmetric square root of a PSD matrix; rejects materially negative eigenvalues.
Matrix psd_sqrt(const Matrix& a, const char* name) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
    Vector ev = eig.eigenvalues();
    const double tol = 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff());
    if (ev.minCoeff() < -tol) throw InvalidInput(std::string(name) + " has a negative eigenvalue");
    ev = ev.cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

TimeSeries simulate(const ModelSpec& spec, const FilterInit& init, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw InvalidInput("simulation length must be at least 1");
    require_valid(spec);
    if (spec.R < 0.0) throw InvalidInput("R is negative");

    const Vector x0 = init.initial_state(spec.state_dim);
    const Matrix v0_sqrt = psd_sqrt(init.initial_covariance(spec.state_dim), "V0");
    const Matrix q_sqrt = psd_sqrt(spec.Q, "Q");
    const double r_sqrt = std::sqrt(spec.R);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto draw = [&](Eigen::Index size) {
        Vector z(size);
        for (Eigen::Index i = 0; i < size; ++i) z[i] = normal(rng);
        return z;
    };

    Vector x = x0 + v0_sqrt * draw(x0.size());
    std::vector<double> y;
    y.reserve(n);
    for (std::size_t t = 0; t < n; ++t) {
        x = spec.F * x + spec.G * (q_sqrt * draw(spec.Q.rows()));
        y.push_back(spec.H.dot(x) + r_sqrt * normal(rng));
    }
    return TimeSeries(std::move(y));
}

}  // namespace ssmgic
