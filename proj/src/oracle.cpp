#include "ssmgic/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace ssmgic {

namespace {

void check_config(const FdConfig& cfg) {
    if (!(cfg.rel_step > 0.0)) throw InvalidInput("finite-difference relative step must be positive");
    if (!(cfg.abs_floor > 0.0)) throw InvalidInput("finite-difference absolute floor must be positive");
}

[[noreturn]] void non_finite(Eigen::Index j) {
    throw InvalidInput("non-finite function value while differencing component " + std::to_string(j));
}

}  // namespace

double fd_step(double theta_j, const FdConfig& cfg) {
    return std::max(cfg.rel_step * std::abs(theta_j), cfg.abs_floor);
}

Vector fd_gradient(const ScalarFn& loglik, const Vector& theta, const FdConfig& cfg) {
    check_config(cfg);
    Vector g(theta.size());
    Vector probe = theta;
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
        const double h = fd_step(theta[j], cfg);
        probe[j] = theta[j] + h;
        const double up = loglik(probe);
        probe[j] = theta[j] - h;
        const double down = loglik(probe);
        probe[j] = theta[j];
        if (!std::isfinite(up) || !std::isfinite(down)) non_finite(j);
        g[j] = (up - down) / (2.0 * h);
    }
    return g;
}

Matrix fd_hessian(const GradientFn& grad, const Vector& theta, const FdConfig& cfg) {
    check_config(cfg);
    const Eigen::Index p = theta.size();
    Matrix h(p, p);
    Vector probe = theta;
    for (Eigen::Index j = 0; j < p; ++j) {
        const double step = fd_step(theta[j], cfg);
        probe[j] = theta[j] + step;
        const Vector up = grad(probe);
        probe[j] = theta[j] - step;
        const Vector down = grad(probe);
        probe[j] = theta[j];
        if (up.size() != p || down.size() != p) throw InvalidInput("gradient function returned wrong length");
        if (!up.allFinite() || !down.allFinite()) non_finite(j);
        h.col(j) = (up - down) / (2.0 * step);
    }
    return 0.5 * (h + h.transpose());
}

}  // namespace ssmgic
