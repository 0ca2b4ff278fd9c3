#include "ssmgic/kalman.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace ssmgic {

namespace {

constexpr std::size_t kBruteForceMaxLength = 50;

template <typename OnStep>
double run_filter(const ModelSpec& spec, const FilterInit& init, const TimeSeries& y, OnStep&& on_step) {
    require_valid(spec);
    const std::size_t m = spec.state_dim;
    Vector x = init.initial_state(m);
    Matrix V = init.initial_covariance(m);
    const Matrix GQGt = spec.G * spec.Q * spec.G.transpose();
    const Matrix I = Matrix::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));

    double loglik = 0.0;
    for (std::size_t n = 0; n < y.size(); ++n) {
        FilterStep st;
        st.x_pred = spec.F * x;
        st.V_pred = spec.F * V * spec.F.transpose() + GQGt;
        symmetrize(st.V_pred);

        const Vector VHt = st.V_pred * spec.H.transpose();
        st.innovation_var = spec.H.dot(VHt) + spec.R;
        st.innovation = y[n] - spec.H.dot(st.x_pred);
        if (!(st.innovation_var > 0.0) || !std::isfinite(st.innovation_var)) {
            throw FilterDivergence(n + 1, "innovation variance r_n = " + std::to_string(st.innovation_var));
        }
        st.gain = VHt / st.innovation_var;
        st.x_filt = st.x_pred + st.gain * st.innovation;
        st.V_filt = (I - st.gain * spec.H) * st.V_pred;
        symmetrize(st.V_filt);
        if (!st.x_filt.allFinite() || !st.V_filt.allFinite()) {
            throw FilterDivergence(n + 1, "non-finite filtered state");
        }

        const double lg = gaussian_log_density(st.innovation, st.innovation_var);
        loglik += lg;
        x = st.x_filt;
        V = st.V_filt;
        on_step(std::move(st), lg);
    }
    return loglik;
}

}  // namespace

FilterOutput filter(const ModelSpec& spec, const FilterInit& init, const TimeSeries& y) {
    FilterOutput out;
    out.steps.reserve(y.size());
    out.per_step_loglik.reserve(y.size());
    out.loglik = run_filter(spec, init, y, [&out](FilterStep&& st, double lg) {
        out.steps.push_back(std::move(st));
        out.per_step_loglik.push_back(lg);
    });
    return out;
}

double log_likelihood(const ModelSpec& spec, const FilterInit& init, const TimeSeries& y) {
    return run_filter(spec, init, y, [](FilterStep&&, double) {});
}

double brute_force_loglik(const ModelSpec& spec, const FilterInit& init, const TimeSeries& y) {
    require_valid(spec);
    const std::size_t N = y.size();
    if (N > kBruteForceMaxLength) {
        throw InvalidInput("brute-force likelihood is limited to N <= " + std::to_string(kBruteForceMaxLength));
    }
    const Matrix GQGt = spec.G * spec.Q * spec.G.transpose();

    // Unconditional moments of x_1..x_N: mean F^n x0, Var(x_n) = P_n, and
    // Cov(x_n, x_l) = F^{n-l} P_l for n >= l.
    std::vector<Vector> mean(N);
    std::vector<Matrix> P(N);
    Vector mu = init.initial_state(spec.state_dim);
    Matrix cov = init.initial_covariance(spec.state_dim);
    for (std::size_t n = 0; n < N; ++n) {
        mu = spec.F * mu;
        cov = spec.F * cov * spec.F.transpose() + GQGt;
        mean[n] = mu;
        P[n] = cov;
    }

    const auto NN = static_cast<Eigen::Index>(N);
    Vector resid(NN);
    Matrix S(NN, NN);
    for (std::size_t l = 0; l < N; ++l) {
        resid[static_cast<Eigen::Index>(l)] = y[l] - spec.H.dot(mean[l]);
        Matrix cross = P[l];  // Cov(x_n, x_l) for n = l, l+1, ...
        for (std::size_t n = l; n < N; ++n) {
            if (n > l) cross = spec.F * cross;
            const double c = spec.H * cross * spec.H.transpose();
            S(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(l)) = c;
            S(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(n)) = c;
        }
        S(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(l)) += spec.R;
    }

    Eigen::LLT<Matrix> llt(S);
    if (llt.info() != Eigen::Success) throw InvalidInput("joint covariance of the observations is singular");
    const Matrix& L = llt.matrixL();
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < NN; ++i) logdet += 2.0 * std::log(L(i, i));
    const Vector z = llt.matrixL().solve(resid);
    return -0.5 * (static_cast<double>(N) * kLog2Pi + logdet + z.squaredNorm());
}

}  // namespace ssmgic
