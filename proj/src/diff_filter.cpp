#include "ssmgic/diff_filter.hpp"

#include "ssmgic/kalman.hpp"

#include <cmath>

namespace ssmgic {

DerivativeState DerivativeState::zero(std::size_t m, std::size_t p, bool second_order) {
    const auto mm = static_cast<Eigen::Index>(m);
    const auto pp = static_cast<Eigen::Index>(p);
    DerivativeState d;
    d.dx_pred = Matrix::Zero(mm, pp);
    d.dV_pred.assign(p, Matrix::Zero(mm, mm));
    d.dx_filt = Matrix::Zero(mm, pp);
    d.dV_filt.assign(p, Matrix::Zero(mm, mm));
    d.dK = Matrix::Zero(mm, pp);
    d.d_eps = Vector::Zero(pp);
    d.d_r = Vector::Zero(pp);
    if (second_order) {
        const std::size_t pairs = p * (p + 1) / 2;
        d.d2x_pred.assign(pairs, Vector::Zero(mm));
        d.d2V_pred.assign(pairs, Matrix::Zero(mm, mm));
        d.d2x_filt.assign(pairs, Vector::Zero(mm));
        d.d2V_filt.assign(pairs, Matrix::Zero(mm, mm));
        d.d2K.assign(pairs, Vector::Zero(mm));
        d.d2_eps = Matrix::Zero(pp, pp);
        d.d2_r = Matrix::Zero(pp, pp);
    }
    return d;
}

namespace {

std::string param_name(std::size_t j) { return "theta[" + std::to_string(j) + "]"; }

std::string pair_name(std::size_t i, std::size_t j) {
    return "theta[" + std::to_string(i) + "], theta[" + std::to_string(j) + "]";
}

LikelihoodEvaluation run(const ModelSpec& spec, const FilterInit& init, const TimeSeries& y,
                         bool second_order) {
    require_valid(spec);
    const std::size_t m = spec.state_dim;
    const std::size_t p = spec.param_dim;
    const std::size_t N = y.size();
    const bool f_varies = !spec.F_is_constant;

    const Matrix& F = spec.F;
    const Matrix Ft = F.transpose();
    const RowVector& H = spec.H;
    const Matrix GQGt = spec.G * spec.Q * spec.G.transpose();

    std::vector<Matrix> GdQGt(p);
    for (std::size_t j = 0; j < p; ++j) GdQGt[j] = spec.G * spec.dQ[j] * spec.G.transpose();
    std::vector<Matrix> Gd2QGt;
    if (second_order) {
        Gd2QGt.resize(p * (p + 1) / 2);
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = i; j < p; ++j) {
                Gd2QGt[packed_index(i, j, p)] = spec.G * spec.d2Q[i][j] * spec.G.transpose();
            }
        }
    }

    // Filtered quantities from the previous step (initially x_{0|0}, V_{0|0}).
    Vector x = init.initial_state(m);
    Matrix V = init.initial_covariance(m);
    DerivativeState d = DerivativeState::zero(m, p, second_order);

    LikelihoodEvaluation out;
    out.gradient = Vector::Zero(static_cast<Eigen::Index>(p));
    out.scores = Matrix::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(p));
    Matrix hess;
    if (second_order) hess = Matrix::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));

    std::vector<Vector> du(p);
    for (std::size_t n = 0; n < N; ++n) {
        // One-step-ahead prediction and its derivatives.
        const Vector x_pred = F * x;
        Matrix V_pred = F * V * Ft + GQGt;
        symmetrize(V_pred);
        const Matrix FV = F * V;

        for (std::size_t j = 0; j < p; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            d.dx_pred.col(jj) = F * d.dx_filt.col(jj);
            Matrix dVp = F * d.dV_filt[j] * Ft + GdQGt[j];
            if (f_varies) {
                d.dx_pred.col(jj) += spec.dF[j] * x;
                const Matrix t = spec.dF[j] * FV.transpose();  // dF V F^T
                dVp += t + t.transpose();
            }
            symmetrize(dVp);
            d.dV_pred[j] = std::move(dVp);
        }

        if (second_order) {
            for (std::size_t i = 0; i < p; ++i) {
                for (std::size_t j = i; j < p; ++j) {
                    const std::size_t ij = packed_index(i, j, p);
                    const auto ii = static_cast<Eigen::Index>(i);
                    const auto jj = static_cast<Eigen::Index>(j);
                    Vector d2x = F * d.d2x_filt[ij];
                    Matrix d2V = F * d.d2V_filt[ij] * Ft + Gd2QGt[ij];
                    if (f_varies) {
                        const Matrix& dFi = spec.dF[i];
                        const Matrix& dFj = spec.dF[j];
                        const Matrix& d2F = spec.d2F[i][j];
                        d2x += dFi * d.dx_filt.col(jj) + dFj * d.dx_filt.col(ii) + d2F * x;
                        // Each product below is paired with its transpose.
                        const Matrix half = dFi * d.dV_filt[j] * Ft + dFj * d.dV_filt[i] * Ft +
                                            dFi * V * spec.dF[j].transpose() + d2F * FV.transpose();
                        d2V += half + half.transpose();
                    }
                    symmetrize(d2V);
                    d.d2x_pred[ij] = std::move(d2x);
                    d.d2V_pred[ij] = std::move(d2V);
                }
            }
        }

        // Innovation, its variance and their derivatives.
        const Vector u = V_pred * H.transpose();  // V_{n|n-1} H^T
        const double r = H.dot(u) + spec.R;
        const double eps = y[n] - H.dot(x_pred);
        if (!(r > 0.0) || !std::isfinite(r)) {
            throw FilterDivergence(n + 1, "innovation variance r_n = " + std::to_string(r));
        }
        const double r2 = r * r;
        const Vector K = u / r;

        for (std::size_t j = 0; j < p; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            du[j] = d.dV_pred[j] * H.transpose();
            d.d_eps[jj] = -H.dot(d.dx_pred.col(jj));
            d.d_r[jj] = H.dot(du[j]) + spec.dR[j];
            d.dK.col(jj) = du[j] / r - u * (d.d_r[jj] / r2);
        }

        // Filter update and derivatives.
        const Vector x_filt = x_pred + K * eps;
        Matrix V_filt = V_pred - K * u.transpose();
        symmetrize(V_filt);
        if (!x_filt.allFinite() || !V_filt.allFinite()) throw FilterDivergence(n + 1, "non-finite filtered state");

        for (std::size_t j = 0; j < p; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            d.dx_filt.col(jj) = d.dx_pred.col(jj) + d.dK.col(jj) * eps + K * d.d_eps[jj];
            Matrix dVf = d.dV_pred[j] - d.dK.col(jj) * u.transpose() - K * du[j].transpose();
            symmetrize(dVf);
            if (!d.dx_filt.col(jj).allFinite() || !dVf.allFinite() || !std::isfinite(d.d_r[jj])) {
                throw DerivativeDivergence(n + 1, param_name(j));
            }
            d.dV_filt[j] = std::move(dVf);
        }

        // Log-density and its gradient contribution.
        const double lg = gaussian_log_density(eps, r);
        out.loglik += lg;
        for (std::size_t j = 0; j < p; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            const double s = -0.5 * (d.d_r[jj] / r + 2.0 * eps * d.d_eps[jj] / r - eps * eps * d.d_r[jj] / r2);
            out.scores(static_cast<Eigen::Index>(n), jj) = s;
            out.gradient[jj] += s;
        }

        if (second_order) {
            const double r3 = r2 * r;
            for (std::size_t i = 0; i < p; ++i) {
                for (std::size_t j = i; j < p; ++j) {
                    const std::size_t ij = packed_index(i, j, p);
                    const auto ii = static_cast<Eigen::Index>(i);
                    const auto jj = static_cast<Eigen::Index>(j);
                    const double d2eps = -H.dot(d.d2x_pred[ij]);
                    const Vector d2u = d.d2V_pred[ij] * H.transpose();
                    const double d2r = H.dot(d2u) + spec.d2R[i][j];
                    d.d2_eps(ii, jj) = d.d2_eps(jj, ii) = d2eps;
                    d.d2_r(ii, jj) = d.d2_r(jj, ii) = d2r;

                    const double dri = d.d_r[ii];
                    const double drj = d.d_r[jj];
                    const double dei = d.d_eps[ii];
                    const double dej = d.d_eps[jj];

                    Vector d2K = d2u / r - (du[i] * drj + du[j] * dri + u * d2r) / r2 + u * (2.0 * dri * drj / r3);
                    Vector d2xf = d.d2x_pred[ij] + d2K * eps + d.dK.col(ii) * dej + d.dK.col(jj) * dei + K * d2eps;
                    Matrix d2Vf = d.d2V_pred[ij] - d2K * u.transpose() - d.dK.col(ii) * du[j].transpose() -
                                  d.dK.col(jj) * du[i].transpose() - K * d2u.transpose();
                    symmetrize(d2Vf);
                    if (!d2xf.allFinite() || !d2Vf.allFinite() || !std::isfinite(d2r) || !std::isfinite(d2eps)) {
                        throw DerivativeDivergence(n + 1, pair_name(i, j));
                    }
                    d.d2K[ij] = std::move(d2K);
                    d.d2x_filt[ij] = std::move(d2xf);
                    d.d2V_filt[ij] = std::move(d2Vf);

                    const double h =
                        -0.5 * ((d2r + 2.0 * dei * dej + 2.0 * eps * d2eps) / r -
                                (dri * drj + 2.0 * eps * (dri * dej + dei * drj) + eps * eps * d2r) / r2 +
                                2.0 * eps * eps * dri * drj / r3);
                    hess(ii, jj) += h;
                    if (i != j) hess(jj, ii) += h;
                }
            }
        }

        x = x_filt;
        V = std::move(V_filt);
    }

    if (!out.gradient.allFinite()) throw DerivativeDivergence(N, "gradient accumulation");
    if (second_order) out.hessian = std::move(hess);
    return out;
}

}  // namespace

LikelihoodEvaluation gradient_filter(const ModelSpec& spec, const FilterInit& init, const TimeSeries& y) {
    return run(spec, init, y, false);
}

LikelihoodEvaluation hessian_filter(const ModelSpec& spec, const FilterInit& init, const TimeSeries& y) {
    return run(spec, init, y, true);
}

}  // namespace ssmgic
