#include "ssmgic/criteria.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace ssmgic {

Matrix fisher_information(const Matrix& scores) {
    if (scores.rows() == 0) throw InvalidInput("fisher information needs at least one score row");
    if (!scores.allFinite()) throw InvalidInput("scores contain non-finite entries");
    return scores.transpose() * scores / static_cast<double>(scores.rows());
}

Matrix neg_hessian_estimate(const Matrix& hessian, std::size_t n_obs) {
    if (n_obs == 0) throw InvalidInput("observation count must be positive");
    if (hessian.rows() != hessian.cols()) throw InvalidInput("hessian must be square");
    if (!hessian.allFinite()) throw InvalidInput("hessian contains non-finite entries");
    return -hessian / static_cast<double>(n_obs);
}

CriteriaReport gic(double loglik, const Matrix& I_hat, const Matrix& J_hat) {
    if (I_hat.rows() != I_hat.cols() || J_hat.rows() != J_hat.cols() || I_hat.rows() != J_hat.rows()) {
        throw InvalidInput("I and J must be square matrices of equal size");
    }
    if (I_hat.rows() == 0) throw InvalidInput("I and J must be non-empty");

    CriteriaReport rep;
    rep.loglik = loglik;
    rep.p = static_cast<std::size_t>(I_hat.rows());
    rep.I_hat = I_hat;
    rep.J_hat = 0.5 * (J_hat + J_hat.transpose());
    rep.aic = -2.0 * loglik + 2.0 * static_cast<double>(rep.p);

    Eigen::SelfAdjointEigenSolver<Matrix> eig(rep.J_hat);
    const Vector abs_ev = eig.eigenvalues().cwiseAbs();
    const double largest = abs_ev.maxCoeff();
    const double smallest = abs_ev.minCoeff();
    rep.j_condition = smallest > 0.0 ? largest / smallest : std::numeric_limits<double>::infinity();
    if (!(rep.j_condition <= kMaxJCondition)) return rep;

    // tr(I J^{-1}) with J^{-1} = U diag(1/lambda) U^T.
    const Matrix& U = eig.eigenvectors();
    const Matrix J_inv = U * eig.eigenvalues().cwiseInverse().asDiagonal() * U.transpose();
    const double b = (I_hat * J_inv).trace();
    rep.b_gic = b;
    rep.gic = -2.0 * loglik + 2.0 * b;
    return rep;
}

CriteriaReport criteria_from(const LikelihoodEvaluation& eval) {
    if (!eval.hessian) throw InvalidInput("criteria need an evaluation with a Hessian");
    const auto n = static_cast<std::size_t>(eval.scores.rows());
    return gic(eval.loglik, fisher_information(eval.scores), neg_hessian_estimate(*eval.hessian, n));
}

std::vector<ComparisonRow> compare_models(const std::vector<LabeledReport>& reports) {
    std::vector<ComparisonRow> rows;
    rows.reserve(reports.size());
    for (const auto& [label, rep] : reports) {
        rows.push_back({0, label, rep.loglik, rep.p, rep.b_gic, rep.aic, rep.gic});
    }
    static constexpr double inf = std::numeric_limits<double>::infinity();
    std::stable_sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
        return std::make_tuple(a.gic.value_or(inf), a.aic, a.label) <
               std::make_tuple(b.gic.value_or(inf), b.aic, b.label);
    });
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].rank = i + 1;
    return rows;
}

}  // namespace ssmgic
