#include "ssmgic/optimize.hpp"

#include "ssmgic/diff_filter.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <tuple>

namespace ssmgic {

void OptimizerConfig::validate(std::size_t p) const {
    if (max_iters < 0) throw InvalidInput("max_iters must be nonnegative");
    if (!(grad_tol > 0.0)) throw InvalidInput("grad_tol must be positive");
    if (!(step_shrink > 0.0 && step_shrink < 1.0)) throw InvalidInput("step_shrink must lie in (0, 1)");
    if (!(armijo_c > 0.0 && armijo_c <= 0.5)) throw InvalidInput("armijo_c must lie in (0, 0.5]");
    if (!(value_noise >= 0.0)) throw InvalidInput("value_noise must be nonnegative");
    if (max_line_search < 1) throw InvalidInput("max_line_search must be positive");
    if (!(max_step > 0.0)) throw InvalidInput("max_step must be positive");
    if (initial_inverse_hessian) {
        const auto pp = static_cast<Eigen::Index>(p);
        const Matrix& B = *initial_inverse_hessian;
        if (B.rows() != pp || B.cols() != pp) throw InvalidInput("initial inverse Hessian has the wrong shape");
        if (!B.isApprox(B.transpose())) throw InvalidInput("initial inverse Hessian must be symmetric");
        Eigen::LLT<Matrix> llt(B);
        if (llt.info() != Eigen::Success) throw InvalidInput("initial inverse Hessian must be positive definite");
    }
}

namespace {

constexpr double kWolfeDelta = 0.1;
constexpr double kWolfeSigma = 0.9;

struct Point {
    Vector theta;
    double loglik = 0.0;
    Vector gradient;
};

class Objective {
public:
    Objective(const ModelBuilder& builder, const TimeSeries& y, const FilterInit& init)
        : builder_(builder), y_(y), init_(init) {}

    [[nodiscard]] Point at(const Vector& theta) const {
        const auto eval = gradient_filter(builder_(theta), init_, y_);
        return {theta, eval.loglik, eval.gradient};
    }

    [[nodiscard]] std::optional<Point> try_at(const Vector& theta) const {
        try {
            auto pt = at(theta);
            if (!std::isfinite(pt.loglik) || !pt.gradient.allFinite()) return std::nullopt;
            return pt;
        } catch (const FilterDivergence&) {
            return std::nullopt;
        }
    }

private:
    const ModelBuilder& builder_;
    const TimeSeries& y_;
    const FilterInit& init_;
};

Vector project(Vector theta, const std::vector<bool>& log_scale, double floor) {
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
        if (log_scale[static_cast<std::size_t>(j)]) theta[j] = std::max(theta[j], floor);
    }
    return theta;
}

}  // namespace

FitResult fit(const ModelBuilder& builder, const TimeSeries& y, const Vector& theta0, const OptimizerConfig& cfg,
              const FilterInit& init) {
    const std::size_t p = builder.param_dim();
    if (static_cast<std::size_t>(theta0.size()) != p) {
        throw InvalidInput(builder.label() + " expects " + std::to_string(p) + " parameters, got " +
                           std::to_string(theta0.size()));
    }
    cfg.validate(p);
    const auto pp = static_cast<Eigen::Index>(p);
    const Matrix identity = Matrix::Identity(pp, pp);
    const Matrix B0 = cfg.initial_inverse_hessian.value_or(identity);

    const Objective objective(builder, y, init);
    Point cur = objective.at(project(theta0, builder.log_scale(), cfg.log_variance_floor));

    FitResult res{.theta_hat = builder.parameters(cur.theta)};
    res.trajectory.push_back({cur.theta, cur.loglik});
    res.message = "iteration limit reached";

    Matrix B = B0;
    bool fresh = true;  // B has not been updated since the last (re)start
    int iter = 0;
    for (; iter < cfg.max_iters; ++iter) {
        if (cur.gradient.lpNorm<Eigen::Infinity>() < cfg.grad_tol) {
            res.message = "gradient tolerance reached";
            break;
        }

        Vector dir = B * cur.gradient;
        if (!(cur.gradient.dot(dir) > 0.0)) {
            B = B0;
            fresh = true;
            dir = B * cur.gradient;
        }
        const double longest = dir.lpNorm<Eigen::Infinity>();
        if (longest > cfg.max_step) dir *= cfg.max_step / longest;

        std::optional<Point> next;
        double lambda = 1.0;
        for (int t = 0; t < cfg.max_line_search; ++t, lambda *= cfg.step_shrink) {
            const Vector trial = project(cur.theta + lambda * dir, builder.log_scale(), cfg.log_variance_floor);
            const Vector step = trial - cur.theta;
            if (step.lpNorm<Eigen::Infinity>() == 0.0) break;
            auto pt = objective.try_at(trial);
            if (!pt) continue;
            const double slope = cur.gradient.dot(step);
            if (!(slope > 0.0)) continue;
            if (pt->loglik >= cur.loglik + cfg.armijo_c * slope) {
                next = std::move(pt);
                break;
            }
            // Approximate Wolfe (Hager-Zhang) for changes lost in rounding.
            const double noise = cfg.value_noise * std::max(1.0, std::abs(cur.loglik));
            const double new_slope = pt->gradient.dot(step);
            if (pt->loglik >= cur.loglik - noise && new_slope <= kWolfeSigma * slope &&
                new_slope >= -(1.0 - 2.0 * kWolfeDelta) * slope) {
                next = std::move(pt);
                break;
            }
        }

        if (!next) {
            if (!fresh) {
                B = B0;
                fresh = true;
                continue;
            }
            res.message = "line search failed";
            break;
        }

        const Vector s = next->theta - cur.theta;
        const Vector yk = cur.gradient - next->gradient;  // gradient change of -loglik
        const double sy = s.dot(yk);
        if (sy > 1e-12 * s.norm() * yk.norm()) {
            if (fresh && !cfg.initial_inverse_hessian) B = (sy / yk.squaredNorm()) * identity;
            const double rho = 1.0 / sy;
            const Matrix left = identity - rho * s * yk.transpose();
            B = left * B * left.transpose() + rho * s * s.transpose();
            symmetrize(B);
            fresh = false;
        }
        cur = std::move(*next);
        res.trajectory.push_back({cur.theta, cur.loglik});
    }
    res.iterations = iter;

    // Certificate: gradient and criteria from an independent evaluation at theta_hat.
    res.theta_hat = builder.parameters(cur.theta);
    try {
        const auto eval = hessian_filter(builder(cur.theta), init, y);
        res.loglik = eval.loglik;
        res.gradient = eval.gradient;
        res.criteria = criteria_from(eval);
        res.hessian = eval.hessian;
    } catch (const FilterDivergence&) {
        res.loglik = cur.loglik;
        res.gradient = cur.gradient;
    }
    res.gradient_norm = res.gradient.lpNorm<Eigen::Infinity>();
    res.converged = res.gradient_norm < cfg.grad_tol;
    return res;
}

std::vector<FitResult> multi_start_fit(const ModelBuilder& builder, const TimeSeries& y,
                                       const std::vector<Vector>& starts, const OptimizerConfig& cfg,
                                       const FilterInit& init) {
    if (starts.empty()) throw InvalidInput("multi-start fit needs at least one start");
    std::vector<std::future<FitResult>> jobs;
    jobs.reserve(starts.size());
    for (const auto& start : starts) {
        jobs.push_back(std::async(std::launch::async, [&, start] { return fit(builder, y, start, cfg, init); }));
    }

    std::vector<FitResult> results;
    std::string failures;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        try {
            results.push_back(jobs[i].get());
        } catch (const FilterDivergence& e) {
            failures += "\n  start " + std::to_string(i) + ": " + e.what();
        }
    }
    if (results.empty()) throw FilterDivergence(0, "every start diverged:" + failures);
    std::stable_sort(results.begin(), results.end(),
                     [](const FitResult& a, const FitResult& b) { return a.loglik > b.loglik; });

    const double tie = kLoglikTie * std::max(1.0, std::abs(results.front().loglik));
    auto head = results.begin();
    for (auto it = results.begin(); it != results.end() && it->loglik >= results.front().loglik - tie; ++it) {
        if (std::make_tuple(!it->converged, it->gradient_norm) < std::make_tuple(!head->converged, head->gradient_norm)) {
            head = it;
        }
    }
    std::rotate(results.begin(), head, head + 1);
    return results;
}

}  // namespace ssmgic
