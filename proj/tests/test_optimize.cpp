#include "doctest.h"

#include "ssmgic/optimize.hpp"
#include "support.hpp"

#include <cmath>

using namespace ssmgic;

namespace {

Vector log_pair(double a, double b) {
    Vector v(2);
    v << std::log(a), std::log(b);
    return v;
}

}  // namespace

TEST_CASE("random walk plus noise variances are recovered") {
    const ModelBuilder builder(TrendConfig{1});
    const TimeSeries y = testing::simulated(builder(Vector::Zero(2)), 2000, 20240);
    const auto results =
        multi_start_fit(builder, y, {log_pair(0.1, 0.1), log_pair(5.0, 0.5), log_pair(0.3, 3.0)}, OptimizerConfig{});
    REQUIRE(results.size() == 3);
    const auto& best = results.front();
    CHECK(best.converged);
    CHECK(best.gradient_norm < 1e-6);
    const Vector natural = best.theta_hat.natural_scale();
    CHECK(std::abs(natural[0] - 1.0) < 0.2);
    CHECK(std::abs(natural[1] - 1.0) < 0.2);
    const double tie = kLoglikTie * std::abs(best.loglik);
    for (std::size_t i = 1; i < results.size(); ++i) CHECK(best.loglik >= results[i].loglik - tie);
    for (std::size_t i = 2; i < results.size(); ++i) CHECK(results[i - 1].loglik >= results[i].loglik);
}

TEST_CASE("fit invariants on a seasonal model") {
    const ModelBuilder builder(SeasonalConfig{2, 4});
    Vector truth(3);
    truth << -2.0, -3.0, -1.0;
    const TimeSeries y = testing::simulated(builder(truth), 200, 5);
    const Vector start = Vector::Constant(3, -1.5);
    const auto res = fit(builder, y, start, OptimizerConfig{});

    SUBCASE("trajectory is monotone up to the rounding level") {
        REQUIRE(res.trajectory.size() >= 2);
        for (std::size_t i = 1; i < res.trajectory.size(); ++i) {
            const double prev = res.trajectory[i - 1].loglik;
            const double noise = OptimizerConfig{}.value_noise * std::max(1.0, std::abs(prev));
            CHECK(res.trajectory[i].loglik >= prev - noise);
        }
        CHECK(res.trajectory.front().theta == start);
    }
    SUBCASE("convergence certificate") {
        CHECK(res.converged);
        CHECK(res.gradient_norm < OptimizerConfig{}.grad_tol);
        CHECK(res.gradient.lpNorm<Eigen::Infinity>() == res.gradient_norm);
        REQUIRE(res.criteria.has_value());
        REQUIRE(res.hessian.has_value());
        CHECK(res.criteria->loglik == res.loglik);
        CHECK(res.theta_hat.names() == builder.names());
    }
    SUBCASE("deterministic") {
        const auto again = fit(builder, y, start, OptimizerConfig{});
        REQUIRE(again.trajectory.size() == res.trajectory.size());
        for (std::size_t i = 0; i < res.trajectory.size(); ++i) {
            CHECK(again.trajectory[i].theta == res.trajectory[i].theta);
            CHECK(again.trajectory[i].loglik == res.trajectory[i].loglik);
        }
    }
    SUBCASE("restarting at the optimum stops immediately") {
        const auto again = fit(builder, y, res.theta_hat.theta(), OptimizerConfig{});
        CHECK(again.iterations <= 1);
        CHECK(again.converged);
        CHECK((again.theta_hat.theta() - res.theta_hat.theta()).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("single-start multi-start equals fit") {
    const ModelBuilder builder(TrendConfig{2});
    const TimeSeries y = testing::simulated(builder(log_pair(0.01, 1.0)), 150, 3);
    const Vector start = log_pair(0.1, 0.1);
    const auto single = fit(builder, y, start, OptimizerConfig{});
    const auto multi = multi_start_fit(builder, y, {start}, OptimizerConfig{});
    REQUIRE(multi.size() == 1);
    CHECK(multi[0].loglik == single.loglik);
    CHECK(multi[0].theta_hat.theta() == single.theta_hat.theta());
    CHECK(multi[0].iterations == single.iterations);
}

TEST_CASE("iteration limit yields a non-converged best iterate") {
    const ModelBuilder builder(TrendConfig{1});
    const TimeSeries y = testing::simulated(builder(Vector::Zero(2)), 100, 1);
    OptimizerConfig cfg;
    cfg.max_iters = 2;
    const auto res = fit(builder, y, log_pair(1e-3, 1e-3), cfg);
    CHECK_FALSE(res.converged);
    CHECK(res.iterations == 2);
    CHECK(res.message == "iteration limit reached");
    CHECK(res.loglik >= res.trajectory.front().loglik);
    REQUIRE(res.criteria.has_value());
}

TEST_CASE("log-variance floor is respected") {
    const ModelBuilder builder(TrendConfig{1});
    // Pure white noise drives the state variance towards zero.
    const ModelSpec white = [&] {
        ModelSpec s = builder(Vector::Zero(2));
        s.Q.setZero();
        return s;
    }();
    const TimeSeries y = testing::simulated(white, 300, 17);
    OptimizerConfig cfg;
    cfg.log_variance_floor = -10.0;
    const auto res = fit(builder, y, Vector::Zero(2), cfg);
    CHECK(res.theta_hat.theta()[0] >= -10.0);
    for (const auto& pt : res.trajectory) CHECK(pt.theta[0] >= -10.0);
}

TEST_CASE("optimizer rejects bad input") {
    const ModelBuilder builder(TrendConfig{1});
    const TimeSeries y({1.0, 2.0, 3.0});
    CHECK_THROWS_AS((void)fit(builder, y, Vector::Zero(3)), InvalidInput);
    OptimizerConfig cfg;
    cfg.armijo_c = 0.7;
    CHECK_THROWS_AS((void)fit(builder, y, Vector::Zero(2), cfg), InvalidInput);
    cfg = {};
    cfg.step_shrink = 1.0;
    CHECK_THROWS_AS((void)fit(builder, y, Vector::Zero(2), cfg), InvalidInput);
    cfg = {};
    cfg.initial_inverse_hessian = -Matrix::Identity(2, 2);
    CHECK_THROWS_AS((void)fit(builder, y, Vector::Zero(2), cfg), InvalidInput);
    CHECK_THROWS_AS((void)multi_start_fit(builder, y, {}, OptimizerConfig{}), InvalidInput);
}

TEST_CASE("custom initial inverse Hessian is used") {
    const ModelBuilder builder(TrendConfig{1});
    const TimeSeries y = testing::simulated(builder(Vector::Zero(2)), 300, 9);
    OptimizerConfig cfg;
    cfg.initial_inverse_hessian = 0.01 * Matrix::Identity(2, 2);
    const auto res = fit(builder, y, log_pair(0.2, 0.2), cfg);
    CHECK(res.converged);
    const auto ref = fit(builder, y, log_pair(0.2, 0.2), OptimizerConfig{});
    CHECK((res.theta_hat.theta() - ref.theta_hat.theta()).cwiseAbs().maxCoeff() < 1e-6);
}
