#include "doctest.h"

#include "ssmgic/criteria.hpp"
#include "ssmgic/diff_filter.hpp"
#include "ssmgic/models.hpp"
#include "support.hpp"

#include <random>

using namespace ssmgic;

namespace {

Matrix random_spd(Eigen::Index p, std::mt19937_64& rng) {
    std::normal_distribution<double> z;
    Matrix A(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) A(i, j) = z(rng);
    }
    return A * A.transpose() + 0.5 * Matrix::Identity(p, p);
}

}  // namespace

TEST_CASE("fisher information of a single score row") {
    Matrix s(1, 2);
    s << 1, 2;
    Matrix expected(2, 2);
    expected << 1, 2, 2, 4;
    CHECK(fisher_information(s) == expected);
    CHECK(fisher_information(Matrix::Zero(5, 3)).isZero(0.0));
    CHECK_THROWS_AS((void)fisher_information(Matrix(0, 2)), InvalidInput);
    Matrix bad = Matrix::Zero(2, 2);
    bad(1, 1) = std::nan("");
    CHECK_THROWS_AS((void)fisher_information(bad), InvalidInput);
}

TEST_CASE("fisher information matches a direct loop") {
    const ModelBuilder builder(TrendConfig{1});
    Vector theta(2);
    theta << -0.5, 0.1;
    const TimeSeries y = testing::simulated(builder(theta), 200, 8);
    const auto eval = gradient_filter(builder(theta), FilterInit{}, y);

    Matrix loop = Matrix::Zero(2, 2);
    for (Eigen::Index n = 0; n < eval.scores.rows(); ++n) {
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) loop(a, b) += eval.scores(n, a) * eval.scores(n, b);
        }
    }
    loop /= static_cast<double>(eval.scores.rows());
    CHECK((fisher_information(eval.scores) - loop).cwiseAbs().maxCoeff() <= 1e-12 * loop.cwiseAbs().maxCoeff());
}

TEST_CASE("negative Hessian estimate") {
    CHECK(neg_hessian_estimate(-7.0 * Matrix::Identity(3, 3), 7).isApprox(Matrix::Identity(3, 3)));
    CHECK(neg_hessian_estimate(Matrix::Zero(2, 2), 10).isZero(0.0));
    Matrix table(2, 2);
    table << 45.69891, 12.22819, 12.22819, 6.84511;
    CHECK(neg_hessian_estimate(-table, 155).isApprox(table / 155.0));
    CHECK_THROWS_AS((void)neg_hessian_estimate(Matrix::Identity(2, 2), 0), InvalidInput);
}

TEST_CASE("b_gic equals p when I equals J") {
    std::mt19937_64 rng(1);
    for (Eigen::Index p = 1; p <= 6; ++p) {
        const Matrix J = random_spd(p, rng);
        const auto rep = gic(10.0, J, J);
        REQUIRE(rep.b_gic.has_value());
        CHECK(std::abs(*rep.b_gic - static_cast<double>(p)) <= 1e-12);
        CHECK(std::abs(*rep.gic - rep.aic) <= 1e-11);
    }
}

TEST_CASE("b_gic is invariant under reparameterization") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> z;
    for (int rep = 0; rep < 10; ++rep) {
        const Eigen::Index p = 4;
        const Matrix I = random_spd(p, rng);
        const Matrix J = random_spd(p, rng);
        Matrix A(p, p);
        for (Eigen::Index i = 0; i < p; ++i) {
            for (Eigen::Index j = 0; j < p; ++j) A(i, j) = z(rng);
        }
        A += 3.0 * Matrix::Identity(p, p);
        const auto a = gic(0.0, I, J);
        const auto b = gic(0.0, A.transpose() * I * A, A.transpose() * J * A);
        REQUIRE(a.b_gic.has_value());
        REQUIRE(b.b_gic.has_value());
        CHECK(*b.b_gic == doctest::Approx(*a.b_gic).epsilon(1e-8));
    }
}

TEST_CASE("aic and gic identities hold exactly") {
    std::mt19937_64 rng(3);
    const Matrix I = random_spd(3, rng);
    const Matrix J = random_spd(3, rng);
    const double ll = 123.456;
    const auto rep = gic(ll, I, J);
    CHECK(rep.aic == -2.0 * ll + 2.0 * 3.0);
    CHECK(*rep.gic == -2.0 * ll + 2.0 * *rep.b_gic);
    CHECK(rep.aic - *rep.gic == doctest::Approx(2.0 * (3.0 - *rep.b_gic)));
    CHECK_FALSE(rep.j_singular());
    CHECK(rep.p == 3);
}

TEST_CASE("singular J is flagged and leaves b_gic undefined") {
    Matrix J = Matrix::Zero(2, 2);
    J(0, 0) = 1.0;
    const auto rep = gic(1.0, Matrix::Identity(2, 2), J);
    CHECK(rep.j_singular());
    CHECK_FALSE(rep.b_gic.has_value());
    CHECK_FALSE(rep.gic.has_value());
    CHECK(rep.aic == -2.0 + 4.0);

    Matrix near = Matrix::Identity(2, 2);
    near(1, 1) = 1e-13;
    CHECK(gic(1.0, Matrix::Identity(2, 2), near).j_singular());
}

TEST_CASE("gic rejects mismatched shapes") {
    CHECK_THROWS_AS((void)gic(0.0, Matrix::Identity(2, 2), Matrix::Identity(3, 3)), InvalidInput);
    CHECK_THROWS_AS((void)gic(0.0, Matrix(0, 0), Matrix(0, 0)), InvalidInput);
}

TEST_CASE("criteria from a likelihood evaluation") {
    const ModelBuilder builder(TrendConfig{1});
    const TimeSeries y = testing::simulated(builder(Vector::Zero(2)), 150, 77);
    const auto eval = hessian_filter(builder(Vector::Zero(2)), FilterInit{}, y);
    const auto rep = criteria_from(eval);
    CHECK(rep.loglik == eval.loglik);
    CHECK(rep.J_hat.isApprox(-*eval.hessian / 150.0));
    CHECK(rep.I_hat.isApprox(fisher_information(eval.scores)));
    CHECK_THROWS_AS((void)criteria_from(gradient_filter(builder(Vector::Zero(2)), FilterInit{}, y)), InvalidInput);
}

TEST_CASE("compare_models ranks by GIC then AIC then label") {
    CriteriaReport a;
    a.loglik = 10;
    a.p = 2;
    a.aic = -16;
    a.gic = -15;
    a.b_gic = 2.5;
    CriteriaReport b = a;
    b.aic = -17;
    CriteriaReport c = a;
    c.gic = -20;
    CriteriaReport d = a;
    d.gic.reset();
    d.b_gic.reset();
    d.aic = -100;

    const auto rows = compare_models({{"a", a}, {"b", b}, {"c", c}, {"d", d}});
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].label == "c");
    CHECK(rows[1].label == "b");
    CHECK(rows[2].label == "a");
    CHECK(rows[3].label == "d");
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i].rank == i + 1);

    const auto single = compare_models({{"only", a}});
    REQUIRE(single.size() == 1);
    CHECK(single[0].rank == 1);

    const auto tie = compare_models({{"z", a}, {"y", a}});
    CHECK(tie[0].label == "y");
}
