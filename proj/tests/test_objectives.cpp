#include "blendmp/objectives.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <memory>

using namespace blendmp;
using testutil::random_matrix;
using testutil::random_vector;

namespace {

// Central differences per coordinate, compared in max-abs relative terms.
double fd_error(const SmoothObjective& obj, const Vector& x, double h) {
    const Vector g = obj.gradient(x);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vector xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double fd = (obj.value(xp) - obj.value(xm)) / (2 * h);
        worst = std::max(worst, std::abs(fd - g[i]));
    }
    return worst / std::max(g.cwiseAbs().maxCoeff(), 1e-12);
}

std::vector<std::unique_ptr<SmoothObjective>> all_objectives(std::mt19937_64& rng) {
    const Matrix a = random_matrix(8, 5, rng);
    const Vector b = random_vector(8, rng);
    std::vector<std::unique_ptr<SmoothObjective>> out;
    out.push_back(std::make_unique<LeastSquares>(a, b));
    out.push_back(std::make_unique<HuberRegression>(a, b, 1.0));
    out.push_back(std::make_unique<LpPower>(a, b, 3.0, 5.0));
    out.push_back(std::make_unique<DistanceToBallSquared>(a, b));
    out.push_back(std::make_unique<LogisticLoss>(a, b.unaryExpr([](double v) { return v < 0 ? -1.0 : 1.0; })));
    return out;
}

}  // namespace

TEST_CASE("least squares on the identity") {
    const LeastSquares f(Matrix::Identity(2, 2), Vector::Zero(2), 0.5);
    Vector x(2);
    x << 1, 2;
    CHECK(f.value(x) == doctest::Approx(2.5));
    CHECK((f.gradient(x) - x).norm() <= 1e-15);
    CHECK(*f.smoothness_constant() == doctest::Approx(1.0));
    CHECK(f.smoothness_order() == 2.0);
}

TEST_CASE("least squares smoothness constant on diag(1,3)") {
    Matrix a = Matrix::Zero(2, 2);
    a(0, 0) = 1;
    a(1, 1) = 3;
    const LeastSquares f(a, Vector::Zero(2), 1.0);
    CHECK(*f.smoothness_constant() == doctest::Approx(18.0));
}

TEST_CASE("power-iteration L agrees with the eigensolver") {
    std::mt19937_64 rng(21);
    const Matrix a = random_matrix(50, 20, rng);
    const Vector y = random_vector(50, rng);
    const double lam = Eigen::SelfAdjointEigenSolver<Matrix>(a.transpose() * a).eigenvalues().maxCoeff();
    CHECK(std::abs(*LeastSquares(a, y).smoothness_constant() - 2 * lam) <= 1e-6 * 2 * lam);
    CHECK(std::abs(*HuberRegression(a, y, 1.0).smoothness_constant() - lam) <= 1e-6 * lam);
    const Vector labels = y.unaryExpr([](double v) { return v < 0 ? -1.0 : 1.0; });
    CHECK(std::abs(*LogisticLoss(a, labels).smoothness_constant() - lam / 200.0) <= 1e-6 * lam / 200.0);
    CHECK_FALSE(LpPower(a, y, 3, 5).smoothness_constant().has_value());
    CHECK_FALSE(DistanceToBallSquared(a, y).smoothness_constant().has_value());
}

TEST_CASE("huber quadratic branch and kink") {
    const HuberRegression f(Matrix::Identity(1, 2), Vector::Zero(1), 10.0);
    Vector x(2);
    x << 3, 0;
    CHECK(f.value(x) == doctest::Approx(4.5));
    CHECK(f.gradient(x)[0] == doctest::Approx(3));
    CHECK(f.gradient(x)[1] == 0.0);
    x << 25, 0;
    CHECK(f.value(x) == doctest::Approx(10 * (25 - 5)));
    CHECK(f.gradient(x)[0] == doctest::Approx(10));

    // Exactly at |t| = δ the first derivative is continuous.
    std::mt19937_64 rng(22);
    const Matrix a = random_matrix(6, 4, rng);
    const Vector x0 = random_vector(4, rng);
    Vector y = a * x0;
    y[0] -= 1.0;  // residual of row 0 is exactly +1 = δ
    const HuberRegression hk(a, y, 1.0);
    CHECK(std::abs(hk.residual(x0)[0] - 1.0) <= 1e-12);
    CHECK(gradient_check(hk, x0, 1e-6) <= 1e-4);
}

TEST_CASE("lp power against finite differences") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix a = random_matrix(4, 3, rng);
        const Vector b = random_vector(4, rng);
        const Vector x = random_vector(3, rng);
        const LpPower f(a, b, 3.0, 5.0);
        CHECK(fd_error(f, x, 1e-6 * (1 + x.norm())) <= 1e-5);
        CHECK(f.smoothness_order() == 2.0);
    }
    const LpPower zero(Matrix::Identity(2, 2), Vector::Zero(2), 3.0, 5.0);
    CHECK(zero.gradient(Vector::Zero(2)).isZero(0.0));
    CHECK(LpPower(Matrix::Identity(2, 2), Vector::Zero(2), 1.5, 3.0).smoothness_order() == 1.5);
}

TEST_CASE("distance to ball: inside is zero, outside is positive") {
    const DistanceToBallSquared f(Matrix::Identity(2, 2), Vector::Zero(2));
    Vector x(2);
    x << 0.3, -0.4;
    CHECK(f.value(x) == 0.0);
    CHECK(f.gradient(x).isZero(0.0));
    x << 3, 4;
    CHECK(f.value(x) == doctest::Approx(16.0));
    CHECK(f.gradient(x)[0] == doctest::Approx(2 * 0.6 * 4));

    std::mt19937_64 rng(24);
    const Matrix a = random_matrix(6, 4, rng);
    const Vector b = random_vector(6, rng);
    const DistanceToBallSquared g(a, b);
    for (int i = 0; i < 100; ++i)
        CHECK(g.value(random_vector(4, rng)) >= 0.0);
}

TEST_CASE("logistic loss values and stability") {
    const LogisticLoss f(Matrix::Identity(2, 2), Vector::Ones(2));
    CHECK(f.value(Vector::Zero(2)) == doctest::Approx(std::log(2.0)));
    Vector big(2);
    big << 800, -800;
    CHECK(std::isfinite(f.value(big)));
    CHECK(f.value(big) == doctest::Approx(400.0));
    CHECK(f.gradient(big).allFinite());
    Vector bad(2);
    bad << 1, 0;
    CHECK_THROWS_AS(LogisticLoss(Matrix::Identity(2, 2), bad), std::invalid_argument);
}

TEST_CASE("gradient_check on all five objectives") {
    std::mt19937_64 rng(25);
    for (int trial = 0; trial < 5; ++trial) {
        for (const auto& f : all_objectives(rng)) {
            const Vector x = random_vector(5, rng);
            CAPTURE(f->name());
            CHECK(gradient_check(*f, x, 1e-6) <= 1e-5);
        }
    }
}

TEST_CASE("gradient_check uses random directions in high dimension") {
    std::mt19937_64 rng(26);
    const Matrix a = random_matrix(30, 300, rng);
    const LeastSquares f(a, random_vector(30, rng));
    CHECK(gradient_check(f, random_vector(300, rng), 1e-5) <= 1e-6);
}

TEST_CASE("convexity and smoothness spot checks") {
    std::mt19937_64 rng(27);
    for (const auto& f : all_objectives(rng)) {
        CAPTURE(f->name());
        const auto lip = f->smoothness_constant();
        for (int i = 0; i < 1000; ++i) {
            const Vector x = random_vector(5, rng);
            const Vector y = random_vector(5, rng);
            const double fx = f->value(x);
            const double lin = f->gradient(x).dot(y - x);
            const double gap = f->value(y) - fx - lin;
            const double scale = 1e-10 * std::max(1.0, std::abs(fx));
            CHECK(gap >= -scale);
            if (lip)
                CHECK(gap <= 0.5 * *lip * (y - x).squaredNorm() + scale);
        }
    }
}

TEST_CASE("along agrees with value") {
    std::mt19937_64 rng(28);
    for (const auto& f : all_objectives(rng)) {
        const Vector x = random_vector(5, rng);
        Vector d = Vector::Zero(5);
        d[2] = 1.0;
        const auto phi = f->along(x, d);
        for (double t : {-1.0, 0.0, 0.25, 3.0})
            CHECK(phi(t) == doctest::Approx(f->value(x + t * d)).epsilon(1e-12));
    }
}

TEST_CASE("dimension mismatch throws") {
    const LeastSquares f(Matrix::Identity(3, 3), Vector::Zero(3));
    CHECK_THROWS_AS(f.value(Vector::Zero(2)), std::invalid_argument);
    CHECK_THROWS_AS(f.gradient(Vector::Zero(4)), std::invalid_argument);
}
