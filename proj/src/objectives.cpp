#include "blendmp/objectives.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace blendmp {

namespace {

double softplus(double t) {
    return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}

double sigmoid(double t) {
    if (t >= 0.0)
        return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

}  // namespace

void SmoothObjective::check_dim(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != dim())
        throw std::invalid_argument(name() + ": dimension mismatch");
}

std::function<double(double)> SmoothObjective::along(const Vector& x, const Vector& d) const {
    check_dim(x);
    check_dim(d);
    return [this, x, d](double gamma) { return value(x + gamma * d); };
}

AffineCompositeObjective::AffineCompositeObjective(Matrix a, Vector b) : a_(std::move(a)), b_(std::move(b)) {
    if (a_.rows() == 0 || a_.cols() == 0)
        throw std::invalid_argument("objective: empty matrix");
    if (a_.rows() != b_.size())
        throw std::invalid_argument("objective: row count does not match right-hand side");
    require_finite(a_, "objective matrix");
    require_finite(b_, "objective right-hand side");
}

Vector AffineCompositeObjective::residual(const Vector& x) const {
    check_dim(x);
    return multiply_sparse_aware(a_, x) - b_;
}

double AffineCompositeObjective::value(const Vector& x) const {
    return outer_value(residual(x));
}

Vector AffineCompositeObjective::gradient(const Vector& x) const {
    return a_.transpose() * outer_gradient(residual(x));
}

std::function<double(double)> AffineCompositeObjective::along(const Vector& x, const Vector& d) const {
    check_dim(d);
    Vector r0 = residual(x);
    Vector ad = multiply_sparse_aware(a_, d);
    return [this, r0 = std::move(r0), ad = std::move(ad)](double gamma) {
        return outer_value(r0 + gamma * ad);
    };
}

double AffineCompositeObjective::gram_top_eigenvalue() const {
    std::call_once(eig_once_, [this] { eig_ = largest_eigenvalue_ata(a_); });
    return eig_;
}

LeastSquares::LeastSquares(Matrix a, Vector y, double scale)
    : AffineCompositeObjective(std::move(a), std::move(y)), scale_(scale) {
    if (!(scale > 0.0))
        throw std::invalid_argument("LeastSquares: scale must be positive");
}

std::optional<double> LeastSquares::smoothness_constant() const {
    return 2.0 * scale_ * gram_top_eigenvalue();
}

double LeastSquares::outer_value(const Vector& r) const {
    return scale_ * r.squaredNorm();
}

Vector LeastSquares::outer_gradient(const Vector& r) const {
    return 2.0 * scale_ * r;
}

HuberRegression::HuberRegression(Matrix a, Vector y, double delta)
    : AffineCompositeObjective(std::move(a), std::move(y)), delta_(delta) {
    if (!(delta > 0.0))
        throw std::invalid_argument("HuberRegression: delta must be positive");
}

std::optional<double> HuberRegression::smoothness_constant() const {
    return gram_top_eigenvalue();
}

double HuberRegression::outer_value(const Vector& r) const {
    double total = 0.0;
    for (double t : r) {
        const double a = std::abs(t);
        total += a <= delta_ ? 0.5 * t * t : delta_ * (a - 0.5 * delta_);
    }
    return total;
}

Vector HuberRegression::outer_gradient(const Vector& r) const {
    return r.cwiseMax(-delta_).cwiseMin(delta_);
}

LpPower::LpPower(Matrix a, Vector b, double p, double q)
    : AffineCompositeObjective(std::move(a), std::move(b)), p_(p), q_(q) {
    if (!(p > 1.0) || !(q >= p))
        throw std::invalid_argument("LpPower: need p > 1 and q >= p");
}

double LpPower::smoothness_order() const {
    return std::min(p_, 2.0);
}

double LpPower::outer_value(const Vector& r) const {
    double sum = 0.0;
    for (double t : r)
        sum += std::pow(std::abs(t), p_);
    // ‖r‖_p^q = (Σ|rᵢ|^p)^{q/p}
    return std::pow(sum, q_ / p_);
}

Vector LpPower::outer_gradient(const Vector& r) const {
    double sum = 0.0;
    for (double t : r)
        sum += std::pow(std::abs(t), p_);
    if (sum == 0.0)
        return Vector::Zero(r.size());
    const double norm = std::pow(sum, 1.0 / p_);
    const double factor = q_ * std::pow(norm, q_ - p_);
    Vector s(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        const double t = r[i];
        s[i] = (t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0)) * std::pow(std::abs(t), p_ - 1.0);
    }
    return factor * s;
}

DistanceToBallSquared::DistanceToBallSquared(Matrix a, Vector b)
    : AffineCompositeObjective(std::move(a), std::move(b)) {}

double DistanceToBallSquared::outer_value(const Vector& r) const {
    const double excess = std::max(r.norm() - 1.0, 0.0);
    return excess * excess;
}

Vector DistanceToBallSquared::outer_gradient(const Vector& r) const {
    const double norm = r.norm();
    if (norm <= 1.0)
        return Vector::Zero(r.size());
    // 2(z − z/‖z‖)
    return 2.0 * (1.0 - 1.0 / norm) * r;
}

LogisticLoss::LogisticLoss(Matrix a, Vector labels)
    : AffineCompositeObjective(std::move(a), Vector::Zero(labels.size())), labels_(std::move(labels)) {
    for (double y : labels_)
        if (y != 1.0 && y != -1.0)
            throw std::invalid_argument("LogisticLoss: labels must be -1 or +1");
}

std::optional<double> LogisticLoss::smoothness_constant() const {
    return gram_top_eigenvalue() / (4.0 * static_cast<double>(a_.rows()));
}

double LogisticLoss::outer_value(const Vector& r) const {
    double total = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i)
        total += softplus(-labels_[i] * r[i]);
    return total / static_cast<double>(r.size());
}

Vector LogisticLoss::outer_gradient(const Vector& r) const {
    Vector out(r.size());
    const double inv_m = 1.0 / static_cast<double>(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i)
        out[i] = -labels_[i] * sigmoid(-labels_[i] * r[i]) * inv_m;
    return out;
}

double gradient_check(const SmoothObjective& obj, const Vector& x, double h) {
    if (!(h > 0.0))
        throw std::invalid_argument("gradient_check: step must be positive");
    const Vector g = obj.gradient(x);
    const auto n = x.size();
    double worst = 0.0;
    if (n <= 200) {
        const double denom = std::max(g.cwiseAbs().maxCoeff(), 1e-12);
        Vector probe = x;
        for (Eigen::Index i = 0; i < n; ++i) {
            probe[i] = x[i] + h;
            const double up = obj.value(probe);
            probe[i] = x[i] - h;
            const double down = obj.value(probe);
            probe[i] = x[i];
            worst = std::max(worst, std::abs((up - down) / (2.0 * h) - g[i]) / denom);
        }
        return worst;
    }
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> normal;
    const double denom = std::max(g.norm(), 1e-12);
    for (int k = 0; k < 20; ++k) {
        Vector u(n);
        for (auto& v : u)
            v = normal(rng);
        u.normalize();
        const double fd = (obj.value(x + h * u) - obj.value(x - h * u)) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - g.dot(u)) / denom);
    }
    return worst;
}

}  // namespace blendmp
