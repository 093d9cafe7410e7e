#include "blendmp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace blendmp {

namespace {

constexpr double kPivotFloor = 1e-14;

void check_symmetric(const Matrix& m) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("solve_spd: matrix is not square");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < i; ++j)
            if (std::abs(m(i, j) - m(j, i)) > 1e-12 * scale)
                throw std::invalid_argument("solve_spd: matrix is not symmetric");
}

Vector cholesky_solve(const Matrix& lower, const Vector& rhs) {
    Vector z = lower.triangularView<Eigen::Lower>().solve(rhs);
    return lower.transpose().triangularView<Eigen::Upper>().solve(z);
}

}  // namespace

void require_finite(const Vector& v, const std::string& what) {
    if (!v.allFinite())
        throw std::invalid_argument(what + ": non-finite entry");
}

void require_finite(const Matrix& m, const std::string& what) {
    if (!m.allFinite())
        throw std::invalid_argument(what + ": non-finite entry");
}

Vector multiply_sparse_aware(const Matrix& a, const Vector& x) {
    if (a.cols() != x.size())
        throw std::invalid_argument("multiply: dimension mismatch");
    const Eigen::Index n = x.size();
    Eigen::Index nnz = 0;
    for (Eigen::Index j = 0; j < n; ++j)
        nnz += x[j] != 0.0;
    if (4 * nnz > n)
        return a * x;
    Vector out = Vector::Zero(a.rows());
    for (Eigen::Index j = 0; j < n; ++j)
        if (x[j] != 0.0)
            out.noalias() += x[j] * a.col(j);
    return out;
}

double largest_eigenvalue_ata(const Matrix& a, double tol, int max_iter) {
    if (a.size() == 0)
        return 0.0;
    Vector v = Vector::Ones(a.cols()) / std::sqrt(static_cast<double>(a.cols()));
    double lambda = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Vector w = a.transpose() * (a * v);
        const double next = v.dot(w);
        const double norm = w.norm();
        if (norm == 0.0)
            return 0.0;
        v = w / norm;
        if (it > 0 && std::abs(next - lambda) <= tol * std::abs(next)) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    // Rayleigh quotient at the final vector.
    return (a * v).squaredNorm();
}

Matrix try_cholesky(const Matrix& m, double ridge) {
    const Eigen::Index k = m.rows();
    Matrix lower = Matrix::Zero(k, k);
    if (k == 0)
        return lower;
    const double floor = kPivotFloor * std::max(m.diagonal().cwiseAbs().maxCoeff() + ridge, 1e-300);
    for (Eigen::Index j = 0; j < k; ++j) {
        double d = m(j, j) + ridge - lower.row(j).head(j).squaredNorm();
        if (!(d > floor))
            return {};
        lower(j, j) = std::sqrt(d);
        for (Eigen::Index i = j + 1; i < k; ++i)
            lower(i, j) = (m(i, j) - lower.row(i).head(j).dot(lower.row(j).head(j))) / lower(j, j);
    }
    return lower;
}

std::vector<double> ridge_schedule(const Matrix& m, double start) {
    std::vector<double> schedule{start};
    const double k = std::max<double>(1.0, static_cast<double>(m.rows()));
    double step = 1e-12 * std::max(m.trace(), 0.0) / k;
    if (step == 0.0)
        step = 1e-12;
    for (int retry = 0; retry < 4; ++retry, step *= 10.0)
        schedule.push_back(std::max(start, step));
    return schedule;
}

Vector solve_spd(const Matrix& m, const Vector& b, double ridge) {
    if (ridge < 0.0)
        throw std::invalid_argument("solve_spd: negative ridge");
    check_symmetric(m);
    if (m.rows() != b.size())
        throw std::invalid_argument("solve_spd: dimension mismatch");
    if (m.rows() == 0)
        return Vector(0);
    for (double r : ridge_schedule(m, ridge)) {
        Matrix lower = try_cholesky(m, r);
        if (lower.size() != 0)
            return cholesky_solve(lower, b);
    }
    throw SingularSystemError("solve_spd: ridge cap exceeded");
}

GramSystem::GramSystem(std::vector<Vector> basis, double ridge)
    : basis_(std::move(basis)), ridge_(ridge), base_ridge_(ridge) {
    const auto k = static_cast<Eigen::Index>(basis_.size());
    gram_.resize(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        if (basis_[i].size() != basis_.front().size())
            throw std::invalid_argument("GramSystem: dimension mismatch");
        for (Eigen::Index j = 0; j <= i; ++j)
            gram_(i, j) = gram_(j, i) = basis_[i].dot(basis_[j]);
    }
    refactor();
}

void GramSystem::clear() {
    basis_.clear();
    gram_.resize(0, 0);
    chol_.resize(0, 0);
    ridge_ = base_ridge_;
}

void GramSystem::append(Vector v) {
    if (!basis_.empty() && v.size() != basis_.front().size())
        throw std::invalid_argument("GramSystem::append: dimension mismatch");
    const auto k = static_cast<Eigen::Index>(basis_.size());
    Vector border = inner_products(v);
    const double diag = v.squaredNorm();
    basis_.push_back(std::move(v));

    gram_.conservativeResize(k + 1, k + 1);
    gram_.row(k).head(k) = border.transpose();
    gram_.col(k).head(k) = border;
    gram_(k, k) = diag;

    Vector l = k > 0 ? Vector(chol_.triangularView<Eigen::Lower>().solve(border)) : Vector(0);
    const double pivot = diag + ridge_ - l.squaredNorm();
    const double floor = kPivotFloor * std::max(gram_.diagonal().maxCoeff() + ridge_, 1e-300);
    if (pivot > floor) {
        chol_.conservativeResize(k + 1, k + 1);
        chol_.col(k).setZero();
        chol_.row(k).head(k) = l.transpose();
        chol_(k, k) = std::sqrt(pivot);
        return;
    }
    refactor();
}

void GramSystem::refactor() {
    if (basis_.empty()) {
        chol_.resize(0, 0);
        return;
    }
    for (double r : ridge_schedule(gram_, ridge_)) {
        Matrix lower = try_cholesky(gram_, r);
        if (lower.size() != 0) {
            chol_ = std::move(lower);
            ridge_ = r;
            return;
        }
    }
    throw SingularSystemError("GramSystem: ridge cap exceeded");
}

Vector GramSystem::solve(const Vector& rhs) const {
    if (rhs.size() != static_cast<Eigen::Index>(basis_.size()))
        throw std::invalid_argument("GramSystem::solve: dimension mismatch");
    if (basis_.empty())
        return Vector(0);
    return cholesky_solve(chol_, rhs);
}

Vector GramSystem::inner_products(const Vector& g) const {
    Vector out(static_cast<Eigen::Index>(basis_.size()));
    for (std::size_t i = 0; i < basis_.size(); ++i) {
        if (basis_[i].size() != g.size())
            throw std::invalid_argument("GramSystem: dimension mismatch");
        out[static_cast<Eigen::Index>(i)] = basis_[i].dot(g);
    }
    return out;
}

Vector GramSystem::combine(const Vector& coefficients) const {
    if (basis_.empty())
        throw std::logic_error("GramSystem::combine: empty basis");
    Vector out = Vector::Zero(basis_.front().size());
    for (std::size_t i = 0; i < basis_.size(); ++i)
        out.noalias() += coefficients[static_cast<Eigen::Index>(i)] * basis_[i];
    return out;
}

SpanProjection GramSystem::project(const Vector& g) const {
    if (basis_.empty())
        return {Vector::Zero(g.size()), Vector(0)};
    Vector c = solve(inner_products(g));
    return {combine(c), std::move(c)};
}

Vector project_onto_span(const Vector& g, const std::vector<Vector>& basis) {
    for (const auto& b : basis)
        if (b.size() != g.size())
            throw std::invalid_argument("project_onto_span: dimension mismatch");
    if (basis.empty())
        return Vector::Zero(g.size());
    return GramSystem(basis).project(g).projected;
}

Vector project_l1_ball(const Vector& x, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw std::invalid_argument("project_l1_ball: radius must be positive");
    if (x.lpNorm<1>() <= radius)
        return x;
    std::vector<double> u(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
        u[i] = std::abs(x[i]);
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumsum = 0.0, theta = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        cumsum += u[k];
        const double t = (cumsum - radius) / static_cast<double>(k + 1);
        if (u[k] - t > 0.0)
            theta = t;
        else
            break;
    }
    Vector z(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double mag = std::max(std::abs(x[i]) - theta, 0.0);
        z[i] = x[i] < 0.0 ? -mag : mag;
    }
    return z;
}

}  // namespace blendmp
