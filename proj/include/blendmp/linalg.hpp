#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace blendmp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a Gram system stays indefinite after the full ridge schedule.
class SingularSystemError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Throws std::invalid_argument when any entry is NaN or infinite.
void require_finite(const Vector& v, const std::string& what);
void require_finite(const Matrix& m, const std::string& what);

/// Ax, skipping zero columns of x when x is sparse enough for it to pay off.
Vector multiply_sparse_aware(const Matrix& a, const Vector& x);

/// Largest eigenvalue of AᵀA by power iteration.
double largest_eigenvalue_ata(const Matrix& a, double tol = 1e-8, int max_iter = 1000);

/// Lower Cholesky factor of M + ridge·I, or an empty matrix when a pivot
/// falls below 1e-14 of the largest diagonal entry.
Matrix try_cholesky(const Matrix& m, double ridge);

/// Ridge schedule used after a failed factorization: `start`, then
/// 1e-12·trace(M)/k escalated ×10 per retry, four retries.
std::vector<double> ridge_schedule(const Matrix& m, double start);

/// Solves (M + ridge·I) c = b by Cholesky, escalating the ridge when the
/// factorization fails.
Vector solve_spd(const Matrix& m, const Vector& b, double ridge = 0.0);

struct SpanProjection {
    Vector projected;     ///< B c
    Vector coefficients;  ///< c, one per basis vector
};

/// Incrementally maintained normal-equation system for a growing basis.
///
/// Appending a vector borders the Cholesky factor in O(n·k + k²). When the
/// border pivot collapses (duplicate or collinear atoms) the whole system is
/// refactored with the escalating ridge.
class GramSystem {
public:
    explicit GramSystem(double ridge = 0.0) : ridge_(ridge), base_ridge_(ridge) {}
    explicit GramSystem(std::vector<Vector> basis, double ridge = 0.0);

    void append(Vector v);
    void clear();

    [[nodiscard]] std::size_t size() const { return basis_.size(); }
    [[nodiscard]] bool empty() const { return basis_.empty(); }
    [[nodiscard]] const std::vector<Vector>& basis() const { return basis_; }
    [[nodiscard]] const Matrix& gram() const { return gram_; }
    [[nodiscard]] double ridge() const { return ridge_; }

    /// (G + ridge·I)⁻¹ rhs.
    [[nodiscard]] Vector solve(const Vector& rhs) const;
    /// Bᵀ g.
    [[nodiscard]] Vector inner_products(const Vector& g) const;
    /// B c.
    [[nodiscard]] Vector combine(const Vector& coefficients) const;
    /// Orthogonal projection of g onto span(B).
    [[nodiscard]] SpanProjection project(const Vector& g) const;

private:
    void refactor();

    std::vector<Vector> basis_;
    Matrix gram_;
    Matrix chol_;
    double ridge_;
    double base_ridge_;
};

/// Projection of g onto span(basis). An empty basis projects to zero.
Vector project_onto_span(const Vector& g, const std::vector<Vector>& basis);

/// Euclidean projection onto {z : ‖z‖₁ ≤ radius} by the sort-and-threshold
/// method.
Vector project_l1_ball(const Vector& x, double radius);

}  // namespace blendmp
