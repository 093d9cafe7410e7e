#pragma once

#include "blendmp/linalg.hpp"

#include <functional>
#include <mutex>
#include <optional>
#include <string>

namespace blendmp {

/// A smooth convex function on ℝⁿ.
class SmoothObjective {
public:
    virtual ~SmoothObjective() = default;

    [[nodiscard]] virtual std::size_t dim() const = 0;
    [[nodiscard]] virtual double value(const Vector& x) const = 0;
    [[nodiscard]] virtual Vector gradient(const Vector& x) const = 0;
    /// Order ℓ > 1 of the smoothness upper model.
    [[nodiscard]] virtual double smoothness_order() const { return 2.0; }
    /// L when a global bound is known, otherwise empty.
    [[nodiscard]] virtual std::optional<double> smoothness_constant() const = 0;
    [[nodiscard]] virtual std::string name() const = 0;

    /// γ ↦ f(x + γd).
    [[nodiscard]] virtual std::function<double(double)> along(const Vector& x, const Vector& d) const;

protected:
    void check_dim(const Vector& x) const;
};

/// f(x) = h(Ax − b). Line restrictions cost O(m) per evaluation once Ax and
/// Ad are formed.
class AffineCompositeObjective : public SmoothObjective {
public:
    AffineCompositeObjective(Matrix a, Vector b);

    std::size_t dim() const override { return static_cast<std::size_t>(a_.cols()); }
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    std::function<double(double)> along(const Vector& x, const Vector& d) const override;

    [[nodiscard]] const Matrix& matrix() const { return a_; }
    [[nodiscard]] const Vector& offset() const { return b_; }
    /// Ax − b.
    [[nodiscard]] Vector residual(const Vector& x) const;
    /// λ_max(AᵀA), computed once on first use.
    [[nodiscard]] double gram_top_eigenvalue() const;

protected:
    [[nodiscard]] virtual double outer_value(const Vector& r) const = 0;
    [[nodiscard]] virtual Vector outer_gradient(const Vector& r) const = 0;

    Matrix a_;
    Vector b_;

private:
    mutable std::once_flag eig_once_;
    mutable double eig_ = 0.0;
};

/// scale·‖y − Ax‖².
class LeastSquares final : public AffineCompositeObjective {
public:
    LeastSquares(Matrix a, Vector y, double scale = 1.0);

    std::optional<double> smoothness_constant() const override;
    std::string name() const override { return "least-squares"; }
    [[nodiscard]] double scale() const { return scale_; }
    [[nodiscard]] const Vector& target() const { return b_; }

protected:
    double outer_value(const Vector& r) const override;
    Vector outer_gradient(const Vector& r) const override;

private:
    double scale_;
};

/// Σᵢ h_δ(aᵢᵀx − yᵢ) with the Huber function h_δ.
class HuberRegression final : public AffineCompositeObjective {
public:
    HuberRegression(Matrix a, Vector y, double delta);

    std::optional<double> smoothness_constant() const override;
    std::string name() const override { return "huber"; }
    [[nodiscard]] double delta() const { return delta_; }

protected:
    double outer_value(const Vector& r) const override;
    Vector outer_gradient(const Vector& r) const override;

private:
    double delta_;
};

/// ‖Ax − b‖_p^q.
class LpPower final : public AffineCompositeObjective {
public:
    LpPower(Matrix a, Vector b, double p, double q);

    double smoothness_order() const override;
    std::optional<double> smoothness_constant() const override { return std::nullopt; }
    std::string name() const override { return "lp-power"; }

protected:
    double outer_value(const Vector& r) const override;
    Vector outer_gradient(const Vector& r) const override;

private:
    double p_;
    double q_;
};

/// dist(Ax − b, unit ball)².
class DistanceToBallSquared final : public AffineCompositeObjective {
public:
    DistanceToBallSquared(Matrix a, Vector b);

    std::optional<double> smoothness_constant() const override { return std::nullopt; }
    std::string name() const override { return "dist-ball"; }

protected:
    double outer_value(const Vector& r) const override;
    Vector outer_gradient(const Vector& r) const override;
};

/// (1/m) Σᵢ ln(1 + exp(−yᵢ aᵢᵀx)) for labels yᵢ ∈ {−1, +1}.
class LogisticLoss final : public AffineCompositeObjective {
public:
    LogisticLoss(Matrix a, Vector labels);

    std::optional<double> smoothness_constant() const override;
    std::string name() const override { return "logistic"; }

protected:
    double outer_value(const Vector& r) const override;
    Vector outer_gradient(const Vector& r) const override;

private:
    Vector labels_;
};

/// Largest normalized discrepancy between the analytic gradient and central
/// differences with step h. Coordinates are probed when n ≤ 200, otherwise 20
/// fixed random directions.
double gradient_check(const SmoothObjective& obj, const Vector& x, double h);

inline std::optional<double> smoothness_constant(const SmoothObjective& obj) {
    return obj.smoothness_constant();
}

}  // namespace blendmp
