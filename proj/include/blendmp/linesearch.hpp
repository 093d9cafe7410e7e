#pragma once

#include "blendmp/linalg.hpp"
#include "blendmp/objectives.hpp"

#include <functional>
#include <stdexcept>

namespace blendmp {

struct LineSearchResult {
    double gamma = 0.0;
    double value_after = 0.0;
    int evals = 0;
    bool exhausted = false;  ///< evaluation budget ran out before tolerance
};

/// The direction lies in the null space of A, so the quadratic is flat along it.
class ZeroCurvatureError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

enum class LineSearchMode { exact, golden, smoothness };

/// Closed-form minimizer of a least-squares objective along x + ℝd.
LineSearchResult exact_quadratic_step(const LeastSquares& obj, const Vector& x, const Vector& d);

/// Minimizes a convex scalar function over ℝ: brackets outward from [−1, 1]
/// by doubling, then golden-section search down to width tol·(1 + |γ|).
/// Returns the best point evaluated, which always includes γ = 0.
LineSearchResult golden_section(const std::function<double(double)>& phi, double tol = 1e-10,
                                int max_evals = 200);

/// Minimizer over γ of the smoothness upper model
///   f + γ⟨g, v⟩ + (L/ℓ) γ^ℓ ‖v‖^ℓ,
/// i.e. γ = (⟨−g, v⟩ / (L‖v‖^ℓ))^{1/(ℓ−1)}. Requires ⟨g, v⟩ ≤ 0.
double smoothness_step(const Vector& g, const Vector& v, double lipschitz, double order);

/// Decrease of the smoothness model at smoothness_step:
///   ⟨−g, v⟩^ℓ̄ / (ℓ̄ L^{ℓ̄−1} ‖v‖^ℓ̄),  ℓ̄ = ℓ/(ℓ−1).
double smoothness_model_decrease(const Vector& g, const Vector& v, double lipschitz, double order);

/// Step along d from x as the solvers take it: closed form for least squares
/// in exact mode, the smoothness step when selected and L is known, golden
/// section otherwise. `grad` is ∇f(x) and `fx` is f(x).
LineSearchResult line_search(const SmoothObjective& obj, const Vector& x, const Vector& d, const Vector& grad,
                             double fx, LineSearchMode mode);

}  // namespace blendmp
