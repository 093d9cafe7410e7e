#pragma once

#include "blendmp/dictionary.hpp"
#include "blendmp/objectives.hpp"
#include "blendmp/solver_state.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace blendmp {

/// Generalized Matching Pursuit: full LMO, then a line search along the atom.
SolverState run_gmp(const Dictionary& dict, const SmoothObjective& obj, const SolverConfig& config,
                    TraceSink* sink = nullptr);

/// Orthogonal Matching Pursuit: full LMO, then reoptimization over the span
/// of the active set. Least squares is solved in closed form from freshly
/// formed normal equations; other objectives run projected-gradient steps
/// inside the span until the projected gradient is below inner_tol.
SolverState run_omp(const Dictionary& dict, const SmoothObjective& obj, const SolverConfig& config,
                    TraceSink* sink = nullptr);

/// Blended Matching Pursuit.
///
/// Each iteration takes one of three steps:
///  - constrained: when the best active atom satisfies ⟨∇f, v⟩ ≤ φ/η, a line
///    search along the gradient projected onto span(active);
///  - full: otherwise, when the weak-separation oracle finds an atom with
///    ⟨∇f, v⟩ ≤ φ/κ, a line search along it, growing the active set;
///  - dual: when the oracle certifies min ⟨∇f, v⟩ ≥ φ, no move and φ ← φ/τ.
/// φ starts at min ⟨∇f(x₀), v⟩ / τ. The run stops once |φ| ≤ stop_dual_gap.
SolverState run_bmp(const Dictionary& dict, const SmoothObjective& obj, const SolverConfig& config,
                    TraceSink* sink = nullptr);

/// Projected gradient on {‖x‖₁ ≤ radius} with step 1/L; coordinates act as
/// canonical atoms and the atom count is the number of nonzeros.
SolverState run_pgd(const LeastSquares& obj, double radius, const SolverConfig& config,
                    TraceSink* sink = nullptr);

/// Dispatches on "gmp", "omp", "bmp" or "pgd". PGD needs a least-squares
/// objective and config.pgd_radius.
SolverState run_solver(std::string_view name, const Dictionary& dict, const SmoothObjective& obj,
                       const SolverConfig& config, TraceSink* sink = nullptr);

struct StepCheck {
    bool ok = true;
    double decrease = 0.0;  ///< f_before − f_after
    double bound = 0.0;     ///< guaranteed decrease for the step kind
    std::string message;
};

/// Checks one BMP step against its guaranteed primal progress:
///   full        f_t − f_{t+1} ≥ 2^ℓ̄|φ_t|^ℓ̄ / (ℓ̄ κ^ℓ̄ L^{ℓ̄−1} D^ℓ̄) − 1e-10
///   constrained the same with η in place of κ
///   dual        x unchanged bitwise and φ_{t+1} = φ_t/τ exactly
/// with D the symmetrized diameter and ℓ̄ = ℓ/(ℓ−1). Without L only dual
/// steps are checked.
StepCheck bmp_step_assertions(const SolverState& before, const SolverState& after, const StepRecord& record,
                              std::optional<double> lipschitz, const SolverConfig& config, double diameter,
                              double order = 2.0);

struct CorrectionReport {
    std::size_t dropped = 0;     ///< atoms under the coefficient threshold
    std::size_t dependent = 0;   ///< atoms linearly dependent on earlier survivors
    double dropped_mass = 0.0;   ///< Σ |coefficient| of dropped atoms
    double span_residual = 0.0;  ///< ‖x_before − x_after‖
};

/// Reduces the active set: drops atoms with |coefficient| < δ, then atoms
/// dependent on earlier survivors (Gram pivot ≤ 1e-10·‖a‖²), and re-expresses
/// x as its projection onto the surviving span. No-op when nothing is removed.
CorrectionReport correct_active_set(SolverState& state, const Dictionary& dict, CorrectionMode mode,
                                    double drop_threshold);

}  // namespace blendmp
