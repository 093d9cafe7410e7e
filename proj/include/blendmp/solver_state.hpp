#pragma once

#include "blendmp/dictionary.hpp"
#include "blendmp/linesearch.hpp"
#include "blendmp/oracle.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace blendmp {

enum class StepKind { init, constrained, full, dual, gmp, omp, pgd };

std::string_view to_string(StepKind kind);
StepKind step_kind_from_string(std::string_view text);

enum class CorrectionMode { off, basis_reduce };

/// Ordered atoms carrying the iterate. +v and −v may both be present.
class ActiveSet {
public:
    [[nodiscard]] std::size_t size() const { return atoms_.size(); }
    [[nodiscard]] bool empty() const { return atoms_.empty(); }
    [[nodiscard]] const std::vector<AtomRef>& atoms() const { return atoms_; }
    [[nodiscard]] const std::vector<std::size_t>& first_seen() const { return first_seen_; }
    [[nodiscard]] std::optional<std::size_t> find(const AtomRef& atom) const;

    /// Position of `atom`, appending it (seen at `iter`) when absent.
    std::size_t add(const AtomRef& atom, std::size_t iter);
    /// Keeps only the given positions, in the given order.
    void keep(const std::vector<std::size_t>& positions);

private:
    std::vector<AtomRef> atoms_;
    std::vector<std::size_t> first_seen_;
};

struct StepCounters {
    std::size_t constrained = 0;
    std::size_t full = 0;
    std::size_t dual = 0;
    std::size_t other = 0;  ///< gmp / omp / pgd iterations

    [[nodiscard]] std::size_t total() const { return constrained + full + dual + other; }
};

/// Tally of per-step progress checks when SolverConfig::verify_steps is set.
struct ProgressAudit {
    std::size_t checked = 0;
    std::size_t failed = 0;
    std::vector<std::string> failures;  ///< first few messages
};

struct SolverState {
    Vector x;
    ActiveSet active;
    std::vector<double> coeffs;  ///< aligned with active.atoms()
    double f = 0.0;
    double phi = 0.0;  ///< BMP dual gap estimate, ≤ 0
    std::size_t iter = 0;
    StepCounters counters;
    OracleStats oracle;
    double wall_seconds = 0.0;
    std::size_t inner_warnings = 0;  ///< OMP inner loops that hit their cap
    ProgressAudit audit;
    std::string stop_reason;

    [[nodiscard]] double coefficient(const AtomRef& atom) const;
    /// Σ coeffs · atoms.
    [[nodiscard]] Vector reconstruct(const Dictionary& dict) const;
    /// ‖x − Σ coeffs · atoms‖.
    [[nodiscard]] double decomposition_error(const Dictionary& dict) const;
};

struct StepRecord {
    StepKind kind = StepKind::init;
    std::optional<AtomRef> atom;
    double gamma = 0.0;
    double f_after = 0.0;
    double phi_after = 0.0;
};

struct TraceRow {
    std::size_t iter = 0;
    double wall_seconds = 0.0;
    double f_value = 0.0;
    double dual_gap = 0.0;
    std::size_t n_atoms = 0;
    StepKind step_kind = StepKind::init;
    std::optional<double> nmse;
};

/// Receives one row per iteration (plus the initial row) from a single run.
class TraceSink {
public:
    virtual ~TraceSink() = default;
    virtual void record(const TraceRow& row, const SolverState& state) = 0;
};

struct SolverConfig {
    double eta = 5.0;
    double kappa = 2.0;
    double tau = 2.0;
    std::size_t max_iters = 1000;
    double time_budget = std::numeric_limits<double>::infinity();  ///< seconds
    double stop_dual_gap = 1e-10;
    std::optional<double> stop_value;
    CorrectionMode correction = CorrectionMode::off;
    double drop_threshold = 0.0;
    LineSearchMode linesearch = LineSearchMode::exact;
    std::uint64_t seed = 0;
    /// Start at x₀ = atom 0 with coefficient 1 instead of coefficient 0.
    bool unit_start = false;
    /// BMP: log the full-scan gap |min ⟨∇f, v⟩| instead of |φ| (extra scan per iteration).
    bool log_full_gap = false;
    /// BMP: check the per-step progress bounds on every step.
    bool verify_steps = false;
    double inner_tol = 1e-8;
    std::size_t inner_max = 200;
    std::optional<double> pgd_radius;
    std::optional<std::size_t> cache_capacity;

    /// Throws std::invalid_argument unless η > 0, κ ≥ 1, τ > 1.
    void validate() const;
};

}  // namespace blendmp
