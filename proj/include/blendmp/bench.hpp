#pragma once

#include "blendmp/solver_state.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace blendmp {

struct SparseRegression {
    Matrix a;
    Vector y;
    Vector x_star;
};

/// A with i.i.d. N(0,1) entries; x* with s uniformly placed N(0,1) values;
/// y = Ax* + w with w ~ N(0, σ²I). Deterministic in `seed`.
SparseRegression gen_sparse_regression(std::size_t m, std::size_t n, std::size_t s, double sigma,
                                       std::uint64_t seed);

struct SplitData {
    Matrix a_train, a_val, a_test;
    Vector y_train, y_val, y_test;
    std::optional<Vector> x_star;
};

/// Three independent pools (train/val/test) observing one shared x*.
SplitData gen_split(std::size_t m_train, std::size_t m_val, std::size_t m_test, std::size_t n, std::size_t s,
                    double sigma, std::uint64_t seed);

/// ‖x − x*‖² / ‖x*‖².
double nmse(const Vector& x, const Vector& x_star);

/// Sparse decomposition of one iterate.
struct Snapshot {
    std::size_t iter = 0;
    std::vector<AtomRef> atoms;
    std::vector<double> coeffs;

    [[nodiscard]] Vector reconstruct(const Dictionary& dict) const;
};

struct EarlyStopResult {
    std::size_t best_iter = 0;
    std::size_t best_index = 0;
    double val_error = 0.0;
    double test_error = 0.0;
};

/// Picks the snapshot with the smallest ‖y_val − A_val x‖²/m_val and reports
/// its ‖y_test − A_test x‖²/m_test. Earlier snapshots win ties.
EarlyStopResult early_stopping_eval(const std::vector<Snapshot>& snapshots, const SplitData& split,
                                    const Dictionary& dict);

/// Collects rows and periodic snapshots in memory; fills NMSE when x* is set.
class RecordingSink : public TraceSink {
public:
    explicit RecordingSink(std::size_t snapshot_every = 0, std::optional<Vector> x_star = std::nullopt)
        : every_(snapshot_every), x_star_(std::move(x_star)) {}

    void record(const TraceRow& row, const SolverState& state) override;

    [[nodiscard]] const std::vector<TraceRow>& rows() const { return rows_; }
    [[nodiscard]] const std::vector<Snapshot>& snapshots() const { return snapshots_; }
    /// Appends the final state when its iteration is not already captured.
    void finish(const SolverState& state);

private:
    std::size_t every_;
    std::optional<Vector> x_star_;
    std::vector<TraceRow> rows_;
    std::vector<Snapshot> snapshots_;
};

Snapshot snapshot_of(const SolverState& state);

}  // namespace blendmp
