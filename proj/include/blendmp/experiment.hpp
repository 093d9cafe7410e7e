#pragma once

#include "blendmp/bench.hpp"
#include "blendmp/objectives.hpp"
#include "blendmp/solver_state.hpp"

#include <json.hpp>

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace blendmp {

struct SolverSpec {
    std::string name;   ///< gmp | omp | bmp | pgd
    std::string label;  ///< output file stem; defaults to name
    SolverConfig config;
    double pgd_alpha = 1.0;  ///< PGD radius as a multiple of ‖x*‖₁
};

struct ExperimentSpec {
    std::string problem = "least-squares";  ///< least-squares | lp-power | huber | dist-ball | logistic
    std::size_t m = 500;
    std::size_t n = 2000;
    std::size_t s = 100;
    double sigma = 0.05;
    std::uint64_t seed = 0;
    /// Validation and test pool sizes as fractions of m.
    double val_fraction = 0.5;
    double test_fraction = 0.5;
    std::vector<SolverSpec> solvers;

    std::string dictionary = "canonical";  ///< canonical | gaussian
    std::size_t dictionary_atoms = 0;      ///< gaussian only

    double ls_scale = 1.0;
    double huber_delta = 10.0;
    double lp_p = 3.0;
    double lp_q = 5.0;

    /// Labeled dataset for the logistic problem; synthetic labels otherwise.
    std::optional<std::string> dataset;
    std::string dataset_format = "whitespace";
    std::optional<std::size_t> subsample_m;

    std::size_t snapshots = 200;

    /// Throws std::invalid_argument on inconsistent fields.
    void validate() const;
};

void to_json(nlohmann::json& j, const SolverConfig& c);
void from_json(const nlohmann::json& j, SolverConfig& c);
void to_json(nlohmann::json& j, const SolverSpec& s);
void from_json(const nlohmann::json& j, SolverSpec& s);
void to_json(nlohmann::json& j, const ExperimentSpec& e);
void from_json(const nlohmann::json& j, ExperimentSpec& e);

ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

/// Data, dictionary and objective shared by every solver of an experiment.
struct Problem {
    SplitData split;
    std::unique_ptr<Dictionary> dict;
    std::unique_ptr<SmoothObjective> objective;
    /// Ground truth in iterate coordinates, when the dictionary is canonical.
    std::optional<Vector> x_star;
};

Problem build_problem(const ExperimentSpec& spec);

struct SolverSummary {
    std::string label;
    std::string solver;
    double f0 = 0.0;
    double final_f = 0.0;
    std::size_t n_atoms = 0;
    std::size_t iterations = 0;
    std::size_t n_dual = 0;
    std::size_t n_full = 0;
    std::size_t n_constrained = 0;
    double wall_seconds = 0.0;
    std::string stop_reason;
    std::optional<double> test_error;
    std::optional<std::size_t> best_iter;
    std::optional<double> final_nmse;
};

void to_json(nlohmann::json& j, const SolverSummary& s);

/// Runs every solver on the shared problem. Writes `<label>.csv` and
/// `<label>_snapshots.json` per solver and `summary.json` into `out_dir`.
std::vector<SolverSummary> run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir);

/// Snapshot interval max(1, T/count).
std::size_t snapshot_interval(std::size_t max_iters, std::size_t count);

}  // namespace blendmp
