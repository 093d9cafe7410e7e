#include "blendmp/experiment.hpp"
#include "blendmp/io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

namespace {

using namespace blendmp;

// Flags shared by `run` and `sweep`.
struct CommonOptions {
    ExperimentSpec spec;
    SolverSpec solver{"bmp", "", {}, 1.0};
    std::string correction = "off";
    std::string linesearch = "exact";
    std::optional<double> tol;
    std::optional<std::string> config;
    std::string out = "results";
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config, "JSON experiment spec; other flags are ignored when given")
        ->check(CLI::ExistingFile);
    cmd->add_option("--problem", o.spec.problem, "least-squares | lp-power | huber | dist-ball | logistic")
        ->capture_default_str();
    cmd->add_option("--m", o.spec.m, "training rows")->capture_default_str();
    cmd->add_option("--n", o.spec.n, "dimension")->capture_default_str();
    cmd->add_option("--s", o.spec.s, "sparsity of the ground truth")->capture_default_str();
    cmd->add_option("--sigma", o.spec.sigma, "noise standard deviation")->capture_default_str();
    cmd->add_option("--seed", o.spec.seed, "data seed")->capture_default_str();
    cmd->add_option("--data", o.spec.dataset, "labeled dataset file (logistic problem)");
    cmd->add_option("--format", o.spec.dataset_format, "whitespace | libsvm")->capture_default_str();
    cmd->add_option("--subsample", o.spec.subsample_m, "keep this many dataset rows");
    cmd->add_option("--eta", o.solver.config.eta, "constrained-step threshold")->capture_default_str();
    cmd->add_option("--kappa", o.solver.config.kappa, "oracle accuracy")->capture_default_str();
    cmd->add_option("--tau", o.solver.config.tau, "dual-gap shrink factor")->capture_default_str();
    cmd->add_option("--max-iters", o.solver.config.max_iters, "iteration budget")->capture_default_str();
    cmd->add_option("--time-budget", o.solver.config.time_budget, "seconds per solver");
    cmd->add_option("--tol", o.tol, "stop once f <= tol * f(x0)");
    cmd->add_option("--correction", o.correction, "off | basis")
        ->check(CLI::IsMember({"off", "basis"}))
        ->capture_default_str();
    cmd->add_option("--drop-threshold", o.solver.config.drop_threshold, "coefficient drop threshold")
        ->capture_default_str();
    cmd->add_option("--linesearch", o.linesearch, "exact | golden | smoothness")
        ->check(CLI::IsMember({"exact", "golden", "smoothness"}))
        ->capture_default_str();
    cmd->add_option("--snapshots", o.spec.snapshots, "snapshots per run")->capture_default_str();
    cmd->add_option("--pgd-alpha", o.solver.pgd_alpha, "PGD radius as a multiple of ||x*||_1")
        ->capture_default_str();
    cmd->add_option("--out", o.out, "output directory")->capture_default_str();
}

SolverConfig finish_config(const CommonOptions& o, SolverConfig c) {
    c.correction = o.correction == "basis" ? CorrectionMode::basis_reduce : CorrectionMode::off;
    nlohmann::json j = c;
    j["linesearch"] = o.linesearch;
    return j.get<SolverConfig>();
}

// A relative --tol needs f(x0), which is f(0) for every solver here.
void apply_tolerance(const CommonOptions& o, ExperimentSpec& spec) {
    if (!o.tol)
        return;
    const Problem p = build_problem(spec);
    const double f0 = p.objective->value(Vector::Zero(static_cast<Eigen::Index>(p.dict->dim())));
    for (SolverSpec& s : spec.solvers)
        s.config.stop_value = *o.tol * f0;
}

void print_summaries(const std::vector<SolverSummary>& summaries) {
    std::printf("%-14s %10s %14s %8s %8s %8s %8s %10s %12s\n", "label", "iters", "final_f", "atoms", "dual",
                "full", "constr", "wall[s]", "test_error");
    for (const SolverSummary& s : summaries) {
        char test[32] = "-";
        if (s.test_error)
            std::snprintf(test, sizeof test, "%.4g", *s.test_error);
        std::printf("%-14s %10zu %14.6g %8zu %8zu %8zu %8zu %10.3f %12s\n", s.label.c_str(), s.iterations,
                    s.final_f, s.n_atoms, s.n_dual, s.n_full, s.n_constrained, s.wall_seconds, test);
    }
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(std::stod(item));
    if (out.empty())
        throw CLI::ValidationError("--etas", "empty list");
    return out;
}

std::string eta_label(double eta) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "bmp_eta%g", eta);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse optimization over dictionary spans with matching pursuit solvers"};
    app.require_subcommand(1);

    // gen
    std::size_t gm = 500, gn = 2000, gs = 100;
    double gsigma = 0.05, gval = 0.5, gtest = 0.5;
    std::uint64_t gseed = 0;
    std::string gout = "data", gformat = "csv";
    auto* gen = app.add_subcommand("gen", "write a synthetic sparse-regression split");
    gen->add_option("--m", gm, "training rows")->capture_default_str();
    gen->add_option("--n", gn, "dimension")->capture_default_str();
    gen->add_option("--s", gs, "sparsity")->capture_default_str();
    gen->add_option("--sigma", gsigma, "noise standard deviation")->capture_default_str();
    gen->add_option("--seed", gseed, "seed")->capture_default_str();
    gen->add_option("--val-fraction", gval, "validation rows as a fraction of m")->capture_default_str();
    gen->add_option("--test-fraction", gtest, "test rows as a fraction of m")->capture_default_str();
    gen->add_option("--format", gformat, "csv | bin")->check(CLI::IsMember({"csv", "bin"}))->capture_default_str();
    gen->add_option("--out", gout, "output directory")->capture_default_str();

    // run
    CommonOptions run_opts;
    std::string solver_name = "bmp";
    auto* run = app.add_subcommand("run", "run one solver, or every solver of a --config spec");
    add_common(run, run_opts);
    run->add_option("--solver", solver_name, "gmp | omp | bmp | pgd")
        ->check(CLI::IsMember({"gmp", "omp", "bmp", "pgd"}))
        ->capture_default_str();

    // sweep
    CommonOptions sweep_opts;
    std::string etas = "100,10,5,2,1";
    auto* sweep = app.add_subcommand("sweep", "run BMP over a grid of eta values");
    add_common(sweep, sweep_opts);
    sweep->add_option("--etas", etas, "comma-separated eta grid")->capture_default_str();

    // eval
    std::string eval_data, eval_snapshots;
    auto* eval = app.add_subcommand("eval", "early-stopping test error of saved snapshots");
    eval->add_option("--data", eval_data, "directory written by `gen`")->required()->check(CLI::ExistingDirectory);
    eval->add_option("snapshots", eval_snapshots, "snapshot JSON written by `run`")
        ->required()
        ->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            const auto pool = [&](double f) {
                return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(f * gm)));
            };
            const SplitData split = gen_split(gm, pool(gval), pool(gtest), gn, gs, gsigma, gseed);
            save_split(gout, split, gformat);
            std::printf("wrote %s (train %zu, val %zu, test %zu rows; n = %zu)\n", gout.c_str(), gm, pool(gval),
                        pool(gtest), gn);
        } else if (*run) {
            ExperimentSpec spec;
            if (run_opts.config) {
                spec = load_experiment_spec(*run_opts.config);
            } else {
                spec = run_opts.spec;
                SolverSpec s = run_opts.solver;
                s.name = solver_name;
                s.label = solver_name;
                s.config = finish_config(run_opts, s.config);
                spec.solvers = {s};
                apply_tolerance(run_opts, spec);
            }
            print_summaries(run_experiment(spec, run_opts.out));
        } else if (*sweep) {
            ExperimentSpec spec = sweep_opts.config ? load_experiment_spec(*sweep_opts.config) : sweep_opts.spec;
            const SolverConfig base = finish_config(sweep_opts, sweep_opts.solver.config);
            spec.solvers.clear();
            for (double eta : parse_list(etas)) {
                SolverSpec s{"bmp", eta_label(eta), base, 1.0};
                s.config.eta = eta;
                spec.solvers.push_back(s);
            }
            apply_tolerance(sweep_opts, spec);
            print_summaries(run_experiment(spec, sweep_opts.out));
        } else if (*eval) {
            const SplitData split = load_split(eval_data);
            const SignedCanonicalDictionary dict(static_cast<std::size_t>(split.a_train.cols()));
            const EarlyStopResult r = early_stopping_eval(read_snapshots_json(eval_snapshots), split, dict);
            std::printf("best_iter %zu\nval_error %.17g\ntest_error %.17g\n", r.best_iter, r.val_error,
                        r.test_error);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
