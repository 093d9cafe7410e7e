#include "blendmp/experiment.hpp"

#include "blendmp/io.hpp"
#include "blendmp/solvers.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

namespace blendmp {

namespace {

const char* linesearch_name(LineSearchMode mode) {
    switch (mode) {
    case LineSearchMode::exact: return "exact";
    case LineSearchMode::golden: return "golden";
    case LineSearchMode::smoothness: return "smoothness";
    }
    return "exact";
}

LineSearchMode linesearch_from_name(const std::string& name) {
    if (name == "exact") return LineSearchMode::exact;
    if (name == "golden") return LineSearchMode::golden;
    if (name == "smoothness") return LineSearchMode::smoothness;
    throw std::invalid_argument("unknown line search: " + name);
}

CorrectionMode correction_from_name(const std::string& name) {
    if (name == "off") return CorrectionMode::off;
    if (name == "basis") return CorrectionMode::basis_reduce;
    throw std::invalid_argument("unknown correction mode: " + name);
}

template <class T>
void read_optional(const nlohmann::json& j, const char* key, std::optional<T>& out) {
    if (auto it = j.find(key); it != j.end() && !it->is_null())
        out = it->get<T>();
}

template <class T>
void put_optional(nlohmann::json& j, const char* key, const std::optional<T>& v) {
    if (v)
        j[key] = *v;
}

Matrix unit_gaussian_columns(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Matrix a(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            a(i, j) = normal(rng);
        a.col(j).normalize();
    }
    return a;
}

}  // namespace

void to_json(nlohmann::json& j, const SolverConfig& c) {
    j = nlohmann::json{{"eta", c.eta},
                       {"kappa", c.kappa},
                       {"tau", c.tau},
                       {"max_iters", c.max_iters},
                       {"stop_dual_gap", c.stop_dual_gap},
                       {"correction", c.correction == CorrectionMode::off ? "off" : "basis"},
                       {"drop_threshold", c.drop_threshold},
                       {"linesearch", linesearch_name(c.linesearch)},
                       {"seed", c.seed},
                       {"unit_start", c.unit_start},
                       {"log_full_gap", c.log_full_gap},
                       {"verify_steps", c.verify_steps},
                       {"inner_tol", c.inner_tol},
                       {"inner_max", c.inner_max}};
    // JSON has no infinity; an absent budget means unlimited.
    if (std::isfinite(c.time_budget))
        j["time_budget"] = c.time_budget;
    put_optional(j, "stop_value", c.stop_value);
    put_optional(j, "pgd_radius", c.pgd_radius);
    put_optional(j, "cache_capacity", c.cache_capacity);
}

void from_json(const nlohmann::json& j, SolverConfig& c) {
    const SolverConfig d;
    c.eta = j.value("eta", d.eta);
    c.kappa = j.value("kappa", d.kappa);
    c.tau = j.value("tau", d.tau);
    c.max_iters = j.value("max_iters", d.max_iters);
    c.time_budget = d.time_budget;
    if (auto it = j.find("time_budget"); it != j.end() && !it->is_null())
        c.time_budget = it->get<double>();
    c.stop_dual_gap = j.value("stop_dual_gap", d.stop_dual_gap);
    read_optional(j, "stop_value", c.stop_value);
    c.correction = correction_from_name(j.value("correction", std::string("off")));
    c.drop_threshold = j.value("drop_threshold", d.drop_threshold);
    c.linesearch = linesearch_from_name(j.value("linesearch", std::string("exact")));
    c.seed = j.value("seed", d.seed);
    c.unit_start = j.value("unit_start", d.unit_start);
    c.log_full_gap = j.value("log_full_gap", d.log_full_gap);
    c.verify_steps = j.value("verify_steps", d.verify_steps);
    c.inner_tol = j.value("inner_tol", d.inner_tol);
    c.inner_max = j.value("inner_max", d.inner_max);
    read_optional(j, "pgd_radius", c.pgd_radius);
    read_optional(j, "cache_capacity", c.cache_capacity);
}

void to_json(nlohmann::json& j, const SolverSpec& s) {
    j = nlohmann::json{{"name", s.name}, {"label", s.label}, {"config", s.config}, {"pgd_alpha", s.pgd_alpha}};
}

void from_json(const nlohmann::json& j, SolverSpec& s) {
    s.name = j.at("name").get<std::string>();
    s.label = j.value("label", s.name);
    if (s.label.empty())
        s.label = s.name;
    s.config = j.value("config", SolverConfig{});
    s.pgd_alpha = j.value("pgd_alpha", 1.0);
}

void to_json(nlohmann::json& j, const ExperimentSpec& e) {
    j = nlohmann::json{{"problem", e.problem},
                       {"m", e.m},
                       {"n", e.n},
                       {"s", e.s},
                       {"sigma", e.sigma},
                       {"seed", e.seed},
                       {"val_fraction", e.val_fraction},
                       {"test_fraction", e.test_fraction},
                       {"solvers", e.solvers},
                       {"dictionary", e.dictionary},
                       {"dictionary_atoms", e.dictionary_atoms},
                       {"ls_scale", e.ls_scale},
                       {"huber_delta", e.huber_delta},
                       {"lp_p", e.lp_p},
                       {"lp_q", e.lp_q},
                       {"dataset_format", e.dataset_format},
                       {"snapshots", e.snapshots}};
    put_optional(j, "dataset", e.dataset);
    put_optional(j, "subsample_m", e.subsample_m);
}

void from_json(const nlohmann::json& j, ExperimentSpec& e) {
    const ExperimentSpec d;
    e.problem = j.value("problem", d.problem);
    e.m = j.value("m", d.m);
    e.n = j.value("n", d.n);
    e.s = j.value("s", d.s);
    e.sigma = j.value("sigma", d.sigma);
    e.seed = j.value("seed", d.seed);
    e.val_fraction = j.value("val_fraction", d.val_fraction);
    e.test_fraction = j.value("test_fraction", d.test_fraction);
    e.solvers = j.value("solvers", std::vector<SolverSpec>{});
    e.dictionary = j.value("dictionary", d.dictionary);
    e.dictionary_atoms = j.value("dictionary_atoms", d.dictionary_atoms);
    e.ls_scale = j.value("ls_scale", d.ls_scale);
    e.huber_delta = j.value("huber_delta", d.huber_delta);
    e.lp_p = j.value("lp_p", d.lp_p);
    e.lp_q = j.value("lp_q", d.lp_q);
    read_optional(j, "dataset", e.dataset);
    e.dataset_format = j.value("dataset_format", d.dataset_format);
    read_optional(j, "subsample_m", e.subsample_m);
    e.snapshots = j.value("snapshots", d.snapshots);
}

void ExperimentSpec::validate() const {
    if (problem != "least-squares" && problem != "lp-power" && problem != "huber" && problem != "dist-ball" &&
        problem != "logistic")
        throw std::invalid_argument("unknown problem: " + problem);
    if (!dataset) {
        if (m == 0 || n == 0)
            throw std::invalid_argument("m and n must be positive");
        if (s > n)
            throw std::invalid_argument("s exceeds n");
        if (!(sigma >= 0.0))
            throw std::invalid_argument("sigma must be nonnegative");
    } else if (problem != "logistic") {
        throw std::invalid_argument("datasets are only supported for the logistic problem");
    }
    if (!(val_fraction > 0.0) || !(test_fraction > 0.0))
        throw std::invalid_argument("validation and test fractions must be positive");
    if (dictionary != "canonical" && dictionary != "gaussian")
        throw std::invalid_argument("unknown dictionary: " + dictionary);
    if (dictionary == "gaussian" && dictionary_atoms == 0)
        throw std::invalid_argument("gaussian dictionary needs dictionary_atoms > 0");
    if (solvers.empty())
        throw std::invalid_argument("experiment lists no solvers");
    for (const SolverSpec& s : solvers) {
        if (s.name != "gmp" && s.name != "omp" && s.name != "bmp" && s.name != "pgd")
            throw std::invalid_argument("unknown solver: " + s.name);
        if (s.name == "pgd" && (problem != "least-squares" || dictionary != "canonical"))
            throw std::invalid_argument("pgd runs only on least squares with the canonical dictionary");
        s.config.validate();
    }
    for (std::size_t i = 0; i < solvers.size(); ++i)
        for (std::size_t k = i + 1; k < solvers.size(); ++k)
            if (solvers[i].label == solvers[k].label)
                throw std::invalid_argument("duplicate solver label: " + solvers[i].label);
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    return nlohmann::json::parse(in).get<ExperimentSpec>();
}

std::size_t snapshot_interval(std::size_t max_iters, std::size_t count) {
    if (count == 0)
        return 1;
    return std::max<std::size_t>(1, max_iters / count);
}

Problem build_problem(const ExperimentSpec& spec) {
    spec.validate();
    Problem p;
    if (spec.dataset) {
        LabeledData data = load_labeled_dataset(*spec.dataset, dataset_format_from_string(spec.dataset_format),
                                                spec.subsample_m, spec.seed);
        p.split.a_train = std::move(data.a);
        p.split.y_train = std::move(data.labels);
    } else {
        const auto pool = [&](double fraction) {
            return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * spec.m)));
        };
        p.split = gen_split(spec.m, pool(spec.val_fraction), pool(spec.test_fraction), spec.n, spec.s, spec.sigma,
                            spec.seed);
    }
    const Matrix& a = p.split.a_train;
    const Vector& y = p.split.y_train;
    const auto n = static_cast<std::size_t>(a.cols());

    if (spec.dictionary == "canonical") {
        p.dict = std::make_unique<SignedCanonicalDictionary>(n);
        p.x_star = p.split.x_star;
    } else {
        p.dict = std::make_unique<MatrixDictionary>(
            unit_gaussian_columns(n, spec.dictionary_atoms, spec.seed ^ 0x9e3779b97f4a7c15ULL), Normalize::no);
    }

    if (spec.problem == "least-squares") {
        p.objective = std::make_unique<LeastSquares>(a, y, spec.ls_scale);
    } else if (spec.problem == "huber") {
        p.objective = std::make_unique<HuberRegression>(a, y, spec.huber_delta);
    } else if (spec.problem == "lp-power") {
        p.objective = std::make_unique<LpPower>(a, y, spec.lp_p, spec.lp_q);
    } else if (spec.problem == "dist-ball") {
        p.objective = std::make_unique<DistanceToBallSquared>(a, y);
    } else {
        Vector labels = y;
        if (!spec.dataset)
            labels = y.unaryExpr([](double v) { return v < 0.0 ? -1.0 : 1.0; });
        p.objective = std::make_unique<LogisticLoss>(a, labels);
    }
    return p;
}

void to_json(nlohmann::json& j, const SolverSummary& s) {
    j = nlohmann::json{{"label", s.label},
                       {"solver", s.solver},
                       {"f0", s.f0},
                       {"final_f", s.final_f},
                       {"n_atoms", s.n_atoms},
                       {"iterations", s.iterations},
                       {"N_dual", s.n_dual},
                       {"N_full", s.n_full},
                       {"N_constrained", s.n_constrained},
                       {"wall_seconds", s.wall_seconds},
                       {"stop_reason", s.stop_reason}};
    put_optional(j, "test_error", s.test_error);
    put_optional(j, "best_iter", s.best_iter);
    put_optional(j, "final_nmse", s.final_nmse);
}

std::vector<SolverSummary> run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir) {
    const Problem problem = build_problem(spec);
    std::filesystem::create_directories(out_dir);
    const bool has_holdout = spec.problem == "least-squares" && !spec.dataset && spec.dictionary == "canonical";

    std::vector<SolverSummary> summaries;
    for (const SolverSpec& solver : spec.solvers) {
        SolverConfig config = solver.config;
        if (solver.name == "pgd" && !config.pgd_radius) {
            if (!problem.x_star || problem.x_star->lpNorm<1>() == 0.0)
                throw std::invalid_argument("pgd radius needs a nonzero ground truth or an explicit pgd_radius");
            config.pgd_radius = solver.pgd_alpha * problem.x_star->lpNorm<1>();
        }
        RecordingSink sink(snapshot_interval(config.max_iters, spec.snapshots), problem.x_star);
        const SolverState state = run_solver(solver.name, *problem.dict, *problem.objective, config, &sink);
        sink.finish(state);

        write_trace_csv(out_dir / (solver.label + ".csv"), sink.rows());
        write_snapshots_json(out_dir / (solver.label + "_snapshots.json"), sink.snapshots());

        SolverSummary s;
        s.label = solver.label;
        s.solver = solver.name;
        s.f0 = sink.rows().front().f_value;
        s.final_f = state.f;
        s.n_atoms = state.active.size();
        s.iterations = state.iter;
        s.n_dual = state.counters.dual;
        s.n_full = state.counters.full;
        s.n_constrained = state.counters.constrained;
        s.wall_seconds = state.wall_seconds;
        s.stop_reason = state.stop_reason;
        if (has_holdout) {
            const EarlyStopResult es = early_stopping_eval(sink.snapshots(), problem.split, *problem.dict);
            s.test_error = es.test_error;
            s.best_iter = es.best_iter;
        }
        if (problem.x_star && problem.x_star->squaredNorm() > 0.0)
            s.final_nmse = nmse(state.x, *problem.x_star);
        summaries.push_back(std::move(s));
    }

    nlohmann::json doc{{"spec", spec}, {"solvers", summaries}};
    std::ofstream out(out_dir / "summary.json");
    if (!out)
        throw std::runtime_error("cannot write " + (out_dir / "summary.json").string());
    out << doc.dump(2) << '\n';
    return summaries;
}

}  // namespace blendmp
