#include "blendmp/solvers.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>
#include <variant>

namespace blendmp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Wall clock for one run, excluding time spent inside the trace sink.
class RunClock {
public:
    RunClock(const SolverConfig& config, TraceSink* sink) : config_(config), sink_(sink) {}

    [[nodiscard]] double elapsed() const { return seconds_since(start_) - sink_seconds_; }

    void emit(SolverState& state, StepKind kind, double gap) {
        state.wall_seconds = elapsed();
        if (!sink_)
            return;
        const auto t0 = Clock::now();
        TraceRow row;
        row.iter = state.iter;
        row.wall_seconds = state.wall_seconds;
        row.f_value = state.f;
        row.dual_gap = gap;
        row.n_atoms = state.active.size();
        row.step_kind = kind;
        sink_->record(row, state);
        sink_seconds_ += seconds_since(t0);
    }

    /// Budget and target checks shared by every solver.
    bool should_stop(SolverState& state) const {
        if (state.iter >= config_.max_iters)
            state.stop_reason = "max_iters";
        else if (elapsed() >= config_.time_budget)
            state.stop_reason = "time_budget";
        else if (config_.stop_value && state.f <= *config_.stop_value)
            state.stop_reason = "stop_value";
        return !state.stop_reason.empty();
    }

private:
    const SolverConfig& config_;
    TraceSink* sink_;
    Clock::time_point start_ = Clock::now();
    double sink_seconds_ = 0.0;
};

void check_compatible(const Dictionary& dict, const SmoothObjective& obj) {
    if (dict.dim() != obj.dim())
        throw std::invalid_argument("dictionary and objective dimensions differ");
}

SolverState initial_state(const Dictionary& dict, const SmoothObjective& obj, const SolverConfig& config) {
    SolverState s;
    s.x = Vector::Zero(static_cast<Eigen::Index>(dict.dim()));
    const AtomRef start{0, 1};
    s.active.add(start, 0);
    s.coeffs.push_back(config.unit_start ? 1.0 : 0.0);
    if (config.unit_start)
        dict.add_atom(start.index, 1.0, s.x);
    s.f = obj.value(s.x);
    return s;
}

// x += γ·atom, growing the active set when the atom is new. Returns true
// when the atom was appended.
bool step_along_atom(SolverState& s, const Dictionary& dict, const AtomRef& atom, double gamma) {
    const std::size_t before = s.active.size();
    const std::size_t pos = s.active.add(atom, s.iter);
    const bool appended = s.active.size() > before;
    if (appended)
        s.coeffs.push_back(0.0);
    s.coeffs[pos] += gamma;
    dict.add_atom(atom.index, atom.sign * gamma, s.x);
    return appended;
}

std::vector<Vector> dense_atoms(const Dictionary& dict, const ActiveSet& active) {
    std::vector<Vector> out;
    out.reserve(active.size());
    for (const AtomRef& a : active.atoms())
        out.push_back(dict.atom_dense(a));
    return out;
}

// argmin over span(active) of scale·‖y − Ax‖² via normal equations formed
// from scratch.
void fit_least_squares_on_span(SolverState& s, const Dictionary& dict, const LeastSquares& obj) {
    const Matrix& a = obj.matrix();
    const auto k = static_cast<Eigen::Index>(s.active.size());
    Matrix ab(a.rows(), k);
    for (Eigen::Index j = 0; j < k; ++j)
        ab.col(j) = multiply_sparse_aware(a, dict.atom_dense(s.active.atoms()[static_cast<std::size_t>(j)]));
    const Matrix normal = ab.transpose() * ab;
    const Vector rhs = ab.transpose() * obj.target();
    const Vector c = solve_spd(normal, rhs);
    s.coeffs.assign(c.data(), c.data() + c.size());
    s.x = s.reconstruct(dict);
    s.f = obj.value(s.x);
}

// Projected-gradient steps inside span(active) until the projected gradient
// is small. Returns false when inner_max was reached first.
bool descend_on_span(SolverState& s, const SmoothObjective& obj, const GramSystem& gram, const SolverConfig& config) {
    for (std::size_t inner = 0; inner < config.inner_max; ++inner) {
        const Vector g = obj.gradient(s.x);
        const SpanProjection p = gram.project(g);
        if (p.projected.norm() <= config.inner_tol * (1.0 + g.norm()))
            return true;
        const Vector d = -p.projected;
        const LineSearchResult ls = line_search(obj, s.x, d, g, s.f, config.linesearch);
        if (ls.gamma == 0.0)
            return true;
        s.x.noalias() += ls.gamma * d;
        for (std::size_t j = 0; j < s.coeffs.size(); ++j)
            s.coeffs[j] -= ls.gamma * p.coefficients[static_cast<Eigen::Index>(j)];
        s.f = obj.value(s.x);
    }
    return false;
}

}  // namespace

SolverState run_gmp(const Dictionary& dict, const SmoothObjective& obj, const SolverConfig& config,
                    TraceSink* sink) {
    config.validate();
    check_compatible(dict, obj);
    RunClock clock(config, sink);
    SolverState s = initial_state(dict, obj, config);

    Vector g = obj.gradient(s.x);
    AtomValue best = lmo(dict, g);
    clock.emit(s, StepKind::init, std::abs(best.value));
    while (!clock.should_stop(s)) {
        if (std::abs(best.value) <= config.stop_dual_gap) {
            s.stop_reason = "dual_gap";
            break;
        }
        const Vector d = dict.atom_dense(best.atom);
        const LineSearchResult ls = line_search(obj, s.x, d, g, s.f, config.linesearch);
        step_along_atom(s, dict, best.atom, ls.gamma);
        s.f = obj.value(s.x);
        ++s.iter;
        ++s.counters.other;

        g = obj.gradient(s.x);
        best = lmo(dict, g);
        clock.emit(s, StepKind::gmp, std::abs(best.value));
    }
    s.wall_seconds = clock.elapsed();
    return s;
}

SolverState run_omp(const Dictionary& dict, const SmoothObjective& obj, const SolverConfig& config,
                    TraceSink* sink) {
    config.validate();
    check_compatible(dict, obj);
    RunClock clock(config, sink);
    SolverState s = initial_state(dict, obj, config);

    const auto* least_squares = dynamic_cast<const LeastSquares*>(&obj);
    const bool closed_form = least_squares && config.linesearch == LineSearchMode::exact;
    GramSystem gram;
    if (!closed_form)
        for (const Vector& v : dense_atoms(dict, s.active))
            gram.append(v);

    Vector g = obj.gradient(s.x);
    AtomValue best = lmo(dict, g);
    clock.emit(s, StepKind::init, std::abs(best.value));
    while (!clock.should_stop(s)) {
        if (std::abs(best.value) <= config.stop_dual_gap) {
            s.stop_reason = "dual_gap";
            break;
        }
        const bool appended = step_along_atom(s, dict, best.atom, 0.0);
        if (closed_form) {
            fit_least_squares_on_span(s, dict, *least_squares);
        } else {
            if (appended)
                gram.append(dict.atom_dense(best.atom));
            if (!descend_on_span(s, obj, gram, config))
                ++s.inner_warnings;
        }
        ++s.iter;
        ++s.counters.other;

        g = obj.gradient(s.x);
        best = lmo(dict, g);
        clock.emit(s, StepKind::omp, std::abs(best.value));
    }
    s.wall_seconds = clock.elapsed();
    return s;
}

SolverState run_bmp(const Dictionary& dict, const SmoothObjective& obj, const SolverConfig& config,
                    TraceSink* sink) {
    config.validate();
    check_compatible(dict, obj);
    RunClock clock(config, sink);
    SolverState s = initial_state(dict, obj, config);
    WeakSepCache cache(config.cache_capacity);
    GramSystem gram(dense_atoms(dict, s.active));

    std::optional<double> lipschitz;
    double diameter = 0.0;
    if (config.verify_steps) {
        lipschitz = obj.smoothness_constant();
        diameter = diameter_symmetrized(dict);
    }

    Vector g = obj.gradient(s.x);
    const AtomValue first = lmo(dict, g);
    s.phi = first.value / config.tau;
    clock.emit(s, StepKind::init, config.log_full_gap ? std::abs(first.value) : std::abs(s.phi));

    std::optional<SolverState> before;
    // Set after a constrained step that failed to decrease f; repeating it on
    // the same state would make no progress.
    bool stalled = false;
    while (!clock.should_stop(s)) {
        if (std::abs(s.phi) <= config.stop_dual_gap) {
            s.stop_reason = "dual_gap";
            break;
        }
        if (config.verify_steps)
            before = s;

        StepRecord record;
        const AtomValue best_active = lmo_over_active(dict, g, s.active.atoms());
        if (!stalled && best_active.value <= s.phi / config.eta) {
            const SpanProjection p = gram.project(g);
            const Vector d = -p.projected;
            const LineSearchResult ls = line_search(obj, s.x, d, g, s.f, config.linesearch);
            s.x.noalias() += ls.gamma * d;
            for (std::size_t j = 0; j < s.coeffs.size(); ++j)
                s.coeffs[j] -= ls.gamma * p.coefficients[static_cast<Eigen::Index>(j)];
            ++s.counters.constrained;
            record.kind = StepKind::constrained;
            record.gamma = ls.gamma;
        } else {
            stalled = false;
            const OracleAnswer answer = lpsep(dict, cache, g, s.phi, config.kappa, &s.oracle);
            if (std::holds_alternative<Negative>(answer)) {
                s.phi = s.phi / config.tau;
                ++s.counters.dual;
                record.kind = StepKind::dual;
            } else {
                const auto& hit = std::get<Positive>(answer);
                const Vector d = dict.atom_dense(hit.atom);
                const LineSearchResult ls = line_search(obj, s.x, d, g, s.f, config.linesearch);
                if (step_along_atom(s, dict, hit.atom, ls.gamma))
                    gram.append(d);
                ++s.counters.full;
                record.kind = StepKind::full;
                record.atom = hit.atom;
                record.gamma = ls.gamma;
            }
        }

        bool moved = record.kind != StepKind::dual;
        if (config.correction != CorrectionMode::off) {
            const CorrectionReport report = correct_active_set(s, dict, config.correction, config.drop_threshold);
            if (report.dropped + report.dependent > 0) {
                gram = GramSystem(dense_atoms(dict, s.active));
                moved = true;
            }
        }

        ++s.iter;
        if (moved) {
            const double f_prev = s.f;
            s.f = obj.value(s.x);
            g = obj.gradient(s.x);
            if (record.kind == StepKind::constrained)
                stalled = !(s.f < f_prev);
        }
        record.f_after = s.f;
        record.phi_after = s.phi;

        if (config.verify_steps) {
            const StepCheck check =
                bmp_step_assertions(*before, s, record, lipschitz, config, diameter, obj.smoothness_order());
            ++s.audit.checked;
            if (!check.ok) {
                ++s.audit.failed;
                if (s.audit.failures.size() < 10)
                    s.audit.failures.push_back(check.message);
            }
        }

        const double gap = config.log_full_gap ? std::abs(lmo(dict, g).value) : std::abs(s.phi);
        clock.emit(s, record.kind, gap);
    }
    s.wall_seconds = clock.elapsed();
    return s;
}

SolverState run_pgd(const LeastSquares& obj, double radius, const SolverConfig& config, TraceSink* sink) {
    config.validate();
    if (!(radius > 0.0))
        throw std::invalid_argument("run_pgd: radius must be positive");
    const double lipschitz = *obj.smoothness_constant();
    RunClock clock(config, sink);

    SolverState s;
    s.x = Vector::Zero(static_cast<Eigen::Index>(obj.dim()));
    s.f = obj.value(s.x);
    auto sync_atoms = [&s] {
        ActiveSet active;
        std::vector<double> coeffs;
        for (Eigen::Index i = 0; i < s.x.size(); ++i) {
            if (s.x[i] != 0.0) {
                const AtomRef atom{static_cast<std::size_t>(i), 1};
                const auto prev = s.active.find(atom);
                active.add(atom, prev ? s.active.first_seen()[*prev] : s.iter);
                coeffs.push_back(s.x[i]);
            }
        }
        s.active = std::move(active);
        s.coeffs = std::move(coeffs);
    };
    // Frank-Wolfe gap over the ℓ1 ball: ⟨g, x⟩ + r‖g‖∞.
    auto fw_gap = [&](const Vector& g) { return g.dot(s.x) + radius * g.cwiseAbs().maxCoeff(); };

    Vector g = obj.gradient(s.x);
    clock.emit(s, StepKind::init, fw_gap(g));
    while (!clock.should_stop(s)) {
        if (fw_gap(g) <= config.stop_dual_gap) {
            s.stop_reason = "dual_gap";
            break;
        }
        s.x = project_l1_ball(s.x - g / lipschitz, radius);
        s.f = obj.value(s.x);
        ++s.iter;
        ++s.counters.other;
        sync_atoms();
        g = obj.gradient(s.x);
        clock.emit(s, StepKind::pgd, fw_gap(g));
    }
    s.wall_seconds = clock.elapsed();
    return s;
}

SolverState run_solver(std::string_view name, const Dictionary& dict, const SmoothObjective& obj,
                       const SolverConfig& config, TraceSink* sink) {
    if (name == "gmp")
        return run_gmp(dict, obj, config, sink);
    if (name == "omp")
        return run_omp(dict, obj, config, sink);
    if (name == "bmp")
        return run_bmp(dict, obj, config, sink);
    if (name == "pgd") {
        const auto* ls = dynamic_cast<const LeastSquares*>(&obj);
        if (!ls)
            throw std::invalid_argument("pgd requires a least-squares objective");
        if (!dynamic_cast<const SignedCanonicalDictionary*>(&dict))
            throw std::invalid_argument("pgd works on coordinates and needs the canonical dictionary");
        if (!config.pgd_radius)
            throw std::invalid_argument("pgd requires an l1 radius");
        return run_pgd(*ls, *config.pgd_radius, config, sink);
    }
    throw std::invalid_argument("unknown solver: " + std::string(name));
}

StepCheck bmp_step_assertions(const SolverState& before, const SolverState& after, const StepRecord& record,
                              std::optional<double> lipschitz, const SolverConfig& config, double diameter,
                              double order) {
    StepCheck check;
    std::ostringstream msg;
    msg << "iteration " << after.iter << " (" << to_string(record.kind) << "): ";
    switch (record.kind) {
    case StepKind::dual: {
        const bool same_x = before.x.size() == after.x.size() &&
                            std::memcmp(before.x.data(), after.x.data(),
                                        static_cast<std::size_t>(before.x.size()) * sizeof(double)) == 0;
        const bool scaled = after.phi == before.phi / config.tau;
        check.ok = same_x && scaled;
        if (!same_x)
            msg << "iterate moved on a dual step";
        else if (!scaled)
            msg << "phi " << after.phi << " is not " << before.phi << "/tau";
        break;
    }
    case StepKind::full:
    case StepKind::constrained: {
        check.decrease = before.f - after.f;
        if (!lipschitz)
            break;
        const double conj = order / (order - 1.0);
        const double accuracy = record.kind == StepKind::full ? config.kappa : config.eta;
        check.bound = std::pow(2.0, conj) * std::pow(std::abs(before.phi), conj) /
                      (conj * std::pow(accuracy, conj) * std::pow(*lipschitz, conj - 1.0) * std::pow(diameter, conj));
        check.ok = check.decrease >= check.bound - 1e-10;
        if (!check.ok)
            msg << "decrease " << check.decrease << " below guaranteed " << check.bound;
        break;
    }
    default:
        break;
    }
    if (!check.ok)
        check.message = msg.str();
    return check;
}

}  // namespace blendmp
