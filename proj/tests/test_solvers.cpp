#include "blendmp/bench.hpp"
#include "blendmp/solvers.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <map>

using namespace blendmp;
using testutil::random_matrix;
using testutil::random_vector;

namespace {

// Keeps every emitted row together with a copy of the state it came from.
class CapturingSink : public TraceSink {
public:
    void record(const TraceRow& row, const SolverState& state) override {
        rows.push_back(row);
        states.push_back(state);
    }
    std::vector<TraceRow> rows;
    std::vector<SolverState> states;
};

// Canonical dictionary that counts full scans.
class CountingDictionary final : public Dictionary {
public:
    explicit CountingDictionary(std::size_t dim) : inner_(dim) {}
    std::size_t num_atoms() const override { return inner_.num_atoms(); }
    std::size_t dim() const override { return inner_.dim(); }
    Vector atom_dense(std::size_t i) const override { return inner_.atom_dense(i); }
    Vector inner_products(const Vector& g) const override {
        ++scans;
        return inner_.inner_products(g);
    }
    double inner_product(std::size_t i, const Vector& g) const override { return inner_.inner_product(i, g); }
    void add_atom(std::size_t i, double scale, Vector& x) const override { inner_.add_atom(i, scale, x); }
    double atom_norm(std::size_t i) const override { return inner_.atom_norm(i); }

    mutable std::size_t scans = 0;

private:
    SignedCanonicalDictionary inner_;
};

SolverConfig iters(std::size_t n) {
    SolverConfig c;
    c.max_iters = n;
    return c;
}

}  // namespace

TEST_CASE("GMP on the identity is classical matching pursuit") {
    std::mt19937_64 rng(51);
    const Vector y = random_vector(40, rng);
    const LeastSquares f(Matrix::Identity(40, 40), y, 0.5);
    CapturingSink sink;
    const SolverState s = run_gmp(SignedCanonicalDictionary(40), f, iters(30), &sink);
    for (std::size_t t = 1; t < sink.states.size(); ++t) {
        const Vector residual = y - sink.states[t - 1].x;
        Eigen::Index i_star;
        residual.cwiseAbs().maxCoeff(&i_star);
        const Vector step = sink.states[t].x - sink.states[t - 1].x;
        Eigen::Index moved;
        step.cwiseAbs().maxCoeff(&moved);
        CHECK(moved == i_star);
        CHECK(step[moved] == doctest::Approx(residual[i_star]));
    }
    CHECK(s.iter == 30);
}

TEST_CASE("GMP with a single-atom target converges in one step") {
    const Vector y = Vector::Unit(5, 0);
    const LeastSquares f(Matrix::Identity(5, 5), y, 0.5);
    const SolverState s = run_gmp(SignedCanonicalDictionary(5), f, iters(100));
    CHECK(s.iter == 1);
    CHECK((s.x - y).norm() <= 1e-15);
    CHECK(s.stop_reason == "dual_gap");
}

TEST_CASE("GMP decreases f and keeps an exact decomposition") {
    std::mt19937_64 rng(52);
    const LeastSquares f(random_matrix(50, 100, rng), random_vector(50, rng));
    const SignedCanonicalDictionary dict(100);
    RecordingSink sink(1);
    run_gmp(dict, f, iters(20), &sink);
    const auto& rows = sink.rows();
    REQUIRE(rows.size() == 21);
    for (std::size_t t = 1; t < rows.size(); ++t)
        CHECK(rows[t].f_value < rows[t - 1].f_value);
    for (std::size_t t = 0; t < rows.size(); ++t) {
        const double replay = f.value(sink.snapshots()[t].reconstruct(dict));
        CHECK(std::abs(replay - rows[t].f_value) <= 1e-10 * std::max(1.0, rows[t].f_value));
    }
}

TEST_CASE("OMP on the identity keeps the residual orthogonal to active atoms") {
    std::mt19937_64 rng(53);
    const Vector y = random_vector(30, rng);
    const LeastSquares f(Matrix::Identity(30, 30), y, 0.5);
    CapturingSink sink;
    run_omp(SignedCanonicalDictionary(30), f, iters(15), &sink);
    for (const SolverState& st : sink.states)
        for (const AtomRef& a : st.active.atoms())
            if (st.iter > 0)
                CHECK(std::abs((y - st.x)[static_cast<Eigen::Index>(a.index)]) <= 1e-12);
}

TEST_CASE("OMP recovers a 3-sparse signal in three iterations") {
    Vector y = Vector::Zero(20);
    y[3] = 2.0;
    y[7] = -1.0;
    y[11] = 0.5;
    const LeastSquares f(Matrix::Identity(20, 20), y, 0.5);
    SolverConfig c = iters(3);
    const SolverState s = run_omp(SignedCanonicalDictionary(20), f, c);
    CHECK(s.iter == 3);
    CHECK(s.f <= 1e-20);
}

TEST_CASE("OMP optimality certificate on random least squares") {
    std::mt19937_64 rng(54);
    const LeastSquares f(random_matrix(40, 60, rng), random_vector(40, rng));
    const SignedCanonicalDictionary dict(60);
    CapturingSink sink;
    run_omp(dict, f, iters(25), &sink);
    for (std::size_t t = 1; t < sink.states.size(); ++t) {
        const SolverState& st = sink.states[t];
        const Vector g = f.gradient(st.x);
        for (const AtomRef& a : st.active.atoms())
            CHECK(std::abs(dict.inner_product(a, g)) <= 1e-6 * g.norm());
    }
}

TEST_CASE("OMP on a non-quadratic objective runs the inner loop") {
    std::mt19937_64 rng(55);
    const HuberRegression f(random_matrix(30, 20, rng), 5.0 * random_vector(30, rng), 1.0);
    const SignedCanonicalDictionary dict(20);
    SolverConfig c = iters(8);
    c.inner_max = 2000;
    const SolverState s = run_omp(dict, f, c);
    const Vector g = f.gradient(s.x);
    std::vector<Vector> basis;
    for (const AtomRef& a : s.active.atoms())
        basis.push_back(dict.atom_dense(a));
    CHECK(project_onto_span(g, basis).norm() <= 1e-6 * (1.0 + g.norm()));
    CHECK(s.decomposition_error(dict) <= 1e-8 * (1.0 + s.x.norm()));
    CHECK(s.inner_warnings == 0);

    SolverConfig capped = c;
    capped.inner_max = 1;
    CHECK(run_omp(dict, f, capped).inner_warnings > 0);
}

TEST_CASE("BMP stops immediately at a stationary start") {
    const LeastSquares f(Matrix::Identity(4, 4), Vector::Zero(4));
    const SolverState s = run_bmp(SignedCanonicalDictionary(4), f, iters(100));
    CHECK(s.phi == 0.0);
    CHECK(s.iter == 0);
    CHECK(s.counters.total() == 0);
    CHECK(s.stop_reason == "dual_gap");
}

TEST_CASE("BMP invariants on a random least-squares run") {
    std::mt19937_64 rng(56);
    const SparseRegression data = gen_sparse_regression(60, 120, 10, 0.01, 7);
    const LeastSquares f(data.a, data.y);
    const SignedCanonicalDictionary dict(120);
    CapturingSink sink;
    const SolverState s = run_bmp(dict, f, iters(400), &sink);

    const auto& st = sink.states;
    for (std::size_t t = 1; t < st.size(); ++t) {
        CHECK(st[t].f <= st[t - 1].f);
        CHECK(st[t - 1].phi <= st[t].phi);
        CHECK(st[t].phi <= 0.0);
        CHECK(sink.rows[t].iter == sink.rows[t - 1].iter + 1);
        CHECK(sink.rows[t].wall_seconds >= sink.rows[t - 1].wall_seconds);
        CHECK(st[t].decomposition_error(dict) <= 1e-8 * (1.0 + st[t].x.norm()));
        CHECK(sink.rows[t].n_atoms >= sink.rows[t - 1].n_atoms);
        if (sink.rows[t].step_kind == StepKind::dual) {
            CHECK(std::memcmp(st[t].x.data(), st[t - 1].x.data(), sizeof(double) * st[t].x.size()) == 0);
            CHECK(st[t].phi == st[t - 1].phi / 2.0);
            // The old φ is certified by a fresh full scan.
            CHECK(lmo(dict, f.gradient(st[t].x)).value >= 2.0 * st[t].phi);
        }
    }
    CHECK(s.counters.total() == s.iter);
    CHECK(s.active.size() <= s.counters.full + 1);

    // φ moves only on dual steps, each dividing by exactly τ.
    const double phi0 = sink.states.front().phi;
    CHECK(phi0 / s.phi == std::ldexp(1.0, static_cast<int>(s.counters.dual)));

    // Laziness: every negative answer is a dual step.
    CHECK(s.oracle.negatives == s.counters.dual);
    CHECK(s.oracle.full_scans == s.oracle.calls - s.oracle.cache_hits);
}

TEST_CASE("BMP full scans are exactly the oracle misses") {
    const SparseRegression data = gen_sparse_regression(40, 80, 8, 0.0, 3);
    const LeastSquares f(data.a, data.y);
    const CountingDictionary dict(80);
    const SolverState s = run_bmp(dict, f, iters(300));
    const std::size_t positives = s.oracle.calls - s.oracle.negatives;
    const std::size_t cache_miss_positives = positives - s.oracle.cache_hits;
    // One scan initializes φ; the rest come from the oracle.
    CHECK(dict.scans == 1 + s.oracle.negatives + cache_miss_positives);
    CHECK(s.oracle.negatives == s.counters.dual);
}

TEST_CASE("BMP with huge eta tracks OMP at equal atom counts") {
    const SparseRegression data = gen_sparse_regression(30, 20, 5, 0.0, 9);
    const LeastSquares f(data.a, data.y);
    const SignedCanonicalDictionary dict(20);
    SolverConfig c = iters(5000);
    c.eta = 1e12;
    c.stop_dual_gap = 1e-14;
    RecordingSink bmp_sink, omp_sink;
    run_bmp(dict, f, c, &bmp_sink);
    SolverConfig oc = iters(20);
    run_omp(dict, f, oc, &omp_sink);

    // Value at the last BMP row holding k atoms vs OMP's first row holding k.
    std::map<std::size_t, double> bmp_at, omp_at;
    for (const TraceRow& r : bmp_sink.rows())
        bmp_at[r.n_atoms] = r.f_value;
    for (const TraceRow& r : omp_sink.rows())
        omp_at.try_emplace(r.n_atoms, r.f_value);
    std::size_t compared = 0;
    for (const auto& [k, fb] : bmp_at) {
        auto it = omp_at.find(k);
        if (it == omp_at.end() || k < 2)
            continue;
        ++compared;
        CAPTURE(k);
        CHECK(std::abs(fb - it->second) <= 1e-8);
    }
    CHECK(compared >= 3);
}

TEST_CASE("solvers are deterministic") {
    const SparseRegression data = gen_sparse_regression(40, 70, 6, 0.05, 4);
    const LeastSquares f(data.a, data.y);
    const SignedCanonicalDictionary dict(70);
    for (const char* name : {"gmp", "omp", "bmp"}) {
        RecordingSink a, b;
        run_solver(name, dict, f, iters(60), &a);
        run_solver(name, dict, f, iters(60), &b);
        REQUIRE(a.rows().size() == b.rows().size());
        for (std::size_t i = 0; i < a.rows().size(); ++i) {
            CHECK(a.rows()[i].f_value == b.rows()[i].f_value);
            CHECK(a.rows()[i].dual_gap == b.rows()[i].dual_gap);
            CHECK(a.rows()[i].step_kind == b.rows()[i].step_kind);
            CHECK(a.rows()[i].n_atoms == b.rows()[i].n_atoms);
        }
    }
}

TEST_CASE("per-step progress assertions on a quadratic run") {
    const SparseRegression data = gen_sparse_regression(80, 60, 10, 0.05, 5);
    const LeastSquares f(data.a, data.y);
    SolverConfig c = iters(500);
    c.verify_steps = true;
    c.stop_dual_gap = 0.0;
    const SolverState s = run_bmp(SignedCanonicalDictionary(60), f, c);
    CHECK(s.audit.checked == s.iter);
    CHECK(s.audit.failed == 0);
    for (const std::string& m : s.audit.failures)
        MESSAGE(m);
}

TEST_CASE("step assertions flag violations") {
    SolverState before;
    before.x = Vector::Ones(3);
    before.phi = -1.0;
    before.f = 1.0;
    SolverState after = before;
    after.phi = -0.5;
    StepRecord dual{StepKind::dual, std::nullopt, 0.0, 1.0, -0.5};
    SolverConfig c;
    CHECK(bmp_step_assertions(before, after, dual, 1.0, c, 2.0).ok);
    after.x[0] = std::nextafter(1.0, 2.0);
    CHECK_FALSE(bmp_step_assertions(before, after, dual, 1.0, c, 2.0).ok);
    after.x = before.x;
    after.phi = -0.4;
    CHECK_FALSE(bmp_step_assertions(before, after, dual, 1.0, c, 2.0).ok);

    // Full step bound is φ²/(2κ²L) with D = 2: here 1/8.
    SolverState full_after = before;
    full_after.f = 1.0 - 0.2;
    StepRecord full{StepKind::full, AtomRef{0, 1}, 0.1, 0.8, -1.0};
    const StepCheck ok = bmp_step_assertions(before, full_after, full, 1.0, c, 2.0);
    CHECK(ok.ok);
    CHECK(ok.bound == doctest::Approx(0.125));
    full_after.f = 1.0 - 0.1;
    CHECK_FALSE(bmp_step_assertions(before, full_after, full, 1.0, c, 2.0).ok);
}

TEST_CASE("correction folds a mirrored pair") {
    const SignedCanonicalDictionary dict(3);
    SolverState s;
    s.x = Vector::Zero(3);
    s.active.add({0, 1}, 0);
    s.active.add({0, -1}, 1);
    s.active.add({2, 1}, 2);
    s.coeffs = {1.5, 0.25, -0.75};
    s.x = s.reconstruct(dict);
    const Vector x_before = s.x;
    const CorrectionReport r = correct_active_set(s, dict, CorrectionMode::basis_reduce, 0.0);
    CHECK(r.dependent == 1);
    CHECK(s.active.size() == 2);
    CHECK((s.x - x_before).norm() <= 1e-12);
    CHECK(s.coefficient({0, 1}) == doctest::Approx(1.25));
    CHECK(s.decomposition_error(dict) <= 1e-12);
}

TEST_CASE("correction is a no-op on independent heavy atoms") {
    const SignedCanonicalDictionary dict(4);
    SolverState s;
    s.x = Vector::Zero(4);
    s.active.add({1, 1}, 0);
    s.active.add({3, -1}, 0);
    s.coeffs = {2.0, 1.0};
    s.x = s.reconstruct(dict);
    const SolverState copy = s;
    const CorrectionReport r = correct_active_set(s, dict, CorrectionMode::basis_reduce, 0.5);
    CHECK(r.dropped == 0);
    CHECK(r.dependent == 0);
    CHECK(s.coeffs == copy.coeffs);
    CHECK(s.x == copy.x);
    CHECK(correct_active_set(s, dict, CorrectionMode::off, 10.0).dropped == 0);
}

TEST_CASE("correction on a random redundant set records its span residual") {
    std::mt19937_64 rng(57);
    const Matrix base = random_matrix(6, 4, rng);
    Matrix cols(6, 8);
    cols.leftCols(4) = base;
    cols.rightCols(4) = base * random_matrix(4, 4, rng);  // dependent on the first four
    const MatrixDictionary dict(cols);
    SolverState s;
    s.x = Vector::Zero(6);
    std::uniform_real_distribution<double> mag(0.0, 1.0);
    for (std::size_t i = 0; i < 8; ++i) {
        s.active.add({i, 1}, i);
        s.coeffs.push_back(mag(rng));
    }
    s.x = s.reconstruct(dict);
    const Vector x_before = s.x;
    const double delta = 0.2;
    const CorrectionReport r = correct_active_set(s, dict, CorrectionMode::basis_reduce, delta);
    CHECK(s.active.size() <= 4);
    CHECK(r.span_residual == doctest::Approx((x_before - s.x).norm()));
    // Dropped atoms have unit norm, so the lost mass bounds the projection error.
    CHECK(r.span_residual <= r.dropped_mass + 1e-10);
    CHECK(s.decomposition_error(dict) <= 1e-8 * (1.0 + s.x.norm()));
}

TEST_CASE("BMP with correction keeps a consistent decomposition") {
    const SparseRegression data = gen_sparse_regression(50, 80, 8, 0.01, 6);
    const LeastSquares f(data.a, data.y);
    const SignedCanonicalDictionary dict(80);
    SolverConfig c = iters(300);
    c.correction = CorrectionMode::basis_reduce;
    c.drop_threshold = 1e-6;
    CapturingSink sink;
    const SolverState s = run_bmp(dict, f, c, &sink);
    CHECK(s.decomposition_error(dict) <= 1e-8 * (1.0 + s.x.norm()));
    for (std::size_t t = 1; t < sink.states.size(); ++t)
        CHECK(sink.states[t].f <= sink.states[t - 1].f + 1e-9 * sink.states[t - 1].f);
}

TEST_CASE("PGD with a huge radius is gradient descent") {
    const SparseRegression data = gen_sparse_regression(30, 20, 5, 0.1, 8);
    const LeastSquares f(data.a, data.y);
    RecordingSink sink;
    run_pgd(f, 1e9, iters(50), &sink);
    for (std::size_t t = 1; t < sink.rows().size(); ++t)
        CHECK(sink.rows()[t].f_value < sink.rows()[t - 1].f_value);
}

TEST_CASE("PGD with a tiny radius lands on the sphere") {
    const SparseRegression data = gen_sparse_regression(30, 20, 5, 0.1, 8);
    const LeastSquares f(data.a, data.y);
    const SolverState s = run_pgd(f, 1e-3, iters(1));
    CHECK(s.x.lpNorm<1>() == doctest::Approx(1e-3).epsilon(1e-12));
    std::size_t nnz = 0;
    for (double v : s.x)
        nnz += v != 0.0;
    CHECK(s.active.size() == nnz);
    CHECK_THROWS_AS(run_pgd(f, 0.0, iters(1)), std::invalid_argument);
}

TEST_CASE("run_solver dispatch errors") {
    const LeastSquares ls(Matrix::Identity(3, 3), Vector::Ones(3));
    const HuberRegression hub(Matrix::Identity(3, 3), Vector::Ones(3), 1.0);
    const SignedCanonicalDictionary dict(3);
    CHECK_THROWS_AS(run_solver("nope", dict, ls, iters(1)), std::invalid_argument);
    CHECK_THROWS_AS(run_solver("pgd", dict, ls, iters(1)), std::invalid_argument);
    CHECK_THROWS_AS(run_solver("pgd", dict, hub, iters(1)), std::invalid_argument);
    SolverConfig c = iters(1);
    c.pgd_radius = 1.0;
    CHECK_NOTHROW(run_solver("pgd", dict, ls, c));
    CHECK_THROWS_AS(run_solver("bmp", SignedCanonicalDictionary(4), ls, iters(1)), std::invalid_argument);
}

TEST_CASE("config validation") {
    SolverConfig c;
    CHECK_NOTHROW(c.validate());
    c.eta = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.kappa = 0.9;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.tau = 1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("stop reasons") {
    const SparseRegression data = gen_sparse_regression(30, 40, 5, 0.1, 10);
    const LeastSquares f(data.a, data.y);
    const SignedCanonicalDictionary dict(40);
    CHECK(run_bmp(dict, f, iters(3)).stop_reason == "max_iters");
    SolverConfig c = iters(100000);
    c.stop_value = 0.5 * f.value(Vector::Zero(40));
    const SolverState s = run_bmp(dict, f, c);
    CHECK(s.stop_reason == "stop_value");
    CHECK(s.f <= *c.stop_value);
    SolverConfig t = iters(100000000);
    t.time_budget = 1e-9;
    CHECK(run_gmp(dict, f, t).stop_reason == "time_budget");
}

TEST_CASE("unit start places atom zero with coefficient one") {
    const LeastSquares f(Matrix::Identity(3, 3), Vector::Ones(3));
    SolverConfig c = iters(0);
    c.unit_start = true;
    const SolverState s = run_bmp(SignedCanonicalDictionary(3), f, c);
    CHECK(s.x == Vector::Unit(3, 0));
    CHECK(s.coeffs == std::vector<double>{1.0});
}
