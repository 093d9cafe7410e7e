#include "blendmp/bench.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

namespace blendmp {

namespace {

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Matrix a(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    // Column-major fill so the stream order is independent of Eigen internals.
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            a(i, j) = normal(rng);
    return a;
}

Vector gaussian_vector(std::size_t size, double sigma, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Vector v(static_cast<Eigen::Index>(size));
    for (auto& e : v)
        e = sigma * normal(rng);
    return v;
}

Vector sparse_source(std::size_t n, std::size_t s, std::mt19937_64& rng) {
    if (s > n)
        throw std::invalid_argument("sparsity s exceeds dimension n");
    std::vector<std::size_t> positions(n);
    std::iota(positions.begin(), positions.end(), 0);
    // Partial Fisher-Yates: the first s entries are a uniform s-subset.
    for (std::size_t i = 0; i < s; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(positions[i], positions[pick(rng)]);
    }
    std::normal_distribution<double> normal;
    Vector x = Vector::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < s; ++i)
        x[static_cast<Eigen::Index>(positions[i])] = normal(rng);
    return x;
}

double mean_squared_error(const Matrix& a, const Vector& y, const Vector& x) {
    return (y - multiply_sparse_aware(a, x)).squaredNorm() / static_cast<double>(y.size());
}

}  // namespace

SparseRegression gen_sparse_regression(std::size_t m, std::size_t n, std::size_t s, double sigma,
                                       std::uint64_t seed) {
    if (m == 0 || n == 0)
        throw std::invalid_argument("gen_sparse_regression: m and n must be positive");
    if (s > n)
        throw std::invalid_argument("gen_sparse_regression: s exceeds n");
    if (!(sigma >= 0.0))
        throw std::invalid_argument("gen_sparse_regression: sigma must be nonnegative");
    std::mt19937_64 rng(seed);
    SparseRegression out;
    out.x_star = sparse_source(n, s, rng);
    out.a = gaussian_matrix(m, n, rng);
    out.y = out.a * out.x_star + gaussian_vector(m, sigma, rng);
    return out;
}

SplitData gen_split(std::size_t m_train, std::size_t m_val, std::size_t m_test, std::size_t n, std::size_t s,
                    double sigma, std::uint64_t seed) {
    if (m_train == 0 || m_val == 0 || m_test == 0 || n == 0)
        throw std::invalid_argument("gen_split: sizes must be positive");
    std::mt19937_64 rng(seed);
    SplitData out;
    Vector x_star = sparse_source(n, s, rng);
    auto pool = [&](std::size_t m, Matrix& a, Vector& y) {
        a = gaussian_matrix(m, n, rng);
        y = a * x_star + gaussian_vector(m, sigma, rng);
    };
    pool(m_train, out.a_train, out.y_train);
    pool(m_val, out.a_val, out.y_val);
    pool(m_test, out.a_test, out.y_test);
    out.x_star = std::move(x_star);
    return out;
}

double nmse(const Vector& x, const Vector& x_star) {
    if (x.size() != x_star.size())
        throw std::invalid_argument("nmse: dimension mismatch");
    const double denom = x_star.squaredNorm();
    if (denom == 0.0)
        throw std::invalid_argument("nmse: ground truth is zero");
    return (x - x_star).squaredNorm() / denom;
}

Vector Snapshot::reconstruct(const Dictionary& dict) const {
    Vector out = Vector::Zero(static_cast<Eigen::Index>(dict.dim()));
    for (std::size_t i = 0; i < atoms.size(); ++i)
        dict.add_atom(atoms[i].index, atoms[i].sign * coeffs[i], out);
    return out;
}

EarlyStopResult early_stopping_eval(const std::vector<Snapshot>& snapshots, const SplitData& split,
                                    const Dictionary& dict) {
    if (snapshots.empty())
        throw std::invalid_argument("early_stopping_eval: no snapshots");
    EarlyStopResult best;
    for (std::size_t i = 0; i < snapshots.size(); ++i) {
        const Vector x = snapshots[i].reconstruct(dict);
        const double val = mean_squared_error(split.a_val, split.y_val, x);
        if (i == 0 || val < best.val_error) {
            best.best_index = i;
            best.best_iter = snapshots[i].iter;
            best.val_error = val;
        }
    }
    best.test_error =
        mean_squared_error(split.a_test, split.y_test, snapshots[best.best_index].reconstruct(dict));
    return best;
}

Snapshot snapshot_of(const SolverState& state) {
    return {state.iter, state.active.atoms(), state.coeffs};
}

void RecordingSink::record(const TraceRow& row, const SolverState& state) {
    TraceRow r = row;
    if (x_star_ && x_star_->squaredNorm() > 0.0)
        r.nmse = nmse(state.x, *x_star_);
    rows_.push_back(r);
    if (every_ > 0 && state.iter % every_ == 0)
        snapshots_.push_back(snapshot_of(state));
}

void RecordingSink::finish(const SolverState& state) {
    if (snapshots_.empty() || snapshots_.back().iter != state.iter)
        snapshots_.push_back(snapshot_of(state));
}

}  // namespace blendmp
