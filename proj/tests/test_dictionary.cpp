#include "blendmp/dictionary.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace blendmp;
using testutil::random_matrix;
using testutil::random_vector;

namespace {

// Exhaustive scan of every signed candidate in order (index, then +1 before −1).
AtomValue enumerate_min(const Matrix& columns, const Vector& g, const std::vector<std::size_t>& indices) {
    AtomValue best{{indices.front(), 1}, std::numeric_limits<double>::infinity()};
    for (std::size_t i : indices) {
        const double ip = columns.col(static_cast<Eigen::Index>(i)).dot(g);
        for (int sign : {1, -1}) {
            const double v = sign * ip;
            const AtomRef cand{i, sign};
            if (v < best.value ||
                (v == best.value && (cand.index < best.atom.index ||
                                     (cand.index == best.atom.index && cand.sign > best.atom.sign))))
                best = {cand, v};
        }
    }
    return best;
}

Matrix normalized(Matrix m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        m.col(j).normalize();
    return m;
}

}  // namespace

TEST_CASE("lmo on the canonical dictionary") {
    const SignedCanonicalDictionary dict(3);
    Vector g(3);
    g << 3, -1, 2;
    const AtomValue r = lmo(dict, g);
    CHECK(r.atom.index == 0);
    CHECK(r.atom.sign == -1);
    CHECK(r.value == -3.0);

    const AtomValue z = lmo(dict, Vector::Zero(3));
    CHECK(z.atom.index == 0);
    CHECK(z.atom.sign == 1);
    CHECK(z.value == 0.0);
}

TEST_CASE("lmo ties go to the lowest index") {
    const SignedCanonicalDictionary dict(4);
    Vector g(4);
    g << 1, -2, 2, -2;
    const AtomValue r = lmo(dict, g);
    CHECK(r.atom.index == 1);
    CHECK(r.atom.sign == 1);
}

TEST_CASE("lmo matches exhaustive enumeration on a random matrix dictionary") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix cols = normalized(random_matrix(12, 50, rng));
        const MatrixDictionary dict(cols);
        const Vector g = random_vector(12, rng);
        std::vector<std::size_t> all(50);
        std::iota(all.begin(), all.end(), 0);
        const AtomValue expect = enumerate_min(cols, g, all);
        const AtomValue got = lmo(dict, g);
        CHECK(got.atom == expect.atom);
        CHECK(got.value == doctest::Approx(expect.value).epsilon(1e-12));
        CHECK(got.value <= 0.0);

        // Negating g flips the returned atom.
        const AtomValue neg = lmo(dict, -g);
        CHECK(neg.atom == got.atom.flipped());
        CHECK(neg.value == doctest::Approx(got.value).epsilon(1e-12));
    }
}

TEST_CASE("canonical lmo equals the argmax-abs shortcut") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const Vector g = random_vector(30, rng);
        Eigen::Index i_star;
        g.cwiseAbs().maxCoeff(&i_star);
        const AtomValue r = lmo(SignedCanonicalDictionary(30), g);
        CHECK(r.atom.index == static_cast<std::size_t>(i_star));
        CHECK(r.atom.sign == (g[i_star] > 0 ? -1 : 1));
    }
}

TEST_CASE("lmo_over_active") {
    const SignedCanonicalDictionary dict(3);
    Vector g(3);
    g << 5, 1, -7;
    const std::vector<AtomRef> active{{0, 1}};
    const AtomValue r = lmo_over_active(dict, g, active);
    CHECK(r.atom == AtomRef{0, -1});
    CHECK(r.value == -5.0);
    CHECK_THROWS_AS(lmo_over_active(dict, g, std::vector<AtomRef>{}), std::invalid_argument);

    const std::vector<AtomRef> full{{0, 1}, {1, 1}, {2, 1}};
    const AtomValue a = lmo_over_active(dict, g, full);
    const AtomValue b = lmo(dict, g);
    CHECK(a.atom == b.atom);
    CHECK(a.value == b.value);
}

TEST_CASE("lmo_over_active matches enumeration on random subsets") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix cols = normalized(random_matrix(10, 30, rng));
        const MatrixDictionary dict(cols);
        std::vector<std::size_t> idx(30);
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(7);
        std::vector<AtomRef> active;
        for (std::size_t i : idx)
            active.push_back({i, (i % 2) ? 1 : -1});
        std::sort(idx.begin(), idx.end());
        const Vector g = random_vector(10, rng);
        const AtomValue expect = enumerate_min(cols, g, idx);
        const AtomValue got = lmo_over_active(dict, g, active);
        CHECK(got.atom == expect.atom);
        CHECK(got.value == doctest::Approx(expect.value).epsilon(1e-12));
    }
}

TEST_CASE("dimension mismatch throws") {
    CHECK_THROWS_AS(lmo(SignedCanonicalDictionary(3), Vector::Ones(4)), std::invalid_argument);
    CHECK_THROWS_AS(lmo(MatrixDictionary(Matrix::Identity(3, 3)), Vector::Ones(2)), std::invalid_argument);
}

TEST_CASE("matrix dictionary normalizes on load") {
    Matrix m(2, 2);
    m << 3, 0, 4, 2;
    const MatrixDictionary dict(m);
    CHECK(dict.renormalized() == 2);
    for (std::size_t i = 0; i < dict.num_atoms(); ++i)
        CHECK(dict.atom_norm(i) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dict.atom_dense(0)[0] == doctest::Approx(0.6));
    CHECK_THROWS_AS(MatrixDictionary(Matrix::Zero(2, 1)), std::invalid_argument);
}

TEST_CASE("diameter of the symmetrized dictionary") {
    CHECK(diameter_symmetrized(SignedCanonicalDictionary(100)) == 2.0);
    std::mt19937_64 rng(14);
    const MatrixDictionary unit(random_matrix(5, 8, rng));
    CHECK(diameter_symmetrized(unit) == doctest::Approx(2.0));
    const Matrix scaled = 3.0 * normalized(random_matrix(5, 8, rng));
    CHECK(diameter_symmetrized(MatrixDictionary(scaled, Normalize::no)) == doctest::Approx(6.0));
}

TEST_CASE("inner products and add_atom agree with dense atoms") {
    std::mt19937_64 rng(15);
    const MatrixDictionary mat(random_matrix(6, 9, rng));
    const SignedCanonicalDictionary can(6);
    const Vector g = random_vector(6, rng);
    for (const Dictionary* d : {static_cast<const Dictionary*>(&mat), static_cast<const Dictionary*>(&can)}) {
        const Vector ips = d->inner_products(g);
        for (std::size_t i = 0; i < d->num_atoms(); ++i) {
            CHECK(ips[static_cast<Eigen::Index>(i)] == doctest::Approx(d->atom_dense(i).dot(g)));
            CHECK(d->inner_product(AtomRef{i, -1}, g) == doctest::Approx(-d->atom_dense(i).dot(g)));
        }
        Vector x = Vector::Zero(6);
        d->add_atom(2, 1.5, x);
        CHECK((x - 1.5 * d->atom_dense(2)).norm() <= 1e-15);
    }
}

TEST_CASE("AtomRef identity") {
    const AtomRef a{3, 1};
    CHECK(a.flipped() == AtomRef{3, -1});
    CHECK(a.flipped().flipped() == a);
    CHECK(std::hash<AtomRef>{}(a) != std::hash<AtomRef>{}(a.flipped()));
}
