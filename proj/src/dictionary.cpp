#include "blendmp/dictionary.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace blendmp {

namespace {

void check_dim(const Dictionary& dict, const Vector& g) {
    if (static_cast<std::size_t>(g.size()) != dict.dim())
        throw std::invalid_argument("dictionary: dimension mismatch");
}

// Candidate (index, ip) beats the incumbent when |ip| is strictly larger;
// callers visit indices in ascending order so the lowest index keeps ties.
AtomValue signed_choice(std::size_t index, double ip) {
    // ip == 0 resolves to sign +1.
    const int sign = ip > 0.0 ? -1 : 1;
    return {{index, sign}, sign * ip};
}

}  // namespace

Vector Dictionary::atom_dense(const AtomRef& a) const {
    Vector v = atom_dense(a.index);
    if (a.sign < 0)
        v = -v;
    return v;
}

double Dictionary::inner_product(const AtomRef& a, const Vector& g) const {
    return a.sign * inner_product(a.index, g);
}

SignedCanonicalDictionary::SignedCanonicalDictionary(std::size_t dim) : dim_(dim) {
    if (dim == 0)
        throw std::invalid_argument("SignedCanonicalDictionary: dimension must be positive");
}

Vector SignedCanonicalDictionary::atom_dense(std::size_t index) const {
    if (index >= dim_)
        throw std::out_of_range("SignedCanonicalDictionary: atom index");
    return Vector::Unit(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(index));
}

Vector SignedCanonicalDictionary::inner_products(const Vector& g) const {
    check_dim(*this, g);
    return g;
}

double SignedCanonicalDictionary::inner_product(std::size_t index, const Vector& g) const {
    return g[static_cast<Eigen::Index>(index)];
}

void SignedCanonicalDictionary::add_atom(std::size_t index, double scale, Vector& x) const {
    x[static_cast<Eigen::Index>(index)] += scale;
}

MatrixDictionary::MatrixDictionary(Matrix columns, Normalize normalize) : columns_(std::move(columns)) {
    if (columns_.cols() == 0 || columns_.rows() == 0)
        throw std::invalid_argument("MatrixDictionary: empty dictionary");
    require_finite(columns_, "MatrixDictionary");
    for (Eigen::Index j = 0; j < columns_.cols(); ++j) {
        const double norm = columns_.col(j).norm();
        if (norm == 0.0)
            throw std::invalid_argument("MatrixDictionary: zero atom " + std::to_string(j));
        if (normalize == Normalize::yes && std::abs(norm - 1.0) > 1e-8) {
            columns_.col(j) /= norm;
            ++renormalized_;
        }
    }
    if (renormalized_ > 0)
        std::clog << "warning: normalized " << renormalized_ << " dictionary atoms to unit norm\n";
}

Vector MatrixDictionary::atom_dense(std::size_t index) const {
    if (index >= num_atoms())
        throw std::out_of_range("MatrixDictionary: atom index");
    return columns_.col(static_cast<Eigen::Index>(index));
}

Vector MatrixDictionary::inner_products(const Vector& g) const {
    check_dim(*this, g);
    return columns_.transpose() * g;
}

double MatrixDictionary::inner_product(std::size_t index, const Vector& g) const {
    return columns_.col(static_cast<Eigen::Index>(index)).dot(g);
}

void MatrixDictionary::add_atom(std::size_t index, double scale, Vector& x) const {
    x.noalias() += scale * columns_.col(static_cast<Eigen::Index>(index));
}

double MatrixDictionary::atom_norm(std::size_t index) const {
    return columns_.col(static_cast<Eigen::Index>(index)).norm();
}

AtomValue lmo(const Dictionary& dict, const Vector& g) {
    check_dim(dict, g);
    const Vector ips = dict.inner_products(g);
    std::size_t best = 0;
    double best_abs = std::abs(ips[0]);
    for (Eigen::Index i = 1; i < ips.size(); ++i) {
        const double a = std::abs(ips[i]);
        if (a > best_abs) {
            best_abs = a;
            best = static_cast<std::size_t>(i);
        }
    }
    return signed_choice(best, ips[static_cast<Eigen::Index>(best)]);
}

AtomValue lmo_over_active(const Dictionary& dict, const Vector& g, std::span<const AtomRef> active) {
    if (active.empty())
        throw std::invalid_argument("lmo_over_active: empty active set");
    check_dim(dict, g);
    bool have = false;
    std::size_t best = 0;
    double best_ip = 0.0;
    for (const AtomRef& a : active) {
        const double ip = dict.inner_product(a.index, g);
        const double mag = std::abs(ip);
        const double best_mag = std::abs(best_ip);
        if (!have || mag > best_mag || (mag == best_mag && a.index < best)) {
            have = true;
            best = a.index;
            best_ip = ip;
        }
    }
    return signed_choice(best, best_ip);
}

double diameter_symmetrized(const Dictionary& dict) {
    double max_norm = 0.0;
    for (std::size_t i = 0; i < dict.num_atoms(); ++i)
        max_norm = std::max(max_norm, dict.atom_norm(i));
    return 2.0 * max_norm;
}

}  // namespace blendmp
