#pragma once

#include "blendmp/linalg.hpp"

#include <compare>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace blendmp {

/// An element of the symmetrized dictionary D ∪ −D.
struct AtomRef {
    std::size_t index = 0;
    int sign = 1;  // +1 or -1

    [[nodiscard]] AtomRef flipped() const { return {index, -sign}; }
    friend auto operator<=>(const AtomRef&, const AtomRef&) = default;
};

struct AtomValue {
    AtomRef atom;
    double value = 0.0;  ///< ⟨g, atom⟩
};

/// A finite family of atoms in ℝⁿ.
/// Convergence guarantees assume the atoms span ℝⁿ; this is not checked.
class Dictionary {
public:
    virtual ~Dictionary() = default;

    [[nodiscard]] virtual std::size_t num_atoms() const = 0;
    [[nodiscard]] virtual std::size_t dim() const = 0;
    [[nodiscard]] virtual Vector atom_dense(std::size_t index) const = 0;
    /// ⟨g, dᵢ⟩ for every atom.
    [[nodiscard]] virtual Vector inner_products(const Vector& g) const = 0;
    [[nodiscard]] virtual double inner_product(std::size_t index, const Vector& g) const = 0;
    /// x += scale · dᵢ
    virtual void add_atom(std::size_t index, double scale, Vector& x) const = 0;
    [[nodiscard]] virtual double atom_norm(std::size_t index) const = 0;

    [[nodiscard]] Vector atom_dense(const AtomRef& a) const;
    [[nodiscard]] double inner_product(const AtomRef& a, const Vector& g) const;
};

/// The canonical basis e₁..eₙ; atoms are never materialized for scans.
class SignedCanonicalDictionary final : public Dictionary {
public:
    explicit SignedCanonicalDictionary(std::size_t dim);

    std::size_t num_atoms() const override { return dim_; }
    std::size_t dim() const override { return dim_; }
    using Dictionary::atom_dense;
    using Dictionary::inner_product;
    Vector atom_dense(std::size_t index) const override;
    Vector inner_products(const Vector& g) const override;
    double inner_product(std::size_t index, const Vector& g) const override;
    void add_atom(std::size_t index, double scale, Vector& x) const override;
    double atom_norm(std::size_t) const override { return 1.0; }

private:
    std::size_t dim_;
};

enum class Normalize { yes, no };

/// Atoms stored as the columns of an n×K matrix.
class MatrixDictionary final : public Dictionary {
public:
    /// Columns are rescaled to unit norm unless `normalize` is Normalize::no
    /// (testing only). Zero columns are rejected.
    explicit MatrixDictionary(Matrix columns, Normalize normalize = Normalize::yes);

    std::size_t num_atoms() const override { return static_cast<std::size_t>(columns_.cols()); }
    std::size_t dim() const override { return static_cast<std::size_t>(columns_.rows()); }
    using Dictionary::atom_dense;
    using Dictionary::inner_product;
    Vector atom_dense(std::size_t index) const override;
    Vector inner_products(const Vector& g) const override;
    double inner_product(std::size_t index, const Vector& g) const override;
    void add_atom(std::size_t index, double scale, Vector& x) const override;
    double atom_norm(std::size_t index) const override;

    [[nodiscard]] const Matrix& columns() const { return columns_; }
    /// Number of columns that were rescaled on construction.
    [[nodiscard]] std::size_t renormalized() const { return renormalized_; }

private:
    Matrix columns_;
    std::size_t renormalized_ = 0;
};

/// argmin over D′ of ⟨g, v⟩. Ties go to the lowest index, then sign +1.
AtomValue lmo(const Dictionary& dict, const Vector& g);

/// argmin of ⟨g, v⟩ over the symmetrization of `active`.
AtomValue lmo_over_active(const Dictionary& dict, const Vector& g, std::span<const AtomRef> active);

/// 2·maxᵢ‖dᵢ‖.
double diameter_symmetrized(const Dictionary& dict);

}  // namespace blendmp

template <>
struct std::hash<blendmp::AtomRef> {
    std::size_t operator()(const blendmp::AtomRef& a) const noexcept {
        return a.index * 2 + (a.sign > 0 ? 1 : 0);
    }
};
