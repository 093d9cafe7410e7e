#pragma once

#include "blendmp/dictionary.hpp"

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

namespace blendmp {

/// Atoms returned by earlier positive calls, tested before any full scan.
class WeakSepCache {
public:
    explicit WeakSepCache(std::optional<std::size_t> capacity = std::nullopt);

    /// Moves an existing entry to the most-recent slot, or appends it and
    /// evicts the oldest entry when over capacity.
    void insert(const AtomRef& atom);
    void clear() { atoms_.clear(); }

    [[nodiscard]] std::size_t size() const { return atoms_.size(); }
    [[nodiscard]] bool contains(const AtomRef& atom) const;
    /// Oldest first; scans walk this in reverse.
    [[nodiscard]] const std::vector<AtomRef>& atoms() const { return atoms_; }
    /// Most recent first.
    [[nodiscard]] std::vector<AtomRef> scan_order() const;

private:
    std::vector<AtomRef> atoms_;
    std::optional<std::size_t> capacity_;
};

inline void cache_insert(WeakSepCache& cache, const AtomRef& atom) { cache.insert(atom); }
inline void cache_clear(WeakSepCache& cache) { cache.clear(); }

struct Positive {
    AtomRef atom;
    double value = 0.0;
    bool from_cache = false;
};

struct Negative {
    double certified_min = 0.0;  ///< exact min over D′ of ⟨c, v⟩
};

using OracleAnswer = std::variant<Positive, Negative>;

struct OracleStats {
    std::size_t calls = 0;
    std::size_t cache_hits = 0;
    std::size_t full_scans = 0;
    std::size_t negatives = 0;
};

/// Weak separation over D′: an atom v with ⟨c, v⟩ ≤ φ/κ, or a certificate
/// that ⟨c, v⟩ ≥ φ for every atom. The cache is scanned most-recent-first;
/// a miss costs one full scan whose argmin is returned when it qualifies.
OracleAnswer lpsep(const Dictionary& dict, WeakSepCache& cache, const Vector& c, double phi, double kappa,
                   OracleStats* stats = nullptr);

}  // namespace blendmp
