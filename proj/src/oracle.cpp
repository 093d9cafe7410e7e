#include "blendmp/oracle.hpp"

#include <algorithm>
#include <stdexcept>

namespace blendmp {

WeakSepCache::WeakSepCache(std::optional<std::size_t> capacity) : capacity_(capacity) {
    if (capacity_ && *capacity_ == 0)
        throw std::invalid_argument("WeakSepCache: capacity must be positive");
}

void WeakSepCache::insert(const AtomRef& atom) {
    if (auto it = std::find(atoms_.begin(), atoms_.end(), atom); it != atoms_.end())
        atoms_.erase(it);
    atoms_.push_back(atom);
    if (capacity_ && atoms_.size() > *capacity_)
        atoms_.erase(atoms_.begin());
}

bool WeakSepCache::contains(const AtomRef& atom) const {
    return std::find(atoms_.begin(), atoms_.end(), atom) != atoms_.end();
}

std::vector<AtomRef> WeakSepCache::scan_order() const {
    return {atoms_.rbegin(), atoms_.rend()};
}

OracleAnswer lpsep(const Dictionary& dict, WeakSepCache& cache, const Vector& c, double phi, double kappa,
                   OracleStats* stats) {
    if (phi > 0.0)
        throw std::invalid_argument("lpsep: phi must be nonpositive");
    if (!(kappa >= 1.0))
        throw std::invalid_argument("lpsep: kappa must be at least 1");
    const double threshold = phi / kappa;
    if (stats)
        ++stats->calls;

    for (auto it = cache.atoms().rbegin(); it != cache.atoms().rend(); ++it) {
        const AtomRef atom = *it;
        const double value = dict.inner_product(atom, c);
        if (value <= threshold) {
            cache.insert(atom);
            if (stats)
                ++stats->cache_hits;
            return Positive{atom, value, true};
        }
    }

    if (stats)
        ++stats->full_scans;
    const AtomValue best = lmo(dict, c);
    if (best.value <= threshold) {
        cache.insert(best.atom);
        return Positive{best.atom, best.value, false};
    }
    if (stats)
        ++stats->negatives;
    return Negative{best.value};
}

}  // namespace blendmp
