#include "blendmp/solvers.hpp"

#include <cmath>

namespace blendmp {

CorrectionReport correct_active_set(SolverState& state, const Dictionary& dict, CorrectionMode mode,
                                    double drop_threshold) {
    CorrectionReport report;
    if (mode == CorrectionMode::off || state.active.empty())
        return report;

    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < state.coeffs.size(); ++i) {
        if (std::abs(state.coeffs[i]) < drop_threshold) {
            ++report.dropped;
            report.dropped_mass += std::abs(state.coeffs[i]);
        } else {
            candidates.push_back(i);
        }
    }
    if (candidates.empty()) {
        // Keep the heaviest atom so the set stays nonempty.
        std::size_t heaviest = 0;
        for (std::size_t i = 1; i < state.coeffs.size(); ++i)
            if (std::abs(state.coeffs[i]) > std::abs(state.coeffs[heaviest]))
                heaviest = i;
        candidates.push_back(heaviest);
        --report.dropped;
        report.dropped_mass -= std::abs(state.coeffs[heaviest]);
    }

    // Dependence test against an orthonormal basis of the earlier survivors.
    std::vector<Vector> orthonormal;
    std::vector<Vector> basis;
    std::vector<std::size_t> survivors;
    for (std::size_t i : candidates) {
        Vector atom = dict.atom_dense(state.active.atoms()[i]);
        Vector r = atom;
        for (int pass = 0; pass < 2; ++pass)
            for (const Vector& q : orthonormal)
                r -= q.dot(r) * q;
        if (r.squaredNorm() <= 1e-10 * atom.squaredNorm()) {
            ++report.dependent;
            continue;
        }
        orthonormal.push_back(r.normalized());
        basis.push_back(std::move(atom));
        survivors.push_back(i);
    }
    if (survivors.size() == state.active.size())
        return report;

    const GramSystem gram(std::move(basis));
    const Vector c = gram.solve(gram.inner_products(state.x));
    state.active.keep(survivors);
    state.coeffs.assign(c.data(), c.data() + c.size());
    const Vector x_new = state.reconstruct(dict);
    report.span_residual = (state.x - x_new).norm();
    state.x = x_new;
    return report;
}

}  // namespace blendmp
