#include "blendmp/solver_state.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace blendmp {

namespace {

constexpr std::array<std::pair<StepKind, std::string_view>, 7> kKindNames{{
    {StepKind::init, "init"},
    {StepKind::constrained, "constrained"},
    {StepKind::full, "full"},
    {StepKind::dual, "dual"},
    {StepKind::gmp, "gmp"},
    {StepKind::omp, "omp"},
    {StepKind::pgd, "pgd"},
}};

}  // namespace

std::string_view to_string(StepKind kind) {
    for (const auto& [k, name] : kKindNames)
        if (k == kind)
            return name;
    return "unknown";
}

StepKind step_kind_from_string(std::string_view text) {
    for (const auto& [k, name] : kKindNames)
        if (name == text)
            return k;
    throw std::invalid_argument("unknown step kind: " + std::string(text));
}

std::optional<std::size_t> ActiveSet::find(const AtomRef& atom) const {
    const auto it = std::find(atoms_.begin(), atoms_.end(), atom);
    if (it == atoms_.end())
        return std::nullopt;
    return static_cast<std::size_t>(it - atoms_.begin());
}

std::size_t ActiveSet::add(const AtomRef& atom, std::size_t iter) {
    if (auto pos = find(atom))
        return *pos;
    atoms_.push_back(atom);
    first_seen_.push_back(iter);
    return atoms_.size() - 1;
}

void ActiveSet::keep(const std::vector<std::size_t>& positions) {
    std::vector<AtomRef> atoms;
    std::vector<std::size_t> seen;
    for (std::size_t p : positions) {
        atoms.push_back(atoms_.at(p));
        seen.push_back(first_seen_.at(p));
    }
    atoms_ = std::move(atoms);
    first_seen_ = std::move(seen);
}

double SolverState::coefficient(const AtomRef& atom) const {
    if (auto pos = active.find(atom))
        return coeffs[*pos];
    return 0.0;
}

Vector SolverState::reconstruct(const Dictionary& dict) const {
    Vector out = Vector::Zero(static_cast<Eigen::Index>(dict.dim()));
    for (std::size_t i = 0; i < active.size(); ++i) {
        const AtomRef& a = active.atoms()[i];
        dict.add_atom(a.index, a.sign * coeffs[i], out);
    }
    return out;
}

double SolverState::decomposition_error(const Dictionary& dict) const {
    return (x - reconstruct(dict)).norm();
}

void SolverConfig::validate() const {
    if (!(eta > 0.0))
        throw std::invalid_argument("config: eta must be positive");
    if (!(kappa >= 1.0))
        throw std::invalid_argument("config: kappa must be at least 1");
    if (!(tau > 1.0))
        throw std::invalid_argument("config: tau must exceed 1");
    if (!(stop_dual_gap >= 0.0))
        throw std::invalid_argument("config: stop_dual_gap must be nonnegative");
    if (!(drop_threshold >= 0.0))
        throw std::invalid_argument("config: drop_threshold must be nonnegative");
    if (!(time_budget > 0.0))
        throw std::invalid_argument("config: time_budget must be positive");
    if (pgd_radius && !(*pgd_radius > 0.0))
        throw std::invalid_argument("config: pgd radius must be positive");
}

}  // namespace blendmp
