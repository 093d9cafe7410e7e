#include "blendmp/linesearch.hpp"

#include <cmath>

namespace blendmp {

namespace {

constexpr double kInvPhi = 0.6180339887498949;  // (√5 − 1)/2
constexpr int kMaxDoublings = 60;

void check_smoothness_args(const Vector& g, const Vector& v, double lipschitz, double order) {
    if (g.size() != v.size())
        throw std::invalid_argument("smoothness_step: dimension mismatch");
    if (!(lipschitz > 0.0) || !(order > 1.0))
        throw std::invalid_argument("smoothness_step: need L > 0 and order > 1");
    if (v.squaredNorm() == 0.0)
        throw std::invalid_argument("smoothness_step: zero direction");
    if (g.dot(v) > 0.0)
        throw std::invalid_argument("smoothness_step: direction is not a descent direction");
}

}  // namespace

LineSearchResult exact_quadratic_step(const LeastSquares& obj, const Vector& x, const Vector& d) {
    const Vector r = obj.residual(x);
    const Vector ad = multiply_sparse_aware(obj.matrix(), d);
    const double curvature = ad.squaredNorm();
    if (curvature == 0.0)
        throw ZeroCurvatureError("exact_quadratic_step: direction has zero curvature");
    // f(x + γd) = s‖r + γAd‖², minimized at γ = −⟨Ad, r⟩/‖Ad‖².
    const double gamma = -ad.dot(r) / curvature;
    const double before = obj.scale() * r.squaredNorm();
    const double after = obj.scale() * (r + gamma * ad).squaredNorm();
    if (after > before)
        return {0.0, before, 1, false};
    return {gamma, after, 1, false};
}

LineSearchResult golden_section(const std::function<double(double)>& phi, double tol, int max_evals) {
    if (!(tol > 0.0))
        throw std::invalid_argument("golden_section: tolerance must be positive");
    int evals = 0;
    double best_gamma = 0.0, best_value = 0.0;
    auto eval = [&](double gamma) {
        const double v = phi(gamma);
        ++evals;
        if (evals == 1 || v < best_value) {
            best_value = v;
            best_gamma = gamma;
        }
        return v;
    };

    double mid = 0.0, fmid = eval(0.0);
    double lo = -1.0, flo = eval(lo);
    double hi = 1.0, fhi = eval(hi);
    bool exhausted = false;
    for (int k = 0;; ++k) {
        if (fhi < fmid) {
            lo = mid, flo = fmid;
            mid = hi, fmid = fhi;
            hi = 2.0 * hi;
            fhi = eval(hi);
        } else if (flo < fmid) {
            hi = mid, fhi = fmid;
            mid = lo, fmid = flo;
            lo = 2.0 * lo;
            flo = eval(lo);
        } else {
            break;
        }
        if (k + 1 >= kMaxDoublings || evals >= max_evals) {
            exhausted = true;
            break;
        }
    }

    if (!exhausted) {
        double c = hi - kInvPhi * (hi - lo);
        double d = lo + kInvPhi * (hi - lo);
        double fc = eval(c), fd = eval(d);
        while (hi - lo > tol * (1.0 + std::abs(best_gamma))) {
            if (evals >= max_evals) {
                exhausted = true;
                break;
            }
            if (fc < fd) {
                hi = d;
                d = c, fd = fc;
                c = hi - kInvPhi * (hi - lo);
                fc = eval(c);
            } else {
                lo = c;
                c = d, fc = fd;
                d = lo + kInvPhi * (hi - lo);
                fd = eval(d);
            }
        }
    }
    return {best_gamma, best_value, evals, exhausted};
}

double smoothness_step(const Vector& g, const Vector& v, double lipschitz, double order) {
    check_smoothness_args(g, v, lipschitz, order);
    const double slope = -g.dot(v);
    if (slope == 0.0)
        return 0.0;
    return std::pow(slope / (lipschitz * std::pow(v.norm(), order)), 1.0 / (order - 1.0));
}

double smoothness_model_decrease(const Vector& g, const Vector& v, double lipschitz, double order) {
    check_smoothness_args(g, v, lipschitz, order);
    const double slope = -g.dot(v);
    const double conj = order / (order - 1.0);
    return std::pow(slope, conj) / (conj * std::pow(lipschitz, conj - 1.0) * std::pow(v.norm(), conj));
}

LineSearchResult line_search(const SmoothObjective& obj, const Vector& x, const Vector& d, const Vector& grad,
                             double fx, LineSearchMode mode) {
    const double norm = d.norm();
    if (norm == 0.0)
        return {0.0, fx, 0, false};

    if (mode == LineSearchMode::exact) {
        if (const auto* ls = dynamic_cast<const LeastSquares*>(&obj)) {
            try {
                return exact_quadratic_step(*ls, x, d);
            } catch (const ZeroCurvatureError&) {
                return {0.0, fx, 0, false};
            }
        }
    }

    if (mode == LineSearchMode::smoothness) {
        if (const auto lipschitz = obj.smoothness_constant()) {
            const double slope = grad.dot(d);
            if (slope >= 0.0)
                return {0.0, fx, 0, false};
            const double gamma = smoothness_step(grad, d, *lipschitz, obj.smoothness_order());
            const double after = obj.value(x + gamma * d);
            if (after > fx)
                return {0.0, fx, 1, false};
            return {gamma, after, 1, false};
        }
    }

    // Golden section along the unit direction so its tolerance is a length.
    const Vector unit = d / norm;
    LineSearchResult r = golden_section(obj.along(x, unit));
    r.gamma /= norm;
    if (r.value_after > fx)
        return {0.0, fx, r.evals, r.exhausted};
    return r;
}

}  // namespace blendmp
