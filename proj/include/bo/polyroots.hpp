#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "bo/complex_poly.hpp"
#include "bo/errors.hpp"

namespace bo {

/// Roots of a polynomial together with their real/conjugate classification.
/// `ambiguous` is data, not failure: it flags the numerical signature of a
/// critical abscissa (root collision or failed conjugate pairing).
struct RootSet {
    std::vector<cplx> roots;
    std::vector<double> residuals;  // |p(r)| / sum_k |a_k||r|^k per root

    std::vector<double> real_roots;                // sorted ascending, filled by classify
    std::vector<std::pair<cplx, cplx>> conj_pairs; // (upper, lower)
    bool classified = false;
    bool ambiguous = false;
    bool converged = true;
};

namespace detail {

inline double root_residual(const ComplexPoly& p, cplx r) {
    const double scale = p.eval_scale(r);
    return scale > 0.0 ? std::abs(p.eval(r)) / scale : std::abs(p.eval(r));
}

}  // namespace detail

/// All complex roots by Aberth-Ehrlich simultaneous iteration from a scaled
/// circular start, followed by a Newton polish of each root. The contract is
/// the residual bound |p(r)| / sum|a_k||r|^k <= 1e-10, not the method.
inline RootSet find_roots(const ComplexPoly& p, int max_iter = 400) {
    const int d = p.degree();
    if (d < 1) throw Error("find_roots: degree must be >= 1");

    // Cauchy-type radius bound from the coefficients.
    const cplx lead = p.leading();
    double radius = 0.0;
    for (int k = 0; k < d; ++k) radius = std::max(radius, std::abs(p.coeff(k) / lead));
    radius = 1.0 + radius;

    std::vector<cplx> z(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
        // Irrational-ish phase offset keeps the start away from symmetry axes.
        const double th = 2.0 * std::numbers::pi * (k + 0.353) / d + 0.5;
        z[static_cast<std::size_t>(k)] = radius * cplx(std::cos(th), std::sin(th));
    }

    const ComplexPoly dp = p.derivative();
    bool converged = false;
    for (int it = 0; it < max_iter && !converged; ++it) {
        double max_step = 0.0;
        for (int i = 0; i < d; ++i) {
            const cplx zi = z[static_cast<std::size_t>(i)];
            const cplx pv = p.eval(zi);
            if (pv == cplx(0.0)) continue;
            cplx ratio = pv / dp.eval(zi);
            cplx sum(0.0);
            for (int j = 0; j < d; ++j) {
                if (j == i) continue;
                sum += 1.0 / (zi - z[static_cast<std::size_t>(j)]);
            }
            const cplx denom = 1.0 - ratio * sum;
            const cplx step = denom == cplx(0.0) ? ratio : ratio / denom;
            z[static_cast<std::size_t>(i)] -= step;
            max_step = std::max(max_step, std::abs(step) / std::max(1.0, std::abs(zi)));
        }
        if (max_step < 1e-14) converged = true;
    }

    // Newton polish, individually.
    for (cplx& r : z) {
        for (int it = 0; it < 4; ++it) {
            const cplx dv = dp.eval(r);
            if (dv == cplx(0.0)) break;
            const cplx step = p.eval(r) / dv;
            if (std::abs(step) > 0.5 * std::max(1.0, std::abs(r))) break;
            r -= step;
        }
    }

    RootSet rs;
    rs.roots = std::move(z);
    rs.residuals.reserve(rs.roots.size());
    for (cplx r : rs.roots) rs.residuals.push_back(detail::root_residual(p, r));
    rs.converged = true;
    for (double res : rs.residuals)
        if (!(res <= 1e-10)) rs.converged = false;
    return rs;
}

/// Classify roots into reals and conjugate pairs. Roots with
/// |Im r| <= tau_real * max(1,|r|) snap to the real axis; the rest are matched
/// by greedy nearest-conjugate search. Any root in the gray zone
/// (tau_real, 10*tau_real), a pairing failure, or a tie among the snapped
/// reals marks the set ambiguous.
inline RootSet classify(RootSet rs, double scale, double tau_real = 1e-8) {
    (void)scale;
    rs.real_roots.clear();
    rs.conj_pairs.clear();
    rs.ambiguous = false;

    std::vector<cplx> upper;
    std::vector<cplx> lower;
    for (cplx r : rs.roots) {
        const double tau = tau_real * std::max(1.0, std::abs(r));
        const double im = std::abs(r.imag());
        if (im <= tau) {
            rs.real_roots.push_back(r.real());
        } else {
            if (im < 10.0 * tau) rs.ambiguous = true;
            (r.imag() > 0.0 ? upper : lower).push_back(r);
        }
    }
    std::sort(rs.real_roots.begin(), rs.real_roots.end());

    // Ties among real roots mean a multiple root at machine scale.
    for (std::size_t k = 1; k < rs.real_roots.size(); ++k) {
        const double tau = tau_real * std::max(1.0, std::abs(rs.real_roots[k]));
        if (rs.real_roots[k] - rs.real_roots[k - 1] <= tau) rs.ambiguous = true;
    }

    if (upper.size() != lower.size()) {
        rs.ambiguous = true;
    } else {
        std::vector<bool> used(lower.size(), false);
        for (cplx u : upper) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t best_j = lower.size();
            for (std::size_t j = 0; j < lower.size(); ++j) {
                if (used[j]) continue;
                const double dist = std::abs(u - std::conj(lower[j]));
                if (dist < best) {
                    best = dist;
                    best_j = j;
                }
            }
            if (best_j == lower.size() || best > 1e-7 * std::max(1.0, std::abs(u))) {
                rs.ambiguous = true;
                break;
            }
            used[best_j] = true;
            rs.conj_pairs.emplace_back(u, lower[best_j]);
        }
    }

    if (rs.real_roots.size() + 2 * rs.conj_pairs.size() != rs.roots.size()) rs.ambiguous = true;

    rs.classified = true;
    return rs;
}

/// Characteristic polynomial (y - z) Q0(y)^n - (-1)^n (n+1) t P0(y)^n of the
/// zero-dispersion problem; degree exactly n*deg(Q0) + 1.
inline ComplexPoly char_poly(const ComplexPoly& p0, const ComplexPoly& q0, int n, double t, cplx z) {
    if (n < 1) throw Error("char_poly: n must be >= 1");
    if (q0.degree() < 1) throw DegreeCollapse("char_poly: constant denominator");
    const ComplexPoly qn = q0.pow(n);
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    ComplexPoly cp = (ComplexPoly::variable() - ComplexPoly::constant(z)) * qn -
                     p0.pow(n) * cplx(sign * (n + 1) * t);
    return cp;
}

}  // namespace bo
