#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "bo/errors.hpp"
#include "bo/rational.hpp"

namespace bo {

namespace detail {

inline void check_no_collision(const RealRationalSymbol& u0, const PoleExpansion& f) {
    for (const auto& t : f.terms())
        for (const auto& pl : u0.poles)
            if (std::abs(t.q - pl.p) <= 1e-8 * std::max(1.0, std::abs(pl.p)))
                throw PoleCollision("toeplitz: pole of f collides with a symbol pole");
}

}  // namespace detail

/// T_{u0} f = Pi(u0 f), computed exactly by residue re-expansion. Equivalent
/// to u0(y) f(y) - sum_j c_j f(p_j)/(y - p_j): the product's upper-half-plane
/// principal parts are exactly the dropped terms.
inline PoleExpansion toeplitz_apply(const RealRationalSymbol& u0, const PoleExpansion& f) {
    if (u0.is_zero() || f.is_zero()) return {};
    detail::check_no_collision(u0, f);
    return (u0.expansion() * f).lower_part();
}

/// The finite value of (T_{u0} f)(p_j): the removable singularity evaluated as
/// c_j f'(p_j) + sum_{l != j} c_l (f(p_l) - f(p_j))/(p_l - p_j)
///            + sum_l conj(c_l) f(p_j)/(p_j - conj(p_l)).
inline cplx toeplitz_value_at_pole(const RealRationalSymbol& u0, const PoleExpansion& f,
                                   std::size_t j) {
    if (j >= u0.poles.size()) throw Error("toeplitz_value_at_pole: bad pole index");
    detail::check_no_collision(u0, f);
    if (f.is_zero()) return cplx(0.0);
    const cplx pj = u0.poles[j].p;
    const cplx fpj = f.eval(pj);
    cplx acc = u0.poles[j].c * f.eval_derivative(pj, 1);
    for (std::size_t l = 0; l < u0.poles.size(); ++l) {
        const cplx pl = u0.poles[l].p;
        if (l != j) acc += u0.poles[l].c * (f.eval(pl) - fpj) / (pl - pj);
        acc += std::conj(u0.poles[l].c) * fpj / (pj - std::conj(pl));
    }
    return acc;
}

/// T_{u0}^n f by n-fold application of toeplitz_apply.
inline PoleExpansion toeplitz_power_apply(const RealRationalSymbol& u0, int n,
                                          const PoleExpansion& f) {
    if (n < 1) throw Error("toeplitz_power_apply: n must be >= 1");
    PoleExpansion g = f;
    for (int k = 0; k < n; ++k) g = toeplitz_apply(u0, g);
    return g;
}

/// Derivative jets (T^k f)^(d)(p_j) for k = 0..n-1, d <= n-1-k, computed by
/// the value recursion at the poles (no intermediate expansions). Level k
/// order-d derivatives follow from level k-1 jets one order deeper:
///   (T g)^(d)(p_j) = c_j g^(d+1)(p_j) d!/(d+1)!
///                  + sum_e C(d,e) rest_j^(e)(p_j) g^(d-e)(p_j)
///                  - sum_{l!=j} c_l g(p_l) (-1)^d d! / (p_j - p_l)^{d+1}
/// with rest_j = u0 - c_j/(y - p_j), analytic at p_j.
inline std::vector<std::vector<cplx>> toeplitz_pole_jets(const RealRationalSymbol& u0, int n,
                                                         const PoleExpansion& f) {
    const std::size_t np = u0.poles.size();
    std::vector<std::vector<std::vector<cplx>>> jets(static_cast<std::size_t>(n));

    // Level 0: derivatives of f itself, exact from the expansion.
    jets[0].assign(np, std::vector<cplx>(static_cast<std::size_t>(n), cplx(0.0)));
    for (std::size_t j = 0; j < np; ++j)
        for (int d = 0; d <= n - 1; ++d)
            jets[0][j][static_cast<std::size_t>(d)] = f.eval_derivative(u0.poles[j].p, d);

    auto rest_derivative = [&](std::size_t j, int e) {
        const cplx pj = u0.poles[j].p;
        double fac = 1.0;
        for (int i = 2; i <= e; ++i) fac *= double(i);
        const double sign = (e % 2 == 0) ? 1.0 : -1.0;
        cplx acc(0.0);
        for (std::size_t l = 0; l < u0.poles.size(); ++l) {
            if (l != j) acc += u0.poles[l].c / std::pow(pj - u0.poles[l].p, e + 1);
            acc += std::conj(u0.poles[l].c) / std::pow(pj - std::conj(u0.poles[l].p), e + 1);
        }
        return sign * fac * acc;
    };

    for (int k = 1; k <= n - 1; ++k) {
        const auto& g = jets[static_cast<std::size_t>(k - 1)];
        const int dmax = n - 1 - k;
        jets[static_cast<std::size_t>(k)].assign(
            np, std::vector<cplx>(static_cast<std::size_t>(dmax) + 1, cplx(0.0)));
        for (std::size_t j = 0; j < np; ++j) {
            const cplx pj = u0.poles[j].p;
            for (int d = 0; d <= dmax; ++d) {
                cplx acc = u0.poles[j].c * g[j][static_cast<std::size_t>(d) + 1] / double(d + 1);
                for (int e = 0; e <= d; ++e)
                    acc += detail::binom(d, e) * rest_derivative(j, e) *
                           g[j][static_cast<std::size_t>(d - e)];
                double dfac = 1.0;
                for (int i = 2; i <= d; ++i) dfac *= double(i);
                const double sign = (d % 2 == 0) ? 1.0 : -1.0;
                for (std::size_t l = 0; l < np; ++l) {
                    if (l == j) continue;
                    acc -= u0.poles[l].c * g[l][0] * sign * dfac /
                           std::pow(pj - u0.poles[l].p, d + 1);
                }
                jets[static_cast<std::size_t>(k)][j][static_cast<std::size_t>(d)] = acc;
            }
        }
    }

    std::vector<std::vector<cplx>> values(static_cast<std::size_t>(n), std::vector<cplx>(np));
    for (int k = 0; k < n; ++k)
        for (std::size_t j = 0; j < np; ++j)
            values[static_cast<std::size_t>(k)][j] = jets[static_cast<std::size_t>(k)][j][0];
    return values;
}

/// T_{u0}^n f by the closed inductive formula
///   T^n f = u0^n f - sum_{k=0}^{n-1} u0^{n-1-k} sum_j c_j (T^k f)(p_j)/(y - p_j)
/// with the pole values from the jet recursion. Independent of the iterated
/// route except for sharing the exact pole data.
inline PoleExpansion toeplitz_power_formula(const RealRationalSymbol& u0, int n,
                                            const PoleExpansion& f) {
    if (n < 1) throw Error("toeplitz_power_formula: n must be >= 1");
    if (u0.is_zero() || f.is_zero()) return {};
    detail::check_no_collision(u0, f);

    const auto values = toeplitz_pole_jets(u0, n, f);

    std::vector<PoleExpansion> u0pow(static_cast<std::size_t>(n) + 1);
    u0pow[0] = PoleExpansion{};  // unused sentinel; power 0 handled separately
    u0pow[1] = u0.expansion();
    for (int m = 2; m <= n; ++m) u0pow[static_cast<std::size_t>(m)] = u0pow[static_cast<std::size_t>(m - 1)] * u0pow[1];

    PoleExpansion acc = u0pow[static_cast<std::size_t>(n)] * f;
    for (int k = 0; k < n; ++k) {
        std::vector<PoleTerm> corr;
        for (std::size_t j = 0; j < u0.poles.size(); ++j)
            corr.push_back({u0.poles[j].c * values[static_cast<std::size_t>(k)][j], u0.poles[j].p, 1});
        PoleExpansion c(std::move(corr));
        const int m = n - 1 - k;
        acc = acc - (m == 0 ? c : u0pow[static_cast<std::size_t>(m)] * c);
    }

    // The assembled expression is Hardy; the upper-half-plane coefficients
    // cancel to rounding and are dropped.
    return acc.lower_part().pruned(1e-13);
}

/// The symbols L_{u0}^k Pi u0 for k = 0..n, with L = D - T_{u0} and
/// D = (1/i) d/dy, all exact on pole expansions.
inline std::vector<PoleExpansion> lax_symbols(const RealRationalSymbol& u0, int n) {
    if (n < 0) throw Error("lax_symbols: n must be >= 0");
    std::vector<PoleExpansion> out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    out.push_back(u0.hardy_part());
    for (int k = 0; k < n; ++k) {
        const PoleExpansion& w = out.back();
        out.push_back(w.derivative() * cplx(0.0, -1.0) - toeplitz_apply(u0, w));
    }
    return out;
}

}  // namespace bo
