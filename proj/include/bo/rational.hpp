#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "bo/complex_poly.hpp"
#include "bo/errors.hpp"
#include "bo/polyroots.hpp"

namespace bo {

/// Two poles are identified when |q1 - q2| <= kPoleIdentTol * max(1, |q1|).
inline constexpr double kPoleIdentTol = 1e-10;

namespace detail {

inline bool same_pole(cplx q1, cplx q2) {
    return std::abs(q1 - q2) <= kPoleIdentTol * std::max(1.0, std::abs(q1));
}

inline double binom(int n, int k) {
    double acc = 1.0;
    for (int i = 1; i <= k; ++i) acc *= double(n - k + i) / double(i);
    return acc;
}

}  // namespace detail

/// One term a / (y - q)^m of a pole expansion.
struct PoleTerm {
    cplx a;
    cplx q;
    int m = 1;
};

/// Finite sum of pole terms; a rational function vanishing at infinity with
/// no polynomial part. Closed under addition, products (by residue
/// re-expansion) and differentiation. Immutable value semantics.
class PoleExpansion {
  public:
    PoleExpansion() = default;
    explicit PoleExpansion(std::vector<PoleTerm> terms) : terms_(std::move(terms)) { normalize(); }

    static PoleExpansion simple(cplx a, cplx q) { return PoleExpansion({PoleTerm{a, q, 1}}); }

    const std::vector<PoleTerm>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    int max_order() const {
        int m = 0;
        for (const auto& t : terms_) m = std::max(m, t.m);
        return m;
    }

    double coeff_scale() const {
        double s = 0.0;
        for (const auto& t : terms_) s = std::max(s, std::abs(t.a));
        return s;
    }

    cplx eval(cplx y) const {
        cplx acc(0.0);
        for (const auto& t : terms_) {
            const cplx d = y - t.q;
            if (std::abs(d) <= 1e-12 * std::max(1.0, std::abs(t.q)))
                throw PoleHit("PoleExpansion::eval at a pole");
            acc += t.a / std::pow(d, t.m);
        }
        return acc;
    }

    /// k-th derivative value at y (k = 0 is plain evaluation).
    cplx eval_derivative(cplx y, int k) const {
        cplx acc(0.0);
        for (const auto& t : terms_) {
            const cplx d = y - t.q;
            if (std::abs(d) <= 1e-12 * std::max(1.0, std::abs(t.q)))
                throw PoleHit("PoleExpansion::eval_derivative at a pole");
            // d^k/dy^k (y-q)^{-m} = (-1)^k m(m+1)...(m+k-1) (y-q)^{-(m+k)}
            double fac = 1.0;
            for (int i = 0; i < k; ++i) fac *= double(t.m + i);
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            acc += t.a * sign * fac / std::pow(d, t.m + k);
        }
        return acc;
    }

    /// d/dy, term-wise and exact.
    PoleExpansion derivative() const {
        std::vector<PoleTerm> out;
        out.reserve(terms_.size());
        for (const auto& t : terms_) out.push_back({-double(t.m) * t.a, t.q, t.m + 1});
        return PoleExpansion(std::move(out));
    }

    PoleExpansion operator+(const PoleExpansion& o) const {
        std::vector<PoleTerm> out = terms_;
        out.insert(out.end(), o.terms_.begin(), o.terms_.end());
        return PoleExpansion(std::move(out));
    }

    PoleExpansion operator-(const PoleExpansion& o) const { return *this + (o * cplx(-1.0)); }

    PoleExpansion operator*(cplx s) const {
        std::vector<PoleTerm> out = terms_;
        for (auto& t : out) t.a *= s;
        return PoleExpansion(std::move(out));
    }

    /// Product re-expanded into pole terms via residue calculus. Coinciding
    /// poles accumulate order; distinct poles split by the closed-form
    /// partial-fraction formula for (y-q)^{-m} (y-r)^{-k}.
    PoleExpansion operator*(const PoleExpansion& o) const {
        std::vector<PoleTerm> out;
        for (const auto& s : terms_) {
            for (const auto& t : o.terms_) {
                const cplx ab = s.a * t.a;
                if (ab == cplx(0.0)) continue;
                if (detail::same_pole(s.q, t.q)) {
                    out.push_back({ab, s.q, s.m + t.m});
                    continue;
                }
                const cplx d = s.q - t.q;
                // principal part at s.q
                for (int i = 1; i <= s.m; ++i) {
                    const double sign = ((s.m - i) % 2 == 0) ? 1.0 : -1.0;
                    const double b = detail::binom(s.m + t.m - i - 1, s.m - i);
                    out.push_back({ab * sign * b / std::pow(d, t.m + s.m - i), s.q, i});
                }
                // principal part at t.q
                for (int j = 1; j <= t.m; ++j) {
                    const double sign = ((t.m - j) % 2 == 0) ? 1.0 : -1.0;
                    const double b = detail::binom(s.m + t.m - j - 1, t.m - j);
                    out.push_back({ab * sign * b / std::pow(-d, s.m + t.m - j), t.q, j});
                }
            }
        }
        return PoleExpansion(std::move(out));
    }

    /// Complex conjugate as a function on the real line: poles reflect across
    /// the real axis.
    PoleExpansion conjugate() const {
        std::vector<PoleTerm> out;
        out.reserve(terms_.size());
        for (const auto& t : terms_) out.push_back({std::conj(t.a), std::conj(t.q), t.m});
        return PoleExpansion(std::move(out));
    }

    /// Sub-expansion with poles in the lower half-plane (the Hardy part).
    PoleExpansion lower_part() const {
        std::vector<PoleTerm> out;
        for (const auto& t : terms_)
            if (t.q.imag() < 0.0) out.push_back(t);
        return PoleExpansion(std::move(out));
    }

    PoleExpansion upper_part() const {
        std::vector<PoleTerm> out;
        for (const auto& t : terms_)
            if (t.q.imag() > 0.0) out.push_back(t);
        return PoleExpansion(std::move(out));
    }

    bool all_poles_lower() const {
        for (const auto& t : terms_)
            if (!(t.q.imag() < 0.0)) return false;
        return true;
    }

    double min_abs_pole_imag() const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& t : terms_) m = std::min(m, std::abs(t.q.imag()));
        return m;
    }

    /// Drop terms with |a| <= eps * coeff_scale().
    PoleExpansion pruned(double eps) const {
        const double cut = eps * coeff_scale();
        std::vector<PoleTerm> out;
        for (const auto& t : terms_)
            if (std::abs(t.a) > cut) out.push_back(t);
        return PoleExpansion(std::move(out));
    }

  private:
    void normalize() {
        std::vector<PoleTerm> merged;
        for (const auto& t : terms_) {
            if (t.a == cplx(0.0)) continue;
            bool hit = false;
            for (auto& u : merged) {
                if (u.m == t.m && detail::same_pole(u.q, t.q)) {
                    u.a += t.a;
                    hit = true;
                    break;
                }
            }
            if (!hit) merged.push_back(t);
        }
        std::erase_if(merged, [](const PoleTerm& t) { return t.a == cplx(0.0); });
        std::sort(merged.begin(), merged.end(), [](const PoleTerm& x, const PoleTerm& y) {
            if (x.q.real() != y.q.real()) return x.q.real() < y.q.real();
            if (x.q.imag() != y.q.imag()) return x.q.imag() < y.q.imag();
            return x.m < y.m;
        });
        terms_ = std::move(merged);
    }

    std::vector<PoleTerm> terms_;
};

inline PoleExpansion operator*(cplx s, const PoleExpansion& f) { return f * s; }

/// Simple-pole partial fraction decomposition of P/Q given the roots of Q.
/// Throws NonDecaying when deg P >= deg Q and RealPole when a root sits on
/// (or numerically on) the real axis.
inline PoleExpansion partial_fractions(const ComplexPoly& p, const ComplexPoly& q,
                                       const std::vector<cplx>& q_roots) {
    if (p.degree() >= q.degree()) throw NonDecaying("partial_fractions: deg P >= deg Q");
    std::vector<PoleTerm> out;
    if (p.is_zero()) return PoleExpansion{};
    for (std::size_t j = 0; j < q_roots.size(); ++j) {
        const cplx r = q_roots[j];
        if (std::abs(r.imag()) <= 1e-9 * std::max(1.0, std::abs(r)))
            throw RealPole("partial_fractions: pole on the real axis");
        cplx dq = q.leading();
        for (std::size_t k = 0; k < q_roots.size(); ++k) {
            if (k == j) continue;
            dq *= r - q_roots[k];
        }
        if (dq == cplx(0.0)) throw PoleCollision("partial_fractions: repeated root");
        out.push_back({p.eval(r) / dq, r, 1});
    }
    return PoleExpansion(std::move(out));
}

/// The Hardy projection on decaying pole expansions: keep the terms whose
/// poles lie in the lower half-plane. Idempotent by construction.
inline PoleExpansion hardy_project(const PoleExpansion& f) {
    for (const auto& t : f.terms())
        if (std::abs(t.q.imag()) <= 1e-9 * std::max(1.0, std::abs(t.q)))
            throw RealPole("hardy_project: pole on the real axis");
    return f.lower_part();
}

/// Rational initial datum u0(y) = sum_j c_j/(y-p_j) + conj(c_j)/(y-conj(p_j))
/// with Im p_j > 0; real on the real line by the conjugate-pair form.
struct RealRationalSymbol {
    struct Pole {
        cplx c;  // residue at p
        cplx p;  // Im p > 0
    };
    std::vector<Pole> poles;

    RealRationalSymbol() = default;
    explicit RealRationalSymbol(std::vector<Pole> ps) : poles(std::move(ps)) { validate(); }

    /// The one-soliton profile R_p(y) = 2 Im p / |y+p|^2.
    static RealRationalSymbol soliton(cplx p) {
        if (!(p.imag() > 0.0)) throw Error("soliton: Im p must be > 0");
        return RealRationalSymbol({Pole{cplx(0.0, -1.0), -std::conj(p)}});
    }

    std::size_t pole_count() const { return poles.size(); }
    bool is_zero() const { return poles.empty(); }

    void validate() const {
        for (std::size_t j = 0; j < poles.size(); ++j) {
            if (!(poles[j].p.imag() > 0.0)) throw RealPole("RealRationalSymbol: Im p must be > 0");
            for (std::size_t k = j + 1; k < poles.size(); ++k)
                if (detail::same_pole(poles[j].p, poles[k].p))
                    throw PoleCollision("RealRationalSymbol: coinciding poles");
        }
    }

    cplx eval(cplx y) const {
        cplx acc(0.0);
        for (const auto& pl : poles) {
            const cplx d1 = y - pl.p;
            const cplx d2 = y - std::conj(pl.p);
            if (std::abs(d1) <= 1e-12 * std::max(1.0, std::abs(pl.p)) ||
                std::abs(d2) <= 1e-12 * std::max(1.0, std::abs(pl.p)))
                throw PoleHit("RealRationalSymbol::eval at a pole");
            acc += pl.c / d1 + std::conj(pl.c) / d2;
        }
        return acc;
    }

    /// u0'(y).
    cplx eval_derivative(cplx y) const {
        cplx acc(0.0);
        for (const auto& pl : poles) {
            const cplx d1 = y - pl.p;
            const cplx d2 = y - std::conj(pl.p);
            acc += -pl.c / (d1 * d1) - std::conj(pl.c) / (d2 * d2);
        }
        return acc;
    }

    /// Full expansion with both pole families (2N simple terms).
    PoleExpansion expansion() const {
        std::vector<PoleTerm> out;
        out.reserve(2 * poles.size());
        for (const auto& pl : poles) {
            out.push_back({pl.c, pl.p, 1});
            out.push_back({std::conj(pl.c), std::conj(pl.p), 1});
        }
        return PoleExpansion(std::move(out));
    }

    /// Pi u0 = sum_j conj(c_j) / (y - conj(p_j)); poles in the lower half-plane.
    PoleExpansion hardy_part() const {
        std::vector<PoleTerm> out;
        out.reserve(poles.size());
        for (const auto& pl : poles) out.push_back({std::conj(pl.c), std::conj(pl.p), 1});
        return PoleExpansion(std::move(out));
    }

    /// Reconstruct the P0/Q0 form: Q0 monic real of degree 2N, deg P0 <= 2N-1.
    std::pair<ComplexPoly, ComplexPoly> to_pq() const {
        std::vector<cplx> all_roots;
        for (const auto& pl : poles) {
            all_roots.push_back(pl.p);
            all_roots.push_back(std::conj(pl.p));
        }
        ComplexPoly q0 = ComplexPoly::from_roots(all_roots);
        ComplexPoly p0;
        for (std::size_t j = 0; j < poles.size(); ++j) {
            std::vector<cplx> others;
            for (std::size_t k = 0; k < all_roots.size(); ++k)
                if (k != 2 * j) others.push_back(all_roots[k]);
            p0 = p0 + ComplexPoly::from_roots(others, poles[j].c);
            others.clear();
            for (std::size_t k = 0; k < all_roots.size(); ++k)
                if (k != 2 * j + 1) others.push_back(all_roots[k]);
            p0 = p0 + ComplexPoly::from_roots(others, std::conj(poles[j].c));
        }
        const double scale = std::max(1.0, q0.eval_scale(cplx(1.0)));
        if (p0.max_imag() > 1e-10 * scale || q0.max_imag() > 1e-10 * scale)
            throw Error("to_pq: reconstruction lost real coefficients");
        return {p0.real_part(), q0.real_part()};
    }

    /// Exact ||u0||_{L2}^2 = 2 ||Pi u0||^2 by residue integration.
    double l2_norm_sq() const {
        cplx acc(0.0);
        for (const auto& pj : poles)
            for (const auto& pk : poles)
                acc += std::conj(pj.c) * pk.c * cplx(0.0, 2.0 * std::numbers::pi) /
                       (pk.p - std::conj(pj.p));
        return 2.0 * acc.real();
    }

    double min_pole_imag() const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& pl : poles) m = std::min(m, pl.p.imag());
        return m;
    }
};

/// Partial-fraction symbol of P/Q with real coefficients. Multiple roots of Q
/// are split by the given perturbation radius (default 1e-6 * max(1,|root|)
/// when zero is passed) before decomposition.
struct PqDecomposition {
    RealRationalSymbol symbol;
    bool perturbed = false;
};

inline PqDecomposition symbol_from_pq(const ComplexPoly& p_in, const ComplexPoly& q_in,
                                      double perturbation = 0.0) {
    if (q_in.degree() < 1) throw DegreeViolation("symbol_from_pq: Q must be nonconstant");
    if (p_in.degree() > q_in.degree() - 1)
        throw DegreeViolation("symbol_from_pq: need deg P <= deg Q - 1");
    const double coeff_scale =
        std::max(1.0, std::max(p_in.eval_scale(cplx(1.0)), q_in.eval_scale(cplx(1.0))));
    if (p_in.max_imag() > 1e-12 * coeff_scale || q_in.max_imag() > 1e-12 * coeff_scale)
        throw Error("symbol_from_pq: coefficients must be real");

    const cplx lead = q_in.leading();
    const ComplexPoly q = q_in * (1.0 / lead);
    const ComplexPoly p = p_in * (1.0 / lead);

    if (p.is_zero()) return {RealRationalSymbol{}, false};

    RootSet rs = find_roots(q);
    if (!rs.converged) throw NoConvergence("symbol_from_pq: root finding did not converge");

    std::vector<cplx> upper;
    for (cplx r : rs.roots) {
        if (std::abs(r.imag()) <= 1e-9 * std::max(1.0, std::abs(r)))
            throw RealPole("symbol_from_pq: Q vanishes near the real axis");
        if (r.imag() > 0.0) upper.push_back(r);
    }
    if (2 * upper.size() != rs.roots.size())
        throw RealPole("symbol_from_pq: conjugate symmetry of Q roots broken");

    // Cluster upper roots; a multiple root of Q shows up as a tight cluster.
    std::vector<std::vector<cplx>> clusters;
    std::vector<bool> used(upper.size(), false);
    for (std::size_t i = 0; i < upper.size(); ++i) {
        if (used[i]) continue;
        std::vector<cplx> cl{upper[i]};
        used[i] = true;
        for (std::size_t j = i + 1; j < upper.size(); ++j) {
            if (used[j]) continue;
            if (std::abs(upper[j] - cl.front()) <= 1e-6 * std::max(1.0, std::abs(cl.front()))) {
                cl.push_back(upper[j]);
                used[j] = true;
            }
        }
        clusters.push_back(std::move(cl));
    }

    bool perturbed = false;
    std::vector<cplx> final_upper;
    for (const auto& cl : clusters) {
        if (cl.size() == 1) {
            final_upper.push_back(cl.front());
            continue;
        }
        perturbed = true;
        cplx center(0.0);
        for (cplx r : cl) center += r;
        center /= double(cl.size());
        const double radius =
            perturbation > 0.0 ? perturbation : 1e-6 * std::max(1.0, std::abs(center));
        for (std::size_t l = 0; l < cl.size(); ++l) {
            const double th = 2.0 * std::numbers::pi * double(l) / double(cl.size()) + 0.25;
            final_upper.push_back(center + radius * cplx(std::cos(th), std::sin(th)));
        }
    }

    std::vector<cplx> all_roots;
    for (cplx r : final_upper) {
        all_roots.push_back(r);
        all_roots.push_back(std::conj(r));
    }

    std::vector<RealRationalSymbol::Pole> poles;
    for (cplx r : final_upper) {
        cplx dq(1.0);
        for (cplx s : all_roots) {
            if (s == r) continue;
            dq *= r - s;
        }
        poles.push_back({p.eval(r) / dq, r});
    }
    return {RealRationalSymbol(std::move(poles)), perturbed};
}

}  // namespace bo
