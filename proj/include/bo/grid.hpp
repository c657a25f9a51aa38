#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "bo/errors.hpp"
#include "bo/rational.hpp"
#include "bo/toeplitz.hpp"

namespace bo {

/// Truncated Fourier half-line grid with staggered nodes xi_m = (m+1/2) dxi;
/// no unknown sits exactly at xi = 0.
struct FourierGrid {
    double xi_max = 40.0;
    int m = 1024;

    double dxi() const { return xi_max / m; }
    double node(int i) const { return (i + 0.5) * dxi(); }

    /// Cutoff rule: Xi >= 20/min_j Im p_j, so the symbol spectrum has decayed
    /// to ~1e-8 of its peak at the cutoff.
    static double suggested_cutoff(const RealRationalSymbol& u0) {
        if (u0.is_zero()) return 20.0;
        return 20.0 / u0.min_pole_imag();
    }
};

/// Samples of a Fourier-side function at the grid nodes.
struct GridFn {
    Eigen::VectorXcd v;

    double norm_l2(const FourierGrid& g) const {
        return std::sqrt(g.dxi() / (2.0 * std::numbers::pi)) * v.norm();
    }
};

/// <f, g>_{L2(R)} = (dxi/2pi) sum f_m conj(g_m).
inline cplx inner(const FourierGrid& g, const GridFn& f, const GridFn& h) {
    return g.dxi() / (2.0 * std::numbers::pi) * h.v.dot(f.v);
}

/// Dense discretized operator with a label naming its composition.
struct GridOperator {
    Eigen::MatrixXcd a;
    std::string name;

    GridFn apply(const GridFn& f) const { return GridFn{a * f.v}; }
};

/// Closed-form Fourier transform of a pole expansion under the convention
/// hat f(xi) = int e^{-i x xi} f(x) dx: lower-half-plane poles carry the
/// positive-frequency side, upper poles the negative side. The s = 0 value is
/// the two-sided average.
struct SpectralSymbol {
    std::vector<PoleTerm> lower;
    std::vector<PoleTerm> upper;

    static SpectralSymbol from_expansion(const PoleExpansion& f) {
        SpectralSymbol s;
        for (const auto& t : f.terms()) {
            if (t.q.imag() < 0.0)
                s.lower.push_back(t);
            else
                s.upper.push_back(t);
        }
        return s;
    }

    static SpectralSymbol from_symbol(const RealRationalSymbol& u0) {
        return from_expansion(u0.expansion());
    }

    /// Conjugate symbol (poles reflected across the real axis).
    SpectralSymbol conjugate() const {
        SpectralSymbol s;
        for (const auto& t : lower) s.upper.push_back({std::conj(t.a), std::conj(t.q), t.m});
        for (const auto& t : upper) s.lower.push_back({std::conj(t.a), std::conj(t.q), t.m});
        return s;
    }

    cplx hat(double s) const {
        const cplx two_pi_i(0.0, 2.0 * std::numbers::pi);
        cplx acc(0.0);
        auto side = [&](const std::vector<PoleTerm>& terms, double sign) {
            cplx a(0.0);
            for (const auto& t : terms) {
                double fac = 1.0;
                for (int i = 2; i < t.m; ++i) fac *= double(i);
                a += t.a * std::pow(cplx(0.0, -s), t.m - 1) / fac *
                     std::exp(cplx(0.0, -s) * t.q) * sign;
            }
            return a;
        };
        if (s > 0.0) acc = side(lower, -1.0);
        else if (s < 0.0) acc = side(upper, +1.0);
        else acc = 0.5 * (side(lower, -1.0) + side(upper, +1.0));
        return two_pi_i * acc;
    }
};

/// X* as i times the one-sided difference toward increasing xi, with outflow
/// closure (zero value beyond the cutoff). The resulting -iX* is exactly
/// dissipative on the grid.
inline GridOperator op_xstar(const FourierGrid& g) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(g.m, g.m);
    const cplx i_over_d = cplx(0.0, 1.0) / g.dxi();
    for (int k = 0; k < g.m; ++k) {
        a(k, k) = -i_over_d;
        if (k + 1 < g.m) a(k, k + 1) = i_over_d;
    }
    return {std::move(a), "X*"};
}

/// D as multiplication by xi.
inline GridOperator op_d(const FourierGrid& g) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(g.m, g.m);
    for (int k = 0; k < g.m; ++k) a(k, k) = g.node(k);
    return {std::move(a), "D"};
}

/// Dense Toeplitz kernel K[m,l] = (dxi/2pi) hat(u)(xi_m - xi_l).
inline GridOperator op_toeplitz(const FourierGrid& g, const SpectralSymbol& sym,
                                std::string name = "T") {
    std::vector<cplx> hat(2 * g.m - 1);
    for (int d = -(g.m - 1); d <= g.m - 1; ++d)
        hat[static_cast<std::size_t>(d + g.m - 1)] = sym.hat(d * g.dxi());
    Eigen::MatrixXcd a(g.m, g.m);
    const double w = g.dxi() / (2.0 * std::numbers::pi);
    for (int m = 0; m < g.m; ++m)
        for (int l = 0; l < g.m; ++l) a(m, l) = w * hat[static_cast<std::size_t>(m - l + g.m - 1)];
    return {std::move(a), std::move(name)};
}

inline GridOperator op_toeplitz(const FourierGrid& g, const RealRationalSymbol& u0) {
    return op_toeplitz(g, SpectralSymbol::from_symbol(u0), "T_u0");
}

/// L_{u0} = D - T_{u0}; Hermitian by construction of the kernel.
inline GridOperator op_lax(const FourierGrid& g, const RealRationalSymbol& u0) {
    GridOperator t = op_toeplitz(g, u0);
    GridOperator d = op_d(g);
    return {d.a - t.a, "L_u0"};
}

/// B_u^(n) = i (T_{L^n Pi u} + T_{conj(L^n Pi u)}
///              - sum_{j=0}^{n-1} T_{L^j Pi u} T_{conj(L^{n-1-j} Pi u)}),
/// assembled from the exact Lax symbols; anti-selfadjoint on the grid.
inline GridOperator op_b_n(const FourierGrid& g, const RealRationalSymbol& u0, int n) {
    if (u0.is_zero()) return {Eigen::MatrixXcd::Zero(g.m, g.m), "B_n(0)"};
    const auto w = lax_symbols(u0, n);
    std::vector<GridOperator> t_plus(w.size());
    std::vector<GridOperator> t_minus(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
        const auto s = SpectralSymbol::from_expansion(w[k]);
        t_plus[k] = op_toeplitz(g, s);
        t_minus[k] = op_toeplitz(g, s.conjugate());
    }
    Eigen::MatrixXcd acc = t_plus[static_cast<std::size_t>(n)].a + t_minus[static_cast<std::size_t>(n)].a;
    for (int j = 0; j < n; ++j)
        acc -= t_plus[static_cast<std::size_t>(j)].a * t_minus[static_cast<std::size_t>(n - 1 - j)].a;
    return {cplx(0.0, 1.0) * acc, "B_n"};
}

/// Fourier samples of a Hardy pole expansion.
inline GridFn sample_hardy(const FourierGrid& g, const PoleExpansion& f) {
    if (!f.all_poles_lower()) throw NonDecaying("sample_hardy: function is not Hardy");
    const auto s = SpectralSymbol::from_expansion(f);
    Eigen::VectorXcd v(g.m);
    for (int k = 0; k < g.m; ++k) v(k) = s.hat(g.node(k));
    return {std::move(v)};
}

struct ResolventSolution {
    GridFn h;
    double residual = 0.0;
};

/// Solve (A - z Id) h = rhs by dense LU with partial pivoting.
inline ResolventSolution resolvent_solve(const GridOperator& a, cplx z, const GridFn& rhs) {
    if (!(z.imag() > 0.0)) throw Error("resolvent_solve: need Im z > 0");
    Eigen::MatrixXcd m = a.a;
    m.diagonal().array() -= z;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
    Eigen::VectorXcd h = lu.solve(rhs.v);
    const double rhs_norm = rhs.v.norm();
    const double res = rhs_norm > 0.0 ? (m * h - rhs.v).norm() / rhs_norm : (m * h).norm();
    if (!std::isfinite(res) || res > 1e-6)
        throw SingularSystem("resolvent_solve: discretization breakdown, residual " +
                             std::to_string(res));
    return {GridFn{std::move(h)}, res};
}

/// Boundary trace hat(h)(0+) by quadratic extrapolation from the first three
/// staggered samples.
inline cplx extrapolate_zero(const GridFn& f) {
    if (f.v.size() < 3) throw Error("extrapolate_zero: need at least 3 samples");
    return 15.0 / 8.0 * f.v(0) - 5.0 / 4.0 * f.v(1) + 3.0 / 8.0 * f.v(2);
}

inline Eigen::MatrixXcd matrix_power(const Eigen::MatrixXcd& a, int n) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(a.rows(), a.cols());
    for (int k = 0; k < n; ++k) acc = acc * a;
    return acc;
}

/// Pi u(t,z) = I_+[(X* - (n+1) t L_{u0}^n - z Id)^{-1} Pi u0] / (2 i pi).
/// At t = 0 this reconstructs Pi u0(z).
inline cplx explicit_formula_eval(const RealRationalSymbol& u0, int n, double t, cplx z,
                                  const FourierGrid& g) {
    const GridOperator xs = op_xstar(g);
    Eigen::MatrixXcd a = xs.a;
    if (t != 0.0 && !u0.is_zero()) {
        a -= double(n + 1) * t * matrix_power(op_lax(g, u0).a, n);
    } else if (t != 0.0) {
        a -= double(n + 1) * t * matrix_power(op_d(g).a, n);
    }
    const GridFn rhs = sample_hardy(g, u0.hardy_part());
    const auto sol = resolvent_solve({std::move(a), "X*-(n+1)tL^n"}, z, rhs);
    return extrapolate_zero(sol.h) / cplx(0.0, 2.0 * std::numbers::pi);
}

/// Pi ZD[u0](t,z) = I_+[(X* - (-1)^n (n+1) t T_{u0}^n - z Id)^{-1} Pi u0]/(2 i pi).
inline cplx zd_resolvent_eval(const RealRationalSymbol& u0, int n, double t, cplx z,
                              const FourierGrid& g) {
    const GridOperator xs = op_xstar(g);
    Eigen::MatrixXcd a = xs.a;
    if (t != 0.0 && !u0.is_zero()) {
        const double sign = (n % 2 == 0) ? 1.0 : -1.0;
        a -= sign * double(n + 1) * t * matrix_power(op_toeplitz(g, u0).a, n);
    }
    const GridFn rhs = sample_hardy(g, u0.hardy_part());
    const auto sol = resolvent_solve({std::move(a), "X*-(-1)^n(n+1)tT^n"}, z, rhs);
    return extrapolate_zero(sol.h) / cplx(0.0, 2.0 * std::numbers::pi);
}

/// Small-dispersion resolvent: A_eps = X* - (n+1) t (eps D - T_{u0})^n, the
/// factors multiplied out as dense matrices.
inline cplx eps_formula_eval(const RealRationalSymbol& u0, int n, double t, double eps, cplx z,
                             const FourierGrid& g) {
    const GridOperator xs = op_xstar(g);
    Eigen::MatrixXcd factor = eps * op_d(g).a;
    if (!u0.is_zero()) factor -= op_toeplitz(g, u0).a;
    Eigen::MatrixXcd a = xs.a - double(n + 1) * t * matrix_power(factor, n);
    const GridFn rhs = sample_hardy(g, u0.hardy_part());
    const auto sol = resolvent_solve({std::move(a), "X*-(n+1)t(epsD-T)^n"}, z, rhs);
    return extrapolate_zero(sol.h) / cplx(0.0, 2.0 * std::numbers::pi);
}

/// Largest singular value by power iteration on A^H A.
inline double op_norm_estimate(const GridOperator& a, int iters = 60) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Random(a.a.rows());
    v.normalize();
    double s = 0.0;
    for (int k = 0; k < iters; ++k) {
        v = a.a.adjoint() * (a.a * v);
        s = std::sqrt(v.norm());
        v.normalize();
    }
    return s;
}

/// Anti-selfadjointness defect ||B + B^H|| / ||B|| (Frobenius).
inline double antiselfadjoint_defect(const GridOperator& b) {
    const double nb = b.a.norm();
    if (nb == 0.0) return 0.0;
    return (b.a + b.a.adjoint()).norm() / nb;
}

struct CommutatorReport {
    double rel_residual = 0.0;  // worst case over the test functions
    int n = 0;
};

/// Residual of [X*, B_u^(n)] = -(n+1) L_u^n - i [X*, L_u^{n+1}] applied to
/// interior test bumps, measured on the interior nodes relative to the
/// constituent term norms (the two sides cancel to O(dxi) for u0 = 0, so
/// normalizing by a side would be meaningless there).
inline CommutatorReport commutator_check(const RealRationalSymbol& u0, int n,
                                         const FourierGrid& g) {
    const GridOperator xs = op_xstar(g);
    const Eigen::MatrixXcd l = u0.is_zero() ? op_d(g).a : op_lax(g, u0).a;
    const Eigen::MatrixXcd b = op_b_n(g, u0, n).a;

    const Eigen::MatrixXcd lhs = xs.a * b - b * xs.a;
    const Eigen::MatrixXcd ln = matrix_power(l, n);
    const Eigen::MatrixXcd ln1 = ln * l;
    const Eigen::MatrixXcd comm1 = xs.a * ln1 - ln1 * xs.a;
    const Eigen::MatrixXcd rhs = -double(n + 1) * ln - cplx(0.0, 1.0) * comm1;

    const int lo = static_cast<int>(0.05 * g.m);
    const int hi = static_cast<int>(0.90 * g.m);

    CommutatorReport rep;
    rep.n = n;
    for (double center : {0.30, 0.45, 0.60}) {
        Eigen::VectorXcd f(g.m);
        const double xi0 = center * g.xi_max;
        const double sigma = g.xi_max / 14.0;
        for (int k = 0; k < g.m; ++k) {
            const double s = (g.node(k) - xi0) / sigma;
            f(k) = std::exp(-s * s);
        }
        const auto seg = [&](const Eigen::VectorXcd& v) { return v.segment(lo, hi - lo).norm(); };
        const double num = seg(lhs * f - rhs * f);
        const double den = double(n + 1) * seg(ln * f) + seg(comm1 * f) + seg(lhs * f);
        rep.rel_residual = std::max(rep.rel_residual, den > 0.0 ? num / den : num);
    }
    return rep;
}

}  // namespace bo
