#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "bo/errors.hpp"
#include "bo/parallel.hpp"
#include "bo/polyroots.hpp"
#include "bo/rational.hpp"

namespace bo {

/// One scanner record: the real branches of the characteristic equation at
/// (t, x) and the alternating-sum value. A critical sample carries no value.
struct ZdSample {
    double t = 0.0;
    double x = 0.0;
    int n = 1;
    std::vector<double> real_branches;  // sorted ascending, odd count when valid
    int ell = 0;                        // branch count = 2*ell + 1
    double value = 0.0;
    bool critical = false;
};

namespace detail {

/// sign(d/dy G) at a branch must be (-1)^k along the sorted real branches.
inline bool alternation_holds(const RealRationalSymbol& u0, int n, double t,
                              const std::vector<double>& branches) {
    const double sgn_n = (n % 2 == 0) ? 1.0 : -1.0;
    for (std::size_t k = 0; k < branches.size(); ++k) {
        const cplx u = u0.eval(branches[k]);
        const cplx du = u0.eval_derivative(branches[k]);
        const double g = 1.0 - sgn_n * double(n) * double(n + 1) * t *
                                   std::pow(u.real(), n - 1) * du.real();
        const double want = (k % 2 == 0) ? 1.0 : -1.0;
        if (g * want <= 0.0) return false;
    }
    return true;
}

inline RootSet char_roots(const RealRationalSymbol& u0, int n, double t, cplx z) {
    const auto [p0, q0] = u0.to_pq();
    const ComplexPoly cp = char_poly(p0, q0, n, t, z);
    const int want = 2 * n * static_cast<int>(u0.pole_count()) + 1;
    if (cp.degree() != want) throw DegreeCollapse("characteristic polynomial lost degree");
    RootSet rs = find_roots(cp);

    // Newton polish against the factored form (y-z) Q0^n - sgn (n+1) t P0^n.
    // The expanded coefficients can span ten orders of magnitude for wide
    // pole layouts; the factored evaluation stays well conditioned near the
    // poles, where the sum-rule and Cramer cancellations are most delicate.
    const ComplexPoly dp0 = p0.derivative();
    const ComplexPoly dq0 = q0.derivative();
    const double sgn = (n % 2 == 0) ? 1.0 : -1.0;
    const cplx beta = sgn * double(n + 1) * t;
    for (cplx& r : rs.roots) {
        for (int it = 0; it < 3; ++it) {
            const cplx qv = q0.eval(r), pv = p0.eval(r);
            const cplx qn1 = std::pow(qv, n - 1), pn1 = std::pow(pv, n - 1);
            const cplx g = (r - z) * qn1 * qv - beta * pn1 * pv;
            const cplx dg = qn1 * qv + double(n) * (r - z) * qn1 * dq0.eval(r) -
                            beta * double(n) * pn1 * dp0.eval(r);
            if (dg == cplx(0.0)) break;
            const cplx step = g / dg;
            if (std::abs(step) > 0.1 * std::max(1.0, std::abs(r))) break;
            r -= step;
        }
    }
    for (std::size_t i = 0; i < rs.roots.size(); ++i)
        rs.residuals[i] = root_residual(cp, rs.roots[i]);
    return rs;
}

}  // namespace detail

/// Closed-form value of the all-roots sum sum_j u0(y_j) over the 2nN+1
/// characteristic roots. Zero for n >= 2; for n = 1 the degree-one power of
/// Q0 leaves a surviving boundary term and the sum equals (N x - sum Re p)/t.
inline cplx all_roots_u0_sum_closed_form(const RealRationalSymbol& u0, int n, double t, cplx z) {
    if (n >= 2) return cplx(0.0);
    double re_sum = 0.0;
    for (const auto& pl : u0.poles) re_sum += pl.p.real();
    return (double(u0.pole_count()) * z - re_sum) / t;
}

/// Zero-dispersion value at real (t, x): the alternating sum of u0 over the
/// sorted real branches of y - (-1)^n (n+1) t u0(y)^n = x. Critical samples
/// (root collision, failed pairing, broken sign alternation) are flagged and
/// carry no value; criticality is data, not failure.
inline ZdSample zd_value(const RealRationalSymbol& u0, int n, double t, double x) {
    ZdSample s;
    s.t = t;
    s.x = x;
    s.n = n;
    if (u0.is_zero() || t == 0.0) {
        s.real_branches = {x};
        s.ell = 0;
        s.value = u0.is_zero() ? 0.0 : u0.eval(x).real();
        return s;
    }
    RootSet rs = detail::char_roots(u0, n, t, x);
    if (!rs.converged) {
        s.critical = true;
        return s;
    }
    rs = classify(std::move(rs), 1.0);
    if (rs.ambiguous || rs.real_roots.empty() || rs.real_roots.size() % 2 == 0 ||
        !detail::alternation_holds(u0, n, t, rs.real_roots)) {
        s.critical = true;
        return s;
    }
    s.real_branches = rs.real_roots;
    s.ell = static_cast<int>((rs.real_roots.size() - 1) / 2);
    double acc = 0.0;
    for (std::size_t k = 0; k < rs.real_roots.size(); ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        acc += sign * u0.eval(rs.real_roots[k]).real();
    }
    s.value = acc;
    return s;
}

/// Uniform scan over [x_min, x_max]; samples are independent and distributed
/// across workers, merged in order.
inline std::vector<ZdSample> zd_scan(const RealRationalSymbol& u0, int n, double t, double x_min,
                                     double x_max, int count) {
    if (count < 2) throw Error("zd_scan: need count >= 2");
    std::vector<ZdSample> out(static_cast<std::size_t>(count));
    const double dx = (x_max - x_min) / (count - 1);
    parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) {
        out[i] = zd_value(u0, n, t, x_min + dx * static_cast<double>(i));
    });
    return out;
}

namespace detail {

inline int branch_count(const RealRationalSymbol& u0, int n, double t, double x) {
    const ZdSample s = zd_value(u0, n, t, x);
    return s.critical ? -1 : static_cast<int>(s.real_branches.size());
}

}  // namespace detail

/// Critical abscissae in [x_min, x_max], located by bisection on the
/// branch-count change, refined to absolute width 1e-8.
inline std::vector<double> critical_set(const RealRationalSymbol& u0, int n, double t,
                                        double x_min, double x_max, int coarse_count = 1024) {
    std::vector<double> out;
    if (u0.is_zero() || t == 0.0) return out;
    const double dx = (x_max - x_min) / (coarse_count - 1);
    int prev = detail::branch_count(u0, n, t, x_min);
    double prev_x = x_min;
    for (int i = 1; i < coarse_count; ++i) {
        const double x = x_min + dx * i;
        const int cur = detail::branch_count(u0, n, t, x);
        if (cur != prev) {
            double lo = prev_x;
            double hi = x;
            int lo_count = prev;
            while (hi - lo > 1e-8) {
                const double mid = 0.5 * (lo + hi);
                const int mid_count = detail::branch_count(u0, n, t, mid);
                if (mid_count == lo_count)
                    lo = mid;
                else
                    hi = mid;
            }
            out.push_back(0.5 * (lo + hi));
        }
        prev = cur;
        prev_x = x;
    }
    return out;
}

/// First breaking time of the n-th flow for t > 0: 1 / max_y of the mapped
/// slope d/dy[(-1)^n (n+1) u0^n], located by a dense scan with parabolic
/// refinement. Returns infinity when the graph never folds for t > 0.
inline double first_breaking_time(const RealRationalSymbol& u0, int n, double y_half_width = 0.0,
                                  int samples = 20000) {
    if (u0.is_zero()) return std::numeric_limits<double>::infinity();
    if (y_half_width <= 0.0) {
        double span = 0.0;
        for (const auto& pl : u0.poles)
            span = std::max(span, std::abs(pl.p.real()) + 10.0 * pl.p.imag());
        y_half_width = std::max(10.0, 2.0 * span);
    }
    const double sgn_n = (n % 2 == 0) ? 1.0 : -1.0;
    auto slope = [&](double y) {
        const double u = u0.eval(y).real();
        const double du = u0.eval_derivative(y).real();
        return sgn_n * double(n) * double(n + 1) * std::pow(u, n - 1) * du;
    };
    double best = 0.0;
    double best_y = 0.0;
    const double dy = 2.0 * y_half_width / samples;
    for (int i = 0; i <= samples; ++i) {
        const double y = -y_half_width + dy * i;
        const double v = slope(y);
        if (v > best) {
            best = v;
            best_y = y;
        }
    }
    if (best <= 0.0) return std::numeric_limits<double>::infinity();
    // Parabolic refinement around the grid maximum.
    double a = best_y - dy, b = best_y + dy;
    for (int it = 0; it < 60; ++it) {
        const double m1 = a + (b - a) / 3.0;
        const double m2 = b - (b - a) / 3.0;
        if (slope(m1) < slope(m2))
            a = m1;
        else
            b = m2;
    }
    return 1.0 / slope(0.5 * (a + b));
}

/// lambda(t,z) from the (nN+1) x (nN+1) linear system built on the
/// upper-half-plane roots of the characteristic equation, solved by dense LU.
/// Equals Pi ZD[u0](t,z).
inline cplx lambda_cramer(const RealRationalSymbol& u0, int n, double t, cplx z) {
    if (!(z.imag() > 0.0)) throw Error("lambda_cramer: need Im z > 0");
    if (u0.is_zero()) return cplx(0.0);
    if (t == 0.0) throw DegenerateSystem("lambda_cramer: t = 0 puts roots at the poles");

    RootSet rs = detail::char_roots(u0, n, t, z);
    if (!rs.converged) throw DegenerateSystem("lambda_cramer: root finding did not converge");

    const int big_n = static_cast<int>(u0.pole_count());
    const int size = n * big_n + 1;
    std::vector<cplx> upper;
    for (cplx r : rs.roots)
        if (r.imag() > 0.0) upper.push_back(r);
    if (static_cast<int>(upper.size()) != size)
        throw DegenerateSystem("lambda_cramer: expected nN+1 upper-half-plane roots");

    for (std::size_t i = 0; i < upper.size(); ++i) {
        for (std::size_t j = i + 1; j < upper.size(); ++j)
            if (std::abs(upper[i] - upper[j]) <= 1e-10 * std::max(1.0, std::abs(upper[i])))
                throw DegenerateSystem("lambda_cramer: coinciding roots");
        for (const auto& pl : u0.poles)
            if (std::abs(upper[i] - pl.p) <= 1e-10 * std::max(1.0, std::abs(pl.p)))
                throw DegenerateSystem("lambda_cramer: root collides with a pole");
    }

    Eigen::MatrixXcd a(size, size);
    Eigen::VectorXcd rhs(size);
    for (int i = 0; i < size; ++i) {
        const cplx y = upper[static_cast<std::size_t>(i)];
        const cplx u = u0.eval(y);
        int col = 0;
        cplx upow(1.0);
        for (int m = 0; m < n; ++m) {
            for (int nu = 0; nu < big_n; ++nu)
                a(i, col++) = upow / (y - u0.poles[static_cast<std::size_t>(nu)].p);
            upow *= u;
        }
        a(i, col) = cplx(1.0);
        rhs(i) = u;
    }
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    const Eigen::VectorXcd sol = lu.solve(rhs);
    const double res = (a * sol - rhs).norm() / std::max(1e-300, rhs.norm());
    if (!std::isfinite(res) || res > 1e-8)
        throw DegenerateSystem("lambda_cramer: ill-conditioned system, residual " +
                               std::to_string(res));
    return sol(size - 1);
}

/// The Vandermonde-reduced value sum_k u0(y_2k) over the nN+1 upper roots;
/// the independent route that lambda_cramer must reproduce. Requires n >= 2:
/// the missing-power Vandermonde reduction degenerates for n = 1, where the
/// polynomial family in the coefficient matrix loses linear independence.
inline cplx lambda_root_sum(const RealRationalSymbol& u0, int n, double t, cplx z) {
    if (n < 2) throw Error("lambda_root_sum: the root-sum reduction requires n >= 2");
    if (!(z.imag() > 0.0)) throw Error("lambda_root_sum: need Im z > 0");
    if (u0.is_zero()) return cplx(0.0);
    if (t == 0.0) throw DegenerateSystem("lambda_root_sum: t = 0 puts roots at the poles");
    RootSet rs = detail::char_roots(u0, n, t, z);
    cplx acc(0.0);
    int count = 0;
    for (cplx r : rs.roots) {
        if (r.imag() > 0.0) {
            acc += u0.eval(r);
            ++count;
        }
    }
    if (count != n * static_cast<int>(u0.pole_count()) + 1)
        throw DegenerateSystem("lambda_root_sum: expected nN+1 upper-half-plane roots");
    return acc;
}

/// Boundary-limit oracle 2 Re lambda(t, x + i delta) extrapolated to delta=0
/// with the fixed delta ladder {1e-3,1e-4,1e-5} * (1+|x|).
inline double zd_boundary_oracle(const RealRationalSymbol& u0, int n, double t, double x) {
    const double scale = 1.0 + std::abs(x);
    const double d1 = 1e-3 * scale, d2 = 1e-4 * scale, d3 = 1e-5 * scale;
    const double v1 = 2.0 * lambda_cramer(u0, n, t, cplx(x, d1)).real();
    const double v2 = 2.0 * lambda_cramer(u0, n, t, cplx(x, d2)).real();
    const double v3 = 2.0 * lambda_cramer(u0, n, t, cplx(x, d3)).real();
    // Lagrange extrapolation to delta = 0 through the three samples.
    const double w1 = d2 * d3 / ((d1 - d2) * (d1 - d3));
    const double w2 = d1 * d3 / ((d2 - d1) * (d2 - d3));
    const double w3 = d1 * d2 / ((d3 - d1) * (d3 - d2));
    return w1 * v1 + w2 * v2 + w3 * v3;
}

/// Relative residual of det(V~) = (sum_k v_k) det(V) for the missing-power
/// Vandermonde pair, both determinants by LU.
inline double vandermonde_ratio_check(const std::vector<cplx>& v) {
    const int s = static_cast<int>(v.size());
    if (s < 1) throw Error("vandermonde_ratio_check: empty input");
    for (int i = 0; i < s; ++i)
        for (int j = i + 1; j < s; ++j)
            if (v[static_cast<std::size_t>(i)] == v[static_cast<std::size_t>(j)])
                throw Error("vandermonde_ratio_check: entries must be distinct");

    Eigen::MatrixXcd vm(s, s), vt(s, s);
    for (int k = 0; k < s; ++k) {
        cplx pw(1.0);
        for (int c = 0; c < s; ++c) {
            vm(k, c) = pw;
            vt(k, c) = pw;
            pw *= v[static_cast<std::size_t>(k)];
        }
        vt(k, s - 1) = pw;  // skip degree s-1, land on degree s
    }
    const cplx det_v = Eigen::PartialPivLU<Eigen::MatrixXcd>(vm).determinant();
    const cplx det_vt = Eigen::PartialPivLU<Eigen::MatrixXcd>(vt).determinant();
    cplx vsum(0.0);
    double vabs = 0.0;
    for (cplx x : v) {
        vsum += x;
        vabs += std::abs(x);
    }
    const double denom = std::abs(det_v) * std::max(vabs, 1.0) + std::abs(det_vt);
    if (denom == 0.0) return 0.0;
    return std::abs(det_vt - vsum * det_v) / denom;
}

/// Normalized residual of the all-roots sum rule (t != 0): the sum vanishes
/// for n >= 2 and equals the n = 1 closed form otherwise.
inline double sum_rule_check(const RealRationalSymbol& u0, int n, double t, double x) {
    if (t == 0.0) throw Error("sum_rule_check: identity requires t != 0");
    if (u0.is_zero()) return 0.0;
    RootSet rs = detail::char_roots(u0, n, t, x);
    cplx acc(0.0);
    double max_term = 0.0;
    for (cplx r : rs.roots) {
        const cplx u = u0.eval(r);
        acc += u;
        max_term = std::max(max_term, std::abs(u));
    }
    const cplx expected = all_roots_u0_sum_closed_form(u0, n, t, cplx(x));
    return std::abs(acc - expected) / (1.0 + max_term + std::abs(expected));
}

struct ZdConsistency {
    double alternating = 0.0;     // sum over real branches with signs
    double partition = 0.0;       // 2 sum_{even reals} + sum_{complex roots}
    double two_re_lambda = 0.0;   // lambda + conj(lambda) from the upper roots
    double max_deviation = 0.0;
    bool skipped = false;
};

/// Three-way identity check between the alternating sum, the real/complex
/// partition and 2 Re lambda at a non-critical real x.
inline ZdConsistency consistency_zd(const RealRationalSymbol& u0, int n, double t, double x) {
    ZdConsistency r;
    if (t == 0.0 || u0.is_zero()) {
        r.skipped = true;  // Cramer route degenerates at t = 0
        return r;
    }
    const ZdSample s = zd_value(u0, n, t, x);
    if (s.critical) throw DegenerateSystem("consistency_zd: critical sample");
    r.alternating = s.value;

    RootSet rs = classify(detail::char_roots(u0, n, t, x), 1.0);
    double even_reals = 0.0;
    for (std::size_t k = 0; k < rs.real_roots.size(); k += 2)
        even_reals += u0.eval(rs.real_roots[k]).real();
    cplx complex_sum(0.0);
    cplx upper_sum(0.0);
    for (const auto& pr : rs.conj_pairs) {
        complex_sum += u0.eval(pr.first) + u0.eval(pr.second);
        upper_sum += u0.eval(pr.first);
    }
    // For n = 1 the all-roots sum does not vanish; the partition forms shift
    // by its closed-form value relative to the alternating sum.
    const double shift = all_roots_u0_sum_closed_form(u0, n, t, cplx(x)).real();
    r.partition = 2.0 * even_reals + complex_sum.real() - shift;
    const cplx lambda = cplx(even_reals, 0.0) + upper_sum;
    r.two_re_lambda = 2.0 * lambda.real() - shift;
    r.max_deviation = std::max({std::abs(r.alternating - r.partition),
                                std::abs(r.alternating - r.two_re_lambda),
                                std::abs(r.partition - r.two_re_lambda)});
    return r;
}

}  // namespace bo
