#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "bo/errors.hpp"
#include "bo/grid.hpp"
#include "bo/rational.hpp"

namespace bo {

struct EigenPair {
    double lambda = 0.0;
    GridFn phi;          // normalized in the grid L2 norm
    double residual = 0.0;
};

struct SpectrumResult {
    std::vector<EigenPair> discrete_pairs;  // ascending eigenvalue
    double hermitian_defect = 0.0;          // ||L - L^H|| / ||L||, diagnostic
};

/// Discrete spectrum of L_{u0} below the essential threshold 0: eigenvalues
/// of the symmetrized grid operator accepted only below -10 dxi.
inline SpectrumResult discrete_spectrum(const RealRationalSymbol& u0, const FourierGrid& g) {
    const GridOperator l = op_lax(g, u0);
    SpectrumResult out;
    out.hermitian_defect = (l.a - l.a.adjoint()).norm() / std::max(1e-300, l.a.norm());
    Eigen::MatrixXcd lh = 0.5 * (l.a + l.a.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(lh);
    if (es.info() != Eigen::Success) throw Error("discrete_spectrum: eigensolver failed");

    const double cutoff = -10.0 * g.dxi();
    const double lnorm = std::max(std::abs(es.eigenvalues()(0)),
                                  std::abs(es.eigenvalues()(g.m - 1)));
    const double scale = std::sqrt(2.0 * std::numbers::pi / g.dxi());
    for (int k = 0; k < g.m; ++k) {
        const double lam = es.eigenvalues()(k);
        if (lam >= cutoff) break;  // ascending order
        EigenPair p;
        p.lambda = lam;
        p.phi.v = scale * es.eigenvectors().col(k);
        p.residual = (lh * es.eigenvectors().col(k) - lam * es.eigenvectors().col(k)).norm() /
                     std::max(1e-300, lnorm);
        out.discrete_pairs.push_back(std::move(p));
    }
    return out;
}

struct WuResiduals {
    double lambda = 0.0;
    double modulus_residual = 0.0;     // | |<phi,Pi u0>|^2 + 2 pi lambda | / (2 pi |lambda|)
    double trace_residual = 0.0;       // | lambda I_+(phi) + <phi,Pi u0> | / scale
    double combination_residual = 0.0; // | <Pi u0,phi> I_+(phi)/(2 i pi) + i |
};

inline WuResiduals wu_residuals_for_pair(const FourierGrid& g, const EigenPair& pair,
                                         const GridFn& pu0) {
    WuResiduals r;
    r.lambda = pair.lambda;
    const cplx ip = inner(g, pair.phi, pu0);  // <phi, Pi u0>
    const cplx tr = extrapolate_zero(pair.phi);
    r.modulus_residual = std::abs(std::norm(ip) + 2.0 * std::numbers::pi * pair.lambda) /
                         (2.0 * std::numbers::pi * std::abs(pair.lambda));
    r.trace_residual = std::abs(pair.lambda * tr + ip) /
                       std::max(std::abs(pair.lambda * tr), std::abs(ip));
    const cplx comb = std::conj(ip) * tr / cplx(0.0, 2.0 * std::numbers::pi);
    r.combination_residual = std::abs(comb + cplx(0.0, 1.0));
    return r;
}

/// Residuals of the spectral identities |<phi,Pi u0>|^2 = -2 pi lambda and
/// lambda I_+(phi) = -<phi,Pi u0> for every discrete eigenpair.
inline std::vector<WuResiduals> wu_check(const RealRationalSymbol& u0, const FourierGrid& g) {
    const SpectrumResult sp = discrete_spectrum(u0, g);
    if (sp.discrete_pairs.empty()) throw Error("wu_check: no negative eigenvalue");
    const GridFn pu0 = sample_hardy(g, u0.hardy_part());
    std::vector<WuResiduals> out;
    for (const auto& pair : sp.discrete_pairs) out.push_back(wu_residuals_for_pair(g, pair, pu0));
    return out;
}

/// Lowest eigenpair by shift-inverse iteration: one LU factorization at the
/// target resolution, seeded by a coarse full eigensolve. Orders of magnitude
/// cheaper than the dense eigensolve at M >= 2048.
inline EigenPair lowest_eigenpair(const RealRationalSymbol& u0, const FourierGrid& g) {
    double sigma;
    {
        const FourierGrid gc{g.xi_max, 256};
        const GridOperator lc = op_lax(gc, u0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (lc.a + lc.a.adjoint()),
                                                           Eigen::EigenvaluesOnly);
        sigma = es.eigenvalues()(0);
        if (sigma >= -10.0 * g.dxi())
            throw Error("lowest_eigenpair: no bound state below the essential threshold");
    }
    const GridOperator l = op_lax(g, u0);
    Eigen::MatrixXcd lh = 0.5 * (l.a + l.a.adjoint());
    Eigen::MatrixXcd shifted = lh;
    shifted.diagonal().array() -= sigma;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(shifted);

    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(g.m);
    v.normalize();
    double lambda = sigma;
    for (int it = 0; it < 100; ++it) {
        v = lu.solve(v);
        v.normalize();
        const double next = (v.adjoint() * (lh * v))(0).real();
        if (std::abs(next - lambda) < 1e-14 * std::max(1.0, std::abs(next)) && it > 2) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    EigenPair p;
    p.lambda = lambda;
    p.residual = (lh * v - lambda * v).norm();
    p.phi.v = std::sqrt(2.0 * std::numbers::pi / g.dxi()) * v;
    return p;
}

/// c_{n,p} = (-1)^{n+1} (n+1) / (2 Im p)^n.
inline double soliton_velocity(int n, cplx p) {
    if (n < 1) throw Error("soliton_velocity: n must be >= 1");
    if (!(p.imag() > 0.0)) throw Error("soliton_velocity: Im p must be > 0");
    const double sign = (n % 2 == 0) ? -1.0 : 1.0;
    return sign * double(n + 1) / std::pow(2.0 * p.imag(), n);
}

/// Samples of R_p(y) = 2 Im p / |y + p|^2 on the given abscissae.
inline std::vector<double> traveling_wave(cplx p, const std::vector<double>& ys) {
    if (!(p.imag() > 0.0)) throw Error("traveling_wave: Im p must be > 0");
    std::vector<double> out;
    out.reserve(ys.size());
    for (double y : ys) out.push_back(2.0 * p.imag() / std::norm(y + p));
    return out;
}

struct KernelCheck {
    bool nontrivial = false;
    int dim = 0;
    double component = 0.0;   // fraction of ||Pi u0||^2 carried by the near-kernel
    double min_shift = 0.0;   // min_k |(n+1) lambda_k^n + c| over grid eigenvalues
};

/// Tests whether the discrete kernel of (n+1) L^n + c is nontrivial and how
/// much of Pi u0 lives on it; supports the traveling-wave dichotomy.
inline KernelCheck kernel_orthogonality_check(const RealRationalSymbol& u0, int n, double c,
                                              const FourierGrid& g, double tol = -1.0) {
    if (tol <= 0.0) tol = 0.02 * (1.0 + std::abs(c));
    const GridOperator l = op_lax(g, u0);
    Eigen::MatrixXcd lh = 0.5 * (l.a + l.a.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(lh);
    if (es.info() != Eigen::Success) throw Error("kernel_orthogonality_check: eigensolver failed");

    const GridFn pu0 = sample_hardy(g, u0.hardy_part());
    const double pu0_norm = pu0.norm_l2(g);
    const double pu0_norm_sq = pu0_norm * pu0_norm;

    KernelCheck out;
    out.min_shift = std::numeric_limits<double>::infinity();
    const double w = g.dxi() / (2.0 * std::numbers::pi);
    for (int k = 0; k < g.m; ++k) {
        const double shift = double(n + 1) * std::pow(es.eigenvalues()(k), n) + c;
        out.min_shift = std::min(out.min_shift, std::abs(shift));
        if (std::abs(shift) <= tol) {
            ++out.dim;
            out.component += w * std::norm(es.eigenvectors().col(k).dot(pu0.v)) / pu0_norm_sq;
        }
    }
    out.nontrivial = out.dim > 0;
    return out;
}

}  // namespace bo
