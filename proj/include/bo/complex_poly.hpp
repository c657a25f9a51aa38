#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <span>
#include <vector>

#include "bo/errors.hpp"

namespace bo {

using cplx = std::complex<double>;

/// Dense polynomial over complex scalars, coefficients stored in ascending
/// degree. The zero polynomial has an empty coefficient vector and degree -1.
class ComplexPoly {
  public:
    ComplexPoly() = default;

    ComplexPoly(std::initializer_list<cplx> ascending) : coeffs_(ascending) { trim(); }

    explicit ComplexPoly(std::vector<cplx> ascending) : coeffs_(std::move(ascending)) { trim(); }

    static ComplexPoly constant(cplx c) { return ComplexPoly{c}; }

    /// The monomial y.
    static ComplexPoly variable() { return ComplexPoly{cplx(0.0), cplx(1.0)}; }

    /// lead * prod_k (y - roots[k])
    static ComplexPoly from_roots(std::span<const cplx> roots, cplx lead = cplx(1.0)) {
        ComplexPoly p = constant(lead);
        for (cplx r : roots) p = p * ComplexPoly{-r, cplx(1.0)};
        return p;
    }

    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_zero() const { return coeffs_.empty(); }

    const std::vector<cplx>& coeffs() const { return coeffs_; }

    cplx coeff(int k) const {
        if (k < 0 || k >= static_cast<int>(coeffs_.size())) return cplx(0.0);
        return coeffs_[static_cast<std::size_t>(k)];
    }

    cplx leading() const { return coeffs_.empty() ? cplx(0.0) : coeffs_.back(); }

    /// Horner evaluation.
    cplx eval(cplx y) const {
        cplx acc(0.0);
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * y + *it;
        return acc;
    }

    /// Scale used for relative residuals: sum_k |a_k| |y|^k.
    double eval_scale(cplx y) const {
        double acc = 0.0;
        double yp = 1.0;
        const double ay = std::abs(y);
        for (const cplx& c : coeffs_) {
            acc += std::abs(c) * yp;
            yp *= ay;
        }
        return acc;
    }

    ComplexPoly derivative() const {
        if (coeffs_.size() <= 1) return {};
        std::vector<cplx> d(coeffs_.size() - 1);
        for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = double(k) * coeffs_[k];
        return ComplexPoly(std::move(d));
    }

    ComplexPoly operator+(const ComplexPoly& o) const {
        std::vector<cplx> s(std::max(coeffs_.size(), o.coeffs_.size()), cplx(0.0));
        for (std::size_t k = 0; k < coeffs_.size(); ++k) s[k] += coeffs_[k];
        for (std::size_t k = 0; k < o.coeffs_.size(); ++k) s[k] += o.coeffs_[k];
        return ComplexPoly(std::move(s));
    }

    ComplexPoly operator-(const ComplexPoly& o) const { return *this + (o * cplx(-1.0)); }

    ComplexPoly operator*(const ComplexPoly& o) const {
        if (is_zero() || o.is_zero()) return {};
        std::vector<cplx> s(coeffs_.size() + o.coeffs_.size() - 1, cplx(0.0));
        for (std::size_t i = 0; i < coeffs_.size(); ++i)
            for (std::size_t j = 0; j < o.coeffs_.size(); ++j) s[i + j] += coeffs_[i] * o.coeffs_[j];
        return ComplexPoly(std::move(s));
    }

    ComplexPoly operator*(cplx s) const {
        std::vector<cplx> c = coeffs_;
        for (cplx& a : c) a *= s;
        return ComplexPoly(std::move(c));
    }

    ComplexPoly pow(int n) const {
        ComplexPoly acc = constant(cplx(1.0));
        for (int k = 0; k < n; ++k) acc = acc * (*this);
        return acc;
    }

    /// Largest imaginary part among coefficients, for real-coefficient checks.
    double max_imag() const {
        double m = 0.0;
        for (const cplx& c : coeffs_) m = std::max(m, std::abs(c.imag()));
        return m;
    }

    /// Drop the imaginary parts (valid once max_imag() has been checked).
    ComplexPoly real_part() const {
        std::vector<cplx> c = coeffs_;
        for (cplx& a : c) a = cplx(a.real(), 0.0);
        return ComplexPoly(std::move(c));
    }

  private:
    void trim() {
        while (!coeffs_.empty() && coeffs_.back() == cplx(0.0)) coeffs_.pop_back();
    }

    std::vector<cplx> coeffs_;
};

inline ComplexPoly operator*(cplx s, const ComplexPoly& p) { return p * s; }

}  // namespace bo
