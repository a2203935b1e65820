#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "robba/padic.hpp"

namespace robba {

// Truncated Laurent series over Q_p: coefficients for lo <= n <= trunc, with a
// finite principal part (lo <= 0) and a fixed truncation order.
//
// Every series additionally records what is known about the discarded tail
// (degrees > trunc): `kTailExact` means the object is exactly this polynomial;
// otherwise tail_val is a lower bound for the valuation of the unseen
// coefficients. psi is the one operator whose output in the visible window
// depends on the tail; it converts the tail bound into per-coefficient
// precision caps.
class Series {
public:
    static constexpr long kTailExact = PadicNumber::kValInf;

    Series() : p_(0), trunc_(0), lo_(0), tail_val_(kTailExact) {}
    Series(int p, long trunc);

    static Series zero(int p, long trunc);
    static Series one(int p, long trunc, long prec = PadicNumber::kDefaultPrec);
    static Series monomial(int p, long trunc, long expo, const PadicNumber& c);

    int prime() const { return p_; }
    long trunc() const { return trunc_; }
    long lo() const { return lo_; }
    long tail_val() const { return tail_val_; }
    void set_tail_val(long t) { tail_val_ = t; }

    const PadicNumber& coeff(long n) const;   // exact zero outside stored range
    void set_coeff(long n, const PadicNumber& c);

    bool principal_empty() const;             // no distinguishable-from-0 coeffs below 0
    long min_coeff_valuation() const;         // over stored, distinguishable coeffs (0 if none)
    long min_abs_precision() const;           // kValInf if all coefficients exact

    Series operator-() const;
    Series operator+(const Series& o) const;
    Series operator-(const Series& o) const;
    Series operator*(const Series& o) const;
    Series scaled(const PadicNumber& c) const;
    Series shifted(long k) const;             // multiply by T^k

    // multiplicative inverse; constant term must be distinguishable from zero
    // and the principal part empty.
    Series inverse() const;

    // f(g) mod T^{trunc+1}; f power part only, g power part with v(g(0)) > 0.
    static Series compose(const Series& f, const Series& g);

    static Series one_plus_T_pow(int p, long trunc, const PadicNumber& b);
    static Series log1p_t(int p, long trunc, long prec = PadicNumber::kDefaultPrec);

    Series sigma(const PadicNumber& a) const;  // f((1+T)^a - 1), a unit
    Series phi() const;                        // f((1+T)^p - 1)
    Series psi() const;                        // left inverse of phi
    Series nabla() const;                      // t (1+T) f'
    Series divide_by_t() const;
    PadicNumber residue0() const;              // [T^{-1}] of f/(1+T)

    Series res_units() const;                  // (1 - phi psi) f

    // cap every coefficient at the given absolute precision
    Series capped(long nabs) const;

    bool equals(const Series& o) const;        // coefficientwise, within precision
    // min over coefficients of v(difference); kValInf when identical
    long defect_valuation(const Series& o) const;

    std::string str(int max_terms = 12) const;

    // coefficients of t*(1+T), used by the degree-triangular nabla recurrences:
    // (nabla u)_d = sum_{n < d} u_n * n * s_{d-n}  + d * u_d   (s_1 = 1)
    static std::vector<PadicNumber> nabla_weights(int p, long trunc, long prec);

private:
    int p_;
    long trunc_;
    long lo_;
    std::vector<PadicNumber> c_;  // c_[i] = coefficient of T^{lo_+i}
    long tail_val_;

    void ensure_range(long n);
    void check_compat(const Series& o) const;
    Series mul_schoolbook(const Series& o, long out_tail) const;
    Series mul_packed(const Series& o, long out_tail) const;
};

}  // namespace robba
