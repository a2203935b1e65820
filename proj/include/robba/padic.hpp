#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace robba {

// Element of Q_p at capped absolute precision.
//
// A nonzero value is p^v * u with u a unit known mod p^{r}, so the value is
// known mod p^{v+r}. Values indistinguishable from zero are kept as O(p^N).
// Exact integers and rationals keep a rational shadow, which lets later
// operations re-materialize digits at any precision and gives an exact
// residue mod (p-1) where a Teichmueller exponent is needed.
class PadicNumber {
public:
    static constexpr long kValInf = std::numeric_limits<long>::max();
    static constexpr long kDefaultPrec = 40;

    using Rational = std::pair<mpz_class, mpz_class>;  // num/den, den > 0, reduced

    PadicNumber() : p_(0), v_(0), rprec_(0), u_(0) {}

    static PadicNumber zero(int p);
    static PadicNumber zero_at(int p, long nabs);
    static PadicNumber from_integer(int p, long n, long nabs = kDefaultPrec);
    static PadicNumber from_mpz(int p, const mpz_class& n, long nabs = kDefaultPrec);
    static PadicNumber from_rational(int p, const mpz_class& num, const mpz_class& den,
                                     long nabs = kDefaultPrec);
    // literal: "v=<int>;digits=<d0,d1,...>;prec=<N>", or "123", or "-3/5"
    static PadicNumber parse(int p, const std::string& literal, long nabs = kDefaultPrec);

    int prime() const { return p_; }
    bool valid() const { return p_ != 0; }

    bool is_exact_zero() const { return !exact_zero_ ? false : true; }
    // Indistinguishable from zero at the tracked precision.
    bool is_zero() const { return exact_zero_ || rprec_ == 0; }

    // Lower bound on v_p: exact for distinguishable values, kValInf for exact 0,
    // and the absolute precision for approximate zeros.
    long valuation() const;
    long abs_precision() const { return exact_zero_ ? kValInf : v_ + rprec_; }
    long rel_precision() const { return exact_zero_ ? kValInf : rprec_; }

    const std::optional<Rational>& exact() const { return exact_; }

    PadicNumber operator-() const;
    PadicNumber operator+(const PadicNumber& o) const;
    PadicNumber operator-(const PadicNumber& o) const;
    PadicNumber operator*(const PadicNumber& o) const;
    PadicNumber operator/(const PadicNumber& o) const;

    // Agreement mod p^{min abs_precision}.
    bool equals(const PadicNumber& o) const;
    // Valuation of the difference (kValInf when the difference vanishes exactly).
    long defect_valuation(const PadicNumber& o) const;

    // Cap precision (or re-materialize from the shadow, which can raise it).
    PadicNumber with_precision(long nabs) const;

    // value mod p^k as a canonical integer in [0, p^k); requires v >= 0.
    mpz_class residue_mod(long k) const;

    // (value / p^{vbase}) mod p^K; requires valuation >= vbase and enough precision.
    mpz_class residue_shifted(long vbase, long K) const;
    // value p^{vbase} * res, known mod p^{vbase + K}
    static PadicNumber from_residue(int p, long vbase, long K, const mpz_class& res);

    // omega(r): the (p-1)-st root of unity congruent to r mod p.
    static PadicNumber teichmuller(int p, long residue, long nabs = kDefaultPrec);
    // omega of this unit.
    PadicNumber teichmuller_part() const;

    // log of a 1-unit (v(x-1) >= 1).
    PadicNumber log_1unit() const;
    // exp of a value with v >= 1.
    PadicNumber exp_small() const;

    // integer power (binary powering; negative allowed for units / nonzero v)
    PadicNumber pow_int(long k) const;

    // omega(a)^{b mod (p-1)} * exp(b log<a>), for a unit `this` and b in Z_p.
    // The Teichmueller exponent needs an exact shadow of b with denominator
    // invertible mod (p-1).
    PadicNumber unit_power(const PadicNumber& b) const;

    // C(b, n) = b(b-1)...(b-n+1)/n!
    static PadicNumber binomial(const PadicNumber& b, unsigned long n);

    std::string str() const;

    static mpz_class pow_p(int p, long k);  // p^k, k >= 0

private:
    int p_;
    long v_;        // valuation (or O(p^v_) marker when rprec_ == 0)
    long rprec_;    // relative precision; unit known mod p^rprec_
    mpz_class u_;   // unit residue, 0 <= u_ < p^rprec_, u_ % p != 0 when rprec_ > 0
    bool exact_zero_ = false;
    std::optional<Rational> exact_;

    static PadicNumber make(int p, long v, long rprec, mpz_class u,
                            std::optional<Rational> ex = std::nullopt);
    static PadicNumber materialize(int p, const Rational& r, long nabs);
    void check_same(const PadicNumber& o) const;
};

inline long val_of_mpz(const mpz_class& n, int p) {
    if (n == 0) return PadicNumber::kValInf;
    mpz_class q = n;
    long v = 0;
    while (mpz_divisible_ui_p(q.get_mpz_t(), static_cast<unsigned long>(p))) {
        mpz_divexact_ui(q.get_mpz_t(), q.get_mpz_t(), static_cast<unsigned long>(p));
        ++v;
    }
    return v;
}

}  // namespace robba
