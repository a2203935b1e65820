#include "robba/padic.hpp"

#include <algorithm>
#include <sstream>

namespace robba {

namespace {

void normalize_rational(mpz_class& num, mpz_class& den) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    if (den < 0) { num = -num; den = -den; }
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    if (g != 0 && g != 1) { num /= g; den /= g; }
}

// shadows are dropped once they stop being cheap
bool rat_small(const PadicNumber::Rational& r) {
    return mpz_sizeinbase(r.first.get_mpz_t(), 2) < 512 &&
           mpz_sizeinbase(r.second.get_mpz_t(), 2) < 512;
}

std::optional<PadicNumber::Rational> rat_add(const std::optional<PadicNumber::Rational>& a,
                                             const std::optional<PadicNumber::Rational>& b,
                                             bool negate_b) {
    if (!a || !b || !rat_small(*a) || !rat_small(*b)) return std::nullopt;
    mpz_class num = a->first * b->second + (negate_b ? -1 : 1) * b->first * a->second;
    mpz_class den = a->second * b->second;
    normalize_rational(num, den);
    return PadicNumber::Rational{num, den};
}

std::optional<PadicNumber::Rational> rat_mul(const std::optional<PadicNumber::Rational>& a,
                                             const std::optional<PadicNumber::Rational>& b) {
    if (!a || !b || !rat_small(*a) || !rat_small(*b)) return std::nullopt;
    mpz_class num = a->first * b->first;
    mpz_class den = a->second * b->second;
    normalize_rational(num, den);
    return PadicNumber::Rational{num, den};
}

std::optional<PadicNumber::Rational> rat_div(const std::optional<PadicNumber::Rational>& a,
                                             const std::optional<PadicNumber::Rational>& b) {
    if (!a || !b || b->first == 0 || !rat_small(*a) || !rat_small(*b)) return std::nullopt;
    mpz_class num = a->first * b->second;
    mpz_class den = a->second * b->first;
    normalize_rational(num, den);
    return PadicNumber::Rational{num, den};
}

}  // namespace

mpz_class PadicNumber::pow_p(int p, long k) {
    if (k < 0) throw std::invalid_argument("pow_p: negative exponent");
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(k));
    return r;
}

PadicNumber PadicNumber::make(int p, long v, long rprec, mpz_class u,
                              std::optional<Rational> ex) {
    PadicNumber x;
    x.p_ = p;
    if (rprec <= 0) {
        x.v_ = v + rprec;  // nabs preserved
        x.rprec_ = 0;
        x.u_ = 0;
        x.exact_ = std::move(ex);
        return x;
    }
    // strip p-powers the unit may have picked up
    mpz_class P = pow_p(p, rprec);
    mpz_mod(u.get_mpz_t(), u.get_mpz_t(), P.get_mpz_t());
    if (u == 0) {
        x.v_ = v + rprec;
        x.rprec_ = 0;
        x.u_ = 0;
        x.exact_ = std::move(ex);
        return x;
    }
    long e = val_of_mpz(u, p);
    if (e > 0) {
        mpz_class pe = pow_p(p, e);
        mpz_divexact(u.get_mpz_t(), u.get_mpz_t(), pe.get_mpz_t());
        v += e;
        rprec -= e;
        P = pow_p(p, rprec);
        mpz_mod(u.get_mpz_t(), u.get_mpz_t(), P.get_mpz_t());
    }
    x.v_ = v;
    x.rprec_ = rprec;
    x.u_ = u;
    x.exact_ = std::move(ex);
    return x;
}

PadicNumber PadicNumber::zero(int p) {
    PadicNumber x;
    x.p_ = p;
    x.exact_zero_ = true;
    x.exact_ = Rational{0, 1};
    return x;
}

PadicNumber PadicNumber::zero_at(int p, long nabs) {
    PadicNumber x;
    x.p_ = p;
    x.v_ = nabs;
    x.rprec_ = 0;
    return x;
}

PadicNumber PadicNumber::materialize(int p, const Rational& r, long nabs) {
    if (r.first == 0) return zero(p);
    long vn = val_of_mpz(r.first, p);
    long vd = val_of_mpz(r.second, p);
    long v = vn - vd;
    long rp = nabs - v;
    if (rp <= 0) return zero_at(p, nabs);
    mpz_class num = r.first / pow_p(p, vn);
    mpz_class den = r.second / pow_p(p, vd);
    mpz_class P = pow_p(p, rp);
    mpz_class deninv;
    if (mpz_invert(deninv.get_mpz_t(), den.get_mpz_t(), P.get_mpz_t()) == 0)
        throw std::invalid_argument("denominator not invertible");
    mpz_class u = (num % P) * deninv % P;
    if (u < 0) u += P;
    PadicNumber x = make(p, v, rp, u, r);
    return x;
}

PadicNumber PadicNumber::from_integer(int p, long n, long nabs) {
    return materialize(p, Rational{mpz_class(n), mpz_class(1)}, nabs);
}

PadicNumber PadicNumber::from_mpz(int p, const mpz_class& n, long nabs) {
    return materialize(p, Rational{n, mpz_class(1)}, nabs);
}

PadicNumber PadicNumber::from_rational(int p, const mpz_class& num, const mpz_class& den,
                                       long nabs) {
    mpz_class n = num, d = den;
    normalize_rational(n, d);
    return materialize(p, Rational{n, d}, nabs);
}

long PadicNumber::valuation() const {
    if (exact_zero_) return kValInf;
    if (rprec_ == 0) return v_;  // lower bound
    return v_;
}

void PadicNumber::check_same(const PadicNumber& o) const {
    if (p_ != o.p_) throw std::invalid_argument("mixed-prime arithmetic");
}

PadicNumber PadicNumber::operator-() const {
    if (exact_zero_) return *this;
    if (rprec_ == 0) return *this;
    mpz_class P = pow_p(p_, rprec_);
    PadicNumber x = make(p_, v_, rprec_, P - u_,
                         exact_ ? std::optional<Rational>(Rational{-exact_->first, exact_->second})
                                : std::nullopt);
    return x;
}

PadicNumber PadicNumber::operator+(const PadicNumber& o) const {
    check_same(o);
    if (exact_zero_) return o;
    if (o.exact_zero_) return *this;
    long nabs = std::min(abs_precision(), o.abs_precision());
    if (rprec_ == 0 && o.rprec_ == 0) return zero_at(p_, nabs);
    auto ex = rat_add(exact_, o.exact_, false);
    if (ex) return materialize(p_, *ex, nabs);
    long v = std::min(v_, o.v_);
    long rp = nabs - v;
    if (rp <= 0) return zero_at(p_, nabs);
    mpz_class P = pow_p(p_, rp);
    mpz_class s = 0;
    if (rprec_ > 0) s += u_ * pow_p(p_, v_ - v);
    if (o.rprec_ > 0) s += o.u_ * pow_p(p_, o.v_ - v);
    mpz_mod(s.get_mpz_t(), s.get_mpz_t(), P.get_mpz_t());
    return make(p_, v, rp, s);
}

PadicNumber PadicNumber::operator-(const PadicNumber& o) const { return *this + (-o); }

PadicNumber PadicNumber::operator*(const PadicNumber& o) const {
    check_same(o);
    if (exact_zero_ || o.exact_zero_) return zero(p_);
    auto ex = rat_mul(exact_, o.exact_);
    long rp = std::min(rprec_, o.rprec_);
    long v = v_ + o.v_;
    if (ex) return materialize(p_, *ex, v + rp);
    if (rp <= 0) return zero_at(p_, v);
    mpz_class P = pow_p(p_, rp);
    mpz_class u = u_ * o.u_;
    mpz_mod(u.get_mpz_t(), u.get_mpz_t(), P.get_mpz_t());
    return make(p_, v, rp, u);
}

PadicNumber PadicNumber::operator/(const PadicNumber& o) const {
    check_same(o);
    if (o.is_zero()) throw std::domain_error("precision-zero divisor");
    if (exact_zero_) return zero(p_);
    auto ex = rat_div(exact_, o.exact_);
    long rp = std::min(rprec_, o.rprec_);
    long v = v_ - o.v_;
    if (ex) return materialize(p_, *ex, v + rp);
    if (rp <= 0) return zero_at(p_, v);
    mpz_class P = pow_p(p_, rp);
    mpz_class inv;
    mpz_invert(inv.get_mpz_t(), o.u_.get_mpz_t(), P.get_mpz_t());
    mpz_class u = u_ * inv;
    mpz_mod(u.get_mpz_t(), u.get_mpz_t(), P.get_mpz_t());
    return make(p_, v, rp, u);
}

bool PadicNumber::equals(const PadicNumber& o) const {
    return (*this - o).is_zero();
}

long PadicNumber::defect_valuation(const PadicNumber& o) const {
    PadicNumber d = *this - o;
    if (d.is_exact_zero()) return kValInf;
    return d.valuation();
}

PadicNumber PadicNumber::with_precision(long nabs) const {
    if (exact_zero_) return *this;
    if (exact_) return materialize(p_, *exact_, nabs);
    if (nabs >= abs_precision()) return *this;  // cannot invent digits
    long rp = nabs - v_;
    if (rp <= 0) return zero_at(p_, nabs);
    mpz_class P = pow_p(p_, rp);
    mpz_class u = u_ % P;
    return make(p_, v_, rp, u);
}

mpz_class PadicNumber::residue_mod(long k) const {
    if (k < 0) throw std::invalid_argument("residue_mod: negative modulus");
    if (is_exact_zero()) return mpz_class(0);
    if (v_ < 0) throw std::domain_error("residue_mod: negative valuation");
    if (!exact_ && abs_precision() < k) throw std::domain_error("residue_mod: insufficient precision");
    PadicNumber w = exact_ ? materialize(p_, *exact_, k) : *this;
    if (w.rprec_ == 0) return mpz_class(0);
    mpz_class P = pow_p(p_, k);
    mpz_class r = w.u_ * pow_p(p_, w.v_);
    mpz_mod(r.get_mpz_t(), r.get_mpz_t(), P.get_mpz_t());
    return r;
}

mpz_class PadicNumber::residue_shifted(long vbase, long K) const {
    if (K <= 0) return mpz_class(0);
    PadicNumber w = exact_ ? materialize(p_, *exact_, vbase + K) : *this;
    if (w.exact_zero_ || w.rprec_ == 0) return mpz_class(0);
    if (w.v_ < vbase) throw std::domain_error("residue_shifted: valuation below base");
    if (w.abs_precision() < vbase + K) throw std::domain_error("residue_shifted: insufficient precision");
    mpz_class P = pow_p(p_, K);
    mpz_class r = w.u_ * pow_p(p_, w.v_ - vbase);
    mpz_mod(r.get_mpz_t(), r.get_mpz_t(), P.get_mpz_t());
    return r;
}

PadicNumber PadicNumber::from_residue(int p, long vbase, long K, const mpz_class& res) {
    if (K <= 0) return zero_at(p, vbase + K);
    return make(p, vbase, K, res);
}

PadicNumber PadicNumber::teichmuller(int p, long residue, long nabs) {
    long r = residue % p;
    if (r < 0) r += p;
    if (r == 0) throw std::invalid_argument("teichmuller of residue 0");
    if (r == 1) return from_integer(p, 1, nabs);
    if (r == p - 1) return from_integer(p, -1, nabs);
    mpz_class P = pow_p(p, nabs);
    mpz_class x(r);
    for (long i = 0; i < nabs; ++i) {
        mpz_powm_ui(x.get_mpz_t(), x.get_mpz_t(), static_cast<unsigned long>(p), P.get_mpz_t());
    }
    return make(p, 0, nabs, x);
}

PadicNumber PadicNumber::teichmuller_part() const {
    if (is_zero() || v_ != 0) throw std::domain_error("teichmuller_part of non-unit");
    mpz_class r = u_ % p_;
    return teichmuller(p_, r.get_si(), abs_precision());
}

PadicNumber PadicNumber::log_1unit() const {
    PadicNumber z = *this - from_integer(p_, 1, abs_precision());
    if (!z.is_zero() && z.valuation() < 1)
        throw std::domain_error("log of non-1-unit");
    long nabs = abs_precision();
    // terms z^n/n; v(term) >= n - v_p(n), so n up to nabs + log_p margin
    long nmax = nabs + 8;
    PadicNumber acc = zero_at(p_, nabs);
    PadicNumber zp = z;
    for (long n = 1; n <= nmax; ++n) {
        PadicNumber term = zp / from_integer(p_, n, nabs + 8);
        if (n % 2 == 0) term = -term;
        acc = acc + term;
        zp = zp * z;
        if (zp.is_zero()) break;
    }
    return acc.with_precision(nabs);
}

PadicNumber PadicNumber::exp_small() const {
    if (!is_zero() && valuation() < 1) throw std::domain_error("exp of v<1 value");
    long nabs = abs_precision();
    if (is_exact_zero()) return from_integer(p_, 1, kDefaultPrec);
    PadicNumber term = from_integer(p_, 1, nabs + 8);
    PadicNumber acc = term;
    long nmax = 2 * nabs + 8;
    for (long n = 1; n <= nmax; ++n) {
        term = term * *this / from_integer(p_, n, nabs + 8);
        if (term.is_zero()) break;
        acc = acc + term;
    }
    return acc.with_precision(nabs);
}

PadicNumber PadicNumber::pow_int(long k) const {
    if (k == 0) return from_integer(p_, 1, is_exact_zero() ? kDefaultPrec : abs_precision());
    PadicNumber base = *this;
    if (k < 0) {
        base = from_integer(p_, 1, abs_precision()) / base;
        k = -k;
    }
    PadicNumber acc = from_integer(p_, 1, base.is_exact_zero() ? kDefaultPrec : base.abs_precision());
    while (k > 0) {
        if (k & 1) acc = acc * base;
        base = base * base;
        k >>= 1;
    }
    return acc;
}

PadicNumber PadicNumber::unit_power(const PadicNumber& b) const {
    if (is_zero() || v_ != 0) throw std::domain_error("unit_power: base not a unit");
    if (!b.is_exact_zero() && b.valuation() < 0)
        throw std::domain_error("unit_power: exponent not in Z_p");
    if (b.is_exact_zero()) return from_integer(p_, 1, abs_precision());
    // Teichmueller exponent: needs b mod (p-1), well-defined via the exact shadow.
    if (!b.exact()) throw std::domain_error("unit_power: exponent has no exact residue mod p-1");
    mpz_class pm1(p_ - 1);
    mpz_class deninv;
    if (mpz_invert(deninv.get_mpz_t(), b.exact()->second.get_mpz_t(), pm1.get_mpz_t()) == 0)
        throw std::domain_error("unit_power: exponent denominator not invertible mod p-1");
    mpz_class jz = b.exact()->first * deninv % pm1;
    if (jz < 0) jz += pm1;
    long j = jz.get_si();

    PadicNumber om = teichmuller_part();
    PadicNumber fr = *this / om;  // <a>, a 1-unit
    PadicNumber lg = fr.log_1unit();
    long out_prec = std::min(abs_precision(),
                             b.abs_precision() + std::max<long>(1, lg.is_zero() ? 1 : lg.valuation()));
    PadicNumber main = (b * lg).exp_small();
    return (om.pow_int(j) * main).with_precision(out_prec);
}

PadicNumber PadicNumber::binomial(const PadicNumber& b, unsigned long n) {
    int p = b.prime();
    if (n == 0) return from_integer(p, 1, b.is_exact_zero() ? kDefaultPrec : b.abs_precision());
    if (b.exact()) {
        // exact product formula
        mpz_class num = 1, den = 1;
        for (unsigned long i = 0; i < n; ++i) {
            num *= b.exact()->first - mpz_class(static_cast<long>(i)) * b.exact()->second;
            den *= b.exact()->second;
            den *= mpz_class(static_cast<long>(i + 1));
        }
        long nabs = b.is_exact_zero() ? kDefaultPrec : b.abs_precision();
        return from_rational(p, num, den, nabs);
    }
    PadicNumber acc = from_integer(p, 1, b.abs_precision() + 8);
    PadicNumber x = b;
    for (unsigned long i = 0; i < n; ++i) {
        acc = acc * (x - from_integer(p, static_cast<long>(i), b.abs_precision() + 8));
        acc = acc / from_integer(p, static_cast<long>(i + 1), b.abs_precision() + 8);
    }
    return acc;
}

std::string PadicNumber::str() const {
    std::ostringstream os;
    if (is_exact_zero()) { os << "0"; return os.str(); }
    if (rprec_ == 0) { os << "O(" << p_ << "^" << v_ << ")"; return os.str(); }
    os << "v=" << v_ << ";digits=";
    mpz_class u = u_;
    for (long i = 0; i < rprec_; ++i) {
        mpz_class d = u % p_;
        os << d.get_str();
        u /= p_;
        if (i + 1 < rprec_) os << ",";
    }
    os << ";prec=" << abs_precision();
    return os.str();
}

PadicNumber PadicNumber::parse(int p, const std::string& literal, long nabs) {
    auto trim = [](std::string s) {
        size_t a = s.find_first_not_of(" \t");
        size_t b = s.find_last_not_of(" \t");
        if (a == std::string::npos) return std::string();
        return s.substr(a, b - a + 1);
    };
    std::string s = trim(literal);
    if (s.empty()) throw std::invalid_argument("empty p-adic literal");
    if (s.rfind("v=", 0) == 0) {
        // v=<int>;digits=<d0,...>;prec=<N>
        size_t semi1 = s.find(';');
        size_t semi2 = s.find(';', semi1 + 1);
        if (semi1 == std::string::npos || semi2 == std::string::npos)
            throw std::invalid_argument("bad p-adic literal: " + s);
        long v = std::stol(s.substr(2, semi1 - 2));
        std::string dig = s.substr(semi1 + 1, semi2 - semi1 - 1);
        if (dig.rfind("digits=", 0) != 0) throw std::invalid_argument("bad p-adic literal: " + s);
        dig = dig.substr(7);
        std::string prec = s.substr(semi2 + 1);
        if (prec.rfind("prec=", 0) != 0) throw std::invalid_argument("bad p-adic literal: " + s);
        long N = std::stol(prec.substr(5));
        mpz_class u = 0, P = 1;
        std::istringstream ds(dig);
        std::string tok;
        while (std::getline(ds, tok, ',')) {
            long d = std::stol(tok);
            if (d < 0 || d >= p) throw std::invalid_argument("digit out of range");
            u += d * P;
            P *= p;
        }
        long rp = N - v;
        if (rp <= 0) return zero_at(p, N);
        return make(p, v, rp, u);
    }
    size_t slash = s.find('/');
    if (slash != std::string::npos) {
        mpz_class num(s.substr(0, slash));
        mpz_class den(s.substr(slash + 1));
        return from_rational(p, num, den, nabs);
    }
    return from_mpz(p, mpz_class(s), nabs);
}

}  // namespace robba
