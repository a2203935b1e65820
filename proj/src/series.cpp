#include "robba/series.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace robba {

namespace {

constexpr long kWorkPrec = PadicNumber::kDefaultPrec + 24;

// integer constant at generous precision, with exact shadow
PadicNumber int_const(int p, const mpz_class& n) {
    return PadicNumber::from_mpz(p, n, 3 * PadicNumber::kDefaultPrec);
}

mpz_class binom_mpz(unsigned long n, unsigned long k) {
    mpz_class r;
    mpz_bin_uiui(r.get_mpz_t(), n, k);
    return r;
}

long vp_factorial(int p, long n) {
    long v = 0;
    long q = n;
    while (q > 0) { q /= p; v += q; }
    return v;
}

long add_clamped(long a, long b) {
    if (a == PadicNumber::kValInf || b == PadicNumber::kValInf) return PadicNumber::kValInf;
    return a + b;
}

}  // namespace

Series::Series(int p, long trunc) : p_(p), trunc_(trunc), lo_(0), tail_val_(kTailExact) {}

Series Series::zero(int p, long trunc) { return Series(p, trunc); }

Series Series::one(int p, long trunc, long prec) {
    Series s(p, trunc);
    s.set_coeff(0, PadicNumber::from_integer(p, 1, prec));
    return s;
}

Series Series::monomial(int p, long trunc, long expo, const PadicNumber& c) {
    Series s(p, trunc);
    s.set_coeff(expo, c);
    return s;
}

const PadicNumber& Series::coeff(long n) const {
    static thread_local PadicNumber exact0;
    if (c_.empty() || n < lo_ || n > lo_ + static_cast<long>(c_.size()) - 1) {
        exact0 = PadicNumber::zero(p_);
        return exact0;
    }
    return c_[n - lo_];
}

void Series::ensure_range(long n) {
    if (c_.empty()) {
        lo_ = n;
        c_.push_back(PadicNumber::zero(p_));
        return;
    }
    while (n < lo_) {
        c_.insert(c_.begin(), PadicNumber::zero(p_));
        --lo_;
    }
    while (n > lo_ + static_cast<long>(c_.size()) - 1) c_.push_back(PadicNumber::zero(p_));
}

void Series::set_coeff(long n, const PadicNumber& c) {
    if (n > trunc_) return;  // beyond the window
    ensure_range(n);
    c_[n - lo_] = c;
}

bool Series::principal_empty() const {
    for (long n = lo_; n < 0; ++n)
        if (!coeff(n).is_zero()) return false;
    return true;
}

long Series::min_coeff_valuation() const {
    long m = PadicNumber::kValInf;
    for (long i = 0; i < static_cast<long>(c_.size()); ++i) {
        if (c_[i].is_exact_zero()) continue;
        m = std::min(m, c_[i].valuation());
    }
    return m == PadicNumber::kValInf ? 0 : m;
}

long Series::min_abs_precision() const {
    long m = PadicNumber::kValInf;
    for (const auto& c : c_) {
        if (c.is_exact_zero()) continue;
        m = std::min(m, c.abs_precision());
    }
    return m;
}

void Series::check_compat(const Series& o) const {
    if (p_ != o.p_) throw std::invalid_argument("mixed-prime series");
    if (trunc_ != o.trunc_) throw std::invalid_argument("mixed truncation orders");
}

Series Series::operator-() const {
    Series r = *this;
    for (auto& c : r.c_) c = -c;
    return r;
}

Series Series::operator+(const Series& o) const {
    check_compat(o);
    Series r(p_, trunc_);
    long a = std::min(lo_, o.lo_);
    long b = std::min(trunc_, std::max(lo_ + static_cast<long>(c_.size()) - 1,
                                       o.lo_ + static_cast<long>(o.c_.size()) - 1));
    for (long n = a; n <= b; ++n) r.set_coeff(n, coeff(n) + o.coeff(n));
    r.tail_val_ = std::min(tail_val_, o.tail_val_);
    return r;
}

Series Series::operator-(const Series& o) const { return *this + (-o); }

Series Series::scaled(const PadicNumber& x) const {
    Series r = *this;
    for (auto& c : r.c_) c = c * x;
    if (r.tail_val_ != kTailExact && !x.is_exact_zero())
        r.tail_val_ = add_clamped(r.tail_val_, x.valuation());
    if (x.is_exact_zero()) r.tail_val_ = kTailExact;
    return r;
}

Series Series::shifted(long k) const {
    Series r(p_, trunc_);
    for (long i = 0; i < static_cast<long>(c_.size()); ++i) {
        long n = lo_ + i + k;
        if (n <= trunc_) r.set_coeff(n, c_[i]);
    }
    r.tail_val_ = tail_val_;  // shifting does not change the tail valuation bound
    if (k < 0 && tail_val_ != kTailExact) {
        // coefficients pulled in from beyond the window are only known up to the tail bound
        for (long n = std::max(lo_ + k, trunc_ + k + 1); n <= trunc_; ++n)
            r.set_coeff(n, r.coeff(n) + PadicNumber::zero_at(p_, tail_val_));
    }
    return r;
}

Series Series::operator*(const Series& o) const {
    check_compat(o);
    if (c_.empty() || o.c_.empty()) {
        Series r(p_, trunc_);
        r.tail_val_ = kTailExact;
        return r;
    }
    // effective degrees (last not-exactly-zero coefficient)
    auto eff_deg = [](const Series& s) {
        long d = s.lo_ - 1;
        for (long i = 0; i < static_cast<long>(s.c_.size()); ++i)
            if (!s.c_[i].is_exact_zero()) d = s.lo_ + i;
        return d;
    };
    long df = eff_deg(*this), dg = eff_deg(o);
    if (df < lo_ || dg < o.lo_) {  // one side is exactly 0
        Series r(p_, trunc_);
        return r;
    }
    long vf = min_coeff_valuation(), vg = o.min_coeff_valuation();
    long out_tail;
    if (tail_val_ == kTailExact && o.tail_val_ == kTailExact) {
        out_tail = (df + dg <= trunc_) ? kTailExact : vf + vg;
    } else {
        out_tail = std::min({add_clamped(tail_val_, std::min(vg, o.tail_val_)),
                             add_clamped(o.tail_val_, std::min(vf, tail_val_)),
                             vf + vg});
    }

    long pf = min_abs_precision(), pg = o.min_abs_precision();
    bool heterog = false;
    {
        long mx = 0, mn = PadicNumber::kValInf;
        for (const auto& c : c_) if (!c.is_exact_zero()) { mx = std::max(mx, c.abs_precision()); mn = std::min(mn, c.abs_precision()); }
        for (const auto& c : o.c_) if (!c.is_exact_zero()) { mx = std::max(mx, c.abs_precision()); mn = std::min(mn, c.abs_precision()); }
        if (mn != PadicNumber::kValInf && mx - mn > 12) heterog = true;
    }
    if (heterog || c_.size() + o.c_.size() < 16) return mul_schoolbook(o, out_tail);
    (void)pf; (void)pg;
    return mul_packed(o, out_tail);
}

Series Series::mul_schoolbook(const Series& o, long out_tail) const {
    Series r(p_, trunc_);
    long lo = lo_ + o.lo_;
    for (long n = lo; n <= trunc_; ++n) {
        PadicNumber acc = PadicNumber::zero(p_);
        for (long i = lo_; i <= lo_ + static_cast<long>(c_.size()) - 1; ++i) {
            long j = n - i;
            if (j < o.lo_ || j > o.lo_ + static_cast<long>(o.c_.size()) - 1) continue;
            const PadicNumber& a = coeff(i);
            const PadicNumber& b = o.coeff(j);
            if (a.is_exact_zero() || b.is_exact_zero()) continue;
            acc = acc + a * b;
        }
        r.set_coeff(n, acc);
    }
    r.tail_val_ = out_tail;
    return r;
}

Series Series::mul_packed(const Series& o, long out_tail) const {
    long vf = min_coeff_valuation(), vg = o.min_coeff_valuation();
    long pf = min_abs_precision(), pg = o.min_abs_precision();
    long out_nabs;
    if (pf == PadicNumber::kValInf && pg == PadicNumber::kValInf)
        out_nabs = vf + vg + kWorkPrec;
    else if (pf == PadicNumber::kValInf)
        out_nabs = std::min(vf + pg, vf + vg + kWorkPrec);
    else if (pg == PadicNumber::kValInf)
        out_nabs = std::min(vg + pf, vf + vg + kWorkPrec);
    else
        out_nabs = std::min(vf + pg, vg + pf);
    long K = out_nabs - vf - vg;
    if (K <= 0) {
        Series r(p_, trunc_);
        for (long n = lo_ + o.lo_; n <= trunc_; ++n) r.set_coeff(n, PadicNumber::zero_at(p_, out_nabs));
        r.tail_val_ = out_tail;
        return r;
    }
    mpz_class pK = PadicNumber::pow_p(p_, K);
    size_t nf = c_.size(), ng = o.c_.size();
    size_t bits = mpz_sizeinbase(pK.get_mpz_t(), 2) + 1;
    size_t stride = 2 * bits + 16;  // each slot holds a sum of residue products

    auto pack = [&](const std::vector<PadicNumber>& cs, long vbase) {
        mpz_class X = 0;
        for (size_t i = cs.size(); i-- > 0;) {
            mpz_mul_2exp(X.get_mpz_t(), X.get_mpz_t(), stride);
            const PadicNumber& a = cs[i];
            if (a.is_exact_zero() || a.is_zero()) continue;
            X += a.residue_shifted(vbase, K);
        }
        return X;
    };
    mpz_class X = pack(c_, vf);
    mpz_class Y = pack(o.c_, vg);
    mpz_class Z = X * Y;

    Series r(p_, trunc_);
    long lo = lo_ + o.lo_;
    mpz_class mask = (mpz_class(1) << stride) - 1;
    for (long n = lo; n <= trunc_; ++n) {
        long idx = n - lo;
        if (idx >= static_cast<long>(nf + ng - 1)) break;
        mpz_class zn;
        mpz_tdiv_q_2exp(zn.get_mpz_t(), Z.get_mpz_t(), static_cast<mp_bitcnt_t>(stride * idx));
        zn &= mask;
        zn %= pK;
        r.set_coeff(n, PadicNumber::from_residue(p_, vf + vg, K, zn));
    }
    r.tail_val_ = out_tail;
    return r;
}

Series Series::inverse() const {
    if (!principal_empty()) throw std::domain_error("inverse: principal part present");
    const PadicNumber& f0 = coeff(0);
    if (f0.is_zero()) throw std::domain_error("inverse: constant term indistinguishable from 0");
    Series r(p_, trunc_);
    PadicNumber g0 = PadicNumber::from_integer(p_, 1, f0.abs_precision() + 8) / f0;
    r.set_coeff(0, g0);
    for (long n = 1; n <= trunc_; ++n) {
        PadicNumber s = PadicNumber::zero(p_);
        for (long k = 1; k <= n; ++k) {
            const PadicNumber& fk = coeff(k);
            if (fk.is_exact_zero()) continue;
            const PadicNumber& gnk = r.coeff(n - k);
            if (gnk.is_exact_zero()) continue;
            s = s + fk * gnk;
        }
        r.set_coeff(n, -(s / f0));
    }
    r.tail_val_ = std::min<long>(r.min_coeff_valuation(), 0);
    return r;
}

Series Series::compose(const Series& f, const Series& g) {
    f.check_compat(g);
    int p = f.p_;
    long M = f.trunc_;
    if (!f.principal_empty() || !g.principal_empty())
        throw std::domain_error("compose: principal parts unsupported");
    const PadicNumber& g0 = g.coeff(0);
    if (!g0.is_zero() && g0.valuation() == 0) throw std::domain_error("non-composable");
    long top = f.lo_ + static_cast<long>(f.c_.size()) - 1;
    top = std::min(top, M);
    Series acc(p, M);
    for (long n = top; n >= 0; --n) {
        acc = acc * g;
        const PadicNumber& fn = f.coeff(n);
        if (!fn.is_exact_zero()) acc.set_coeff(0, acc.coeff(0) + fn);
    }
    long adj = f.tail_val_;
    if (adj != kTailExact) {
        long vg = std::min<long>(g.min_coeff_valuation(), 0);
        adj = add_clamped(adj, (M + 1) * vg);
    }
    acc.tail_val_ = std::min(acc.tail_val_, adj);
    return acc;
}

Series Series::one_plus_T_pow(int p, long trunc, const PadicNumber& b) {
    if (!b.is_exact_zero() && b.valuation() < 0)
        throw std::domain_error("one_plus_T_pow: exponent not in Z_p");
    Series r(p, trunc);
    long prec = b.is_exact_zero() ? static_cast<long>(PadicNumber::kDefaultPrec) : b.abs_precision();
    PadicNumber c = PadicNumber::from_integer(p, 1, prec + 8);
    r.set_coeff(0, c);
    for (long n = 1; n <= trunc; ++n) {
        c = c * (b - PadicNumber::from_integer(p, n - 1, prec + 8));
        c = c / PadicNumber::from_integer(p, n, prec + 8);
        r.set_coeff(n, c);
        if (c.is_exact_zero()) break;
    }
    bool exact_poly = false;
    if (b.exact() && b.exact()->second == 1 && b.exact()->first >= 0 &&
        b.exact()->first <= trunc)
        exact_poly = true;
    r.tail_val_ = exact_poly ? kTailExact : 0;
    return r;
}

Series Series::log1p_t(int p, long trunc, long prec) {
    Series r(p, trunc);
    for (long n = 1; n <= trunc; ++n) {
        mpz_class num((n % 2 == 1) ? 1 : -1);
        r.set_coeff(n, PadicNumber::from_rational(p, num, mpz_class(n), prec));
    }
    long tv = -static_cast<long>(std::log(4.0 * trunc + 8.0) / std::log(static_cast<double>(p))) - 1;
    r.tail_val_ = tv;
    return r;
}

Series Series::sigma(const PadicNumber& a) const {
    if (a.is_zero() || a.valuation() != 0) throw std::domain_error("sigma: a not a unit");
    Series u = one_plus_T_pow(p_, trunc_, a);
    u.set_coeff(0, u.coeff(0) - PadicNumber::from_integer(p_, 1, u.coeff(0).abs_precision()));
    // power part
    Series pow_part(p_, trunc_);
    for (long n = 0; n <= trunc_; ++n) pow_part.set_coeff(n, coeff(n));
    pow_part.tail_val_ = tail_val_;
    Series out = compose(pow_part, u);
    // principal part: sigma(T^{-j}) = T^{-j} * (u/T)^{-j}
    if (!principal_empty()) {
        Series uT = u.shifted(-1);
        Series inv = uT.inverse();
        Series accp(p_, trunc_);
        Series invj = Series::one(p_, trunc_, inv.min_abs_precision());
        for (long j = 1; j - 1 >= lo_; ++j) {
            invj = invj * inv;
            const PadicNumber& f = coeff(-j);
            if (f.is_exact_zero()) continue;
            accp = accp + invj.scaled(f).shifted(-j);
        }
        out = out + accp;
    }
    return out;
}

Series Series::phi() const {
    Series u(p_, trunc_);
    for (long k = 1; k <= p_ && k <= trunc_; ++k)
        u.set_coeff(k, int_const(p_, binom_mpz(static_cast<unsigned long>(p_),
                                               static_cast<unsigned long>(k))));
    Series pow_part(p_, trunc_);
    for (long n = 0; n <= trunc_; ++n) pow_part.set_coeff(n, coeff(n));
    pow_part.tail_val_ = tail_val_;
    Series out = compose(pow_part, u);
    if (!principal_empty()) {
        Series uT = u.shifted(-1);  // constant term p
        Series inv = uT.inverse();
        Series invj = Series::one(p_, trunc_, inv.min_abs_precision());
        for (long j = 1; j - 1 >= lo_; ++j) {
            invj = invj * inv;
            const PadicNumber& f = coeff(-j);
            if (f.is_exact_zero()) continue;
            out = out + invj.scaled(f).shifted(-j);
        }
    }
    return out;
}

Series Series::psi() const {
    Series f = *this;
    Series gpp(p_, trunc_);
    if (!principal_empty()) {
        // peel the principal part with Laurent phi-preimages
        for (long j = -lo_; j >= 1; --j) {
            const PadicNumber& fm = f.coeff(-j);
            if (fm.is_exact_zero() || fm.is_zero()) continue;
            // phi(T^{-j}) has leading coefficient p^{-j} at T^{-j}
            PadicNumber cj = fm * PadicNumber::from_mpz(p_, PadicNumber::pow_p(p_, j),
                                                        fm.abs_precision() + j + 8);
            Series mono = Series::monomial(p_, trunc_, -j,
                                           PadicNumber::from_integer(p_, 1, fm.abs_precision() + j + 8));
            gpp.set_coeff(-j, gpp.coeff(-j) + cj);
            f = f - mono.scaled(cj).phi();
        }
    }
    // basis change: expand in (1+T)^j, keep multiples of p
    std::vector<PadicNumber> work(static_cast<size_t>(trunc_ + 1));
    for (long n = 0; n <= trunc_; ++n) work[static_cast<size_t>(n)] = f.coeff(n);
    std::vector<PadicNumber> cb(static_cast<size_t>(trunc_ + 1));
    for (long j = trunc_; j >= 0; --j) {
        cb[static_cast<size_t>(j)] = work[static_cast<size_t>(j)];
        const PadicNumber& cj = cb[static_cast<size_t>(j)];
        if (cj.is_exact_zero()) continue;
        for (long i = 0; i < j; ++i) {
            work[static_cast<size_t>(i)] =
                work[static_cast<size_t>(i)] -
                cj * int_const(p_, binom_mpz(static_cast<unsigned long>(j), static_cast<unsigned long>(i)));
        }
    }
    Series out(p_, trunc_);
    long qmax = trunc_ / p_;
    for (long q = 0; q <= qmax; ++q) {
        const PadicNumber& cq = cb[static_cast<size_t>(p_ * q)];
        if (cq.is_exact_zero()) continue;
        for (long n = 0; n <= q; ++n) {
            out.set_coeff(n, out.coeff(n) +
                                 cq * int_const(p_, binom_mpz(static_cast<unsigned long>(q),
                                                              static_cast<unsigned long>(n))));
        }
    }
    // tail-informed precision caps: the unseen tail contributes to every output
    // coefficient with valuation at least tail + B(n).
    if (tail_val_ != kTailExact) {
        for (long n = 0; n <= trunc_; ++n) {
            long B = (trunc_ + 1 - n) / (p_ - 1) - n - vp_factorial(p_, n) - 1;
            long cap = add_clamped(tail_val_, B);
            PadicNumber cn = out.coeff(n);
            long nabs = cn.is_exact_zero() ? PadicNumber::kValInf : cn.abs_precision();
            if (cap < nabs) {
                if (cn.is_exact_zero())
                    out.set_coeff(n, PadicNumber::zero_at(p_, cap));
                else
                    out.set_coeff(n, cn.with_precision(cap));
            }
        }
        out.tail_val_ = tail_val_;
    }
    out = out + gpp;
    return out;
}

Series Series::nabla() const {
    // t (1+T) f'
    Series fp(p_, trunc_);
    for (long i = 0; i < static_cast<long>(c_.size()); ++i) {
        long n = lo_ + i;
        if (n == 0) continue;
        if (n - 1 > trunc_) continue;
        fp.set_coeff(n - 1, c_[i] * int_const(p_, mpz_class(n)));
    }
    fp.tail_val_ = tail_val_ == kTailExact ? kTailExact : tail_val_;  // factor n only helps
    long prec = min_abs_precision();
    if (prec == PadicNumber::kValInf) prec = kWorkPrec;
    Series st = log1p_t(p_, trunc_, prec + 8);
    Series onepT = Series::one(p_, trunc_, prec + 8);
    onepT.set_coeff(1, PadicNumber::from_integer(p_, 1, prec + 8));
    st = st * onepT;
    return fp * st;
}

Series Series::divide_by_t() const {
    if (!coeff(0).is_zero())
        throw std::domain_error("not divisible by t");
    long prec = min_abs_precision();
    if (prec == PadicNumber::kValInf) prec = kWorkPrec;
    Series tT = log1p_t(p_, trunc_, prec + 8).shifted(-1);  // t/T, unit constant term
    Series inv = tT.inverse();
    Series g = (*this) * inv;
    g = g.shifted(-1);
    // the coefficient at trunc depends on the unseen tail
    long bound = std::min(tail_val_ == kTailExact ? min_coeff_valuation() : std::min(tail_val_, min_coeff_valuation()),
                          static_cast<long>(0)) + inv.tail_val();
    g.set_coeff(trunc_, PadicNumber::zero_at(p_, bound));
    if (!g.principal_empty()) throw std::domain_error("not divisible by t");
    // drop indistinguishable principal leftovers
    Series out(p_, trunc_);
    for (long n = 0; n <= trunc_; ++n) out.set_coeff(n, g.coeff(n));
    out.tail_val_ = g.tail_val();
    return out;
}

PadicNumber Series::residue0() const {
    PadicNumber acc = PadicNumber::zero(p_);
    for (long j = 1; j - 1 >= lo_ - 1 && -j >= lo_; ++j) {
        const PadicNumber& f = coeff(-j);
        if (f.is_exact_zero()) continue;
        PadicNumber term = f;
        if (j % 2 == 0) term = -term;  // (-1)^{j-1}
        acc = acc + term;
    }
    return acc;
}

Series Series::res_units() const {
    Series r = psi();
    return *this - r.phi();
}

Series Series::capped(long nabs) const {
    Series r = *this;
    for (auto& c : r.c_) {
        if (c.is_exact_zero()) continue;
        if (c.abs_precision() > nabs) c = c.with_precision(nabs);
    }
    return r;
}

bool Series::equals(const Series& o) const {
    long a = std::min(lo_, o.lo_);
    for (long n = a; n <= trunc_; ++n)
        if (!(coeff(n) - o.coeff(n)).is_zero()) return false;
    return true;
}

long Series::defect_valuation(const Series& o) const {
    long a = std::min(lo_, o.lo_);
    long m = PadicNumber::kValInf;
    for (long n = a; n <= trunc_; ++n) {
        PadicNumber d = coeff(n) - o.coeff(n);
        if (d.is_zero()) continue;
        m = std::min(m, d.valuation());
    }
    return m;
}

std::string Series::str(int max_terms) const {
    std::ostringstream os;
    int shown = 0;
    os << "[";
    for (long i = 0; i < static_cast<long>(c_.size()) && shown < max_terms; ++i) {
        if (c_[i].is_exact_zero()) continue;
        os << "T^" << (lo_ + i) << ": " << c_[i].str() << "; ";
        ++shown;
    }
    os << "trunc=" << trunc_ << "]";
    return os.str();
}

std::vector<PadicNumber> Series::nabla_weights(int p, long trunc, long prec) {
    Series st = log1p_t(p, trunc, prec);
    Series onepT = Series::one(p, trunc, prec);
    onepT.set_coeff(1, PadicNumber::from_integer(p, 1, prec));
    st = st * onepT;
    std::vector<PadicNumber> w(static_cast<size_t>(trunc + 1), PadicNumber::zero(p));
    for (long k = 1; k <= trunc; ++k) w[static_cast<size_t>(k)] = st.coeff(k);
    return w;
}

}  // namespace robba
