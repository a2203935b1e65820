#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "robba/padic.hpp"
#include "robba/series.hpp"

using robba::PadicNumber;
using robba::Series;

namespace {
constexpr int P = 5;
constexpr long M = 64;
constexpr long N = PadicNumber::kDefaultPrec;

PadicNumber I(long n) { return PadicNumber::from_integer(P, n, N); }

Series rand_poly(std::mt19937_64& rng, long deg, long lo = 0) {
    std::uniform_int_distribution<long> d(-50, 50);
    Series s(P, M);
    for (long n = lo; n <= deg; ++n) s.set_coeff(n, I(d(rng)));
    return s;
}
}  // namespace

TEST_CASE("mul and compose basics") {
    Series T = Series::monomial(P, M, 1, I(1));
    Series T2 = T * T;
    CHECK(T2.coeff(2).equals(I(1)));
    CHECK(T2.coeff(1).is_zero());

    // compose(T^2, T+T^2) = T^2 + 2T^3 + T^4
    Series g = T + T2;
    Series f = T2;
    Series c = Series::compose(f, g);
    CHECK(c.coeff(2).equals(I(1)));
    CHECK(c.coeff(3).equals(I(2)));
    CHECK(c.coeff(4).equals(I(1)));
    CHECK(c.coeff(5).is_zero());

    std::mt19937_64 rng(42);
    Series r = rand_poly(rng, 20);
    CHECK(Series::compose(r, T).equals(r));
    CHECK(Series::compose(T, g).equals(g));
    CHECK_THROWS_AS(Series::compose(T, Series::one(P, M)), std::domain_error);
}

TEST_CASE("packed and schoolbook mul agree") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 5; ++trial) {
        Series a = rand_poly(rng, M);
        Series b = rand_poly(rng, M);
        Series ab = a * b;
        // reference: naive convolution of a few spot coefficients
        for (long n : {0L, 1L, 7L, 33L, 64L}) {
            PadicNumber acc = PadicNumber::zero(P);
            for (long i = 0; i <= n; ++i) acc = acc + a.coeff(i) * b.coeff(n - i);
            CHECK(ab.coeff(n).equals(acc));
        }
    }
}

TEST_CASE("one_plus_T_pow group law") {
    Series one = Series::one(P, M);
    CHECK(Series::one_plus_T_pow(P, M, PadicNumber::zero(P)).equals(one));
    Series e1 = Series::one_plus_T_pow(P, M, I(1));
    CHECK(e1.coeff(0).equals(I(1)));
    CHECK(e1.coeff(1).equals(I(1)));
    CHECK(e1.coeff(2).is_zero());
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 5; ++trial) {
        std::uniform_int_distribution<long> d(2, 5000);
        PadicNumber a = PadicNumber::from_rational(P, d(rng), d(rng) * P + 1, N);
        Series prod = Series::one_plus_T_pow(P, M, a) * Series::one_plus_T_pow(P, M, -a);
        CHECK(prod.defect_valuation(one) >= 30);
    }
}

TEST_CASE("sigma") {
    std::mt19937_64 rng(7);
    Series f = rand_poly(rng, M);
    CHECK(f.sigma(I(1)).equals(f));
    // sigma_a(t) = a t
    Series t = Series::log1p_t(P, M, N);
    PadicNumber a = I(7);
    CHECK(t.sigma(a).defect_valuation(t.scaled(a)) >= 30);
    // roundtrip
    PadicNumber ainv = I(1) / a;
    Series rt = f.sigma(a).sigma(ainv);
    CHECK(rt.defect_valuation(f) >= 30);
    // group law on a smaller sample
    Series g = rand_poly(rng, 16);
    Series lhs = g.sigma(I(2)).sigma(I(3));
    Series rhs = g.sigma(I(6));
    CHECK(lhs.defect_valuation(rhs) >= 30);
}

TEST_CASE("phi and psi") {
    std::mt19937_64 rng(1234);
    // phi(1+T) = (1+T)^p
    Series opt = Series::one_plus_T_pow(P, M, I(1));
    CHECK(opt.phi().equals(Series::one_plus_T_pow(P, M, I(P))));
    // phi(t) = p t
    Series t = Series::log1p_t(P, M, N);
    CHECK(t.phi().defect_valuation(t.scaled(I(P))) >= 30);
    // psi(phi(f)) = f exactly, on random f of degree <= M/p
    for (int trial = 0; trial < 10; ++trial) {
        Series f = rand_poly(rng, M / P);
        CHECK(f.phi().psi().equals(f));
    }
    // phi(sigma_a f) = sigma_a(phi f)
    Series f = rand_poly(rng, 12);
    PadicNumber a = I(3);
    CHECK(f.sigma(a).phi().defect_valuation(f.phi().sigma(a)) >= 30);
    // psi((1+T)^a) = 0 exactly for integer unit a in the window
    for (long a2 : {1L, 2L, 7L, 13L, 63L}) {
        Series d = Series::one_plus_T_pow(P, M, I(a2));
        d.set_tail_val(Series::kTailExact);
        CHECK(d.psi().equals(Series::zero(P, M)));
    }
    // psi((1+T)^{pa}) = (1+T)^a for integer a
    for (long a2 : {1L, 2L, 7L, 12L}) {
        Series d = Series::one_plus_T_pow(P, M, I(P * a2));
        CHECK(d.psi().equals(Series::one_plus_T_pow(P, M, I(a2))));
    }
    // psi of a truncated Dirac at a non-integer unit: 0 within the tail-capped precision
    PadicNumber au = PadicNumber::from_rational(P, 1, 7, N);
    Series d = Series::one_plus_T_pow(P, M, au);
    Series z = d.psi();
    CHECK(z.equals(Series::zero(P, M)));
    // and the low-order coefficients really are p-adically small
    CHECK(z.coeff(0).is_zero());
    CHECK(z.coeff(0).abs_precision() >= 10);
}

TEST_CASE("res_units") {
    // Res_{Z_p^*} fixes unit Diracs, kills p-divisible ones, and is idempotent
    for (long a : {1L, 2L, 7L}) {
        Series d = Series::one_plus_T_pow(P, M, I(a));
        CHECK(d.res_units().equals(d));
    }
    for (long a : {0L, 5L, 10L}) {
        Series d = Series::one_plus_T_pow(P, M, I(a));
        CHECK(d.res_units().equals(Series::zero(P, M)));
    }
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        Series f = rand_poly(rng, M);
        Series r1 = f.res_units();
        CHECK(r1.res_units().equals(r1));
    }
}

TEST_CASE("log1p_t and nabla") {
    Series t = Series::log1p_t(P, M, N);
    CHECK(t.coeff(1).equals(I(1)));
    CHECK(t.coeff(P).valuation() == -1);
    // phi(t) - p t = 0 at truncation
    CHECK(t.phi().defect_valuation(t.scaled(I(P))) >= 30);

    // nabla(constant) = 0
    Series c = Series::one(P, M);
    CHECK(c.nabla().equals(Series::zero(P, M)));
    // nabla(t^k) = k t^k
    Series t2 = t * t, t3 = t2 * t;
    CHECK(t.nabla().defect_valuation(t) >= 30);
    CHECK(t2.nabla().defect_valuation(t2.scaled(I(2))) >= 30);
    CHECK(t3.nabla().defect_valuation(t3.scaled(I(3))) >= 28);
    // nabla(phi f) = phi(nabla f)
    std::mt19937_64 rng(11);
    Series f = rand_poly(rng, 12);
    CHECK(f.phi().nabla().defect_valuation(f.nabla().phi()) >= 28);
    // nabla commutes with sigma_a
    Series g = rand_poly(rng, 16);
    CHECK(g.sigma(I(2)).nabla().defect_valuation(g.nabla().sigma(I(2))) >= 28);
    // nabla(R^+) lies in t R^+
    Series h = rand_poly(rng, M);
    CHECK_NOTHROW(h.nabla().divide_by_t());
}

TEST_CASE("divide_by_t") {
    Series t = Series::log1p_t(P, M, N);
    Series q = t.divide_by_t();
    CHECK(q.coeff(0).equals(I(1)));
    CHECK(q.defect_valuation(Series::one(P, M)) >= 30);
    std::mt19937_64 rng(3);
    Series f = rand_poly(rng, 30);
    Series tf = t * f;
    CHECK(tf.divide_by_t().defect_valuation(f) >= 25);
    CHECK_THROWS_AS(Series::one(P, M).divide_by_t(), std::domain_error);
}

TEST_CASE("residue0") {
    Series invT = Series::monomial(P, M, -1, I(1));
    CHECK(invT.residue0().equals(I(1)));
    CHECK(Series::one(P, M).residue0().equals(I(0)));
    // 1/T^2: expand (1+T)^{-1} = 1 - T + ..., pick the T^{-1} term
    Series invT2 = Series::monomial(P, M, -2, I(1));
    CHECK(invT2.residue0().equals(I(-1)));
}

TEST_CASE("psi phi identity on 100 random series") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        Series f = rand_poly(rng, M / P);
        CHECK(f.phi().psi().equals(f));
    }
}

TEST_CASE("laurent sigma and phi") {
    // sigma_a(1/T) = 1/((1+T)^a - 1), checked by multiplying back
    PadicNumber a = I(3);
    Series invT = Series::monomial(P, M, -1, I(1));
    Series s = invT.sigma(a);
    Series ua = Series::one_plus_T_pow(P, M, a);
    ua.set_coeff(0, PadicNumber::zero(P));
    CHECK((s * ua).defect_valuation(Series::one(P, M)) >= 25);
    // phi(1/T) * ((1+T)^p - 1) = 1
    Series ph = invT.phi();
    Series up = Series::one_plus_T_pow(P, M, I(P));
    up.set_coeff(0, PadicNumber::zero(P));
    CHECK((ph * up).defect_valuation(Series::one(P, M)) >= 25);
    // psi on a Laurent element: psi(phi(1/T + f)) = 1/T + f
    std::mt19937_64 rng(8);
    Series f = rand_poly(rng, 10);
    Series lf = invT + f;
    CHECK(lf.phi().psi().defect_valuation(lf) >= 20);
}
