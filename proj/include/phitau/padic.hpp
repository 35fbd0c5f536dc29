#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <climits>
#include <deque>
#include <string>
#include <unordered_map>

#include "error.hpp"

namespace phitau {

namespace detail {

// p^n, cached per prime. deque keeps references stable while the cache grows.
inline const mpz_class& ppow(long p, long n) {
    thread_local std::unordered_map<long, std::deque<mpz_class>> cache;
    auto& row = cache[p];
    if (row.empty()) row.emplace_back(1);
    while (static_cast<long>(row.size()) <= n) row.push_back(row.back() * p);
    return row[static_cast<size_t>(n)];
}

// Strip p from x (x != 0) and return the count.
inline long remove_p(mpz_class& x, long p) {
    mpz_class pp(p);
    return static_cast<long>(mpz_remove(x.get_mpz_t(), x.get_mpz_t(), pp.get_mpz_t()));
}

inline long valuation(const mpz_class& x, long p) {
    if (x == 0) return LONG_MAX;
    mpz_class t = x;
    return remove_p(t, p);
}

inline mpz_class mod_ppow(const mpz_class& x, long p, long n) {
    mpz_class r;
    mpz_fdiv_r(r.get_mpz_t(), x.get_mpz_t(), ppow(p, n).get_mpz_t());
    return r;
}

inline long factorial_valuation(long k, long p) {
    long v = 0;
    for (long q = p; q <= k; q *= p) v += k / q;
    return v;
}

}  // namespace detail

// An element of Q_p known modulo p^(v+N): value p^v * u with u a unit mod p^N.
// A number indistinguishable from zero is a tracked zero: u = 0, N = 0 and v
// holds the absolute precision.
class PadicNumber {
public:
    PadicNumber() = default;

    static PadicNumber zero(long p, long abs_prec) {
        PadicNumber r;
        r.p_ = p;
        r.v_ = abs_prec;
        return r;
    }

    // p^shift * x known modulo p^abs_prec.
    static PadicNumber make(long p, long shift, mpz_class x, long abs_prec) {
        if (x == 0) return zero(p, abs_prec);
        long v = shift + detail::remove_p(x, p);
        if (v >= abs_prec) return zero(p, abs_prec);
        PadicNumber r;
        r.p_ = p;
        r.v_ = v;
        r.n_ = abs_prec - v;
        r.u_ = detail::mod_ppow(x, p, r.n_);
        return r;
    }

    // An integer carrying `digits` digits of relative precision.
    static PadicNumber from_integer(long p, const mpz_class& x, long digits) {
        if (x == 0) return zero(p, digits);
        long v = detail::valuation(x, p);
        return make(p, 0, x, v + digits);
    }

    static PadicNumber from_rational(long p, const mpz_class& num, const mpz_class& den, long digits) {
        if (den == 0) throw Error(ErrorCode::Precondition, "zero denominator");
        if (num == 0) return zero(p, digits);
        mpz_class a = num, b = den;
        long va = detail::remove_p(a, p);
        long vb = detail::remove_p(b, p);
        mpz_class binv;
        mpz_invert(binv.get_mpz_t(), b.get_mpz_t(), detail::ppow(p, digits).get_mpz_t());
        return make(p, va - vb, a * binv, va - vb + digits);
    }

    long prime() const { return p_; }
    // For a tracked zero this is the absolute precision (a lower bound on the valuation).
    long valuation() const { return v_; }
    const mpz_class& unit() const { return u_; }
    long relative_precision() const { return n_; }
    long absolute_precision() const { return v_ + n_; }
    bool is_zero() const { return n_ == 0; }
    bool is_unit() const { return !is_zero() && v_ == 0; }

    // True iff the value is known to be divisible by p^k.
    bool is_zero_mod(long k) const { return is_zero() ? v_ >= k : v_ >= k; }

    PadicNumber with_absolute_precision(long a) const {
        if (a >= absolute_precision()) return *this;
        if (is_zero() || v_ >= a) return zero(p_, a);
        PadicNumber r = *this;
        r.n_ = a - v_;
        r.u_ = detail::mod_ppow(u_, p_, r.n_);
        return r;
    }

    PadicNumber operator-() const {
        if (is_zero()) return *this;
        PadicNumber r = *this;
        r.u_ = detail::ppow(p_, n_) - u_;
        return r;
    }

    friend PadicNumber operator+(const PadicNumber& a, const PadicNumber& b) {
        check_prime(a, b);
        long A = std::min(a.absolute_precision(), b.absolute_precision());
        if (a.is_zero()) return b.with_absolute_precision(A);
        if (b.is_zero()) return a.with_absolute_precision(A);
        long m = std::min(a.v_, b.v_);
        mpz_class x = a.u_ * detail::ppow(a.p_, a.v_ - m) + b.u_ * detail::ppow(a.p_, b.v_ - m);
        return make(a.p_, m, std::move(x), A);
    }

    friend PadicNumber operator-(const PadicNumber& a, const PadicNumber& b) { return a + (-b); }

    friend PadicNumber operator*(const PadicNumber& a, const PadicNumber& b) {
        check_prime(a, b);
        if (a.is_zero() || b.is_zero())
            return zero(a.p_, std::min(a.v_ + b.absolute_precision(), b.v_ + a.absolute_precision()));
        PadicNumber r;
        r.p_ = a.p_;
        r.v_ = a.v_ + b.v_;
        r.n_ = std::min(a.n_, b.n_);
        r.u_ = detail::mod_ppow(a.u_ * b.u_, a.p_, r.n_);
        return r;
    }

    PadicNumber inv() const {
        if (is_zero()) throw Error(ErrorCode::ZeroAtPrecision, "inverse of a number indistinguishable from 0");
        PadicNumber r = *this;
        r.v_ = -v_;
        mpz_invert(r.u_.get_mpz_t(), u_.get_mpz_t(), detail::ppow(p_, n_).get_mpz_t());
        return r;
    }

    friend PadicNumber operator/(const PadicNumber& a, const PadicNumber& b) { return a * b.inv(); }

    PadicNumber& operator+=(const PadicNumber& o) { return *this = *this + o; }
    PadicNumber& operator-=(const PadicNumber& o) { return *this = *this - o; }
    PadicNumber& operator*=(const PadicNumber& o) { return *this = *this * o; }

    // Structural identity of the normalized representation.
    friend bool operator==(const PadicNumber& a, const PadicNumber& b) {
        return a.p_ == b.p_ && a.v_ == b.v_ && a.n_ == b.n_ && a.u_ == b.u_;
    }

    // Agreement modulo the coarser of the two precisions.
    bool equals_at_precision(const PadicNumber& o) const { return (*this - o).is_zero(); }

    // p^v * u as an exact rational (the canonical representative).
    mpq_class to_rational() const {
        if (is_zero()) return 0;
        mpq_class r(u_);
        if (v_ >= 0) r *= detail::ppow(p_, v_);
        else r /= detail::ppow(p_, -v_);
        r.canonicalize();
        return r;
    }

    std::string str() const {
        if (is_zero()) return "O(" + std::to_string(p_) + "^" + std::to_string(v_) + ")";
        return u_.get_str() + "*" + std::to_string(p_) + "^" + std::to_string(v_) + " + O(" +
               std::to_string(p_) + "^" + std::to_string(absolute_precision()) + ")";
    }

private:
    static void check_prime(const PadicNumber& a, const PadicNumber& b) {
        if (a.p_ != b.p_) throw Error(ErrorCode::Precondition, "p-adic numbers over different primes");
    }

    long p_ = 0;
    long v_ = 0;
    long n_ = 0;
    mpz_class u_ = 0;
};

// C(s, k) for s in Z_p. k!C(s,k) is an integer polynomial in s, so an error
// p^A in s moves C(s,k) by at most p^(A - v_p(k!)): that is the result precision.
inline PadicNumber padic_binomial(const PadicNumber& s, long k) {
    if (k < 0) throw Error(ErrorCode::Precondition, "negative binomial index");
    if (s.valuation() < 0 && !s.is_zero())
        throw Error(ErrorCode::Precondition, "binomial needs a p-adic integer");
    long p = s.prime();
    long A = s.absolute_precision() - detail::factorial_valuation(k, p);
    if (A <= 0) throw Error(ErrorCode::InsufficientPrecision, "binomial coefficient loses all digits");
    mpz_class S = 0;
    if (!s.is_zero()) S = s.unit() * detail::ppow(p, s.valuation());
    mpz_class c;
    mpz_bin_ui(c.get_mpz_t(), S.get_mpz_t(), static_cast<unsigned long>(k));
    return PadicNumber::make(p, 0, c, A);
}

}  // namespace phitau
