#pragma once

#include <algorithm>
#include <climits>
#include <map>
#include <utility>
#include <vector>

#include "padic.hpp"

namespace phitau {

// How terms above x_hi are discarded. X-adic: the window is a quotient by an
// ideal and the element is only known O(X^x_prec). p-adic: the discarded terms
// are p-adically small and go into the element's floor.
enum class UpperCut { x_adic, p_adic };

struct Truncation {
    long p = 3;
    int x_lo = -12;
    int x_hi = 32;
    int y_hi = 8;
    long N = 12;
    UpperCut upper = UpperCut::x_adic;

    // Working digits carried by fresh constants. Denominators of size p^-x_hi
    // appear in the window (alpha, 1/lambda), so the cap sits that far above N.
    long digits() const { return N + std::max(x_hi, 0) + y_hi; }

    void validate() const {
        if (p < 3 || p % 2 == 0) throw Error(ErrorCode::Precondition, "p must be an odd prime");
        for (long d = 3; d * d <= p; d += 2)
            if (p % d == 0) throw Error(ErrorCode::Precondition, "p must be an odd prime");
        if (!(x_lo <= 0 && 0 < x_hi && y_hi >= 1 && N >= 1))
            throw Error(ErrorCode::Precondition, "bad truncation window");
    }

    friend bool operator==(const Truncation&, const Truncation&) = default;
};

struct Term {
    int x;
    int y;
    PadicNumber c;
};

class ModelElement;

namespace detail {

inline long sat_add(long a, long b) {
    if (a == LONG_MAX || b == LONG_MAX) return LONG_MAX;
    return a + b;
}

inline int sat_add(int a, int b) {
    if (a == INT_MAX || b == INT_MAX) return INT_MAX;
    return a + b;
}

// Dense exact accumulation of coefficient products over a window. All values
// are summed as integers at a common base valuation and reduced once.
class Accumulator {
public:
    Accumulator(const Truncation& t, long base)
        : t_(t), base_(base), width_(t.x_hi - t.x_lo),
          sum_(static_cast<size_t>(width_) * t.y_hi), abs_(sum_.size(), LONG_MAX), touched_(sum_.size(), 0) {}

    void add_pair(int i, int j, const PadicNumber& a, const PadicNumber& b) {
        if (j >= t_.y_hi) return;
        long pv = a.valuation() + b.valuation();
        if (!in_window(i, pv)) return;
        size_t k = slot(i, j);
        touched_[k] = 1;
        if (a.is_zero() || b.is_zero()) {
            abs_[k] = std::min(abs_[k], std::min(a.valuation() + b.absolute_precision(),
                                                 b.valuation() + a.absolute_precision()));
            return;
        }
        abs_[k] = std::min(abs_[k], pv + std::min(a.relative_precision(), b.relative_precision()));
        tmp_ = a.unit() * b.unit();
        if (pv != base_) tmp_ *= ppow(a.prime(), pv - base_);
        sum_[k] += tmp_;
    }

    void add(int i, int j, const PadicNumber& a) {
        if (j >= t_.y_hi) return;
        if (!in_window(i, a.valuation())) return;
        size_t k = slot(i, j);
        touched_[k] = 1;
        abs_[k] = std::min(abs_[k], a.absolute_precision());
        if (a.is_zero()) return;
        tmp_ = a.unit();
        if (a.valuation() != base_) tmp_ *= ppow(a.prime(), a.valuation() - base_);
        sum_[k] += tmp_;
    }

    long dropped_floor() const { return dropped_floor_; }
    bool dropped_high() const { return dropped_high_; }

    std::vector<Term> take_terms() {
        std::vector<Term> out;
        for (int i = t_.x_lo; i < t_.x_hi; ++i)
            for (int j = 0; j < t_.y_hi; ++j) {
                size_t k = slot(i, j);
                if (!touched_[k]) continue;
                out.push_back({i, j, PadicNumber::make(t_.p, base_, std::move(sum_[k]), abs_[k])});
            }
        return out;
    }

private:
    bool in_window(int i, long v) {
        if (i < t_.x_lo) {
            dropped_floor_ = std::min(dropped_floor_, v);
            return false;
        }
        if (i >= t_.x_hi) {
            if (t_.upper == UpperCut::p_adic) dropped_floor_ = std::min(dropped_floor_, v);
            else dropped_high_ = true;
            return false;
        }
        return true;
    }

    size_t slot(int i, int j) const { return static_cast<size_t>(i - t_.x_lo) * t_.y_hi + j; }

    Truncation t_;
    long base_;
    int width_;
    std::vector<mpz_class> sum_;
    std::vector<long> abs_;
    std::vector<char> touched_;
    mpz_class tmp_;
    long dropped_floor_ = LONG_MAX;
    bool dropped_high_ = false;
};

}  // namespace detail

// Truncated bivariate Laurent series sum c_ij X^i Y^j, x_lo <= i < x_hi, 0 <= j < y_hi.
// Besides its terms an element records what is not known about it:
//   x_prec  — it is only known modulo X^x_prec (kExact: no X-adic loss);
//   floor   — every coefficient discarded at the window edges had valuation >= floor.
// Stored terms are nonzero coefficients, plus zeros whose precision is below the
// working cap (those are uncertain and must keep their precision).
class ModelElement {
public:
    static constexpr int kExact = INT_MAX;
    static constexpr long kNoFloor = LONG_MAX;

    ModelElement() = default;
    explicit ModelElement(const Truncation& t) : t_(t) {}

    static ModelElement from_terms(const Truncation& t, std::vector<Term> terms, int x_prec = kExact,
                                   long floor = kNoFloor) {
        ModelElement r(t);
        r.x_prec_ = x_prec;
        r.floor_ = floor;
        std::sort(terms.begin(), terms.end(),
                  [](const Term& a, const Term& b) { return std::pair(a.x, a.y) < std::pair(b.x, b.y); });
        for (auto& term : terms) {
            if (term.y < 0) throw Error(ErrorCode::Precondition, "negative Y exponent");
            if (term.y >= t.y_hi) continue;
            if (term.x < t.x_lo) {
                r.floor_ = std::min(r.floor_, term.c.valuation());
                continue;
            }
            if (term.x >= t.x_hi) {
                if (t.upper == UpperCut::p_adic) r.floor_ = std::min(r.floor_, term.c.valuation());
                else r.x_prec_ = std::min(r.x_prec_, t.x_hi);
                continue;
            }
            if (!r.terms_.empty() && r.terms_.back().x == term.x && r.terms_.back().y == term.y)
                r.terms_.back().c += term.c;
            else
                r.terms_.push_back(std::move(term));
        }
        r.normalize();
        return r;
    }

    static ModelElement monomial(const Truncation& t, int i, int j, const PadicNumber& c) {
        return from_terms(t, {{i, j, c}});
    }
    static ModelElement constant(const Truncation& t, const PadicNumber& c) { return monomial(t, 0, 0, c); }
    static ModelElement integer(const Truncation& t, long n) { return constant(t, scalar(t, n)); }
    static ModelElement rational(const Truncation& t, long num, long den) {
        return constant(t, PadicNumber::from_rational(t.p, num, den, t.digits()));
    }
    static ModelElement one(const Truncation& t) { return integer(t, 1); }
    static ModelElement X(const Truncation& t, int i = 1) { return monomial(t, i, 0, scalar(t, 1)); }
    static ModelElement Y(const Truncation& t, int j = 1) { return monomial(t, 0, j, scalar(t, 1)); }

    static PadicNumber scalar(const Truncation& t, long n) {
        return PadicNumber::from_integer(t.p, mpz_class(n), t.digits());
    }

    const Truncation& truncation() const { return t_; }
    long prime() const { return t_.p; }
    const std::vector<Term>& terms() const { return terms_; }
    int x_prec() const { return x_prec_; }
    long floor() const { return floor_; }
    bool empty() const { return terms_.empty(); }

    // Upper end of the X-range that is actually determined.
    int x_window() const { return std::min(x_prec_, t_.x_hi); }

    PadicNumber coeff(int i, int j) const {
        for (const auto& term : terms_)
            if (term.x == i && term.y == j) return term.c;
        return PadicNumber::zero(t_.p, std::min(t_.digits(), floor_));
    }

    int min_x() const {
        int m = INT_MAX;
        for (const auto& term : terms_) m = std::min(m, term.x);
        return m;
    }

    // Lower bound on the valuation of every stored coefficient.
    long min_valuation() const {
        long m = LONG_MAX;
        for (const auto& term : terms_) m = std::min(m, term.c.valuation());
        return m;
    }

    bool is_y_free() const {
        return std::all_of(terms_.begin(), terms_.end(), [](const Term& s) { return s.y == 0 || s.c.is_zero(); });
    }

    ModelElement with_x_prec(int xp) const {
        ModelElement r = *this;
        r.x_prec_ = std::min(r.x_prec_, xp);
        r.normalize();
        return r;
    }

    ModelElement with_floor(long f) const {
        ModelElement r = *this;
        r.floor_ = std::min(r.floor_, f);
        return r;
    }

    ModelElement operator-() const {
        ModelElement r = *this;
        for (auto& term : r.terms_) term.c = -term.c;
        return r;
    }

    friend ModelElement operator+(const ModelElement& a, const ModelElement& b) {
        check_same(a, b);
        std::vector<Term> all = a.terms_;
        all.insert(all.end(), b.terms_.begin(), b.terms_.end());
        return from_terms(a.t_, std::move(all), std::min(a.x_prec_, b.x_prec_), std::min(a.floor_, b.floor_));
    }

    friend ModelElement operator-(const ModelElement& a, const ModelElement& b) { return a + (-b); }

    friend ModelElement operator*(const ModelElement& a, const ModelElement& b) {
        check_same(a, b);
        const Truncation& t = a.t_;
        long va = a.min_nonzero_valuation(), vb = b.min_nonzero_valuation();
        long base = (va == LONG_MAX || vb == LONG_MAX) ? 0 : va + vb;
        detail::Accumulator acc(t, base);
        for (const auto& s : a.terms_)
            for (const auto& u : b.terms_) acc.add_pair(s.x + u.x, s.y + u.y, s.c, u.c);

        int xa = a.min_x(), xb = b.min_x();
        int xp = std::min(a.x_prec_ == kExact || xb == INT_MAX ? kExact : a.x_prec_ + xb,
                          b.x_prec_ == kExact || xa == INT_MAX ? kExact : b.x_prec_ + xa);
        xp = std::min(xp, detail::sat_add(a.x_prec_, b.x_prec_));
        if (acc.dropped_high()) xp = std::min(xp, t.x_hi);

        long ma = a.min_valuation(), mb = b.min_valuation();
        long fl = std::min({detail::sat_add(a.floor_, mb), detail::sat_add(b.floor_, ma),
                            detail::sat_add(a.floor_, b.floor_), acc.dropped_floor()});
        return from_terms(t, acc.take_terms(), xp, fl);
    }

    friend ModelElement operator*(const PadicNumber& c, const ModelElement& a) {
        ModelElement r = a;
        for (auto& term : r.terms_) term.c = c * term.c;
        r.floor_ = detail::sat_add(r.floor_, c.valuation());
        r.normalize();
        return r;
    }

    ModelElement& operator+=(const ModelElement& o) { return *this = *this + o; }
    ModelElement& operator-=(const ModelElement& o) { return *this = *this - o; }
    ModelElement& operator*=(const ModelElement& o) { return *this = *this * o; }

    // Identical stored data (same terms, precisions and bookkeeping).
    friend bool operator==(const ModelElement& a, const ModelElement& b) {
        if (!(a.t_ == b.t_) || a.x_prec_ != b.x_prec_ || a.floor_ != b.floor_ || a.terms_.size() != b.terms_.size())
            return false;
        for (size_t k = 0; k < a.terms_.size(); ++k) {
            const auto &s = a.terms_[k], &u = b.terms_[k];
            if (s.x != u.x || s.y != u.y || !(s.c == u.c)) return false;
        }
        return true;
    }

    // Applies f to each term's coefficient-monomial and sums the images; image(i, j)
    // yields a list of (dx, dy, integral coefficient) so that X^iY^j -> sum coeff X^dx Y^dy.
    template <class Image>
    ModelElement map_terms(Image&& image, int x_prec, long extra_floor = kNoFloor) const {
        long base = min_nonzero_valuation();
        if (base == LONG_MAX) base = 0;
        detail::Accumulator acc(t_, base);
        for (const auto& s : terms_)
            for (const auto& [dx, dy, c] : image(s.x, s.y)) acc.add_pair(dx, dy, s.c, c);
        int xp = x_prec;
        if (acc.dropped_high()) xp = std::min(xp, t_.x_hi);
        return from_terms(t_, acc.take_terms(), xp, std::min({floor_, acc.dropped_floor(), extra_floor}));
    }

private:
    static void check_same(const ModelElement& a, const ModelElement& b) {
        if (!(a.t_ == b.t_)) throw Error(ErrorCode::TruncationMismatch, "elements live in different windows");
    }

    long min_nonzero_valuation() const {
        long m = LONG_MAX;
        for (const auto& term : terms_)
            if (!term.c.is_zero()) m = std::min(m, term.c.valuation());
        return m;
    }

    void normalize() {
        long cap = t_.digits();
        std::vector<Term> kept;
        kept.reserve(terms_.size());
        for (auto& term : terms_) {
            if (t_.upper == UpperCut::x_adic && term.x >= x_prec_) continue;
            if (term.c.is_zero() && term.c.absolute_precision() >= cap) continue;
            kept.push_back(std::move(term));
        }
        terms_ = std::move(kept);
        if (t_.upper == UpperCut::p_adic) x_prec_ = kExact;
    }

    Truncation t_;
    std::vector<Term> terms_;
    int x_prec_ = kExact;
    long floor_ = kNoFloor;
};

// ---------------------------------------------------------------------------
// Polynomials in Y (length y_hi) with p-adic coefficients, used as images of Y.

using YPoly = std::vector<PadicNumber>;

inline YPoly ypoly_mul(const YPoly& a, const YPoly& b, long p, long digits) {
    YPoly r(a.size(), PadicNumber::zero(p, digits));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; i + j < a.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

// (1+Y)^e - 1 for e in Z_p, truncated at Y^y_hi.
inline YPoly one_plus_y_power_minus_one(const Truncation& t, const PadicNumber& e) {
    YPoly r(t.y_hi, PadicNumber::zero(t.p, t.digits()));
    for (int k = 1; k < t.y_hi; ++k) r[k] = padic_binomial(e, k);
    return r;
}

// Successive powers g^0 .. g^(y_hi-1) of a Y-polynomial without constant term.
inline std::vector<YPoly> ypoly_powers(const YPoly& g, const Truncation& t) {
    std::vector<YPoly> pw;
    YPoly one(t.y_hi, PadicNumber::zero(t.p, t.digits()));
    one[0] = ModelElement::scalar(t, 1);
    pw.push_back(one);
    for (int j = 1; j < t.y_hi; ++j) pw.push_back(ypoly_mul(pw.back(), g, t.p, t.digits()));
    return pw;
}

namespace detail {

struct ImageTerm {
    int dx;
    int dy;
    PadicNumber c;
};

// Ring endomorphism X -> (1+Y)^{cx} X^{mx}, Y -> g(Y).
inline ModelElement apply_substitution(const ModelElement& a, int mx, long cx, const std::vector<YPoly>& gpow) {
    const Truncation& t = a.truncation();
    std::map<int, YPoly> xfactor;  // (1+Y)^{cx*i}
    auto factor = [&](int i) -> const YPoly& {
        auto it = xfactor.find(i);
        if (it != xfactor.end()) return it->second;
        YPoly f(t.y_hi, PadicNumber::zero(t.p, t.digits()));
        for (int k = 0; k < t.y_hi; ++k) {
            mpz_class c;
            mpz_class e(cx * i);
            mpz_bin_ui(c.get_mpz_t(), e.get_mpz_t(), static_cast<unsigned long>(k));
            f[k] = PadicNumber::from_integer(t.p, c, t.digits());
        }
        return xfactor.emplace(i, std::move(f)).first->second;
    };
    std::vector<ImageTerm> img;
    auto image = [&](int i, int j) -> const std::vector<ImageTerm>& {
        img.clear();
        const YPoly& g = gpow[j];
        if (cx == 0 || i == 0) {
            for (int k = 0; k < t.y_hi; ++k)
                if (!g[k].is_zero()) img.push_back({mx * i, k, g[k]});
            return img;
        }
        YPoly h = ypoly_mul(factor(i), g, t.p, t.digits());
        for (int k = 0; k < t.y_hi; ++k)
            if (!h[k].is_zero()) img.push_back({mx * i, k, h[k]});
        return img;
    };
    int xp = a.x_prec();
    if (xp != ModelElement::kExact) xp = std::min(xp * mx, t.x_hi);
    return a.map_terms(image, xp);
}

inline std::vector<YPoly> identity_y_powers(const Truncation& t) {
    YPoly g(t.y_hi, PadicNumber::zero(t.p, t.digits()));
    if (t.y_hi > 1) g[1] = ModelElement::scalar(t, 1);
    return ypoly_powers(g, t);
}

}  // namespace detail

// Frobenius: X -> X^p, Y -> (1+Y)^p - 1.
inline ModelElement apply_phi(const ModelElement& a) {
    const Truncation& t = a.truncation();
    auto g = one_plus_y_power_minus_one(t, ModelElement::scalar(t, t.p));
    return detail::apply_substitution(a, static_cast<int>(t.p), 0, ypoly_powers(g, t));
}

// tau: X -> (1+Y) X, Y -> Y.
inline ModelElement apply_tau(const ModelElement& a) {
    return detail::apply_substitution(a, 1, 1, detail::identity_y_powers(a.truncation()));
}

// tau^c for an integer c: X -> (1+Y)^c X.
inline ModelElement apply_tau_power(const ModelElement& a, long c) {
    return detail::apply_substitution(a, 1, c, detail::identity_y_powers(a.truncation()));
}

// gamma_c: X -> X, Y -> (1+Y)^c - 1.
inline ModelElement apply_gamma(const ModelElement& a, const PadicNumber& c) {
    if (!c.is_unit()) throw Error(ErrorCode::Precondition, "gamma_c needs c in Z_p^x");
    const Truncation& t = a.truncation();
    return detail::apply_substitution(a, 1, 0, ypoly_powers(one_plus_y_power_minus_one(t, c), t));
}

inline ModelElement d_dX(const ModelElement& a) {
    const Truncation& t = a.truncation();
    std::vector<Term> out;
    for (const auto& s : a.terms())
        if (s.x != 0) out.push_back({s.x - 1, s.y, ModelElement::scalar(t, s.x) * s.c});
    int xp = a.x_prec() == ModelElement::kExact ? ModelElement::kExact : a.x_prec() - 1;
    return ModelElement::from_terms(t, std::move(out), xp, a.floor());
}

// Parts of an element selected by exponent.
template <class Pred>
ModelElement select_terms(const ModelElement& a, Pred keep) {
    std::vector<Term> out;
    for (const auto& s : a.terms())
        if (keep(s.x, s.y)) out.push_back(s);
    return ModelElement::from_terms(a.truncation(), std::move(out), a.x_prec(), a.floor());
}

inline ModelElement y_free_part(const ModelElement& a) {
    return select_terms(a, [](int, int j) { return j == 0; });
}

inline ModelElement x_nonnegative_part(const ModelElement& a) {
    return select_terms(a, [](int i, int) { return i >= 0; });
}

// Smallest k such that the element is not known to be divisible by p^k: the
// minimum over stored coefficients (valuation, or precision for zeros) and the floor.
inline long residual_valuation(const ModelElement& a) { return std::min(a.min_valuation(), a.floor()); }

// Inverse of a = c X^i0 (1 + m) with m nilpotent in the window; Newton iteration
// y <- y(2 - a y), whose defect squares each step.
inline ModelElement elem_invert(const ModelElement& a) {
    const Truncation& t = a.truncation();
    const Term* lead = nullptr;
    for (const auto& s : a.terms())
        if (s.y == 0 && !s.c.is_zero() && (!lead || s.x < lead->x)) lead = &s;
    if (!lead) throw Error(ErrorCode::NotInvertible, "no Y-free unit term");
    for (const auto& s : a.terms())
        if (s.x < lead->x && !s.c.is_zero())
            throw Error(ErrorCode::NotInvertible, "term below the leading term");
    int i0 = lead->x;
    if (-i0 < t.x_lo || -i0 >= t.x_hi) throw Error(ErrorCode::NotInvertible, "inverse leaves the window");
    ModelElement y = ModelElement::monomial(t, -i0, 0, lead->c.inv());
    ModelElement one = ModelElement::one(t);
    long order = 1;
    long needed = static_cast<long>(t.x_hi - t.x_lo) + t.y_hi;
    while (order < needed) {
        ModelElement e = one - a * y;
        if (e.empty()) return y;
        y = y + y * e;
        order *= 2;
    }
    // The defect only squares away when a is a unit times X^i0 in the window.
    if (residual_valuation(one - a * y) < t.N) throw Error(ErrorCode::NotInvertible, "Newton iteration did not converge");
    return y;
}

// Sum_k C(s,k) m^k = (1+m)^s for m nilpotent in the window (X, Y exponents >= 0,
// no constant term).
inline ModelElement binomial_power(const ModelElement& m, const PadicNumber& s) {
    const Truncation& t = m.truncation();
    for (const auto& term : m.terms())
        if (term.x < 0 || (term.x == 0 && term.y == 0 && !term.c.is_zero()))
            throw Error(ErrorCode::Precondition, "binomial series needs a nilpotent argument");
    ModelElement acc = ModelElement::one(t);
    ModelElement pw = ModelElement::one(t);
    long cap = static_cast<long>(t.x_hi) + t.y_hi;
    for (long k = 1; k <= cap; ++k) {
        pw = pw * m;
        acc = acc + padic_binomial(s, k) * pw;
        if (pw.empty()) break;
    }
    return acc;
}

inline ModelElement elem_pow(const ModelElement& a, long n) {
    ModelElement base = n < 0 ? elem_invert(a) : a;
    unsigned long e = n < 0 ? static_cast<unsigned long>(-n) : static_cast<unsigned long>(n);
    ModelElement r = ModelElement::one(a.truncation());
    while (e) {
        if (e & 1) r = r * base;
        e >>= 1;
        if (e) base = base * base;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Certification and gauges.


struct ZeroCertificate {
    bool zero = false;
    long valuation = LONG_MAX;  // residual_valuation
    long target = 0;
    int x_window = 0;           // compared X-range is [x_lo, x_window)
};

inline ZeroCertificate certify_zero(const ModelElement& a, long target) {
    ZeroCertificate c;
    c.valuation = residual_valuation(a);
    c.target = target;
    c.zero = c.valuation >= target;
    c.x_window = a.x_window();
    return c;
}

inline ZeroCertificate certify_zero(const ModelElement& a) { return certify_zero(a, a.truncation().N); }

// (p, X)-adic order: min over terms of v(c) + max(i, 0) + j. Y = [eps]-1 lies in
// (p, X), so it weighs like X; negative X-powers count as units.
inline long ideal_gauge(const ModelElement& a) {
    long g = LONG_MAX;
    for (const auto& s : a.terms()) g = std::min(g, s.c.valuation() + std::max(s.x, 0) + s.y);
    return std::min(g, a.floor());
}

// Membership in (p, X)^(k+1) + (X)^k, term by term.
inline bool ideal_membership(const ModelElement& a, long k) {
    if (k < 1) throw Error(ErrorCode::Precondition, "ideal exponent must be positive");
    for (const auto& s : a.terms()) {
        if (s.x < 0) throw Error(ErrorCode::NegativeExponent, "negative X exponent");
        if (s.x >= k) continue;
        if (s.c.valuation() + s.x + s.y >= k + 1) continue;
        return false;
    }
    return a.floor() >= k + 1;
}

// Monomial weight i + j p/(p-1) (diagnostic only).
inline double weighted_degree(const Truncation& t, int i, int j) {
    return i + j * static_cast<double>(t.p) / static_cast<double>(t.p - 1);
}

// Re-express an element in a smaller (or equal) window.
inline ModelElement retruncate(const ModelElement& a, const Truncation& to) {
    const Truncation& from = a.truncation();
    if (to.p != from.p || to.x_lo < from.x_lo || to.x_hi > from.x_hi || to.y_hi > from.y_hi)
        throw Error(ErrorCode::TruncationMismatch, "retruncation must shrink the window");
    std::vector<Term> out;
    for (const auto& s : a.terms())
        if (s.y < to.y_hi) out.push_back(s);
    return ModelElement::from_terms(to, std::move(out), a.x_prec(), a.floor());
}

}  // namespace phitau
