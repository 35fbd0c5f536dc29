#pragma once

#include <functional>
#include <vector>

#include "matrix.hpp"
#include "random.hpp"

namespace phitau {

// Ambient ring T with a generator gamma, a projector R onto the descended subring,
// an inverse of gamma - 1 on ker R, and a filtration gauge. Losses are in gauge units.
template <class T>
struct TateSenDatum {
    std::function<T(const T&)> gamma;
    std::function<T(const T&)> project;
    std::function<T(const T&)> solve;  // (gamma - 1)^-1 on ker R
    std::function<long(const T&)> gauge;
    std::function<bool(const T&)> negligible;  // zero at working precision
    std::function<Matrix<T>(const Matrix<T>&)> invert;
    T zero, one;
    long l1 = 0, l2 = 0, l3 = 0;
    long delta = 1;
    int iteration_cap = 48;

    Matrix<T> identity(size_t n) const { return Matrix<T>::identity(n, one, zero); }
};

// A finite group acting on T: act[0] is the identity; alpha has sum_g g(alpha) = 1.
template <class T>
struct FiniteGroup {
    std::vector<std::function<T(const T&)>> act;
    T alpha;
};

namespace detail {

template <class T, class F>
Matrix<T> entrywise(const Matrix<T>& m, F&& f) {
    return m.map([&](const T& e) { return f(e); });
}

template <class T>
long matrix_gauge(const Matrix<T>& m, const TateSenDatum<T>& D) {
    long g = LONG_MAX;
    for (const auto& e : m.entries()) g = std::min(g, D.gauge(e));
    return g;
}

template <class T>
bool matrix_negligible(const Matrix<T>& m, const TateSenDatum<T>& D) {
    for (const auto& e : m.entries())
        if (!D.negligible(e)) return false;
    return true;
}

template <class T>
Matrix<T> complement(const Matrix<T>& m, const TateSenDatum<T>& D) {
    return entrywise(m, [&](const T& e) { return e - D.project(e); });
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Finite groups: averaging against a partition of unity.

template <class T>
Matrix<T> finite_average_trivialize(std::vector<Matrix<T>> U, const FiniteGroup<T>& G, const TateSenDatum<T>& D) {
    if (U.size() != G.act.size()) throw Error(ErrorCode::RankMismatch, "one cocycle value per group element");
    size_t d = U[0].rows();
    auto I = D.identity(d);
    for (const auto& u : U)
        if (detail::matrix_gauge(u - I, D) <= D.l1) throw Error(ErrorCode::NotCloseEnough, "cocycle is not close to 1");
    Matrix<T> M = I;
    long last = LONG_MIN;
    for (int it = 0; it < D.iteration_cap; ++it) {
        bool done = true;
        long g = LONG_MAX;
        for (const auto& u : U) {
            done = done && detail::matrix_negligible(u - I, D);
            g = std::min(g, detail::matrix_gauge(u - I, D));
        }
        if (done) return M;
        if (last != LONG_MIN && g < last + 1) throw Error(ErrorCode::NoConvergence, "averaging stalled");
        last = g;
        // M_Q = sum_g g(alpha) U_g
        Matrix<T> step = detail::entrywise(U[0], [&](const T& e) { return G.act[0](G.alpha) * e; });
        for (size_t k = 1; k < U.size(); ++k) {
            auto a = G.act[k](G.alpha);
            step = step + detail::entrywise(U[k], [&](const T& e) { return a * e; });
        }
        auto inv = D.invert(step);
        for (size_t k = 0; k < U.size(); ++k) U[k] = inv * U[k] * step.map(G.act[k]);
        M = M * step;
    }
    throw Error(ErrorCode::NoConvergence, "averaging did not converge");
}

// ---------------------------------------------------------------------------
// Decompletion of a gamma-cocycle.

template <class T>
struct DescentResult {
    Matrix<T> M;
    Matrix<T> W;  // M^-1 U gamma(M), descended
    int iterations = 0;
    std::vector<long> gauges;  // complement gauge before each step
};

template <class T>
DescentResult<T> decompletion_descend(const Matrix<T>& U, const TateSenDatum<T>& D) {
    size_t d = U.rows();
    auto I = D.identity(d);
    long need = 2 * D.l2 + 2 * D.l3 + D.delta;
    if (detail::matrix_gauge(U - I, D) < need) throw Error(ErrorCode::NotCloseEnough, "w(U - 1) below 2 l2 + 2 l3 + delta");
    DescentResult<T> r{I, U, 0, {}};
    for (;;) {
        auto xc = detail::complement(r.W, D);
        r.gauges.push_back(detail::matrix_gauge(xc, D));
        if (detail::matrix_negligible(xc, D)) return r;
        if (r.iterations >= D.iteration_cap) throw Error(ErrorCode::NoConvergence, "descent iteration cap reached");
        // (gamma - 1) V = -xc kills the complement to first order.
        auto V = detail::entrywise(xc, [&](const T& e) { return D.solve(D.zero - e); });
        auto step = I + V;
        r.W = D.invert(step) * r.W * step.map(D.gamma);
        r.M = r.M * step;
        ++r.iterations;
    }
}

// gamma(B) = V1 B V2 with V1, V2 descended forces B descended.
template <class T>
bool translate_uniqueness_check(const Matrix<T>& B, const Matrix<T>& V1, const Matrix<T>& V2, const TateSenDatum<T>& D) {
    if (!detail::matrix_negligible(detail::complement(V1, D), D) ||
        !detail::matrix_negligible(detail::complement(V2, D), D))
        throw Error(ErrorCode::HypothesisFails, "V1, V2 must be descended");
    if (!detail::matrix_negligible(B.map(D.gamma) - V1 * B * V2, D))
        throw Error(ErrorCode::HypothesisFails, "gamma(B) != V1 B V2");
    return detail::matrix_negligible(detail::complement(B, D), D);
}

// H finite, then gamma: M = M1 M2 with M1 from averaging and M2 from decompletion.
template <class T>
struct FullDescentResult {
    Matrix<T> M;
    std::vector<Matrix<T>> V_H;
    Matrix<T> V_gamma;
    int iterations = 0;
    bool trivial_on_h = false;
    bool cross_relation = false;
};

template <class T>
FullDescentResult<T> full_descend(const std::vector<Matrix<T>>& U_H, const Matrix<T>& U_gamma, const FiniteGroup<T>& G,
                                  const TateSenDatum<T>& D) {
    auto M1 = finite_average_trivialize(U_H, G, D);
    auto U1 = D.invert(M1) * U_gamma * M1.map(D.gamma);
    auto dr = decompletion_descend(U1, D);
    FullDescentResult<T> r;
    r.M = M1 * dr.M;
    r.V_gamma = dr.W;
    r.iterations = dr.iterations;
    auto Minv = D.invert(r.M);
    auto I = D.identity(U_gamma.rows());
    r.trivial_on_h = true;
    r.cross_relation = true;
    for (size_t k = 0; k < U_H.size(); ++k) {
        auto V = Minv * U_H[k] * r.M.map(G.act[k]);
        r.trivial_on_h = r.trivial_on_h && detail::matrix_negligible(V - I, D);
        // V_s s(V_gamma) = V_gamma gamma(V_s)
        auto cross = V * r.V_gamma.map(G.act[k]) - r.V_gamma * V.map(D.gamma);
        r.cross_relation = r.cross_relation && detail::matrix_negligible(cross, D);
        r.V_H.push_back(std::move(V));
    }
    return r;
}

// ---------------------------------------------------------------------------
// Bivariate instance: gamma = gamma_c, descended subring = Y-free elements.

namespace detail {

// Back-substitution on Y-degree; (gamma_c - 1) Y^j = (c^j - 1) Y^j + higher.
inline ModelElement gamma_solve_core(const ModelElement& x, const PadicNumber& c) {
    const Truncation& t = x.truncation();
    auto gpow = ypoly_powers(one_plus_y_power_minus_one(t, c), t);
    std::vector<PadicNumber> diag(t.y_hi, ModelElement::scalar(t, 0));
    for (int j = 1; j < t.y_hi; ++j) {
        diag[j] = gpow[j][j] - ModelElement::scalar(t, 1);
        if (diag[j].is_zero()) throw Error(ErrorCode::SingularDiagonal, "c^j = 1 at precision");
    }
    std::map<int, std::vector<PadicNumber>> cols;
    for (const auto& s : x.terms()) {
        auto& v = cols.try_emplace(s.x, t.y_hi, PadicNumber::zero(t.p, t.digits())).first->second;
        v[s.y] = s.c;
    }
    std::vector<Term> out;
    for (auto& [i, xs] : cols) {
        std::vector<PadicNumber> y(t.y_hi, PadicNumber::zero(t.p, t.digits()));
        for (int j = 1; j < t.y_hi; ++j) {
            auto rhs = xs[j];
            for (int k = 1; k < j; ++k) rhs -= y[k] * gpow[k][j];
            y[j] = rhs / diag[j];
            out.push_back({i, j, y[j]});
        }
    }
    return ModelElement::from_terms(t, std::move(out), x.x_prec(), ModelElement::kNoFloor);
}

}  // namespace detail

// Largest valuation drop of the solver on the basis Y^j.
inline long gamma_solve_loss(const Truncation& t, const PadicNumber& c) {
    long l = 0;
    for (int j = 1; j < t.y_hi; ++j)
        l = std::max(l, -detail::gamma_solve_core(ModelElement::Y(t, j), c).min_valuation());
    return l;
}

inline ModelElement gamma_solve(const ModelElement& x, const PadicNumber& c) {
    if (!certify_zero(y_free_part(x)).zero) throw Error(ErrorCode::Precondition, "x has a nonzero Y-free part");
    auto y = detail::gamma_solve_core(x, c);
    if (x.floor() == ModelElement::kNoFloor) return y;
    return y.with_floor(x.floor() - gamma_solve_loss(x.truncation(), c));
}

// min over terms of v(c) + max(0, i): Y carries no weight here.
inline long ts_gauge(const ModelElement& a) {
    long g = LONG_MAX;
    for (const auto& s : a.terms()) g = std::min(g, s.c.valuation() + std::max(s.x, 0));
    return std::min(g, a.floor());
}

inline Truncation bivariate_window(long p = 3) {
    Truncation t;
    t.p = p;
    t.x_lo = 0;
    t.x_hi = 10;
    t.y_hi = 4;
    t.N = 12;
    return t;
}

inline TateSenDatum<ModelElement> bivariate_datum(const Truncation& t, long c) {
    TateSenDatum<ModelElement> D;
    auto cc = ModelElement::scalar(t, c);
    D.gamma = [cc](const ModelElement& a) { return apply_gamma(a, cc); };
    D.project = [](const ModelElement& a) { return y_free_part(a); };
    D.solve = [cc](const ModelElement& a) { return gamma_solve(a, cc); };
    D.gauge = ts_gauge;
    D.negligible = [](const ModelElement& a) { return certify_zero(a).zero; };
    D.invert = [](const ElementMatrix& m) { return inverse(m); };
    D.zero = ModelElement(t);
    D.one = ModelElement::one(t);
    D.l3 = gamma_solve_loss(t, cc);
    D.iteration_cap = static_cast<int>(4 * t.N);
    return D;
}

// Seeded descent inputs: U = C W0 gamma(C)^-1 with W0 Y-free and both C and W0
// within ts_gauge >= a of the identity.
struct DescentInput {
    ElementMatrix U, C, W0;
};

inline ModelElement random_near_identity_entry(const Truncation& t, Rng& rng, long a, bool y_free, bool diagonal) {
    std::vector<Term> terms;
    for (int k = 0; k < 4; ++k) {
        int i = static_cast<int>(rng.uniform(0, 5));
        int j = y_free ? 0 : static_cast<int>(rng.uniform(0, t.y_hi - 1));
        long v = std::max<long>(0, a - i) + rng.uniform(0, 1);
        terms.push_back({i, j, random_scalar(t, rng, v, v)});
    }
    auto e = ModelElement::from_terms(t, std::move(terms));
    return diagonal ? ModelElement::one(t) + e : e;
}

inline ElementMatrix random_near_identity(const Truncation& t, Rng& rng, size_t d, long a, bool y_free) {
    ElementMatrix m(d, d, ModelElement(t));
    for (size_t i = 0; i < d; ++i)
        for (size_t j = 0; j < d; ++j) m(i, j) = random_near_identity_entry(t, rng, a, y_free, i == j);
    return m;
}

inline DescentInput random_descent_input(const TateSenDatum<ModelElement>& D, const Truncation& t, Rng& rng, size_t d,
                                         long a = 7) {
    DescentInput in;
    in.W0 = random_near_identity(t, rng, d, a, true);
    in.C = random_near_identity(t, rng, d, a, false);
    in.U = in.C * in.W0 * D.invert(in.C.map(D.gamma));
    return in;
}

// ---------------------------------------------------------------------------
// Product instance B x B with Z/2 swapping the factors.

struct PairElement {
    ModelElement a, b;

    friend PairElement operator+(const PairElement& x, const PairElement& y) { return {x.a + y.a, x.b + y.b}; }
    friend PairElement operator-(const PairElement& x, const PairElement& y) { return {x.a - y.a, x.b - y.b}; }
    friend PairElement operator*(const PairElement& x, const PairElement& y) { return {x.a * y.a, x.b * y.b}; }
};

using PairMatrix = Matrix<PairElement>;

inline PairMatrix pair_matrix(const ElementMatrix& a, const ElementMatrix& b) {
    PairMatrix r(a.rows(), a.cols(), {a(0, 0), b(0, 0)});
    for (size_t i = 0; i < a.rows(); ++i)
        for (size_t j = 0; j < a.cols(); ++j) r(i, j) = {a(i, j), b(i, j)};
    return r;
}

inline ElementMatrix first(const PairMatrix& m) { return m.map([](const PairElement& e) { return e.a; }); }
inline ElementMatrix second(const PairMatrix& m) { return m.map([](const PairElement& e) { return e.b; }); }

inline PairElement swap(const PairElement& x) { return {x.b, x.a}; }

inline TateSenDatum<PairElement> pair_datum(const Truncation& t, long c) {
    auto B = bivariate_datum(t, c);
    TateSenDatum<PairElement> D;
    D.gamma = [B](const PairElement& x) { return PairElement{B.gamma(x.a), B.gamma(x.b)}; };
    D.project = [B](const PairElement& x) { return PairElement{B.project(x.a), B.project(x.b)}; };
    D.solve = [B](const PairElement& x) { return PairElement{B.solve(x.a), B.solve(x.b)}; };
    D.gauge = [](const PairElement& x) { return std::min(ts_gauge(x.a), ts_gauge(x.b)); };
    D.negligible = [](const PairElement& x) { return certify_zero(x.a).zero && certify_zero(x.b).zero; };
    D.invert = [](const PairMatrix& m) { return pair_matrix(inverse(first(m)), inverse(second(m))); };
    D.zero = {B.zero, B.zero};
    D.one = {B.one, B.one};
    D.l3 = B.l3;
    D.iteration_cap = B.iteration_cap;
    return D;
}

// Z/2 = {1, swap}; alpha = (1, 0) is a partition of unity.
inline FiniteGroup<PairElement> swap_group(const Truncation& t) {
    FiniteGroup<PairElement> G;
    G.act.push_back([](const PairElement& x) { return x; });
    G.act.push_back([](const PairElement& x) { return swap(x); });
    G.alpha = {ModelElement::one(t), ModelElement(t)};
    return G;
}

}  // namespace phitau
