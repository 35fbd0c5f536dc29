#pragma once

#include <vector>

#include "matrix.hpp"
#include "random.hpp"

namespace phitau {

// Single-variable Laurent model: T = X, no Y, p-adic cuts at both ends. R1 holds
// exponents >= 0, R2 exponents <= 0, R12 everything, R = R1 n R2 the constants.
inline Truncation laurent_window(long p = 3, int half_width = 24, long N = 12) {
    Truncation t;
    t.p = p;
    t.x_lo = -half_width;
    t.x_hi = half_width + 1;
    t.y_hi = 1;
    t.N = N;
    t.upper = UpperCut::p_adic;
    return t;
}

enum class Side { r1, r2 };

struct GluingDiagram {
    Truncation trunc;

    bool in_r1(const ModelElement& a) const { return a.min_x() >= 0; }
    bool in_r2(const ModelElement& a) const {
        for (const auto& s : a.terms())
            if (s.x > 0) return false;
        return true;
    }
    bool in_r(const ModelElement& a) const { return in_r1(a) && in_r2(a); }

    // c = a - b with a in R1 and b in R2: the difference map is onto.
    std::pair<ModelElement, ModelElement> split(const ModelElement& c) const {
        return {select_terms(c, [](int i, int) { return i >= 0; }), -select_terms(c, [](int i, int) { return i < 0; })};
    }
};

// Unit of R1 (or R2) near the identity: integral, supported on the right side,
// with a unit constant term and every other coefficient divisible by p.
inline bool is_side_unit(const ModelElement& a, Side side) {
    if (a.floor() < 1) return false;
    bool unit = false;
    for (const auto& s : a.terms()) {
        if (s.c.is_zero()) continue;
        if ((side == Side::r1 && s.x < 0) || (side == Side::r2 && s.x > 0)) return false;
        if (s.x == 0) {
            if (s.c.valuation() < 0) return false;
            unit = s.c.valuation() == 0;
        } else if (s.c.valuation() < 1) {
            return false;
        }
    }
    return unit;
}

// 1 (on the diagonal) + p * (random Laurent polynomial with exponents in [lo, hi]).
inline ElementMatrix random_laurent_near_one(const Truncation& t, Rng& rng, size_t d, int lo = -2, int hi = 2) {
    ElementMatrix m(d, d, ModelElement(t));
    for (size_t i = 0; i < d; ++i)
        for (size_t j = 0; j < d; ++j) {
            std::vector<Term> terms;
            for (int k = 0; k < 3; ++k)
                terms.push_back({static_cast<int>(rng.uniform(lo, hi)), 0, random_scalar(t, rng, 1, 2)});
            m(i, j) = ModelElement::from_terms(t, std::move(terms));
            if (i == j) m(i, j) = m(i, j) + ModelElement::one(t);
        }
    return m;
}

inline bool supported_on(const ElementMatrix& m, Side side) {
    for (const auto& e : m.entries())
        for (const auto& s : e.terms())
            if (!s.c.is_zero() && ((side == Side::r1 && s.x < 0) || (side == Side::r2 && s.x > 0))) return false;
    return true;
}

inline bool negligible(const ElementMatrix& m) { return certify_zero(m).zero; }

inline long matrix_valuation(const ElementMatrix& m) {
    long v = LONG_MAX;
    for (const auto& e : m.entries()) v = std::min(v, residual_valuation(e));
    return v;
}

// Newton inverse Z <- Z(2 - MZ), started at the inverse of the constant part; it
// converges when M is congruent to an invertible constant matrix mod p.
inline ElementMatrix near_inverse(const ElementMatrix& m) {
    const Truncation& t = m(0, 0).truncation();
    size_t n = m.rows();
    auto I = identity_matrix(t, n);
    auto Z = inverse(m.map([](const ModelElement& e) { return select_terms(e, [](int i, int) { return i == 0; }); }));
    for (int it = 0; it < 4 * t.N; ++it) {
        auto E = I - m * Z;
        if (negligible(E)) return Z;
        if (matrix_valuation(E) < 1) throw Error(ErrorCode::NotInvertible, "not a unit mod p");
        Z = Z + Z * E;
    }
    throw Error(ErrorCode::NoConvergence, "Newton inverse did not converge");
}

struct Factorization {
    ElementMatrix U1;  // exponents >= 0
    ElementMatrix U2;  // exponents <= 0
    int iterations = 0;
};

// U = U1 U2. Each pass splits U - 1 = V+ + V- (exponent 0 goes to V+) and
// replaces U by (1 - V+) U (1 - V-), whose defect is quadratic in the old one.
inline Factorization factor_near_identity(const ElementMatrix& U) {
    const Truncation& t = U(0, 0).truncation();
    size_t n = U.rows();
    auto I = identity_matrix(t, n);
    if (matrix_valuation(U - I) < 1) throw Error(ErrorCode::NotCloseEnough, "U - 1 is not divisible by p");
    Factorization f{I, I, 0};
    ElementMatrix cur = U;
    int cap = 4 * static_cast<int>(t.N);
    while (!negligible(cur - I)) {
        if (f.iterations >= cap) throw Error(ErrorCode::NoConvergence, "factorization did not converge");
        auto V = cur - I;
        auto Vp = V.map([](const ModelElement& e) { return select_terms(e, [](int i, int) { return i >= 0; }); });
        auto Vm = V.map([](const ModelElement& e) { return select_terms(e, [](int i, int) { return i < 0; }); });
        auto Lp = I - Vp, Lm = I - Vm;
        cur = Lp * cur * Lm;
        f.U1 = f.U1 * near_inverse(Lp);
        f.U2 = near_inverse(Lm) * f.U2;
        ++f.iterations;
    }
    return f;
}

// ---------------------------------------------------------------------------

// Free modules M1 = R1^d, M2 = R2^d and psi_i : M_i (x) R12 -> M12 as matrices.
struct FiniteGluingDatum {
    size_t d1 = 0, d2 = 0;
    ElementMatrix psi1, psi2;
};

// M = ker(psi1 - psi2) with generators x_j = (G1 e_j, G2 e_j): psi1 G1 = psi2 G2,
// G1 over R1, G2 over R2.
struct GluedModule {
    size_t rank = 0;
    ElementMatrix G1, G2;
    int iterations = 0;
    bool base_change_units = false;  // det G1 a unit of R1, det G2 a unit of R2
    bool kernel_relation = false;
};

inline GluedModule resolve_gluing_datum(const FiniteGluingDatum& D) {
    if (D.d1 != D.d2 || D.psi1.rows() != D.d1 || D.psi2.rows() != D.d2)
        throw Error(ErrorCode::RankMismatch, "gluing datum ranks differ");
    auto A = near_inverse(D.psi1) * D.psi2;  // v1 = A v2 on the kernel
    auto B = near_inverse(A);
    auto Bp = B.map([](const ModelElement& e) { return select_terms(e, [](int i, int) { return i <= 0; }); });
    auto E = A * Bp;  // = 1 + A (B' - B)
    const Truncation& t = A(0, 0).truncation();
    if (matrix_valuation(E - identity_matrix(t, D.d1)) < 1)
        throw Error(ErrorCode::NotCloseEnough, "1 + A(B' - B) is not close to 1");
    auto f = factor_near_identity(E);  // A B' = U1 U2, so A = U1 (B' U2^-1)^-1
    GluedModule m;
    m.rank = D.d1;
    m.G1 = f.U1;
    m.G2 = Bp * near_inverse(f.U2);
    m.iterations = f.iterations;
    m.base_change_units = is_side_unit(determinant(m.G1), Side::r1) && is_side_unit(determinant(m.G2), Side::r2);
    m.kernel_relation = negligible(D.psi1 * m.G1 - D.psi2 * m.G2);
    return m;
}

// ---------------------------------------------------------------------------
// Chains of windows: window k lives over R1 for even k and R2 for odd k; T_k
// expresses window k+1's basis in window k's (e^(k+1) = e^(k) T_k). The splice
// finds G_k over window k's ring with G_k^-1 T_k G_(k+1) = 1 for every k.

struct SpliceResult {
    std::vector<ElementMatrix> G;
    bool units = false;
    bool relations = false;
};

inline SpliceResult bundle_splice(const std::vector<ElementMatrix>& T) {
    if (T.empty()) throw Error(ErrorCode::Precondition, "no transitions");
    const Truncation& t = T[0](0, 0).truncation();
    size_t d = T[0].rows();
    auto I = identity_matrix(t, d);
    auto is_constant = [](const ElementMatrix& m) {
        for (const auto& e : m.entries())
            if (!certify_zero(select_terms(e, [](int i, int) { return i != 0; })).zero) return false;
        return true;
    };
    std::vector<ElementMatrix> G{I};
    std::vector<ElementMatrix> K;  // constant transitions after the local changes
    for (size_t k = 0; k < T.size(); ++k) {
        auto S = near_inverse(G[k]) * T[k];
        if (k % 2 == 0) {
            // window k over R1, k+1 over R2: S = A1 A2
            auto f = factor_near_identity(S);
            if (k == 0) {
                G[0] = f.U1;
                K.push_back(I);
            } else {
                if (!is_constant(f.U1)) throw Error(ErrorCode::Precondition, "transitions do not splice");
                K.push_back(f.U1);
            }
            G.push_back(near_inverse(f.U2));
        } else {
            // window k over R2, k+1 over R1: S^-1 = B1 B2 with B2 constant
            auto f = factor_near_identity(near_inverse(S));
            if (!is_constant(f.U2)) throw Error(ErrorCode::Precondition, "transitions do not splice");
            K.push_back(near_inverse(f.U2));
            G.push_back(f.U1);
        }
    }
    // Absorb the constant transitions: C_0 = 1, C_(k+1) = K_k^-1 C_k.
    SpliceResult r;
    auto C = I;
    r.G.push_back(G[0]);
    for (size_t k = 0; k < T.size(); ++k) {
        C = near_inverse(K[k]) * C;
        r.G.push_back(G[k + 1] * C);
    }
    r.units = true;
    r.relations = true;
    for (size_t k = 0; k < r.G.size(); ++k)
        r.units = r.units && is_side_unit(determinant(r.G[k]), k % 2 == 0 ? Side::r1 : Side::r2);
    for (size_t k = 0; k < T.size(); ++k)
        r.relations = r.relations && negligible(T[k] * r.G[k + 1] - r.G[k]);
    return r;
}

}  // namespace phitau
