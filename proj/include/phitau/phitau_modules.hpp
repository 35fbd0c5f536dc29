#pragma once

#include <optional>
#include <string>
#include <vector>

#include "matrix.hpp"
#include "period_elements.hpp"

namespace phitau {

// Exponent of [eps] in Mat(tau) of a rank-1 module. `commuting` is the one that
// makes tau(P)A = phi(A)P hold: (r+s)/(p-1). The other two are the alternatives
// -r and +r, kept so their residuals can be compared.
enum class TauRule { commuting, statement, proof };

inline const char* tau_rule_name(TauRule r) {
    switch (r) {
    case TauRule::commuting: return "commuting";
    case TauRule::statement: return "statement";
    case TauRule::proof: return "proof";
    }
    return "?";
}

// delta = mu_beta * omega^r * <chi>^s
struct Character {
    PadicNumber beta;
    long r = 0;
    PadicNumber s;

    static Character make(const Truncation& t, long beta, long r, long s) {
        return {ModelElement::scalar(t, beta), r, ModelElement::scalar(t, s)};
    }

    void validate() const {
        if (!beta.is_unit()) throw Error(ErrorCode::Precondition, "beta must be a unit");
        if (!s.is_zero() && s.valuation() < 0) throw Error(ErrorCode::Precondition, "s must be p-integral");
    }

    friend Character operator*(const Character& a, const Character& b) { return {a.beta * b.beta, a.r + b.r, a.s + b.s}; }
};

// Column convention: phi(e_j) = sum_i P_ij e_i, tau(e_j) = sum_i A_ij e_i.
struct PhiTauModule {
    size_t rank = 0;
    ElementMatrix mat_phi;
    std::optional<ElementMatrix> mat_tau;
    std::optional<ElementMatrix> mat_nnabla;
    std::string label;
    std::optional<ZeroCertificate> commutation;  // filled by builders that verify
};

// A tau(P) - P phi(A): zero iff the semilinear actions commute.
inline ElementMatrix check_commutation(const PhiTauModule& m) {
    if (!m.mat_tau) throw Error(ErrorCode::Precondition, "module has no tau matrix");
    const auto& P = m.mat_phi;
    const auto& A = *m.mat_tau;
    return A * P.map([](const ModelElement& e) { return apply_tau(e); }) -
           P * A.map([](const ModelElement& e) { return apply_phi(e); });
}

inline ZeroCertificate verify(PhiTauModule& m) {
    auto c = certify_zero(check_commutation(m));
    m.commutation = c;
    return c;
}

namespace detail {

// Nonnegative integer representative of a p-adic number.
inline mpz_class lift(const PadicNumber& a) {
    if (a.is_zero()) return 0;
    return a.unit() * ppow(a.prime(), a.valuation());
}

// beta X^r (1 - p/X)^(-s) = beta sum_k C(-s,k) (-p)^k X^(r-k). Non-terminating tails
// are cut below x_lo; the k-th coefficient has valuation >= k, so the cut is
// recorded as a floor of r - x_lo + 1.
inline ModelElement phi_entry(const Character& d, const Truncation& t) {
    auto ms = -d.s;
    long last = static_cast<long>(d.r) - t.x_lo;
    mpz_class n = lift(ms);
    bool terminates = n <= last;
    if (!terminates && last + 1 < t.N)
        throw Error(ErrorCode::WindowTooNarrow, "(1-p/X)^-s does not terminate and x_lo > r - N");
    long kmax = terminates ? n.get_si() : last;
    std::vector<Term> terms;
    PadicNumber mp = ModelElement::scalar(t, -t.p);
    PadicNumber pk = ModelElement::scalar(t, 1);
    for (long k = 0; k <= kmax; ++k) {
        terms.push_back({static_cast<int>(d.r - k), 0, d.beta * padic_binomial(ms, k) * pk});
        pk = pk * mp;
    }
    return ModelElement::from_terms(t, std::move(terms), ModelElement::kExact,
                                    terminates ? ModelElement::kNoFloor : last + 1);
}

inline PadicNumber eps_exponent(const Character& d, const Truncation& t, TauRule rule) {
    switch (rule) {
    case TauRule::commuting: return (ModelElement::scalar(t, d.r) + d.s) / ModelElement::scalar(t, t.p - 1);
    case TauRule::statement: return ModelElement::scalar(t, -d.r);
    case TauRule::proof: return ModelElement::scalar(t, d.r);
    }
    return ModelElement::scalar(t, 0);
}

// prod_{p^n < x_hi} phi^n(f)
inline ModelElement phi_orbit_product(ModelElement f) {
    const Truncation& t = f.truncation();
    auto prod = ModelElement::one(t);
    for (long q = 1; q < t.x_hi; q *= t.p) {
        prod = prod * f;
        f = apply_phi(f);
    }
    return prod;
}

inline ModelElement tau_entry(const Character& d, const PeriodBundle& pb, TauRule rule) {
    const Truncation& t = pb.trunc;
    auto e = eps_exponent(d, t, rule);
    auto eps = e.is_zero() ? ModelElement::one(t) : binomial_power(ModelElement::Y(t), e);
    if (d.s.is_zero()) return eps;
    return eps * phi_orbit_product(binomial_power(pb.alpha * ModelElement::X(t), -d.s));
}

}  // namespace detail

inline PhiTauModule rank1_module(const Character& delta, const PeriodBundle& pb, TauRule rule = TauRule::commuting) {
    delta.validate();
    PhiTauModule m;
    m.rank = 1;
    m.mat_phi = scalar_matrix(detail::phi_entry(delta, pb.trunc));
    m.mat_tau = scalar_matrix(detail::tau_entry(delta, pb, rule));
    m.label = std::string("rank1/") + tau_rule_name(rule);
    verify(m);
    return m;
}

// phi(e) = (X - p) e, tau(e) = prod phi^n(1 + alpha X) e.
inline PhiTauModule qp_minus_one_module(const PeriodBundle& pb) {
    const Truncation& t = pb.trunc;
    PhiTauModule m;
    m.rank = 1;
    m.mat_phi = scalar_matrix(eisenstein(t));
    m.mat_tau = scalar_matrix(detail::phi_orbit_product(ModelElement::one(t) + pb.alpha * ModelElement::X(t)));
    m.label = "Qp(-1)";
    verify(m);
    return m;
}

inline PhiTauModule trivial_module(const Truncation& t) {
    PhiTauModule m;
    m.rank = 1;
    m.mat_phi = identity_matrix(t, 1);
    m.mat_tau = identity_matrix(t, 1);
    m.label = "trivial";
    verify(m);
    return m;
}

inline PhiTauModule tensor(const PhiTauModule& a, const PhiTauModule& b) {
    PhiTauModule m;
    m.rank = a.rank * b.rank;
    m.mat_phi = kron(a.mat_phi, b.mat_phi);
    if (a.mat_tau && b.mat_tau) m.mat_tau = kron(*a.mat_tau, *b.mat_tau);
    m.label = "(" + a.label + ")x(" + b.label + ")";
    if (m.mat_tau) verify(m);
    return m;
}

// Dual basis: both matrices become inverse-transposes.
inline PhiTauModule dual(const PhiTauModule& a) {
    PhiTauModule m;
    m.rank = a.rank;
    m.mat_phi = inverse(a.mat_phi).transpose();
    if (a.mat_tau) m.mat_tau = inverse(*a.mat_tau).transpose();
    m.label = "dual(" + a.label + ")";
    if (m.mat_tau) verify(m);
    return m;
}

// Etale in the given basis: integral entries with X-exponents >= 0 and a unit
// constant term of det Mat(phi).
inline bool is_etale_window(const PhiTauModule& m) {
    for (const auto& e : m.mat_phi.entries())
        for (const auto& s : e.terms())
            if (!s.c.is_zero() && (s.x < 0 || s.c.valuation() < 0)) return false;
    return determinant(m.mat_phi).coeff(0, 0).is_unit();
}

// ---------------------------------------------------------------------------
// Congruences between rank-1 modules with r = 0, beta = 1.

struct CongruenceReport {
    bool hypothesis = false;  // s1 = s2 mod p^k
    bool member = false;      // every entry difference of the X^{>=0} parts lies in (p,X)^(k+1) + (X)^k
};

inline CongruenceReport congruence_report(const PadicNumber& s1, const PadicNumber& s2, long k, const PeriodBundle& pb) {
    const Truncation& t = pb.trunc;
    CongruenceReport rep;
    rep.hypothesis = (s1 - s2).is_zero_mod(k);
    auto one = ModelElement::scalar(t, 1);
    auto m1 = rank1_module({one, 0, s1}, pb);
    auto m2 = rank1_module({one, 0, s2}, pb);
    auto dp = x_nonnegative_part(m1.mat_phi(0, 0)) - x_nonnegative_part(m2.mat_phi(0, 0));
    auto da = x_nonnegative_part((*m1.mat_tau)(0, 0)) - x_nonnegative_part((*m2.mat_tau)(0, 0));
    rep.member = ideal_membership(dp, k) && ideal_membership(da, k);
    return rep;
}

inline bool congruence_check(const PadicNumber& s1, const PadicNumber& s2, long k, const PeriodBundle& pb) {
    return congruence_report(s1, s2, k, pb).member;
}

// ---------------------------------------------------------------------------
// N_nabla.

// N_nabla(phi f) - p (E/E(0)) phi(N_nabla f), which vanishes on Y-free f.
inline ModelElement nnabla_relation_residual(const ModelElement& f, const PeriodBundle& pb) {
    const Truncation& t = pb.trunc;
    auto p_e_over_e0 = ModelElement::integer(t, t.p) - ModelElement::X(t);
    return nnabla_on_ring(apply_phi(f), pb) - p_e_over_e0 * apply_phi(nnabla_on_ring(f, pb));
}

// -lambda X d/dX applied to b^m, which should equal m X lambda' b^m.
inline ModelElement weight_rule_residual(long m, const PeriodBundle& pb) {
    const Truncation& t = pb.trunc;
    auto bm = elem_pow(pb.b, m);
    auto lhs = -(pb.lambda * ModelElement::X(t) * d_dX(bm));
    return lhs - ModelElement::integer(t, m) * ModelElement::X(t) * pb.lambda_prime * bm;
}

// Rows: phi(e1) = E(0)/(pE) e1 (or E(0)/E e1 when literal), tau(e1) = (b/tau b) e1,
// tau(e2) = e2 + b e1; N_nabla(e1) = -X lambda' e1, N_nabla(e2) = -e1.
inline PhiTauModule false_tate_module(const PeriodBundle& pb, bool literal = false) {
    const Truncation& t = pb.trunc;
    auto zero = ModelElement(t), one = ModelElement::one(t);
    auto inv_e = elem_invert(eisenstein(t));
    PhiTauModule m;
    m.rank = 2;
    m.mat_phi = ElementMatrix(2, 2, zero);
    m.mat_phi(0, 0) = literal ? -(ModelElement::integer(t, t.p) * inv_e) : -inv_e;
    m.mat_phi(1, 1) = one;
    ElementMatrix A(2, 2, zero);
    A(0, 0) = apply_tau(pb.lambda) * elem_invert(pb.lambda);
    A(0, 1) = pb.b;
    A(1, 1) = one;
    m.mat_tau = A;
    ElementMatrix N(2, 2, zero);
    N(0, 0) = -(ModelElement::X(t) * pb.lambda_prime);
    N(0, 1) = -one;
    m.mat_nnabla = N;
    m.label = literal ? "false-tate/literal" : "false-tate";
    verify(m);
    return m;
}

// ---------------------------------------------------------------------------
// Trianguline modules with nonpositive Hodge-Tate weights.

struct TriangulineData {
    long k1 = 0, k2 = 0;
    PadicNumber d1p, d2p;
    ModelElement alpha_v, beta_v;
};

// beta_V = 0 mod X.
inline bool is_crystalline(const ModelElement& beta_v) {
    for (const auto& s : beta_v.terms())
        if (s.y != 0 || s.x < 0) throw Error(ErrorCode::Precondition, "beta_V must be a Y-free power series");
    // beta_V = 0 mod X at precision: the constant term vanishes mod p^N
    return certify_zero(select_terms(beta_v, [](int i, int) { return i == 0; })).zero;
}

inline PhiTauModule trianguline_module(const TriangulineData& d, const PeriodBundle& pb) {
    if (d.k1 > 0 || d.k2 > 0) throw Error(ErrorCode::WeightSign, "Hodge-Tate weights must be nonpositive");
    if (!d.alpha_v.is_y_free() || !d.beta_v.is_y_free())
        throw Error(ErrorCode::Precondition, "extension classes must be Y-free");
    const Truncation& t = pb.trunc;
    auto E = eisenstein(t);
    auto zero = ModelElement(t);
    PhiTauModule m;
    m.rank = 2;
    m.mat_phi = ElementMatrix(2, 2, zero);
    m.mat_phi(0, 0) = d.d1p * elem_pow(E, -d.k1);
    m.mat_phi(0, 1) = elem_pow(E, std::min(-d.k1, -d.k2)) * d.alpha_v;
    m.mat_phi(1, 1) = d.d2p * elem_pow(E, -d.k2);
    auto xl = ModelElement::X(t) * pb.lambda_prime;
    ElementMatrix N(2, 2, zero);
    N(0, 0) = ModelElement::integer(t, -d.k1) * xl;
    N(0, 1) = d.beta_v;
    N(1, 1) = ModelElement::integer(t, -d.k2) * xl;
    m.mat_nnabla = N;
    m.label = "trianguline";
    return m;
}

// Diagonal N_nabla entries -k X lambda' agree with the action on b^(-k).
inline bool trianguline_diagonal_consistent(const TriangulineData& d, const PeriodBundle& pb) {
    return certify_zero(weight_rule_residual(-d.k1, pb)).zero && certify_zero(weight_rule_residual(-d.k2, pb)).zero;
}

// ---------------------------------------------------------------------------
// Weight families: s = s0 + sigma, entries polynomial in sigma of degree < order.

struct WeightFamilyModule {
    size_t rank = 1;
    int order = 1;
    Character base;                      // beta, r, s0
    std::vector<ElementMatrix> phi_coeffs;  // coefficient of sigma^i
    std::vector<ElementMatrix> tau_coeffs;
};

namespace detail {

using SigmaPoly = std::vector<PadicNumber>;

// C(x0 + slope*sigma, k) as a polynomial in sigma, truncated at degree m.
inline SigmaPoly binom_poly(const PadicNumber& x0, const PadicNumber& slope, long k, int m, const Truncation& t) {
    SigmaPoly r(m, PadicNumber::zero(t.p, t.digits()));
    r[0] = ModelElement::scalar(t, 1);
    for (long i = 0; i < k; ++i) {
        auto c0 = x0 - ModelElement::scalar(t, i);
        SigmaPoly n(m, PadicNumber::zero(t.p, t.digits()));
        for (int d = 0; d < m; ++d) {
            n[d] += c0 * r[d];
            if (d + 1 < m) n[d + 1] += slope * r[d];
        }
        r = std::move(n);
    }
    mpz_class f;
    mpz_fac_ui(f.get_mpz_t(), static_cast<unsigned long>(k));
    auto finv = PadicNumber::from_integer(t.p, f, t.digits()).inv();
    for (auto& c : r) c = c * finv;
    return r;
}

using FamilyElement = std::vector<ModelElement>;

inline FamilyElement family_mul(const FamilyElement& a, const FamilyElement& b) {
    FamilyElement r(a.size(), ModelElement(a[0].truncation()));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; i + j < a.size(); ++j) r[i + j] = r[i + j] + a[i] * b[j];
    return r;
}

// (1+u)^(x0 + slope*sigma) for nilpotent u.
inline FamilyElement family_binomial_power(const ModelElement& u, const PadicNumber& x0, const PadicNumber& slope, int m) {
    const Truncation& t = u.truncation();
    FamilyElement acc(m, ModelElement(t));
    acc[0] = ModelElement::one(t);
    auto pw = ModelElement::one(t);
    long cap = static_cast<long>(t.x_hi) + t.y_hi;
    for (long k = 1; k <= cap; ++k) {
        pw = pw * u;
        if (pw.empty()) break;
        auto c = binom_poly(x0, slope, k, m, t);
        for (int d = 0; d < m; ++d) acc[d] = acc[d] + c[d] * pw;
    }
    return acc;
}

}  // namespace detail

inline WeightFamilyModule rank1_family(const PadicNumber& beta, long r, const PadicNumber& s0, int order,
                                       const PeriodBundle& pb) {
    if (order < 1) throw Error(ErrorCode::Precondition, "family order must be >= 1");
    const Truncation& t = pb.trunc;
    Character base{beta, r, s0};
    base.validate();
    WeightFamilyModule f;
    f.order = order;
    f.base = base;

    // P: beta X^r sum_k C(-s0 - sigma, k) (-p)^k X^-k, cut like rank1_module.
    long last = r - t.x_lo;
    if (last + 1 < t.N) throw Error(ErrorCode::WindowTooNarrow, "family Laurent tail needs x_lo <= r - N");
    std::vector<std::vector<Term>> pterms(order);
    auto mp = ModelElement::scalar(t, -t.p), pk = ModelElement::scalar(t, 1);
    auto minus_one = ModelElement::scalar(t, -1);
    for (long k = 0; k <= last; ++k) {
        auto c = detail::binom_poly(-s0, minus_one, k, order, t);
        for (int d = 0; d < order; ++d) pterms[d].push_back({static_cast<int>(r - k), 0, beta * c[d] * pk});
        pk = pk * mp;
    }
    for (int d = 0; d < order; ++d)
        f.phi_coeffs.push_back(scalar_matrix(
            ModelElement::from_terms(t, std::move(pterms[d]), ModelElement::kExact, last + 1)));

    // A: (1+Y)^((r + s0 + sigma)/(p-1)) prod phi^n((1 + alpha X)^(-s0 - sigma)).
    auto pm1 = ModelElement::scalar(t, t.p - 1);
    auto eps = detail::family_binomial_power(ModelElement::Y(t), (ModelElement::scalar(t, r) + s0) / pm1,
                                             ModelElement::scalar(t, 1) / pm1, order);
    auto g = detail::family_binomial_power(pb.alpha * ModelElement::X(t), -s0, minus_one, order);
    auto prod = eps;
    for (long q = 1; q < t.x_hi; q *= t.p) {
        prod = detail::family_mul(prod, g);
        for (auto& e : g) e = apply_phi(e);
    }
    for (auto& e : prod) f.tau_coeffs.push_back(scalar_matrix(e));
    return f;
}

// Substitutes sigma = s_val - s0; needs v(sigma) >= 1 (the family's radius).
inline PhiTauModule specialize(const WeightFamilyModule& f, const PadicNumber& s_val) {
    auto sigma = s_val - f.base.s;
    if (!sigma.is_zero_mod(1)) throw Error(ErrorCode::FamilyRadius, "s is outside the family's disc");
    auto sum = [&](const std::vector<ElementMatrix>& cs) {
        ElementMatrix r = cs[0];
        if (sigma.is_zero()) return r;
        PadicNumber pw = sigma;
        for (size_t d = 1; d < cs.size(); ++d) {
            r = r + cs[d].map([&](const ModelElement& e) { return pw * e; });
            pw = pw * sigma;
        }
        return r;
    };
    PhiTauModule m;
    m.rank = f.rank;
    m.mat_phi = sum(f.phi_coeffs);
    m.mat_tau = sum(f.tau_coeffs);
    m.label = "family-specialization";
    return m;
}

// Family gauge of a matrix: min over entries of v(c) + max(i,0) + j.
inline long family_gauge(const ElementMatrix& m) {
    long g = LONG_MAX;
    for (const auto& e : m.entries()) g = std::min(g, ideal_gauge(e));
    return g;
}

}  // namespace phitau
