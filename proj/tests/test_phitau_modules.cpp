#include <gtest/gtest.h>

#include "oracle.hpp"
#include "phitau/phitau_modules.hpp"
#include "phitau/random.hpp"

using namespace phitau;
using oracle::Series;

namespace {

Truncation window(long p) {
    Truncation t;
    t.p = p;
    return t;
}

const PeriodBundle& bundle(long p) {
    static std::map<long, PeriodBundle> cache;
    auto it = cache.find(p);
    if (it == cache.end()) it = cache.emplace(p, make_bundle(window(p))).first;
    return it->second;
}

bool is_zero(const ModelElement& a) { return certify_zero(a).zero; }
bool is_zero(const ElementMatrix& a) { return certify_zero(a).zero; }

ModelElement P(const PhiTauModule& m) { return m.mat_phi(0, 0); }
ModelElement A(const PhiTauModule& m) { return (*m.mat_tau)(0, 0); }

// (1+Y)^q for rational q as an exact series.
Series one_plus_y_rational(const mpq_class& q, int y_hi) {
    Series r;
    mpq_class c = 1;
    for (int k = 0; k < y_hi; ++k) {
        r.c[{0, k}] = c;
        c = c * (q - k) / (k + 1);
    }
    r.clean();
    return r;
}

}  // namespace

TEST(PhiTauModules, TrivialCharacter) {
    auto& pb = bundle(3);
    auto m = rank1_module(Character::make(pb.trunc, 1, 0, 0), pb);
    EXPECT_TRUE(oracle::represents(P(m), Series::monomial(0, 0, 1)));
    EXPECT_TRUE(oracle::represents(A(m), Series::monomial(0, 0, 1)));
    EXPECT_TRUE(m.commutation->zero);
    EXPECT_TRUE(is_zero(check_commutation(trivial_module(pb.trunc))));
}

TEST(PhiTauModules, QpMinusOneCommutes) {
    for (long p : {3L, 5L}) {
        auto& pb = bundle(p);
        auto m = qp_minus_one_module(pb);
        EXPECT_TRUE(is_zero(check_commutation(m))) << "p=" << p;
        Series e;
        e.c[{1, 0}] = 1;
        e.c[{0, 0}] = -p;
        EXPECT_TRUE(oracle::represents(P(m), e));
        // It is the rank-1 module of (beta, r, s) = (1, 1, -1).
        auto r1 = rank1_module(Character::make(pb.trunc, 1, 1, -1), pb);
        EXPECT_TRUE(is_zero(P(r1) - P(m)));
        EXPECT_TRUE(is_zero(A(r1) - A(m)));
        EXPECT_TRUE(r1.commutation->zero);
    }
}

// The statement-style exponent [eps]^-r breaks commutation for Qp(-1).
TEST(PhiTauModules, QpMinusOneUnderAlternativeRules) {
    auto& pb = bundle(3);
    auto d = Character::make(pb.trunc, 1, 1, -1);
    EXPECT_FALSE(rank1_module(d, pb, TauRule::statement).commutation->zero);
    EXPECT_FALSE(rank1_module(d, pb, TauRule::proof).commutation->zero);
}

TEST(PhiTauModules, PhiEntryMatchesBinomialOracle) {
    auto& pb = bundle(3);
    const auto& t = pb.trunc;
    // (1 - 3/X)^2 = 1 - 6/X + 9/X^2, times X^2.
    auto m = rank1_module(Character::make(t, 1, 2, -2), pb);
    Series e;
    e.c[{2, 0}] = 1;
    e.c[{1, 0}] = -6;
    e.c[{0, 0}] = 9;
    EXPECT_TRUE(oracle::represents(P(m), e));
    EXPECT_EQ(P(m).floor(), ModelElement::kNoFloor);

    // (1 - 3/X)^-1 = sum 3^k X^-k: cut at x_lo, with the cut recorded.
    auto m1 = rank1_module(Character::make(t, 2, 0, 1), pb);
    Series geo;
    for (int k = 0; k <= -t.x_lo; ++k) geo.c[{-k, 0}] = 2 * mpq_class(detail::ppow(3, k));
    EXPECT_TRUE(oracle::represents(P(m1), geo));
    EXPECT_EQ(P(m1).floor(), 1 - t.x_lo);
}

TEST(PhiTauModules, NonTerminatingSeriesNeedsWideWindow) {
    auto t = window(3);
    t.x_lo = -5;
    auto pb = make_bundle(t);
    try {
        (void)rank1_module(Character::make(t, 1, 0, 1), pb);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::WindowTooNarrow);
    }
    EXPECT_NO_THROW((void)rank1_module(Character::make(t, 1, 0, -3), pb));
}

TEST(PhiTauModules, BadCharacters) {
    auto& pb = bundle(3);
    const auto& t = pb.trunc;
    EXPECT_THROW((void)rank1_module(Character::make(t, 3, 0, 0), pb), Error);
    Character d{ModelElement::scalar(t, 1), 0, PadicNumber::from_rational(3, 1, 3, t.digits())};
    EXPECT_THROW((void)rank1_module(d, pb), Error);
}

// Mat(tau) of omega must be (1+Y)^(1/(p-1)); the alternatives -1 and +1 fail.
TEST(PhiTauModules, OmegaTauExponent) {
    for (long p : {3L, 5L}) {
        auto& pb = bundle(p);
        auto d = Character::make(pb.trunc, 1, 1, 0);
        auto good = rank1_module(d, pb);
        EXPECT_TRUE(good.commutation->zero);
        EXPECT_TRUE(oracle::represents(A(good), one_plus_y_rational(mpq_class(1, p - 1), pb.trunc.y_hi)));
        auto st = rank1_module(d, pb, TauRule::statement);
        auto pr = rank1_module(d, pb, TauRule::proof);
        EXPECT_FALSE(st.commutation->zero);
        EXPECT_FALSE(pr.commutation->zero);
        // Residual X[(1+Y)^(1+e) - (1+Y)^(pe)] for A = (1+Y)^e; at X Y it is (1+e) - pe.
        EXPECT_TRUE(check_commutation(st)(0, 0).coeff(1, 1).equals_at_precision(ModelElement::scalar(pb.trunc, p)));
        EXPECT_TRUE(check_commutation(pr)(0, 0).coeff(1, 1).equals_at_precision(ModelElement::scalar(pb.trunc, 2 - p)));
    }
}

TEST(PhiTauModules, TheoremCFamilyCommutes) {
    auto& pb = bundle(3);
    const auto& t = pb.trunc;
    for (long beta : {1L, 2L, -4L})
        for (long r : {0L, 1L, 2L})
            for (long s : {0L, -1L, -2L}) {
                auto m = rank1_module(Character::make(t, beta, r, s), pb);
                EXPECT_TRUE(m.commutation->zero) << beta << " " << r << " " << s;
            }
}

TEST(PhiTauModules, TensorIsMultiplicative) {
    auto& pb = bundle(3);
    const auto& t = pb.trunc;
    struct Case {
        long r1, s1, r2, s2;
    };
    for (auto c : {Case{1, 0, 0, 1}, Case{0, 1, 0, 3}, Case{1, -1, 2, 0}, Case{2, 3, 1, -2}}) {
        auto d1 = Character::make(t, 2, c.r1, c.s1), d2 = Character::make(t, 4, c.r2, c.s2);
        auto m = tensor(rank1_module(d1, pb), rank1_module(d2, pb));
        auto direct = rank1_module(d1 * d2, pb);
        EXPECT_TRUE(is_zero(m.mat_phi - direct.mat_phi)) << c.r1 << c.s1 << c.r2 << c.s2;
        EXPECT_TRUE(is_zero(*m.mat_tau - *direct.mat_tau));
    }
}

TEST(PhiTauModules, DualAndTensor) {
    auto& pb = bundle(3);
    auto m = rank1_module(Character::make(pb.trunc, 2, 1, -1), pb);
    auto d = dual(m);
    EXPECT_TRUE(d.commutation->zero);
    auto md = tensor(m, d);
    EXPECT_TRUE(is_zero(md.mat_phi - identity_matrix(pb.trunc, 1)));
    EXPECT_TRUE(is_zero(check_commutation(md)));
    auto dd = dual(d);
    EXPECT_TRUE(is_zero(dd.mat_phi - m.mat_phi));
    EXPECT_TRUE(is_zero(*dd.mat_tau - *m.mat_tau));
}

// Rank 2: Kronecker products of rank-1 and rank-2 modules still commute, and the
// ordering of factors is a basis permutation.
TEST(PhiTauModules, TensorOfRankTwo) {
    auto& pb = bundle(3);
    auto ft = false_tate_module(pb);
    auto om = rank1_module(Character::make(pb.trunc, 1, 1, 0), pb);
    auto a = tensor(ft, om), b = tensor(om, ft);
    EXPECT_TRUE(a.commutation->zero);
    EXPECT_TRUE(b.commutation->zero);
    EXPECT_TRUE(is_zero(a.mat_phi - b.mat_phi));  // rank 1 factor: permutation is trivial
}

TEST(PhiTauModules, EtaleWindow) {
    auto& pb = bundle(3);
    const auto& t = pb.trunc;
    EXPECT_TRUE(is_etale_window(trivial_module(t)));
    EXPECT_FALSE(is_etale_window(qp_minus_one_module(pb)));
    PhiTauModule x;
    x.rank = 1;
    x.mat_phi = scalar_matrix(ModelElement::X(t));
    EXPECT_FALSE(is_etale_window(x));
    x.mat_phi = scalar_matrix(ModelElement::integer(t, 2) + ModelElement::X(t));
    EXPECT_TRUE(is_etale_window(x));
}

TEST(PhiTauModules, CongruenceExamples) {
    auto& pb = bundle(3);
    const auto& t = pb.trunc;
    auto s = [&](long v) { return ModelElement::scalar(t, v); };
    EXPECT_TRUE(congruence_check(s(0), s(3), 1, pb));
    EXPECT_TRUE(congruence_check(s(5), s(5), 3, pb));
    auto neg = congruence_report(s(0), s(1), 1, pb);
    EXPECT_FALSE(neg.hypothesis);
    EXPECT_FALSE(neg.member);
}

// Failure at k persists at k+1: the ideals shrink.
TEST(PhiTauModules, CongruenceMonotoneInK) {
    auto& pb = bundle(3);
    const auto& t = pb.trunc;
    for (long s2 : {1L, 2L, 3L, 6L, 9L}) {
        bool failed = false;
        for (long k = 1; k <= 3; ++k) {
            bool ok = congruence_check(ModelElement::scalar(t, 0), ModelElement::scalar(t, s2), k, pb);
            if (failed) {
                EXPECT_FALSE(ok) << "s2=" << s2 << " k=" << k;
            }
            failed = failed || !ok;
        }
    }
}

TEST(PhiTauModules, NnablaLeibnizAndKisinRelation) {
    auto& pb = bundle(3);
    const auto& t = pb.trunc;
    Rng rng(11);
    RandomShape shape{0, 10, 0, 5, 0, 3};
    for (int trial = 0; trial < 10; ++trial) {
        auto f = random_element(t, rng, shape), g = random_element(t, rng, shape);
        EXPECT_TRUE(is_zero(nnabla_on_ring(f * g, pb) - nnabla_on_ring(f, pb) * g - f * nnabla_on_ring(g, pb)));
        EXPECT_TRUE(is_zero(nnabla_relation_residual(f, pb)));
    }
}

TEST(PhiTauModules, FalseTateMatrices) {
    for (long p : {3L, 5L}) {
        auto& pb = bundle(p);
        const auto& t = pb.trunc;
        auto m = false_tate_module(pb);
        EXPECT_TRUE(m.commutation->zero) << p;
        auto lit = false_tate_module(pb, true);
        EXPECT_FALSE(lit.commutation->zero);
        // Literal E(0)/E = -p/(X - p) = sum (X/p)^n.
        Series geo;
        for (int n = 0; n < t.x_hi; ++n) geo.c[{n, 0}] = mpq_class(1) / mpq_class(detail::ppow(p, n));
        EXPECT_TRUE(oracle::represents(lit.mat_phi(0, 0), geo));
        auto res = check_commutation(lit);
        EXPECT_TRUE(certify_zero(res(0, 0)).zero);
        EXPECT_FALSE(certify_zero(res(0, 1)).zero);
        // b / tau(b) through t: b tau(lambda) = tau(b) lambda.
        EXPECT_TRUE(is_zero((*m.mat_tau)(0, 0) * apply_tau(pb.b) - pb.b));
        const auto& N = *m.mat_nnabla;
        EXPECT_TRUE(N(1, 0).empty() && N(1, 1).empty());
        // N(e1) = -X lambda' e1 where e1 ~ 1/b = numerator / Y.
        const auto& num = pb.b_inv.numerator;
        EXPECT_TRUE(is_zero(-(pb.lambda * ModelElement::X(t) * d_dX(num)) - N(0, 0) * num));
    }
}

TEST(PhiTauModules, TriangulineExamples) {
    auto& pb = bundle(3);
    const auto& t = pb.trunc;
    TriangulineData d{0, 0, ModelElement::scalar(t, 2), ModelElement::scalar(t, 4), ModelElement(t), ModelElement(t)};
    auto m = trianguline_module(d, pb);
    EXPECT_TRUE(is_zero(m.mat_phi(0, 0) - ModelElement::integer(t, 2)));
    EXPECT_TRUE(m.mat_phi(0, 1).empty());
    for (const auto& e : m.mat_nnabla->entries()) EXPECT_TRUE(e.empty());
    EXPECT_TRUE(is_crystalline(d.beta_v));
    EXPECT_TRUE(is_crystalline(ModelElement::X(t)));
    EXPECT_FALSE(is_crystalline(ModelElement::one(t)));

    d.k1 = 1;
    try {
        (void)trianguline_module(d, pb);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::WeightSign);
    }
}

TEST(PhiTauModules, TriangulineWeights) {
    auto& pb = bundle(3);
    const auto& t = pb.trunc;
    TriangulineData d{-1, -3, ModelElement::scalar(t, 1), ModelElement::scalar(t, 5), ModelElement::X(t, 2),
                      ModelElement::one(t)};
    auto m = trianguline_module(d, pb);
    auto E = eisenstein(t);
    EXPECT_TRUE(is_zero(m.mat_phi(0, 0) - E));
    EXPECT_TRUE(is_zero(m.mat_phi(1, 1) - ModelElement::integer(t, 5) * E * E * E));
    EXPECT_TRUE(is_zero(m.mat_phi(0, 1) - E * ModelElement::X(t, 2)));
    EXPECT_TRUE(trianguline_diagonal_consistent(d, pb));
    for (const auto& e : m.mat_phi.entries()) EXPECT_TRUE(is_zero(nnabla_relation_residual(e, pb)));
}

TEST(PhiTauModules, FamilySpecialization) {
    auto& pb = bundle(3);
    const auto& t = pb.trunc;
    auto one = ModelElement::scalar(t, 1);
    for (long s0 : {0L, -1L, 2L}) {
        auto f = rank1_family(one, 1, ModelElement::scalar(t, s0), 3, pb);
        auto at0 = specialize(f, ModelElement::scalar(t, s0));
        auto direct = rank1_module({one, 1, ModelElement::scalar(t, s0)}, pb);
        EXPECT_TRUE(is_zero(at0.mat_phi - direct.mat_phi)) << s0;
        EXPECT_TRUE(is_zero(*at0.mat_tau - *direct.mat_tau)) << s0;
    }
    EXPECT_THROW((void)specialize(rank1_family(one, 0, ModelElement::scalar(t, 0), 2, pb), one), Error);
}

// Taylor remainder: at sigma = p an order-m family is off by p^m.
TEST(PhiTauModules, FamilyTaylorRemainder) {
    auto& pb = bundle(3);
    const auto& t = pb.trunc;
    auto one = ModelElement::scalar(t, 1);
    auto s0 = ModelElement::scalar(t, 0), s1 = ModelElement::scalar(t, 3);
    auto direct = rank1_module({one, 0, s1}, pb);
    for (int m : {1, 2, 3}) {
        auto f = rank1_family(one, 0, s0, m, pb);
        auto sp = specialize(f, s1);
        long g = std::min(family_gauge(sp.mat_phi - direct.mat_phi), family_gauge(*sp.mat_tau - *direct.mat_tau));
        EXPECT_GE(g, m) << "m=" << m;
    }
}

// The X^r factor carries no sigma-dependence: raising r multiplies every
// sigma-coefficient of P by X.
TEST(PhiTauModules, FamilyShiftInR) {
    auto& pb = bundle(3);
    const auto& t = pb.trunc;
    auto b = ModelElement::scalar(t, 2), s0 = ModelElement::scalar(t, -1);
    auto f0 = rank1_family(b, 0, s0, 2, pb), f1 = rank1_family(b, 1, s0, 2, pb);
    for (int d = 0; d < 2; ++d) {
        auto diff = f1.phi_coeffs[d](0, 0) - ModelElement::X(t) * f0.phi_coeffs[d](0, 0);
        EXPECT_GE(residual_valuation(diff), t.N);
    }
    EXPECT_FALSE(f0.phi_coeffs[1](0, 0).empty());
}
