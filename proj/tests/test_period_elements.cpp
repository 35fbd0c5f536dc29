#include <gtest/gtest.h>

#include "oracle.hpp"
#include "phitau/period_elements.hpp"

using namespace phitau;
using oracle::Series;

namespace {

Truncation window(long p, int x_lo, int x_hi, int y_hi, long N = 12) {
    Truncation t;
    t.p = p;
    t.x_lo = x_lo;
    t.x_hi = x_hi;
    t.y_hi = y_hi;
    t.N = N;
    return t;
}

bool is_zero(const ModelElement& a) { return certify_zero(a).zero; }

// Exact product of the lambda factors, independent of the library.
Series lambda_oracle(long p, int x_hi, int y_hi, int sign) {
    Series r = Series::monomial(0, 0, 1);
    for (long q = 1; q < x_hi; q *= p) {
        Series f = Series::monomial(0, 0, sign);
        f.c[{static_cast<int>(q), 0}] = mpq_class(-sign, p);
        r = oracle::mul(r, f, x_hi, y_hi);
    }
    return r;
}

}  // namespace

TEST(PeriodElements, LambdaSmallWindow) {
    auto t = window(3, 0, 9, 2);
    auto lambda = compute_lambda(t);
    Series expect;
    expect.c[{0, 0}] = 1;
    expect.c[{1, 0}] = mpq_class(-1, 3);
    expect.c[{3, 0}] = mpq_class(-1, 3);
    expect.c[{4, 0}] = mpq_class(1, 9);
    EXPECT_TRUE(oracle::represents(lambda, expect));
    EXPECT_TRUE(oracle::represents(lambda, lambda_oracle(3, 9, 2, 1)));
    EXPECT_EQ(lambda.terms().size(), 4u);

    auto t2 = window(5, 0, 2, 2);
    Series single;
    single.c[{0, 0}] = 1;
    single.c[{1, 0}] = mpq_class(-1, 5);
    EXPECT_TRUE(oracle::represents(compute_lambda(t2), single));
}

TEST(PeriodElements, LambdaMatchesOracleOnDefaultWindow) {
    for (long p : {3L, 5L}) {
        auto t = window(p, -12, 32, 8);
        EXPECT_TRUE(oracle::represents(compute_lambda(t), lambda_oracle(p, 32, 8, 1)));
        EXPECT_TRUE(oracle::represents(compute_lambda(t, LambdaConvention::negated), lambda_oracle(p, 32, 8, -1)));
    }
}

TEST(PeriodElements, FunctionalEquationBothConventions) {
    for (long p : {3L, 5L}) {
        auto t = window(p, -12, 32, 8);
        auto ratio = -PadicNumber::from_rational(p, 1, p, t.digits()) * eisenstein(t);  // E/E(0)
        for (auto conv : {LambdaConvention::kisin, LambdaConvention::negated}) {
            auto lambda = compute_lambda(t, conv);
            EXPECT_TRUE(is_zero(lambda - ratio * apply_phi(lambda))) << convention_name(conv);
        }
    }
}

TEST(PeriodElements, NegatedIsASignTwistAndNotWindowCoherent) {
    auto t = window(3, -12, 32, 8);
    int m = lambda_factor_count(t);
    auto k = compute_lambda(t), s = compute_lambda(t, LambdaConvention::negated);
    EXPECT_TRUE(is_zero(s - ModelElement::integer(t, m % 2 ? -1 : 1) * k));
    // x_hi 9 has two factors for p = 3, x_hi 10 has three: the negated constant terms disagree.
    auto a = compute_lambda(window(3, 0, 9, 2), LambdaConvention::negated);
    auto b = compute_lambda(window(3, 0, 10, 2), LambdaConvention::negated);
    EXPECT_FALSE(a.coeff(0, 0).equals_at_precision(b.coeff(0, 0)));
    auto ak = compute_lambda(window(3, 0, 9, 2)), bk = compute_lambda(window(3, 0, 10, 2));
    EXPECT_TRUE(ak.coeff(0, 0).equals_at_precision(bk.coeff(0, 0)));
    EXPECT_TRUE(k.coeff(0, 0).is_unit());
}

TEST(PeriodElements, LogarithmT) {
    auto t = window(3, 0, 4, 3);
    auto tt = compute_t(t);
    Series expect;
    expect.c[{0, 1}] = 1;
    expect.c[{0, 2}] = mpq_class(-1, 2);
    EXPECT_TRUE(oracle::represents(tt, expect));

    auto w = window(3, -12, 32, 8);
    auto t8 = compute_t(w);
    EXPECT_TRUE(is_zero(apply_gamma(t8, ModelElement::scalar(w, 1)) - t8));
    EXPECT_TRUE(is_zero(apply_tau(t8) - t8));
    for (long c : {2L, 4L}) {
        auto cc = ModelElement::scalar(w, c);
        EXPECT_TRUE(is_zero(apply_gamma(t8, cc) - cc * t8));
    }
}

TEST(PeriodElements, AlphaExpansion) {
    auto t = window(3, 0, 2, 3);
    auto alpha = compute_alpha(t);
    Series expect;
    expect.c[{0, 1}] = mpq_class(1, 3);
    expect.c[{1, 1}] = mpq_class(1, 9);
    expect.c[{1, 2}] = mpq_class(1, 9);
    EXPECT_TRUE(oracle::represents(alpha, expect));
}

TEST(PeriodElements, AlphaIdentities) {
    for (long p : {3L, 5L}) {
        auto t = window(p, -12, 32, 8);
        auto alpha = compute_alpha(t);
        auto one = ModelElement::one(t), X = ModelElement::X(t), Y = ModelElement::Y(t);
        auto tauE = (one + Y) * X - ModelElement::integer(t, p);
        EXPECT_TRUE(is_zero(alpha * tauE + Y));
        EXPECT_TRUE(is_zero(one + alpha * X - eisenstein(t) * elem_invert(tauE)));
    }
}

TEST(PeriodElements, BundleRelations) {
    for (long p : {3L, 5L}) {
        auto t = window(p, -12, 32, 8);
        for (auto conv : {LambdaConvention::kisin, LambdaConvention::negated}) {
            auto pb = make_bundle(t, conv);
            EXPECT_TRUE(is_zero(pb.lambda * pb.b - pb.t));
            EXPECT_TRUE(is_zero(pb.b * pb.b_inv.numerator - ModelElement::Y(t, pb.b_inv.y_pole)));
            for (long c : {p + 1, 2L}) {
                auto cc = ModelElement::scalar(t, c);
                EXPECT_TRUE(is_zero(apply_gamma(pb.b, cc) - cc * pb.b)) << "c=" << c;
                EXPECT_TRUE(is_zero(apply_gamma(pb.lambda, cc) - pb.lambda));
            }
        }
    }
}

// Products of phi^n(1 + alpha X) give lambda / tau(lambda), not its reciprocal.
TEST(PeriodElements, LambdaRatioDirection) {
    auto t = window(3, -12, 32, 8);
    auto pb = make_bundle(t);
    auto f = ModelElement::one(t) + pb.alpha * ModelElement::X(t);
    auto prod = ModelElement::one(t);
    for (long q = 1; q < t.x_hi; q *= t.p) {
        prod = prod * f;
        f = apply_phi(f);
    }
    auto tau_lambda = apply_tau(pb.lambda);
    EXPECT_TRUE(is_zero(prod - pb.lambda * elem_invert(tau_lambda)));
    EXPECT_FALSE(is_zero(prod - tau_lambda * elem_invert(pb.lambda)));
}

// lambda(X + Y) = lambda + Y lambda' when Y^2 = 0: expand the factors in an
// auxiliary first-order variable, independently of d_dX.
TEST(PeriodElements, DerivativeByFirstOrderSubstitution) {
    for (long p : {3L, 5L}) {
        int x_hi = 30;
        Series lam = Series::monomial(0, 0, 1);
        for (long q = 1; q < x_hi; q *= p) {
            // (X+Y)^q = X^q + q X^(q-1) Y mod Y^2
            Series f = Series::monomial(0, 0, 1);
            f.c[{static_cast<int>(q), 0}] = mpq_class(-1, p);
            f.c[{static_cast<int>(q - 1), 1}] = mpq_class(-q, p);
            lam = oracle::mul(lam, f, x_hi, 2);
        }
        Series derivative;
        for (const auto& [k, v] : lam.c)
            if (k.second == 1 && k.first < x_hi - 1) derivative.c[{k.first, 0}] = v;
        auto t = window(p, 0, x_hi, 2);
        auto lp = d_dX(compute_lambda(t));
        EXPECT_TRUE(oracle::represents(lp, derivative));
        EXPECT_EQ(lp.x_window(), x_hi - 1);
    }
}

// phi(b) = p (E/E(0)) b = (p - X) b.
TEST(PeriodElements, FrobeniusOfB) {
    auto t = window(3, -12, 32, 8);
    auto pb = make_bundle(t);
    auto p_minus_x = ModelElement::integer(t, 3) - ModelElement::X(t);
    EXPECT_TRUE(is_zero(apply_phi(pb.b) - p_minus_x * pb.b));
    EXPECT_FALSE(is_zero(apply_phi(pb.b) + p_minus_x * pb.b));
}

TEST(PeriodElements, NnablaExamples) {
    auto t = window(3, -12, 32, 8);
    auto pb = make_bundle(t);
    auto X = ModelElement::X(t);
    EXPECT_TRUE(is_zero(nnabla_on_ring(X, pb) + pb.lambda * X));
    EXPECT_TRUE(nnabla_on_ring(ModelElement::one(t), pb).empty());
    EXPECT_TRUE(is_zero(nnabla_on_ring(X * X, pb) + ModelElement::integer(t, 2) * pb.lambda * X * X));
    try {
        (void)nnabla_on_ring(ModelElement::Y(t), pb);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Precondition);
    }
}
