#pragma once

#include <string>

#include "model_ring.hpp"

namespace phitau {

// Normalization of the factors of lambda: E(X)/E(0) = 1 - X/p (kisin) or its
// negative X/p - 1 (negated).
enum class LambdaConvention { kisin, negated };

inline const char* convention_name(LambdaConvention c) { return c == LambdaConvention::kisin ? "kisin" : "negated"; }

inline LambdaConvention parse_convention(const std::string& s) {
    if (s == "kisin") return LambdaConvention::kisin;
    if (s == "negated") return LambdaConvention::negated;
    throw Error(ErrorCode::Precondition, "unknown convention '" + s + "'");
}

// numerator * Y^(-y_pole)
struct PoleElement {
    ModelElement numerator;
    int y_pole = 0;
};

struct PeriodBundle {
    Truncation trunc;
    LambdaConvention convention = LambdaConvention::kisin;
    ModelElement lambda, lambda_prime, t, b, alpha;
    PoleElement b_inv;
};

// E(X) = X - p
inline ModelElement eisenstein(const Truncation& t) { return ModelElement::X(t) - ModelElement::integer(t, t.p); }

// Number of factors phi^n(E/E(0)) that differ from 1 in the window.
inline int lambda_factor_count(const Truncation& t) {
    int m = 0;
    for (long q = 1; q < t.x_hi; q *= t.p) ++m;
    return m;
}

inline ModelElement compute_lambda(const Truncation& t, LambdaConvention conv = LambdaConvention::kisin) {
    auto inv_p = PadicNumber::from_rational(t.p, 1, t.p, t.digits());
    ModelElement lambda = ModelElement::one(t);
    for (long q = 1; q < t.x_hi; q *= t.p) {
        auto xq = ModelElement::monomial(t, static_cast<int>(q), 0, inv_p);
        lambda = lambda * (conv == LambdaConvention::kisin ? ModelElement::one(t) - xq : xq - ModelElement::one(t));
    }
    return lambda;
}

// log(1+Y) truncated at Y^y_hi.
inline ModelElement compute_t(const Truncation& t) {
    if (t.y_hi < 2) throw Error(ErrorCode::Precondition, "t needs y_hi >= 2");
    std::vector<Term> terms;
    for (int k = 1; k < t.y_hi; ++k)
        terms.push_back({0, k, PadicNumber::from_rational(t.p, (k % 2) ? 1 : -1, k, t.digits())});
    return ModelElement::from_terms(t, std::move(terms));
}

// t / Y = sum_k (-1)^(k-1) Y^(k-1) / k, exact to the Y-window.
inline ModelElement t_over_y(const Truncation& t) {
    std::vector<Term> terms;
    for (int k = 1; k <= t.y_hi; ++k)
        terms.push_back({0, k - 1, PadicNumber::from_rational(t.p, (k % 2) ? 1 : -1, k, t.digits())});
    return ModelElement::from_terms(t, std::move(terms));
}

// alpha = (1 - [eps]) / ([eps][p~] - p) = (Y/p) sum_n ((1+Y)X/p)^n
inline ModelElement compute_alpha(const Truncation& t) {
    auto inv_p = PadicNumber::from_rational(t.p, 1, t.p, t.digits());
    auto q = inv_p * ((ModelElement::one(t) + ModelElement::Y(t)) * ModelElement::X(t));
    return (inv_p * ModelElement::Y(t)) * elem_invert(ModelElement::one(t) - q);
}

inline PeriodBundle make_bundle(const Truncation& t, LambdaConvention conv = LambdaConvention::kisin) {
    t.validate();
    PeriodBundle pb;
    pb.trunc = t;
    pb.convention = conv;
    pb.lambda = compute_lambda(t, conv);
    pb.lambda_prime = d_dX(pb.lambda);
    pb.t = compute_t(t);
    auto lambda_inv = elem_invert(pb.lambda);
    pb.b = pb.t * lambda_inv;
    pb.b_inv = {pb.lambda * elem_invert(t_over_y(t)), 1};
    pb.alpha = compute_alpha(t);
    return pb;
}

// N_nabla(f) = -lambda X f' on the Y-free subring.
inline ModelElement nnabla_on_ring(const ModelElement& f, const PeriodBundle& pb) {
    if (!f.is_y_free()) throw Error(ErrorCode::Precondition, "N_nabla is defined on Y-free elements");
    return -(pb.lambda * ModelElement::X(pb.trunc) * d_dX(f));
}

}  // namespace phitau
