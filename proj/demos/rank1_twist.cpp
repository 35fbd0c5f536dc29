// Rank-1 modules of a few characters, their commutation residuals, and the
// omega residual under each tau exponent rule.

#include <cstdio>

#include "phitau/phitau_modules.hpp"

using namespace phitau;

namespace {

void show(const char* label, const PhiTauModule& m) {
    const auto& z = *m.commutation;
    std::printf("%-24s terms(P)=%-3zu terms(A)=%-4zu commutes=%s (residual v >= %s)\n", label,
                m.mat_phi(0, 0).terms().size(), (*m.mat_tau)(0, 0).terms().size(), z.zero ? "yes" : "no",
                z.valuation == LONG_MAX ? "inf" : std::to_string(z.valuation).c_str());
}

// Integer representative of least absolute value.
std::string signed_str(const PadicNumber& a) {
    if (a.is_zero()) return "0";
    mpz_class m = detail::ppow(a.prime(), a.absolute_precision()), x = a.to_rational().get_num() % m;
    if (2 * x > m) x -= m;
    return x.get_str();
}

}  // namespace

int main() {
    Truncation t;
    t.p = 3;
    t.x_lo = -12;
    t.x_hi = 32;
    t.y_hi = 8;
    t.N = 12;
    auto pb = make_bundle(t);

    show("trivial", trivial_module(t));
    show("Qp(-1)", qp_minus_one_module(pb));
    show("(beta,r,s) = (2,1,0)", rank1_module(Character::make(t, 2, 1, 0), pb));
    show("(beta,r,s) = (1,0,-2)", rank1_module(Character::make(t, 1, 0, -2), pb));
    auto prod = tensor(rank1_module(Character::make(t, 2, 1, 0), pb), rank1_module(Character::make(t, 1, 0, -2), pb));
    auto direct = rank1_module(Character::make(t, 2, 1, -2), pb);
    bool same = certify_zero(prod.mat_phi - direct.mat_phi).zero && certify_zero(*prod.mat_tau - *direct.mat_tau).zero;
    std::printf("tensor of the two equals (2,1,-2): %s\n\n", same ? "yes" : "no");

    auto omega = Character::make(t, 1, 1, 0);
    for (auto rule : {TauRule::commuting, TauRule::statement, TauRule::proof}) {
        auto m = rank1_module(omega, pb, rule);
        auto xy = check_commutation(m)(0, 0).coeff(1, 1);
        std::printf("omega, rule %-10s commutes=%s  XY coefficient of residual: %s\n", tau_rule_name(rule),
                    m.commutation->zero ? "yes" : "no", signed_str(xy).c_str());
    }
}
