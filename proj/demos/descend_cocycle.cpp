// Decompletion of a gamma-cocycle: build U = C W0 gamma(C)^-1 with W0 Y-free,
// descend it, and watch the complement gauge grow each step.

#include <cstdio>

#include "phitau/tate_sen.hpp"

using namespace phitau;

int main() {
    auto t = bivariate_window();
    long c = t.p + 1;
    auto D = bivariate_datum(t, c);
    std::printf("window p=%ld x<%d y<%d N=%ld, gamma_%ld, l3=%ld\n", t.p, t.x_hi, t.y_hi, t.N, c, D.l3);

    Rng rng(7);
    for (int trial = 0; trial < 3; ++trial) {
        auto in = random_descent_input(D, t, rng, 2);
        auto r = decompletion_descend(in.U, D);
        std::printf("trial %d: %d iterations, gauges", trial, r.iterations);
        for (long g : r.gauges) std::printf(" %s", g == LONG_MAX ? "inf" : std::to_string(g).c_str());
        bool relation = certify_zero(r.M * r.W - in.U * r.M.map(D.gamma)).zero;
        bool descended = true;
        for (const auto& e : r.W.entries()) descended = descended && certify_zero(e - y_free_part(e)).zero;
        bool unique = translate_uniqueness_check(inverse(in.C) * r.M, inverse(in.W0), r.W, D);
        std::printf("\n  M W = U gamma(M): %s, W Y-free: %s, translate by C^-1 M descended: %s\n",
                    relation ? "yes" : "no", descended ? "yes" : "no", unique ? "yes" : "no");
    }
}
