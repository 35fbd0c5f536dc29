#pragma once

#include <cstdint>
#include <random>

#include "model_ring.hpp"

namespace phitau {

// std::mt19937_64 is fully specified by the standard; bounded draws are done by
// hand so sequences are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    // Uniform-ish integer in [lo, hi].
    long uniform(long lo, long hi) {
        auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<long>(gen_() % span);
    }

    bool coin(unsigned percent) { return gen_() % 100 < percent; }

private:
    std::mt19937_64 gen_;
};

struct RandomShape {
    int x_min = 0;
    int x_max = 4;
    int y_max = 2;
    int terms = 6;
    long v_min = 0;
    long v_max = 3;
};

// A unit of absolute size p^v times a random residue, as a p-adic scalar at the
// working precision of the window.
inline PadicNumber random_scalar(const Truncation& t, Rng& rng, long v_min, long v_max) {
    long v = rng.uniform(v_min, v_max);
    long u;
    do {
        u = rng.uniform(1, 10000);
    } while (u % t.p == 0);
    if (rng.coin(50)) u = -u;
    mpz_class x(u);
    if (v >= 0)
        return PadicNumber::from_integer(t.p, x * detail::ppow(t.p, v), t.digits());
    return PadicNumber::from_rational(t.p, x, detail::ppow(t.p, -v), t.digits());
}

inline ModelElement random_element(const Truncation& t, Rng& rng, const RandomShape& s) {
    std::vector<Term> terms;
    for (int k = 0; k < s.terms; ++k) {
        int i = static_cast<int>(rng.uniform(s.x_min, s.x_max));
        int j = static_cast<int>(rng.uniform(0, s.y_max));
        terms.push_back({i, j, random_scalar(t, rng, s.v_min, s.v_max)});
    }
    return ModelElement::from_terms(t, std::move(terms));
}

}  // namespace phitau
