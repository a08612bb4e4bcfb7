#pragma once

#include "mom/hilbert.hpp"
#include "mom/rng.hpp"

namespace mom::test {

inline LocalState random_state(Rng& rng, int n) {
    cvec v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.complex_normal();
    return LocalState::from(std::move(v));
}

inline GlobalState random_global(Rng& rng, int n, int a) {
    cmat c(n, a);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < a; ++j) c(i, j) = rng.complex_normal();
    return GlobalState::from(std::move(c));
}

inline ReducedDensity random_density(Rng& rng, int n) { return reduce(random_global(rng, n, n)); }

inline LocalState two_level(double p0, double phase = 0.0) {
    cvec v(2);
    v[0] = std::sqrt(p0);
    v[1] = std::polar(std::sqrt(1.0 - p0), phase);
    return LocalState{v};
}

}  // namespace mom::test
