#include "doctest.h"
#include "helpers.hpp"

#include "mom/attraction.hpp"
#include "mom/engine.hpp"

#include <cmath>

using namespace mom;
using mom::test::random_density;
using mom::test::random_global;
using mom::test::random_state;
using mom::test::two_level;

namespace {

double overlap(const LocalState& a, const LocalState& b) { return std::norm(b.amps.dot(a.amps)); }

ReducedDensity diag2(double q0) {
    cmat q = cmat::Zero(2, 2);
    q(0, 0) = q0;
    q(1, 1) = 1.0 - q0;
    return {q};
}

}  // namespace

TEST_CASE("state on state: orthogonal, identical and z = 1/2") {
    const LocalState a = LocalState::pointer(2, 0), b = LocalState::pointer(2, 1);
    CHECK(overlap(attract_state_on_state(a, b, 1.0), b) == 0.0);
    CHECK((attract_state_on_state(a, a, 0.7).amps - a.amps).norm() < 1e-15);
    const LocalState h = two_level(0.5);
    CHECK(overlap(attract_state_on_state(h, a, 1.0), a) == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("overlap recursion z' = z + beta z (1 - z)") {
    Rng rng(20, 0);
    for (int t = 0; t < 1000; ++t) {
        const int n = 2 + t % 4;
        const LocalState a = random_state(rng, n), b = random_state(rng, n);
        const double beta = 2.0 * rng.uniform() - 1.0;
        const LocalState out = attract_state_on_state(a, b, beta);
        CHECK(overlap(out, b) == doctest::Approx(overlap_recursion(overlap(a, b), beta)).epsilon(1e-10));
        CHECK(std::abs(norm2(out) - 1.0) < 1e-12);
    }
    CHECK_THROWS_AS(attract_state_on_state(two_level(0.3), two_level(0.6), 1.5), std::invalid_argument);
}

TEST_CASE("monotone coalescence") {
    Rng rng(21, 0);
    const LocalState b = random_state(rng, 3);
    LocalState a = random_state(rng, 3);
    double z = overlap(a, b);
    for (int t = 0; t < 200; ++t) {
        a = attract_state_on_state(a, b, 0.4);
        const double z2 = overlap(a, b);
        if (z < 1.0 - 1e-12) CHECK(z2 > z);
        z = z2;
    }
    CHECK(z == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("density on state") {
    AttractionParams p;
    p.gamma = 1.0;
    SUBCASE("coincident state is unchanged") {
        Rng rng(22, 0);
        const LocalState psi = random_state(rng, 3);
        const ReducedDensity q{psi.amps * psi.amps.adjoint()};
        CHECK((attract_density_on_state(psi, q, p).state.amps - psi.amps).norm() < 1e-12);
    }
    SUBCASE("pure projector, gamma = 1: p -> p^2") {
        const AttractResult r = attract_density_on_state(two_level(0.1), diag2(0.0), p);
        CHECK(r.state.prob(0) == doctest::Approx(0.01).epsilon(1e-12));
        CHECK_FALSE(r.degenerate);
    }
    SUBCASE("gamma < 1, small p: p -> (1 - gamma) p") {
        p.gamma = 0.4;
        const double p0 = 1e-7;
        CHECK(attract_density_on_state(two_level(p0), diag2(0.0), p).state.prob(0) ==
              doctest::Approx(0.6 * p0).epsilon(1e-5));
    }
    SUBCASE("gamma = -1 repels, small p: p -> 2p") {
        p.gamma = -1.0;
        const double p0 = 1e-7;
        CHECK(attract_density_on_state(two_level(p0), diag2(0.0), p).state.prob(0) ==
              doctest::Approx(2.0 * p0).epsilon(1e-5));
    }
    SUBCASE("norm is kept for mixed Q") {
        Rng rng(23, 0);
        for (int t = 0; t < 200; ++t) {
            const int n = 2 + t % 3;
            const AttractResult r = attract_density_on_state(random_state(rng, n), random_density(rng, n), p);
            CHECK(std::abs(norm2(r.state) - 1.0) < 1e-10);
        }
    }
    SUBCASE("orthogonal state is the degenerate limit") {
        const AttractResult r = attract_density_on_state(LocalState::pointer(2, 0), diag2(0.0), p);
        CHECK(r.degenerate);
        CHECK(r.state.prob(0) == 1.0);
    }
}

TEST_CASE("local on global") {
    SUBCASE("beta = 0 is the identity") {
        Rng rng(24, 0);
        const GlobalState g = random_global(rng, 2, 3);
        CHECK((attract_local_on_global(g, two_level(0.3), 0.0).amps - g.amps).norm() == 0.0);
    }
    SUBCASE("local |1>, Q = diag(1/2, 1/2), beta = 1") {
        const GlobalState g = purify(diag2(0.5));
        CHECK(reduce(attract_local_on_global(g, LocalState::pointer(2, 0), 1.0)).diag(0) ==
              doctest::Approx(0.75).epsilon(1e-15));
    }
    SUBCASE("pointer local state: Q_ii' = Q_ii + beta Q_ii (1 - Q_ii)") {
        Rng rng(25, 0);
        for (int t = 0; t < 100; ++t) {
            const int n = 2 + t % 3, i = t % n;
            const GlobalState g = random_global(rng, n, 4);
            const double beta = rng.uniform();
            const double q = reduce(g).diag(i);
            const double q2 = reduce(attract_local_on_global(g, LocalState::pointer(n, i), beta)).diag(i);
            CHECK(std::abs(q2 - overlap_recursion(q, beta)) < 1e-12);
        }
    }
    SUBCASE("equal-weight pointer average leaves every Q_ii unchanged") {
        Rng rng(26, 0);
        for (int t = 0; t < 100; ++t) {
            const int n = 2 + t % 4;
            const GlobalState g = random_global(rng, n, 3);
            const double beta = rng.uniform();
            const ReducedDensity q = reduce(g);
            for (int i = 0; i < n; ++i) {
                double mean = 0.0;
                for (int k = 0; k < n; ++k)
                    mean += reduce(attract_local_on_global(g, LocalState::pointer(n, k), beta)).diag(i) / n;
                CHECK(std::abs(mean - q.diag(i)) < 1e-12);
            }
        }
    }
    SUBCASE("an uncorrelated environment factor does not change the map") {
        Rng rng(27, 0);
        const GlobalState g = random_global(rng, 3, 2);
        const LocalState psi = random_state(rng, 3);
        cvec extra(3);
        for (int b = 0; b < 3; ++b) extra[b] = rng.complex_normal();
        extra /= extra.norm();
        cmat big(3, 6);
        for (int i = 0; i < 3; ++i)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 3; ++b) big(i, a * 3 + b) = g.amps(i, a) * extra[b];
        const ReducedDensity small = reduce(attract_local_on_global(g, psi, 0.6));
        const ReducedDensity wide = reduce(attract_local_on_global(GlobalState{big}, psi, 0.6));
        CHECK((small.q - wide.q).norm() < 1e-12);
    }
}

TEST_CASE("strength rule") {
    CHECK(strength_rule(5, 5, 1.0) == 1.0);
    CHECK(strength_rule(2, 200, 1.0) == doctest::Approx(0.01));
    CHECK(strength_rule(3, 3 * 7, 1.0) == doctest::Approx(1.0 / 7.0));
    CHECK(strength_rule(4, 4, 3.0) == 1.0);
    CHECK_THROWS_AS(strength_rule(3, 2, 1.0), std::invalid_argument);
}

TEST_CASE("pairwise map rates") {
    // oracle: 4 sqrt(2) (sqrt(2) - 1)
    CHECK(pair_growth_rate(1.0) == doctest::Approx(2.3431457505076203).epsilon(1e-15));
    CHECK(1.0 + pair_growth_rate(-0.75) == 0.0);
    for (double beta : {0.25, 0.75, 1.0}) {
        const double z = 1e-10;
        const LocalState u = LocalState::pointer(2, 0);
        const LocalState v = two_level(z);
        const auto [u2, v2] = attract_pair(u, v, beta);
        CHECK(overlap(u2, v2) / z - 1.0 == doctest::Approx(pair_growth_rate(beta)).epsilon(1e-6));
        CHECK(overlap(u2, v2) == doctest::Approx(std::pow(pair_overlap_factor(z, beta), 2) * z).epsilon(1e-9));
        // near-identical pair: 1 - z shrinks by 1 + lambda(-beta); beta = 1 is
        // non-analytic there (1 - beta z -> 0)
        if (beta == 1.0) continue;
        const double x = 1e-7;
        const double x2 = 1.0 - std::pow(pair_overlap_factor(1.0 - x, beta), 2) * (1.0 - x);
        CHECK(x2 / x == doctest::Approx(1.0 + pair_growth_rate(-beta)).epsilon(1e-5));
    }
}
