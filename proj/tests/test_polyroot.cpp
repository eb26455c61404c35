#include <doctest.h>

#include <cmath>

#include "sipipe/polyroot.hpp"
#include "sipipe/rng.hpp"
#include "sipipe/validate.hpp"

using namespace sipipe;

TEST_SUITE("polyroot") {

TEST_CASE("quadratic solve basics") {
    CHECK(solve_quadratic_leq(Polynomial::quadratic(1, 0, -1)) ==
          IntervalSet::from_intervals({{-1, 1}}));
    CHECK(solve_quadratic_leq(Polynomial::quadratic(-1, 0, -1)) == IntervalSet::all());
    // degree collapse to linear
    CHECK(solve_quadratic_leq(Polynomial::quadratic(0, 2, -4)) ==
          IntervalSet::from_intervals({{-kInf, 2}}));
    // constant cases
    CHECK(solve_quadratic_leq(Polynomial::constant(-3)) == IntervalSet::all());
    CHECK(solve_quadratic_leq(Polynomial::constant(3)).empty());
}

TEST_CASE("concave quadratic gives two rays") {
    const auto sol = solve_quadratic_leq(Polynomial::quadratic(-1, 0, 4)); // 4 - z^2 <= 0
    REQUIRE(sol.size() == 2);
    CHECK(sol.piece(0).hi == doctest::Approx(-2.0));
    CHECK(sol.piece(1).lo == doctest::Approx(2.0));
}

TEST_CASE("quartic factored form") {
    // (z^2-1)(z^2-4) <= 0 on [-2,-1] u [1,2]
    const Polynomial p{{4, 0, -5, 0, 1}, 4};
    const auto sol = solve_quartic_leq(p);
    REQUIRE(sol.size() == 2);
    CHECK(sol.piece(0).lo == doctest::Approx(-2.0));
    CHECK(sol.piece(0).hi == doctest::Approx(-1.0));
    CHECK(sol.piece(1).lo == doctest::Approx(1.0));
    CHECK(sol.piece(1).hi == doctest::Approx(2.0));
}

TEST_CASE("quartic with no solution") {
    const Polynomial p{{1, 0, 0, 0, 1}, 4}; // z^4 + 1
    CHECK(solve_quartic_leq(p).empty());
}

TEST_CASE("quartic with known roots matches sign sweep oracle") {
    // roots at -3, -0.5, 0.5, 3
    Polynomial p = poly_mul(poly_mul(Polynomial::linear(1, 3), Polynomial::linear(1, -3)),
                            poly_mul(Polynomial::linear(1, 0.5), Polynomial::linear(1, -0.5)));
    const auto sol = solve_quartic_leq(p);
    const auto roots = sign_sweep_roots(p, -10, 10, 100000);
    REQUIRE(roots.size() == 4);
    REQUIRE(sol.size() == 2);
    for (const Interval& piece : sol.pieces()) {
        for (double endpoint : {piece.lo, piece.hi}) {
            double best = kInf;
            for (double r : roots) best = std::min(best, std::abs(r - endpoint));
            CHECK(best < 1e-8);
        }
    }
}

TEST_CASE("strict complement") {
    CHECK(strict_complement(IntervalSet::from_intervals({{-1, 1}})) ==
          IntervalSet::from_intervals({{-kInf, -1}, {1, kInf}}));
    CHECK(strict_complement(IntervalSet()) == IntervalSet::all());
}

TEST_CASE("random polynomials: set membership agrees with sign") {
    Rng rng(77);
    int checked = 0;
    for (int rep = 0; rep < 10000; ++rep) {
        Polynomial p;
        p.deg = 1 + static_cast<int>(rng.below(4));
        for (int i = 0; i <= p.deg; ++i) p.c[static_cast<std::size_t>(i)] = rng.normal();
        const auto sol = solve_quartic_leq(p);
        const double scale = p.max_abs_coeff();
        for (int g = 0; g < 25; ++g) {
            const double x = rng.uniform(-6.0, 6.0);
            const double v = p.eval(x);
            // skip points too close to a boundary for sign resolution
            bool near_edge = false;
            for (const Interval& piece : sol.pieces()) {
                if (std::isfinite(piece.lo) && std::abs(x - piece.lo) < 1e-8) near_edge = true;
                if (std::isfinite(piece.hi) && std::abs(x - piece.hi) < 1e-8) near_edge = true;
            }
            if (near_edge || std::abs(v) < 1e-10 * scale) continue;
            ++checked;
            CHECK(sol.contains(x) == (v <= 0.0));
        }
    }
    CHECK(checked > 100000);
}

TEST_CASE("reported endpoints are near-roots") {
    Rng rng(99);
    for (int rep = 0; rep < 2000; ++rep) {
        Polynomial p;
        p.deg = 2 + static_cast<int>(rng.below(3));
        for (int i = 0; i <= p.deg; ++i) p.c[static_cast<std::size_t>(i)] = rng.normal();
        const auto sol = solve_quartic_leq(p);
        const double scale = p.max_abs_coeff();
        for (const Interval& piece : sol.pieces()) {
            for (double endpoint : {piece.lo, piece.hi}) {
                if (!std::isfinite(endpoint)) continue;
                // scale the bound by the local magnitude of z powers
                const double zscale = std::max(1.0, std::pow(std::abs(endpoint), p.deg));
                CHECK(std::abs(p.eval(endpoint)) <= 1e-8 * scale * zscale);
            }
        }
    }
}

} // TEST_SUITE
