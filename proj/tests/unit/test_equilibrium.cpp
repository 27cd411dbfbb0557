#include "rieszlab/equilibrium.hpp"
#include "rieszlab/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace riesz;

TEST_SUITE("equilibrium") {

TEST_CASE("log gas with V = x^2 / 2: semicircle of radius sqrt 2") {
    const auto p = RieszParams::make(1, 0.0);
    const Grid g = Grid::line(-2.5, 2.5, 512);
    const auto r = solve_equilibrium(Potential::quadratic(0.5), g, p);
    double l1 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.x(i);
        const double exact = x * x < 2 ? std::sqrt(2 - x * x) / std::numbers::pi : 0.0;
        l1 += std::abs(r.mu.density[i] - exact) * g.h;
    }
    CHECK(l1 < 0.02);
    CHECK(r.mu.eval(0.0) == doctest::Approx(0.4502).epsilon(0.01));
    CHECK(r.mu.mass() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("log gas with V = x^2: semicircle of radius 1") {
    const auto p = RieszParams::make(1, 0.0);
    const Grid g = Grid::line(-2, 2, 512);
    const auto r = solve_equilibrium(Potential::quadratic(1.0), g, p);
    double l1 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.x(i);
        l1 += std::abs(r.mu.density[i] - (x * x < 1 ? 2.0 / std::numbers::pi * std::sqrt(1 - x * x) : 0.0)) * g.h;
    }
    CHECK(l1 < 0.02);
    // E = 3/8 + log(2) / 2 for V = x^2 with g = -log
    CHECK(r.energy == doctest::Approx(0.375 + 0.5 * std::log(2.0)).epsilon(2e-3));
    const auto el = el_residual(r);
    CHECK(el.below < 1e-3 * el.scale);
    CHECK(el.on_support < 1e-3 * el.scale);
}

TEST_CASE("energy trace is non-increasing") {
    const auto r = solve_equilibrium(Potential::quadratic(1.0), Grid::line(-2, 2, 256), RieszParams::make(1, 0.5));
    const auto& t = r.report.energy_trace;
    REQUIRE(t.size() > 2);
    for (std::size_t k = 1; k < t.size(); ++k) CHECK(t[k] <= t[k - 1] + 1e-14 * std::abs(t[k - 1]));
    CHECK(r.report.converged);
}

TEST_CASE("optimality: min of h + V is attained on Sigma") {
    const auto p = RieszParams::make(1, 0.5);
    const auto r = solve_equilibrium(Potential::polynomial({0.0, 0.2, 1.0, 0.0, 0.3}), Grid::line(-2, 2, 384), p);
    double min_out = 1e300, max_in = -1e300;
    for (std::size_t i = 0; i < r.zeta.values.size(); ++i) {
        if (r.sigma[i]) max_in = std::max(max_in, std::abs(r.zeta.values[i]));
        else min_out = std::min(min_out, r.zeta.values[i]);
    }
    CHECK(min_out > -1e-3);
    CHECK(el_residual(r).below < 1e-3 * el_residual(r).scale);
}

TEST_CASE("support scales with the potential in the log case") {
    const auto p = RieszParams::make(1, 0.0);
    const auto a = solve_equilibrium(Potential::quadratic(1.0), Grid::line(-2, 2, 512), p);
    // V(x / 2) = x^2 / 4
    const auto b = solve_equilibrium(Potential::quadratic(0.25), Grid::line(-4, 4, 512), p);
    auto width = [](const EquilibriumResult& r) {
        double lo = 1e300, hi = -1e300;
        for (std::size_t i = 0; i < r.sigma.size(); ++i)
            if (r.sigma[i]) {
                lo = std::min(lo, r.mu.grid.x(i));
                hi = std::max(hi, r.mu.grid.x(i));
            }
        return hi - lo;
    };
    CHECK(width(b) / width(a) == doctest::Approx(2.0).epsilon(0.02));
    // density transforms as mu(x / 2) / 2
    CHECK(b.mu.eval(0.5) == doctest::Approx(0.5 * a.mu.eval(0.25)).epsilon(0.02));
}

TEST_CASE("fractional Laplacian of the potential vanishes off Sigma") {
    const auto p = RieszParams::make(1, 0.5);
    const Grid g = Grid::line(-2, 2, 512);
    const auto r = solve_equilibrium(Potential::quadratic(1.0), g, p);
    const MeasurePotential pot(r.mu, p);
    SampledFunction h(g, pot.on_nodes());
    h.attach_matched_tail(p.s, 0.0);
    for (double x : {1.4, -1.6}) {
        CAPTURE(x);
        const double v = frac_laplacian_pv(h, p.alpha, x);
        // compare with the size of the source on Sigma
        CHECK(std::abs(v) < 0.02 * p.c_frac * r.mu.max_density());
    }
}

TEST_CASE("boundary exponents") {
    SUBCASE("log case") {
        const auto r = solve_equilibrium(Potential::quadratic(1.0), Grid::line(-2, 2, 2048), RieszParams::make(1, 0.0));
        const auto f = boundary_exponent_fit(r);
        CHECK(f.density_exponent == doctest::Approx(0.5).epsilon(0.1));
    }
    SUBCASE("s = 0.5") {
        const auto r = solve_equilibrium(Potential::quadratic(1.0), Grid::line(-2, 2, 2048), RieszParams::make(1, 0.5));
        const auto f = boundary_exponent_fit(r);
        CHECK(std::abs(f.density_exponent - 0.75) < 0.05);
        CHECK(std::abs(f.liftoff_exponent - 1.25) < 0.1);
    }
}

TEST_CASE("support reaching the box edge is refused") {
    CHECK_THROWS_AS(solve_equilibrium(Potential::quadratic(1.0), Grid::line(-0.8, 0.8, 128), RieszParams::make(1, 0.0)),
                    BoxTooSmall);
}

TEST_CASE("iteration cap raises a convergence error") {
    EquilibriumOptions o;
    o.max_iter = 1;
    o.polish = false;
    o.tol = 1e-14;
    CHECK_THROWS_AS(solve_equilibrium(Potential::quadratic(1.0), Grid::line(-2, 2, 256), RieszParams::make(1, 0.5), o),
                    ConvergenceError);
}

TEST_CASE("potential parsing") {
    CHECK(Potential::parse("quadratic:2").value(1.5) == doctest::Approx(4.5));
    CHECK(Potential::parse("poly:1,0,0,1").value(2.0) == doctest::Approx(9.0));
    CHECK(Potential::parse("poly:0,0,1").even());
    CHECK_FALSE(Potential::parse("poly:0,1,1").even());
    CHECK_THROWS(Potential::parse("banana"));
    CHECK(Potential::quadratic(1.0).gradient({3.0, 4.0}, 2)[0] == doctest::Approx(6.0));
}

}  // TEST_SUITE
