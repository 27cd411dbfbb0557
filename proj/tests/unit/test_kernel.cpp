#include "rieszlab/errors.hpp"
#include "rieszlab/kernel.hpp"
#include "rieszlab/quadrature.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace riesz;
using big = boost::multiprecision::cpp_bin_float_50;

namespace {

// Constants recomputed from the Gamma-function formulas in 50-digit arithmetic.
struct BigConstants {
    double c_ds, c_dalpha, cbar;
};

BigConstants big_constants(int d, double s_in) {
    using boost::math::tgamma;
    const big pi = boost::math::constants::pi<big>();
    const big dd = d, s = s_in, a = (dd - s) / 2;
    BigConstants k;
    k.c_ds = static_cast<double>(pow(pi, dd / 2) * pow(big(4), a) * tgamma(a) / tgamma(dd / 2 - a));
    k.c_dalpha = static_cast<double>(a * pow(big(4), a) * tgamma(dd / 2 + a) / (pow(pi, dd / 2) * tgamma(1 - a)));
    k.cbar = static_cast<double>(-tgamma(1 + a) / tgamma(1 - a));
    return k;
}

}  // namespace

TEST_SUITE("kernel") {

TEST_CASE("g at unit distance and at one half") {
    CHECK(riesz_g(1.0, 0.5) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(riesz_g(1.0, 0.0) == 0.0);
    CHECK(riesz_g(0.5, 0.5) == doctest::Approx(2.8284271247461903).epsilon(1e-15));
    CHECK(riesz_g(std::exp(-2.0), 0.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(riesz_dg(2.0, 0.5) == doctest::Approx(-std::pow(2.0, -1.5)).epsilon(1e-15));
}

TEST_CASE("g at the singularity throws") {
    CHECK_THROWS_AS(riesz_g(0.0, 0.5), DomainError);
    CHECK_THROWS_AS(riesz_g(0.0, 0.0), DomainError);
    CHECK_THROWS_AS(riesz_dg(0.0, 0.5), DomainError);
}

TEST_CASE("constants against a 50-digit Gamma evaluation") {
    for (auto [d, s] : {std::pair{1, 0.5}, {1, 0.25}, {1, 0.75}, {2, 0.5}, {2, 1.0}, {2, 1.5}}) {
        CAPTURE(d);
        CAPTURE(s);
        const auto k = kernel_constants(d, s);
        const auto ref = big_constants(d, s);
        CHECK(k.c_ds == doctest::Approx(ref.c_ds).epsilon(1e-13));
        CHECK(k.c_dalpha == doctest::Approx(ref.c_dalpha).epsilon(1e-13));
        CHECK(k.cbar_alpha == doctest::Approx(ref.cbar).epsilon(1e-13));
        CHECK(k.c_ds > 0.0);
        CHECK(k.cbar_alpha < 0.0);
    }
}

TEST_CASE("frozen constant values") {
    const auto k = kernel_constants(1, 0.5);
    CHECK(std::abs(k.c_ds - 2.5066282746310005024) < 1e-12);
    CHECK(std::abs(k.c_dalpha - 0.19947114020071633897) < 1e-12);
    CHECK(std::abs(k.cbar_alpha - -0.73966877979715972308) < 1e-12);
    const auto k0 = kernel_constants(1, 0.0);
    CHECK(k0.c_ds == doctest::Approx(std::numbers::pi));
    CHECK(std::abs(k0.c_dalpha - 1.0 / std::numbers::pi) < 1e-14);
    CHECK(std::abs(k0.cbar_alpha + 0.5) < 1e-14);
}

TEST_CASE("derived parameters") {
    const auto p = RieszParams::make(1, 0.5);
    CHECK(p.alpha == 0.25);
    CHECK(p.gamma == 0.5);
    CHECK(p.c_frac == doctest::Approx(p.c_ds / 0.5));
    CHECK(std::abs(p.c_ext - 4.7925609389423688298) < 1e-12);
    const auto q = RieszParams::make(1, 0.0);
    CHECK(q.log_case());
    CHECK(q.c_frac == doctest::Approx(std::numbers::pi));
    CHECK(std::abs(q.c_ext - 2.0 * std::numbers::pi) < 1e-12);
}

TEST_CASE("parameters outside (d-2, d) are rejected") {
    CHECK_THROWS_AS(kernel_constants(1, 1.0), RangeError);
    CHECK_THROWS_AS(kernel_constants(1, -1.0), RangeError);
    CHECK_THROWS_AS(kernel_constants(2, 2.0), RangeError);
    CHECK_THROWS_AS(kernel_constants(3, 1.0), RangeError);
    CHECK_THROWS_AS(RieszParams::make(1, 1.5), RangeError);
}

TEST_CASE("antiderivatives differentiate back to g") {
    for (double s : {0.0, 0.5}) {
        const double t = 0.7, e = 1e-6;
        const double d1 = (riesz_G1(t + e, s) - riesz_G1(t - e, s)) / (2 * e);
        CHECK(d1 == doctest::Approx(riesz_g(t, s)).epsilon(1e-8));
        const double d2 = (riesz_G2(t + e, s) - 2 * riesz_G2(t, s) + riesz_G2(t - e, s)) / (e * e);
        CHECK(d2 == doctest::Approx(riesz_g(t, s)).epsilon(1e-4));
        CHECK(riesz_G1(-t, s) == doctest::Approx(-riesz_G1(t, s)));
        CHECK(riesz_G2(-t, s) == doctest::Approx(riesz_G2(t, s)));
    }
}

TEST_CASE("cell averages against adaptive quadrature") {
    // 30-digit adaptive quadrature of the triangular-weight integral
    CHECK(cell_pair_weight_1d(0.0, 0.1, 0.5) == doctest::Approx(16.865480854231355791).epsilon(1e-12));
    CHECK(cell_pair_weight_1d(0.3, 0.1, 0.5) == doctest::Approx(3.677705976096604431).epsilon(1e-12));
    CHECK(cell_pair_weight_1d(0.0, 0.1, 0.0) == doctest::Approx(3.8025850929940456285).epsilon(1e-12));
    CHECK(cell_pair_weight_1d(0.2, 0.1, 0.0) == doctest::Approx(1.6314185162273332549).epsilon(1e-12));
    // far branch (moment expansion)
    CHECK(cell_pair_weight_1d(5.0, 0.1, 0.5) == doctest::Approx(0.89444955428889813918).epsilon(1e-12));
    CHECK(cell_pair_weight_1d(-5.0, 0.1, 0.0) == doctest::Approx(-1.6094045764337193511).epsilon(1e-12));
    CHECK(cell_potential_1d(0.05, 0.0, 0.1, 0.5) == doctest::Approx(17.888543819998316949).epsilon(1e-12));
    CHECK(cell_potential_1d(0.03, 0.0, 0.1, 0.0) == doctest::Approx(3.913449395048939068).epsilon(1e-12));
    CHECK(cell_potential_1d(1.0, 0.0, 0.1, 0.5) == doctest::Approx(2.0526680779794480191).epsilon(1e-12));
    CHECK(cell_potential_1d(7.0, 0.0, 0.1, 0.0) == doctest::Approx(-1.9387330332501861823).epsilon(1e-12));
}

TEST_CASE("grid geometry") {
    const Grid g = Grid::line(-1.0, 1.0, 8);
    CHECK(g.h == 0.25);
    CHECK(g.x(0) == -0.875);
    CHECK(g.hi(0) == 1.0);
    CHECK_THROWS_AS(Grid::line(1.0, -1.0, 8), RangeError);
    const Grid sq = Grid::square(0.0, 1.0, 4);
    CHECK(sq.size() == 16);
    CHECK(sq.cell_volume() == doctest::Approx(1.0 / 16.0));
    CHECK(sq.point(sq.flat(1, 2))[1] == doctest::Approx(0.625));
}

TEST_CASE("sampled function interpolation and tails") {
    const Grid g = Grid::line(0.0, 1.0, 10);
    auto f = SampledFunction::from(g, [](double x, double) { return 2.0 * x + 1.0; });
    CHECK(f.eval(0.5) == doctest::Approx(2.0));
    CHECK(f.eval(2.0) == 0.0);
    CHECK_FALSE(f.vanishes_at_edge());
    f.attach_matched_tail(2.0, 0.5);
    CHECK(f.eval(1.5) == doctest::Approx(f.values.back() * std::pow(0.45 / 1.0, 2.0)).epsilon(1e-12));
}

}  // TEST_SUITE

TEST_SUITE("quadrature") {

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
    for (int n : {2, 4, 8, 16, 30}) {
        const double v = gauss_integrate([n](double x) { return std::pow(x, 2 * n - 1) + std::pow(x, 2 * n - 2); },
                                         0.0, 1.0, n);
        CHECK(v == doctest::Approx(1.0 / (2 * n) + 1.0 / (2 * n - 1)).epsilon(1e-13));
    }
}

TEST_CASE("graded rules handle endpoint singularities") {
    // 48 halvings leave int_0^{2^-48} x^{-1/2} = 2^-23 uncovered
    const double v = integrate_graded([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0);
    CHECK(std::abs(v - (2.0 - std::pow(2.0, -23))) < 1e-12);
    // the substituted integrand is w^{-1/2}; grading stops at 2^-50
    const double w = integrate_to_infinity([](double u) { return std::pow(u, -1.5); }, 1.0, 0.0);
    CHECK(std::abs(w - (2.0 - std::pow(2.0, -24))) < 1e-12);
}

TEST_CASE("compensated summation") {
    std::vector<double> v{1e16, 1.0, -1e16, 1.0};
    CHECK(compensated_sum(v) == 2.0);
}

TEST_CASE("line fit recovers an exact line") {
    std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
    const auto f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.rms < 1e-12);
}

}  // TEST_SUITE
