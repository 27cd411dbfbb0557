#include "rieszlab/equilibrium.hpp"
#include "rieszlab/errors.hpp"
#include "rieszlab/sampler.hpp"
#include "rieszlab/statistics.hpp"

#include <doctest.h>

#include <cmath>

using namespace riesz;

namespace {

GridMeasure uniform_pm1() {
    const Grid g = Grid::line(-2, 2, 256);
    std::vector<double> d(256);
    for (std::size_t i = 0; i < 256; ++i) d[i] = std::abs(g.x(i)) < 1 ? 0.5 : 0.0;
    return GridMeasure(g, d);
}

std::vector<double> normals(std::size_t n, double mean, double sd, std::uint64_t seed) {
    CounterRng r(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = mean + sd * r.normal();
    return v;
}

}  // namespace

TEST_SUITE("statistics") {

TEST_CASE("bump values and derivatives") {
    const auto phi = TestFunction::bump(0.5, 0.25, 2.0);
    CHECK(phi.value(0.5) == doctest::Approx(2.0));
    CHECK(phi.value(0.75) == 0.0);
    CHECK(phi.value(0.2) == 0.0);
    const double e = 1e-5;
    for (int k = 1; k <= 4; ++k) {
        const double fd = (phi.derivative(0.6 + e, k - 1) - phi.derivative(0.6 - e, k - 1)) / (2 * e);
        CAPTURE(k);
        CHECK(phi.derivative(0.6, k) == doctest::Approx(fd).epsilon(1e-5));
    }
    const auto& M = TestFunction::derivative_bounds();
    CHECK(M[0] == doctest::Approx(1.0));
    for (double u = -0.99; u < 1.0; u += 0.01) {
        const auto j = bump_jet(u);
        for (int k = 0; k < 6; ++k) CHECK(std::abs(j[k]) <= M[k] * (1 + 1e-9));
    }
}

TEST_CASE("fluctuation: direct evaluation, linearity and sign") {
    const auto mu = uniform_pm1();
    const auto phi = TestFunction::bump(0.0, 0.5);
    const auto X = Configuration::line({0.0, 0.0 + 1e-12});
    const double I = integrate_against(phi, mu);
    CHECK(fluctuation(X, phi, mu) == doctest::Approx(2.0 - 2.0 * I).epsilon(1e-10));
    const auto Y = Configuration::line({-0.3, 0.1, 0.4});
    const double f1 = fluctuation(Y, TestFunction::bump(0.0, 0.5, 1.0), mu);
    CHECK(fluctuation(Y, TestFunction::bump(0.0, 0.5, -2.5), mu) == doctest::Approx(-2.5 * f1));
    CHECK(fluctuation(Y, TestFunction::bump(0.0, 0.5, 0.0), mu) == 0.0);
}

TEST_CASE("a constructed configuration with zero fluctuation") {
    // two points at the level where phi equals N int phi dmu / 2
    const auto mu = uniform_pm1();
    const auto phi = TestFunction::bump(0.0, 0.8);
    const double target = integrate_against(phi, mu);
    // phi(x) = target solved on (0, 0.8) by bisection
    double lo = 0.0, hi = 0.8;
    for (int k = 0; k < 200; ++k) {
        const double m = 0.5 * (lo + hi);
        (phi.value(m) > target ? lo : hi) = m;
    }
    const auto X = Configuration::line({-lo, lo});
    CHECK(std::abs(fluctuation(X, phi, mu)) < 1e-12);
}

TEST_CASE("discrepancy") {
    const auto mu = uniform_pm1();
    const auto X = Configuration::line({-0.5, 0.2, 0.9});
    CHECK(discrepancy(X, mu, {10.0, 0.0}, 1.0) == 0.0);
    CHECK(discrepancy(X, mu, {0.0, 0.0}, 5.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(discrepancy(X, mu, {0.0, 0.0}, 0.6) == doctest::Approx(2.0 - 3.0 * 0.6).epsilon(1e-12));
}

TEST_CASE("CLT prediction") {
    const auto p = RieszParams::make(1, 0.0);
    const auto eq = solve_equilibrium(Potential::quadratic(1.0), Grid::line(-1.5, 1.5, 512), p);
    SUBCASE("zero function") {
        const auto pr = predicted_clt(TestFunction::bump(0.0, 0.25, 0.0), eq, 2.0, 256, CltMode::mesoscopic);
        CHECK(pr.variance == 0.0);
        CHECK(pr.mean_shift == 0.0);
    }
    SUBCASE("mesoscopic variance ignores the centre and the scale") {
        const auto a = predicted_clt(TestFunction::bump(0.0, 0.25), eq, 2.0, 256, CltMode::mesoscopic);
        const auto b = predicted_clt(TestFunction::bump(0.2, 0.1), eq, 2.0, 256, CltMode::mesoscopic);
        CHECK(a.variance > 0.0);
        CHECK(b.variance == doctest::Approx(a.variance).epsilon(1e-3));
        CHECK(a.mean_shift == 0.0);
        // (c_dalpha / c_frac) times the raw seminorm
        CHECK(a.variance == doctest::Approx(p.c_dalpha / p.c_frac * a.seminorm).epsilon(1e-12));
    }
    SUBCASE("macroscopic variance is translation invariant for small shifts") {
        const auto a = predicted_clt(TestFunction::bump(0.0, 0.3), eq, 2.0, 256, CltMode::macroscopic);
        const auto b = predicted_clt(TestFunction::bump(0.1, 0.3), eq, 2.0, 256, CltMode::macroscopic);
        CHECK(b.variance == doctest::Approx(a.variance).epsilon(0.02));
    }
}

TEST_CASE("macroscopic s > 0 without pressure data marks the mean partial") {
    const auto p = RieszParams::make(1, 0.5);
    const auto eq = solve_equilibrium(Potential::quadratic(1.0), Grid::line(-2, 2, 256), p);
    const auto pr = predicted_clt(TestFunction::bump(0.0, 0.4), eq, 2.0, 64, CltMode::macroscopic);
    CHECK(pr.mean_partial);
}

TEST_CASE("effective sample size") {
    const auto iid = normals(10000, 0.0, 1.0, 3);
    CHECK(effective_sample_size(iid).ess == doctest::Approx(10000).epsilon(0.15));
    // AR(1) with rho = 0.9 has tau = (1 + rho) / (1 - rho) = 19
    std::vector<double> ar(50000);
    CounterRng r(4);
    double x = 0.0;
    for (auto& v : ar) v = x = 0.9 * x + std::sqrt(1 - 0.81) * r.normal();
    CHECK(effective_sample_size(ar).tau == doctest::Approx(19.0).epsilon(0.2));
}

TEST_CASE("harness calibration on synthetic normals") {
    const std::size_t n = 20000;
    const auto v = normals(n, 0.3, 1.5, 9);
    CltPrediction pred;
    pred.variance = 2.25;
    pred.mean_shift = 0.3;
    const auto rep = clt_report(v, std::vector<int>(n, 0), pred);
    CHECK(std::abs(rep.mean - 0.3) < 3 * rep.mean_stderr);
    CHECK(std::abs(rep.variance - 2.25) < 3 * rep.variance_stderr);
    CHECK(std::abs(rep.skewness) < 3 * std::sqrt(6.0 / n));
    CHECK(std::abs(rep.excess_kurtosis) < 3 * std::sqrt(24.0 / n));
    CHECK(rep.ks_distance < 1.63 / std::sqrt(n));
}

TEST_CASE("clt report refuses small effective samples and handles zeros") {
    CHECK_THROWS_AS(clt_report(normals(50, 0, 1, 1), std::vector<int>(50, 0), CltPrediction{}), ValidationError);
    const auto rep = clt_report(std::vector<double>(500, 0.0), std::vector<int>(500, 0), CltPrediction{}, 0.0);
    CHECK(rep.mean == 0.0);
    CHECK(rep.variance == 0.0);
}

TEST_CASE("Laplace transform estimates") {
    const auto p = RieszParams::make(1, 0.0);
    const auto v = normals(5000, 0.0, 0.7, 12);
    const auto rep = laplace_estimate(v, {0.0, -0.2, -0.1, 0.1, 0.2}, 2.0, 0.25, 256, p);
    CHECK(rep.points[0].log_mean == 0.0);
    // Jensen: log E e^{L} + log E e^{-L} >= 0
    CHECK(rep.points[1].log_mean + rep.points[4].log_mean >= 0.0);
    CHECK(rep.points[2].log_mean + rep.points[3].log_mean >= 0.0);
    for (const auto& pt : rep.points) CHECK_FALSE(pt.unreliable);
    // phi -> -phi reflects the curve in tau
    std::vector<double> neg(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) neg[k] = -v[k];
    const auto ref = laplace_estimate(neg, {0.0, 0.2, 0.1, -0.1, -0.2}, 2.0, 0.25, 256, p);
    for (std::size_t k = 0; k < rep.points.size(); ++k)
        CHECK(ref.points[k].log_mean == doctest::Approx(rep.points[k].log_mean).epsilon(1e-12));
    // a single huge sample dominates the mean
    std::vector<double> spike(100, 0.0);
    spike[7] = 400.0;
    CHECK(laplace_estimate(spike, {0.2}, 2.0, 0.25, 256, p).points[0].unreliable);
}

TEST_CASE("a single-scale local-law call returns one row") {
    const auto p = RieszParams::make(1, 0.5);
    const auto eq = solve_equilibrium(Potential::quadratic(1.0), Grid::line(-2, 2, 128), p);
    EnsembleOptions eo;
    eo.chain.burn_in = 8 * 200;
    eo.chain.thinning = 8 * 5;
    const auto e = sample_ensemble(GasModel::confined(p, Potential::quadratic(1.0)), 8, 2.0, 4, eo, 1);
    const ElectricEnergy el(eq.mu, p);
    LocalLawOptions lo;
    lo.window_lo = -0.5;
    lo.window_hi = 0.5;
    const auto rep = local_law_report(e, eq, el, {0.5}, lo);
    REQUIRE(rep.rows.size() == 1);
    CHECK(rep.rows[0].cubes == 2);
    CHECK(rep.rows[0].energy_mean > 0.0);
}

TEST_CASE("quantile") {
    CHECK(quantile({3.0, 1.0, 2.0}, 0.5) == 2.0);
    CHECK(quantile({0.0, 10.0}, 0.25) == doctest::Approx(2.5));
    CHECK(quantile({4.0}, 0.9) == 4.0);
}

TEST_CASE("minimal-distance report on a lattice") {
    const auto p = RieszParams::make(1, 0.5);
    Ensemble e;
    e.N = 16;
    std::vector<double> x(16);
    for (std::size_t i = 0; i < 16; ++i) x[i] = -1.0 + (static_cast<double>(i) + 0.5) / 8.0;
    e.samples.push_back(Configuration::line(x));
    e.chain.push_back(0);
    e.energies.push_back(0.0);
    Box b;
    b.center = {0.0, 0.0};
    b.side = 1.0;
    const auto rep = min_distance_report(e, p, {b});
    // 8 points inside, each with r_i = N^{-1} / 4
    CHECK(rep.rows[0].mean == doctest::Approx(8 * riesz_g(1.0 / 64.0, 0.5)).epsilon(1e-12));
    CHECK_FALSE(rep.rows[0].flagged);
    e.samples[0].coords[8] = e.samples[0].coords[7] + 1e-9;
    CHECK(min_distance_report(e, p, {b}).rows[0].flagged);
}

}  // TEST_SUITE
