#include "rieszlab/errors.hpp"
#include "rieszlab/transport.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace riesz;

namespace {

const EquilibriumResult& reference_eq(double s) {
    static const EquilibriumResult e0 =
        solve_equilibrium(Potential::quadratic(1.0), Grid::line(-4, 4, 1024), RieszParams::make(1, 0.0));
    static const EquilibriumResult e5 =
        solve_equilibrium(Potential::quadratic(1.0), Grid::line(-4, 4, 1024), RieszParams::make(1, 0.5));
    return s == 0.0 ? e0 : e5;
}

double sup_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

TEST_SUITE("transport") {

TEST_CASE("zero function gives zero field and zero residual") {
    const auto& eq = reference_eq(0.0);
    const auto phi = TestFunction::bump(0.0, 0.2, 0.0);
    const auto f = solve_transport_1d(phi, eq);
    CHECK(sup_abs(f.psi) == 0.0);
    CHECK(master_residual(f, phi, eq).sup_raw == 0.0);
}

TEST_CASE("linearity in phi") {
    const auto& eq = reference_eq(0.5);
    const auto p1 = TestFunction::bump(-0.2, 0.3), p2 = TestFunction::bump(0.3, 0.25);
    const auto f1 = solve_transport_1d(p1, eq), f2 = solve_transport_1d(p2, eq);
    // a * phi1 is a bump with amplitude a; the sum is checked through the residual operator
    const auto f3 = solve_transport_1d(TestFunction::bump(-0.2, 0.3, 2.0), eq);
    const double scale = sup_abs(f1.psi);
    for (std::size_t i = 0; i < f1.psi.size(); ++i) CHECK(std::abs(f3.psi[i] - 2.0 * f1.psi[i]) < 1e-9 * scale);
    // residual of psi1 + psi2 against phi1 + phi2 is the sum of the residuals
    std::vector<double> sum(f1.psi.size());
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = f1.psi[i] + f2.psi[i];
    const auto zero = TestFunction::bump(0.0, 0.1, 0.0);
    const auto r1 = master_residual(f1, p1, eq), r2 = master_residual(f2, p2, eq);
    const auto rs = master_residual(sum, zero, eq);
    // with phi = 0 the residual of psi1 + psi2 is -(phi1 + phi2) up to the two residuals
    double worst = 0.0;
    for (std::size_t i = 0; i < sum.size(); ++i) {
        const double x = eq.mu.grid.x(i);
        worst = std::max(worst, std::abs(p1.value(x) + p2.value(x)));
    }
    CHECK(rs.sup <= worst + r1.sup + r2.sup + 1e-9);
}

TEST_CASE("parity") {
    const auto& eq = reference_eq(0.0);
    const std::size_t n = eq.mu.grid.size();
    SUBCASE("even phi gives odd psi") {
        const auto f = solve_transport_1d(TestFunction::bump(0.0, 0.3), eq);
        const double scale = sup_abs(f.psi);
        for (std::size_t i = 0; i < n / 2; ++i) CHECK(std::abs(f.psi[i] + f.psi[n - 1 - i]) < 1e-6 * scale);
    }
    SUBCASE("mirrored phi gives the mirrored field") {
        const auto a = solve_transport_1d(TestFunction::bump(0.3, 0.2), eq);
        const auto b = solve_transport_1d(TestFunction::bump(-0.3, 0.2), eq);
        const double scale = sup_abs(a.psi);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(a.psi[i] + b.psi[n - 1 - i]) < 1e-6 * scale);
    }
}

TEST_CASE("flux vanishes at both ends of Sigma") {
    const auto& eq = reference_eq(0.5);
    const auto f = solve_transport_1d(TestFunction::bump(0.2, 0.3), eq);
    const double scale = sup_abs(f.flux);
    CHECK(std::abs(f.flux[f.first]) < 0.02 * scale);
    CHECK(std::abs(f.flux[f.last]) < 0.02 * scale);
    CHECK(std::abs(f.mass_defect) < 1e-6 * scale);
}

TEST_CASE("residual is small and a corrupted field is caught") {
    for (double s : {0.0, 0.5}) {
        CAPTURE(s);
        const auto& eq = reference_eq(s);
        const auto phi = TestFunction::bump(0.0, 0.3);
        const auto f = solve_transport_1d(phi, eq);
        const auto r = master_residual(f, phi, eq);
        CHECK(r.sup < 2e-2 * r.phi_sup);
        auto bad = f.psi;
        for (std::size_t i = 0; i < bad.size(); ++i)
            if (f.region[i] == TransportRegion::inside) bad[i] *= 1.5;
        CHECK(master_residual(bad, phi, eq).sup >= 10.0 * r.sup);
    }
}

TEST_CASE("boundary continuity") {
    const auto& eq = reference_eq(0.0);
    const auto f = solve_transport_1d(TestFunction::bump(0.0, 0.3), eq);
    CHECK(f.left.relative_jump < 0.05);
    CHECK(f.right.relative_jump < 0.05);
}

TEST_CASE("divergence potential of a mean-zero dipole") {
    // rho = x on [-1, 1]: rho' = 1 there and -delta at both ends
    const Grid g = Grid::line(-2, 2, 2048);
    std::vector<double> rho(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) rho[i] = std::abs(g.x(i)) < 1 ? g.x(i) : 0.0;
    const auto h = divergence_potential(g, rho, 0.5);
    // at x = 0, a cell face, averaged over the two neighbouring nodes
    const double exact = 2.0 * 2.0 / 0.5 - 2.0 * riesz_g(1.0, 0.5);
    const double v = h[g.size() / 2] + h[g.size() / 2 - 1];
    CHECK(0.5 * v == doctest::Approx(exact).epsilon(0.01));
}

TEST_CASE("decay report") {
    const auto& eq = reference_eq(0.0);
    const auto phi = TestFunction::bump(0.0, 0.2);
    const auto f = solve_transport_1d(phi, eq);
    const auto d = decay_and_continuity_check(f, phi, eq);
    CHECK(d.inner_bound_ratio > 0.0);
    CHECK(d.inner_bound_ratio < 1.0);
    CHECK(d.tail.points >= 16);
    CHECK(d.jump < 0.05);
    DecayOptions tight;
    tight.edge_margin = 0.45;
    CHECK_THROWS_AS(decay_and_continuity_check(f, phi, eq, tight), ValidationError);
}

TEST_CASE("refusals") {
    const auto& eq = reference_eq(0.0);
    // phi reaching beyond Sigma
    CHECK_THROWS_AS(solve_transport_1d(TestFunction::bump(0.9, 0.4), eq), ValidationError);
    const auto eq2 = solve_equilibrium(Potential::polynomial({0.0, 0.0, -2.0, 0.0, 1.0}), Grid::line(-3, 3, 512),
                                       RieszParams::make(1, 0.5));
    bool disconnected = false;
    for (std::size_t i = 1; i + 1 < eq2.sigma.size(); ++i)
        if (eq2.sigma[i - 1] && !eq2.sigma[i]) {
            for (std::size_t j = i; j < eq2.sigma.size(); ++j)
                if (eq2.sigma[j]) disconnected = true;
            break;
        }
    if (disconnected) CHECK_THROWS_AS(solve_transport_1d(TestFunction::bump(0.0, 0.1), eq2), Unsupported);
}

}  // TEST_SUITE
