#include "rieszapp/commands.hpp"

#include "rieszlab/energy.hpp"
#include "rieszlab/io.hpp"
#include "rieszlab/sampler.hpp"
#include "rieszlab/statistics.hpp"
#include "rieszlab/transport.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

namespace rieszapp {

namespace {

using namespace riesz;

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

GridMeasure uniform_measure(double lo, double hi, std::size_t n) {
    const Grid g = Grid::line(lo - 0.5, hi + 0.5, n);
    std::vector<double> dens(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (g.x(i) > lo && g.x(i) < hi) dens[i] = 1.0;
    GridMeasure mu(g, dens);
    for (double& v : mu.density) v /= mu.mass();
    return mu;
}

struct Case {
    std::string name;
    std::function<std::string()> body;  // empty string on success
};

std::vector<Case> cases() {
    std::vector<Case> c;
    c.push_back({"kernel g(1) = 1/s at s = 0.5", []() -> std::string {
                     return close(riesz_g(1.0, 0.5), 2.0, 1e-15) ? "" : fmt(riesz_g(1.0, 0.5));
                 }});
    c.push_back({"kernel g(1) = 0 for the log case", []() -> std::string {
                     return riesz_g(1.0, 0.0) == 0.0 ? "" : fmt(riesz_g(1.0, 0.0));
                 }});
    c.push_back({"kernel g(0.5) at s = 0.5", []() -> std::string {
                     return close(riesz_g(0.5, 0.5), 2.0 * std::sqrt(2.0), 1e-14) ? "" : fmt(riesz_g(0.5, 0.5));
                 }});
    c.push_back({"fractional Laplacian of zero vanishes", []() -> std::string {
                     const Grid g = Grid::line(-1, 1, 64);
                     const SampledFunction f(g, std::vector<double>(64, 0.0));
                     const double v = frac_laplacian_pv(f, 0.25, 0.3);
                     return v == 0.0 ? "" : fmt(v);
                 }});
    c.push_back({"seminorm of zero vanishes", []() -> std::string {
                     const Grid g = Grid::line(-1, 1, 64);
                     const SampledFunction f(g, std::vector<double>(64, 0.0));
                     const double v = sobolev_seminorm(f, 0.25, SeminormMethod::gagliardo);
                     return v == 0.0 ? "" : fmt(v);
                 }});
    c.push_back({"extension with Sigma = whole grid is the identity", []() -> std::string {
                     const Grid g = Grid::line(-1, 1, 64);
                     const auto phi = TestFunction::bump(0.0, 0.5).sample(g);
                     const auto r = alpha_harmonic_extension(phi, std::vector<bool>(64, true), RieszParams::make(1, 0.5));
                     for (std::size_t i = 0; i < 64; ++i)
                         if (r.ext.values[i] != phi.values[i]) return std::string("differs at node ") + std::to_string(i);
                     return std::string();
                 }});
    c.push_back({"N = 1 Hamiltonian is N V(x)", []() -> std::string {
                     const auto p = RieszParams::make(1, 0.5);
                     const double v = hamiltonian(Configuration::line({0.7}), Potential::quadratic(1.0), p);
                     return close(v, 0.49, 1e-15) ? "" : fmt(v);
                 }});
    c.push_back({"single pair energy g(1) = 2 at s = 0.5", []() -> std::string {
                     const double v = pair_energy(Configuration::line({0.0, 1.0}), RieszParams::make(1, 0.5));
                     return close(v, 2.0, 1e-15) ? "" : fmt(v);
                 }});
    c.push_back({"minimal distance r_1 = 1/12 for {0, 1, 3}", []() -> std::string {
                     const auto r = minimal_distances(Configuration::line({0.0, 1.0, 3.0}), RieszParams::make(1, 0.5));
                     return close(r[0], 1.0 / 12.0, 1e-15) ? "" : fmt(r[0]);
                 }});
    c.push_back({"truncation vanishes at |x| = eta and beyond", []() -> std::string {
                     const auto p = RieszParams::make(1, 0.5);
                     return truncation_f(0.1, 0.1, p) == 0.0 && truncation_f(0.1, 0.2, p) == 0.0 ? "" : "nonzero";
                 }});
    c.push_back({"truncation value at s = 0.5, eta = 0.1, |x| = 0.05", []() -> std::string {
                     const double v = truncation_f(0.1, 0.05, RieszParams::make(1, 0.5));
                     return close(v, 2.0 * (std::pow(0.05, -0.5) - std::pow(0.1, -0.5)), 1e-12) ? "" : fmt(v);
                 }});
    c.push_back({"commutator of a constant field vanishes", []() -> std::string {
                     const auto mu = uniform_measure(-1, 1, 128);
                     const auto X = Configuration::line({-0.5, 0.1, 0.6});
                     const double v = commutator_An(X, mu, RieszParams::make(1, 0.5), VectorField1D::constant(1.0), 1);
                     return close(v, 0.0, 1e-12) ? "" : fmt(v);
                 }});
    c.push_back({"beta = 0 accepts every proposal", []() -> std::string {
                     const auto model = GasModel::confined(RieszParams::make(1, 0.5), Potential::quadratic(1.0));
                     auto st = ChainState::make(model, Configuration::line({-0.5, 0.0, 0.5}), 0.0, 7, 0.1);
                     for (int k = 0; k < 200; ++k)
                         if (!metropolis_step(st, model, 0.0)) return std::string("rejected at step ") + std::to_string(k);
                     return std::string();
                 }});
    c.push_back({"same seed gives identical ensembles", []() -> std::string {
                     const auto model = GasModel::confined(RieszParams::make(1, 0.5), Potential::quadratic(1.0));
                     EnsembleOptions eo;
                     eo.chain.burn_in = 100;
                     eo.chain.thinning = 10;
                     const auto a = sample_ensemble(model, 4, 2.0, 20, eo, 11);
                     const auto b = sample_ensemble(model, 4, 2.0, 20, eo, 11);
                     const auto d = sample_ensemble(model, 4, 2.0, 20, eo, 12);
                     for (std::size_t k = 0; k < a.size(); ++k)
                         if (a.samples[k].coords != b.samples[k].coords) return std::string("same seed differs");
                     return a.samples.back().coords != d.samples.back().coords ? "" : "different seeds agree";
                 }});
    c.push_back({"ensemble file round trip", []() -> std::string {
                     const auto model = GasModel::confined(RieszParams::make(1, 0.5), Potential::quadratic(1.0));
                     EnsembleOptions eo;
                     eo.chain.burn_in = 10;
                     eo.chain.thinning = 5;
                     const auto a = sample_ensemble(model, 3, 1.0, 5, eo, 3);
                     std::stringstream ss;
                     write_ensemble(ss, a);
                     const auto b = read_ensemble(ss);
                     bool same = a.size() == b.size() && a.model == b.model && a.energies == b.energies;
                     for (std::size_t k = 0; same && k < a.size(); ++k) same = a.samples[k].coords == b.samples[k].coords;
                     return same ? "" : "mismatch";
                 }});
    c.push_back({"fluctuation of the zero function vanishes", []() -> std::string {
                     const auto mu = uniform_measure(-1, 1, 128);
                     const double v = fluctuation(Configuration::line({0.0, 0.3}), TestFunction::bump(0.0, 0.5, 0.0), mu);
                     return v == 0.0 ? "" : fmt(v);
                 }});
    c.push_back({"empty ball has zero discrepancy", []() -> std::string {
                     const auto mu = uniform_measure(-1, 1, 128);
                     const double v = discrepancy(Configuration::line({0.0, 0.3}), mu, {5.0, 0.0}, 0.5);
                     return v == 0.0 ? "" : fmt(v);
                 }});
    c.push_back({"Laplace transform at tau = 0 is zero", []() -> std::string {
                     const auto rep = laplace_estimate({0.3, -0.1, 0.5}, {0.0}, 2.0, 0.5, 16, RieszParams::make(1, 0.0));
                     return rep.points.front().log_mean == 0.0 ? "" : fmt(rep.points.front().log_mean);
                 }});
    c.push_back({"transport of the zero function vanishes", []() -> std::string {
                     const auto p = RieszParams::make(1, 0.0);
                     const auto eq = solve_equilibrium(Potential::quadratic(1.0), Grid::line(-2, 2, 256), p);
                     const auto phi = TestFunction::bump(0.0, 0.2, 0.0);
                     const auto f = solve_transport_1d(phi, eq);
                     for (double v : f.psi)
                         if (v != 0.0) return std::string("psi = ") + fmt(v);
                     const auto r = master_residual(f, phi, eq);
                     return r.sup_raw == 0.0 ? "" : fmt(r.sup_raw);
                 }});
    c.push_back({"default config is admissible", []() -> std::string {
                     const auto v = validate_config(RunConfig{});
                     return v.empty() ? "" : v.front();
                 }});
    c.push_back({"beta <= 0 gives one violation", []() -> std::string {
                     RunConfig rc;
                     rc.gas.beta = 0.0;
                     return validate_config(rc).size() == 1 ? "" : "wrong violation count";
                 }});
    c.push_back({"scale below 4 N^{-1/d} gives one violation", []() -> std::string {
                     RunConfig rc;
                     rc.clt.ell = 0.5 * 4.0 / static_cast<double>(rc.gas.N);
                     return validate_config(rc).size() == 1 ? "" : "wrong violation count";
                 }});
    c.push_back({"s = d is rejected", []() -> std::string {
                     RunConfig rc;
                     rc.model.s = 1.0;
                     const auto v = validate_config(rc);
                     return v.size() == 1 && v.front().find("(d-2, d)") != std::string::npos ? "" : "not rejected";
                 }});
    return c;
}

}  // namespace

std::vector<SelftestCase> run_selftest() {
    std::vector<SelftestCase> out;
    for (const auto& c : cases()) {
        SelftestCase r;
        r.name = c.name;
        try {
            r.detail = c.body();
            r.passed = r.detail.empty();
        } catch (const std::exception& e) {
            r.detail = std::string("threw: ") + e.what();
        }
        out.push_back(r);
    }
    return out;
}

}  // namespace rieszapp
