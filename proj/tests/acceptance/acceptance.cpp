// Acceptance runs at desk scale. One PASS/FAIL line per criterion, followed by
// indented detail lines. Exit status is the number of failed criteria (capped).

#include "rieszlab/cs_extension.hpp"
#include "rieszlab/energy.hpp"
#include "rieszlab/equilibrium.hpp"
#include "rieszlab/io.hpp"
#include "rieszlab/sampler.hpp"
#include "rieszlab/statistics.hpp"
#include "rieszlab/transport.hpp"

#include <CLI11.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

using namespace riesz;
namespace fs = std::filesystem;

namespace {

std::string strf(const char* f, ...) {
    char buf[1024];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

struct Outcome {
    bool pass = true;
    std::string summary;
    std::vector<std::string> details;
    void require(bool ok, std::string what) {
        pass = pass && ok;
        details.push_back(std::string(ok ? "ok   " : "FAIL ") + std::move(what));
    }
    void note(std::string what) { details.push_back("     " + std::move(what)); }
};

struct Context {
    fs::path cache;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double bump0(double u) { return u * u < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - u * u)) : 0.0; }

SampledFunction bump_on(const Grid& g, double c, double ell) {
    return SampledFunction::from(g, [=](double x, double) { return bump0((x - c) / ell); });
}

Configuration uniform_config(std::size_t N, std::mt19937_64& rng, double a) {
    std::uniform_real_distribution<double> U(-a, a);
    std::vector<double> x(N);
    for (auto& v : x) v = U(rng);
    return Configuration::line(x);
}

// ---------------------------------------------------------------------------

Outcome constants(const Context&) {
    using big = boost::multiprecision::cpp_bin_float_50;
    using boost::math::tgamma;
    Outcome o;
    const big pi = boost::math::constants::pi<big>();
    // alpha = 1/4 (s = 0.5) for c_ds; alpha = 1/2 (s = 0) for c_dalpha and cbar
    const big a1 = big(1) / 4, a2 = big(1) / 2;
    const double ref_cds = static_cast<double>(sqrt(pi) * pow(big(4), a1) * tgamma(a1) / tgamma(big(1) / 2 - a1));
    const double ref_cda = static_cast<double>(a2 * pow(big(4), a2) * tgamma(big(1) / 2 + a2) / (sqrt(pi) * tgamma(1 - a2)));
    const double ref_cbar = static_cast<double>(-tgamma(1 + a2) / tgamma(1 - a2));
    const auto k1 = kernel_constants(1, 0.5);
    const auto k2 = kernel_constants(1, 0.0);
    const double e1 = std::abs(k1.c_ds - std::sqrt(2 * std::numbers::pi));
    const double e2 = std::abs(k2.c_dalpha - 1 / std::numbers::pi);
    const double e3 = std::abs(k2.cbar_alpha + 0.5);
    o.require(e1 < 1e-10 && std::abs(k1.c_ds - ref_cds) < 1e-10,
              strf("c_{1,0.5} = %.15f, |.-sqrt(2pi)| = %.1e, |.-oracle| = %.1e", k1.c_ds, e1, std::abs(k1.c_ds - ref_cds)));
    o.require(e2 < 1e-10 && std::abs(k2.c_dalpha - ref_cda) < 1e-10,
              strf("c_{1,alpha=0.5} = %.15f, |.-1/pi| = %.1e, |.-oracle| = %.1e", k2.c_dalpha, e2,
                   std::abs(k2.c_dalpha - ref_cda)));
    o.require(e3 < 1e-12 && std::abs(k2.cbar_alpha - ref_cbar) < 1e-12,
              strf("cbar_{0.5} = %.15f, |.+0.5| = %.1e", k2.cbar_alpha, e3));
    o.summary = strf("c_ds, c_dalpha, cbar against a 50-digit Gamma oracle (max err %.1e)", std::max({e1, e2, e3}));
    return o;
}

Outcome fractional_laplacian(const Context&) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const Grid g = Grid::line(-1.5, 1.5, 4096);
    const auto f = SampledFunction::from(g, [](double x, double) { return x * x < 1 ? std::sqrt(1 - x * x) : 0.0; });
    const auto L = frac_laplacian_grid(f, 0.5);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (std::abs(g.x(i)) < 0.8) worst = std::max(worst, std::abs(L[i] - 1.0));
    o.require(worst < 0.01, strf("(-Delta)^{1/2} (1-x^2)_+^{1/2} on (-0.8, 0.8), 4096 cells: max |.-1| = %.2e", worst));

    double inv_worst = 0.0;
    for (double s : {0.0, 0.5}) {
        const auto p = RieszParams::make(1, s);
        const Grid gg = Grid::line(-6, 6, 3072);
        // mean-zero rho, so g * rho decays like |x|^{-s-2} for every s
        std::vector<double> rho(gg.size());
        double rho_max = 0.0;
        for (std::size_t i = 0; i < gg.size(); ++i) {
            rho[i] = bump0(gg.x(i) / 0.5) - 0.5 * bump0(gg.x(i));
            rho_max = std::max(rho_max, std::abs(rho[i]));
        }
        const MeasurePotential pot(GridMeasure(gg, rho), p);
        SampledFunction u(gg, pot.on_nodes());
        u.attach_matched_tail(s + 2.0, 0.0);
        double e = 0.0;
        for (std::size_t i = 0; i < gg.size(); ++i) {
            const double x = gg.x(i);
            if (std::abs(x) > 0.4) continue;
            e = std::max(e, std::abs(frac_laplacian_pv(u, p.alpha, x) - p.c_frac * rho[i]) / (p.c_frac * rho_max));
        }
        o.note(strf("s = %.1f: sup |(-Delta)^alpha (g * rho) - c_frac rho| / (c_frac sup |rho|) on |x| < 0.4: %.2e", s, e));
        inv_worst = std::max(inv_worst, e);
    }
    o.require(inv_worst < 0.03, strf("weak inverse identity within 3%%: %.2e", inv_worst));
    o.summary = strf("semicircle profile err %.1e, g*rho inverse err %.1e (%.1fs)", worst, inv_worst, seconds_since(t0));
    return o;
}

Outcome seminorms(const Context&) {
    Outcome o;
    double worst = 0.0;
    const Grid g = Grid::line(-1, 1, 2048);
    for (auto [ell, a] : {std::pair{0.5, 0.25}, {0.4, 0.5}, {0.3, 0.75}}) {
        const auto f = bump_on(g, 0.1, ell);
        const double F = sobolev_seminorm(f, a, SeminormMethod::fourier);
        const double G = sobolev_seminorm(f, a, SeminormMethod::gagliardo);
        const double e = std::abs(F - G) / G;
        worst = std::max(worst, e);
        o.note(strf("ell = %.2f (h = ell/%.0f), alpha = %.2f: fourier %.8f gagliardo %.8f rel %.2e", ell, ell / g.h, a, F, G, e));
    }
    o.require(worst < 0.02, strf("Fourier vs Gagliardo on three bumps: max rel %.2e", worst));
    double sc_worst = 0.0;
    const Grid gs = Grid::line(-2, 2, 4096);
    for (double a : {0.25, 0.5, 0.75}) {
        const double s1 = sobolev_seminorm(bump_on(gs, 0.0, 0.4), a, SeminormMethod::gagliardo);
        const double s2 = sobolev_seminorm(bump_on(gs, 0.0, 0.8), a, SeminormMethod::gagliardo);
        const double e = std::abs(s2 / s1 / std::pow(2.0, 1.0 - 2 * a) - 1.0);
        sc_worst = std::max(sc_worst, e);
        o.note(strf("alpha = %.2f: ratio %.6f, lambda^{d-2alpha} = %.6f", a, s2 / s1, std::pow(2.0, 1.0 - 2 * a)));
    }
    o.require(sc_worst < 0.01, strf("scaling law at lambda = 2 within 1%%: %.2e", sc_worst));
    o.summary = strf("seminorm agreement %.1e, scaling %.1e", worst, sc_worst);
    return o;
}

Outcome equilibrium(const Context&) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const auto p0 = RieszParams::make(1, 0.0), p5 = RieszParams::make(1, 0.5);
    {
        const Grid g = Grid::line(-2, 2, 512);
        const auto r = solve_equilibrium(Potential::quadratic(1.0), g, p0);
        double l1 = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double x = g.x(i);
            l1 += std::abs(r.mu.density[i] - (x * x < 1 ? 2 / std::numbers::pi * std::sqrt(1 - x * x) : 0.0)) * g.h;
        }
        o.require(l1 < 0.02, strf("s = 0, V = x^2, 512 cells: L1 to (2/pi) sqrt(1 - x^2) = %.2e", l1));
        const auto el = el_residual(r);
        o.require(el.below < 1e-3 * el.scale && el.on_support < 1e-3 * el.scale,
                  strf("s = 0 Euler-Lagrange: below %.1e, on Sigma %.1e, scale %.3f", el.below, el.on_support, el.scale));
    }
    {
        const Grid g = Grid::line(-2.5, 2.5, 512);
        const auto r = solve_equilibrium(Potential::quadratic(0.5), g, p0);
        double l1 = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double x = g.x(i);
            l1 += std::abs(r.mu.density[i] - (x * x < 2 ? std::sqrt(2 - x * x) / std::numbers::pi : 0.0)) * g.h;
        }
        o.require(l1 < 0.02, strf("s = 0, V = x^2/2, 512 cells: L1 to (1/pi) sqrt(2 - x^2) = %.2e, mu(0) = %.4f", l1,
                                  r.mu.eval(0.0)));
    }
    {
        const auto r = solve_equilibrium(Potential::quadratic(1.0), Grid::line(-2, 2, 512), p5);
        const auto el = el_residual(r);
        o.require(el.below < 1e-3 * el.scale && el.on_support < 1e-3 * el.scale,
                  strf("s = 0.5 Euler-Lagrange: below %.1e, on Sigma %.1e, scale %.3f", el.below, el.on_support, el.scale));
    }
    const auto r0 = solve_equilibrium(Potential::quadratic(1.0), Grid::line(-2, 2, 2048), p0);
    const auto f0 = boundary_exponent_fit(r0);
    o.require(std::abs(f0.density_exponent - 0.5) < 0.05,
              strf("s = 0 density exponent %.4f (left %.4f right %.4f), 2048 cells", f0.density_exponent,
                   f0.density_left.exponent, f0.density_right.exponent));
    const auto r5 = solve_equilibrium(Potential::quadratic(1.0), Grid::line(-2, 2, 2048), p5);
    const auto f5 = boundary_exponent_fit(r5);
    o.require(std::abs(f5.density_exponent - 0.75) < 0.05, strf("s = 0.5 density exponent %.4f", f5.density_exponent));
    o.require(std::abs(f5.liftoff_exponent - 1.25) < 0.1, strf("s = 0.5 lift-off exponent %.4f", f5.liftoff_exponent));
    o.summary = strf("semicircle, EL residuals, exponents %.3f / %.3f / %.3f (%.1fs)", f0.density_exponent,
                     f5.density_exponent, f5.liftoff_exponent, seconds_since(t0));
    return o;
}

Outcome splitting(const Context&) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = RieszParams::make(1, 0.5);
    const auto V = Potential::quadratic(1.0);
    const auto eq512 = solve_equilibrium(V, Grid::line(-2, 2, 512), p);
    const auto eq1024 = solve_equilibrium(V, Grid::line(-2, 2, 1024), p);
    const auto eq2048 = solve_equilibrium(V, Grid::line(-2, 2, 2048), p);
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> Nd(2, 32);
    double worst = 0.0;
    std::vector<Configuration> configs;
    for (int k = 0; k < 50; ++k) {
        const auto X = uniform_config(static_cast<std::size_t>(Nd(rng)), rng, 1.3);
        const double rel = splitting_residual(X, V, eq1024) / std::abs(hamiltonian(X, V, p));
        worst = std::max(worst, rel);
        configs.push_back(X);
    }
    o.require(worst < 1e-3, strf("50 random configurations, N in [2, 32], 1024 cells: max relative residual %.2e", worst));
    // refinement: mean residual over the same configurations on three grids
    double m[3] = {0, 0, 0};
    for (const auto& X : configs) {
        const double H = std::abs(hamiltonian(X, V, p));
        m[0] += splitting_residual(X, V, eq512) / H;
        m[1] += splitting_residual(X, V, eq1024) / H;
        m[2] += splitting_residual(X, V, eq2048) / H;
    }
    o.note(strf("mean relative residual 512 / 1024 / 2048 cells: %.3e / %.3e / %.3e", m[0] / 50, m[1] / 50, m[2] / 50));
    o.require(m[1] <= 0.5 * m[0] && m[2] <= 0.5 * m[1],
              strf("residual halves under refinement: ratios %.2f, %.2f", m[1] / m[0], m[2] / m[1]));
    o.summary = strf("max rel residual %.1e, refinement ratios %.2f %.2f (%.1fs)", worst, m[1] / m[0], m[2] / m[1],
                     seconds_since(t0));
    return o;
}

Outcome electric(const Context&) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = RieszParams::make(1, 0.5);
    const auto eq = solve_equilibrium(Potential::quadratic(1.0), Grid::line(-2, 2, 512), p);
    const ElectricEnergy el(eq.mu, p);
    std::mt19937_64 rng(7);
    double worst = 0.0;
    for (std::size_t N : {2, 4, 8, 12, 16}) {
        for (int rep = 0; rep < 2; ++rep) {
            const auto X = uniform_config(N, rng, 1.2);
            const double direct = next_order_energy(X, eq.mu, p);
            const double elec = el.next_order_energy(X);
            const double rel = std::abs(elec - direct) / std::abs(direct);
            worst = std::max(worst, rel);
            o.note(strf("N = %2zu: direct F_N %.6f, extended-space %.6f, rel %.2e", N, direct, elec, rel));
        }
    }
    o.require(worst < 0.05, strf("extended-space F_N within 5%%: max rel %.2e", worst));
    const double dt = seconds_since(t0);
    o.require(dt < 300.0, strf("runtime %.1fs < 300s", dt));
    o.summary = strf("electric formulation max rel err %.1e (%.1fs)", worst, dt);
    return o;
}

Outcome sampler_exactness(const Context&) {
    Outcome o;
    const auto dc = discrete_single_particle(Potential::quadratic(1.0), 2.0, -2.0, 2.0, 64, 0.3);
    const auto sc = check_stationarity(dc);
    o.note(strf("64-state transition matrix: |pi P - pi| = %.1e, detailed-balance defect %.1e", sc.stationarity,
                sc.detailed_balance));
    const auto hist = simulate_discrete(dc, 2000000, 7);
    const double tv = total_variation(hist, dc.target);
    o.require(tv < 0.02 && sc.stationarity < 1e-12, strf("N = 1 visit histogram vs exp(-beta V) normalised: TV %.4f", tv));
    const auto model = GasModel::confined(RieszParams::make(1, 0.5), Potential::quadratic(1.0));
    EnsembleOptions eo;
    eo.chain.burn_in = 16 * 200;
    eo.chain.thinning = 16 * 5;
    eo.n_chains = 2;
    std::ostringstream a, b, c;
    write_ensemble(a, sample_ensemble(model, 16, 2.0, 100, eo, 99));
    write_ensemble(b, sample_ensemble(model, 16, 2.0, 100, eo, 99));
    write_ensemble(c, sample_ensemble(model, 16, 2.0, 100, eo, 100));
    o.require(a.str() == b.str() && a.str() != c.str(),
              strf("fixed seed gives bitwise-identical ensembles (%zu bytes), another seed differs", a.str().size()));
    o.summary = strf("TV %.4f, bitwise reproducible", tv);
    return o;
}

Outcome mean_field(const Context&) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = RieszParams::make(1, 0.0);
    const auto V = Potential::quadratic(1.0);
    const std::size_t N = 64;
    const auto model = GasModel::confined(p, V);
    EnsembleOptions eo;
    eo.chain.burn_in = N * 2000;
    eo.chain.thinning = N * 10;
    // 2000 burn-in sweeps + 9800 * 10 sweeps = 1e5 sweeps
    const auto e = sample_ensemble(model, N, 2.0, 9800, eo, 42);
    const double lo = -1.5, hi = 1.5;
    const std::size_t bins = 60;
    const double w = (hi - lo) / bins;
    std::vector<double> h(bins, 0.0);
    for (const auto& X : e.samples)
        for (double x : X.coords) {
            const auto k = static_cast<long>(std::floor((x - lo) / w));
            if (k >= 0 && k < static_cast<long>(bins)) h[static_cast<std::size_t>(k)] += 1.0;
        }
    const double total = static_cast<double>(N * e.size());
    double l1 = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
        // exact bin average of (2/pi) sqrt(1 - x^2)
        auto F = [](double x) {
            x = std::clamp(x, -1.0, 1.0);
            return (x * std::sqrt(1 - x * x) + std::asin(x)) / std::numbers::pi;
        };
        const double a = lo + k * w;
        l1 += std::abs(h[k] / total - (F(a + w) - F(a)));
    }
    const double dt = seconds_since(t0);
    o.require(l1 < 0.10, strf("N = 64, beta = 2, 1e5 sweeps: L1(empirical, mu_V) = %.4f over %zu bins", l1, bins));
    o.note(strf("acceptance %.3f, proposal scale %.4f, cache drift %.1e", e.acceptance[0], e.proposal_scale[0],
                e.max_cache_drift));
    o.require(dt < 600.0, strf("runtime %.1fs < 600s", dt));
    o.summary = strf("empirical density L1 %.4f (%.1fs)", l1, dt);
    return o;
}

Outcome local_laws(const Context& ctx) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = RieszParams::make(1, 0.5);
    const auto V = Potential::quadratic(1.0);
    const std::size_t N = 64;
    const auto eq = solve_equilibrium(V, Grid::line(-2, 2, 512), p);
    const auto model = GasModel::confined(p, V);
    EnsembleOptions eo;
    eo.chain.burn_in = N * 2000;
    eo.chain.thinning = N * 20;
    const auto e = sample_ensemble(model, N, 2.0, 500, eo, 3);
    (void)ctx;
    ElectricOptions opt;
    opt.y_min_rel = 1e-4;
    opt.grading = 1.5;
    const ElectricEnergy el(eq.mu, p, opt);
    LocalLawOptions lo;
    lo.window_lo = -0.5;
    lo.window_hi = 0.5;
    const std::vector<double> scales{0.0625, 0.125, 0.25};
    const auto rep = local_law_report(e, eq, el, scales, lo);
    for (const auto& r : rep.rows)
        o.note(strf("ell = %.4f: %zu cubes, mean energy %.4f, q99 %.4f, mean count %.3f, max count %.0f", r.scale, r.cubes,
                    r.energy_mean, r.energy_q99, r.count_mean, r.count_max));
    o.require(std::abs(rep.energy_slope - 1.0) < 0.2, strf("energy vs ell log-log slope %.4f (d = 1)", rep.energy_slope));
    o.require(rep.count_violation < 0.01, strf("count bound C ell N with C = %.3f fitted on half the samples: "
                                               "violation share %.4f over %zu held-out cube-samples",
                                               rep.count_constant, rep.count_violation, rep.held_out));
    const double dt = seconds_since(t0);
    o.require(dt < 1800.0, strf("runtime %.1fs < 1800s", dt));
    o.summary = strf("slope %.3f, count violation %.4f (%.0fs)", rep.energy_slope, rep.count_violation, dt);
    return o;
}

// Shared by the CLT and Laplace-transform criteria.
struct FlagshipRun {
    EquilibriumResult eq;
    Ensemble e;
    TestFunction phi;
    double seconds = 0.0;
    bool cached = false;
};

const FlagshipRun& flagship(const Context& ctx) {
    static std::unique_ptr<FlagshipRun> run;
    if (run) return *run;
    run = std::make_unique<FlagshipRun>();
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = RieszParams::make(1, 0.0);
    const auto V = Potential::quadratic(1.0);
    const std::size_t N = 256;
    run->eq = solve_equilibrium(V, Grid::line(-1.5, 1.5, 1024), p);
    run->phi = TestFunction::bump(0.0, std::pow(static_cast<double>(N), -0.25));
    const std::uint64_t seed = 11;
    const fs::path file = ctx.cache / "flagship_N256_seed11.bin";
    if (!ctx.cache.empty() && fs::exists(file)) {
        run->e = read_ensemble(file.string());
        run->cached = true;
    } else {
        EnsembleOptions eo;
        eo.chain.burn_in = N * 1000;
        eo.chain.thinning = N * 2;
        run->e = sample_ensemble(GasModel::confined(p, V), N, 2.0, 30000, eo, seed);
        if (!ctx.cache.empty()) {
            fs::create_directories(ctx.cache);
            write_ensemble(file.string(), run->e);
        }
    }
    run->seconds = seconds_since(t0);
    return *run;
}

Outcome clt(const Context& ctx) {
    Outcome o;
    const auto& f = flagship(ctx);
    const auto& p = f.eq.params;
    const double beta = 2.0;
    const auto pred = predicted_clt(f.phi, f.eq, beta, f.e.N, CltMode::mesoscopic);
    const auto rep = clt_report(f.e, f.phi, f.eq, beta, pred, 0.0);
    o.note(strf("N = %zu, ell = %.4f, %zu samples (2-sweep thinning), %s in %.0fs", f.e.N, f.phi.ell, rep.samples,
                f.cached ? "loaded from cache" : "sampled", f.seconds));
    o.require(rep.effective_samples >= 2000.0, strf("effective samples %.0f >= 2000", rep.effective_samples));
    const double ratio = rep.variance / pred.variance;
    o.require(std::abs(ratio - 1.0) < 0.15,
              strf("variance %.4f +- %.4f vs (c_dalpha / c_frac) * seminorm = %.4f: ratio %.3f", rep.variance,
                   rep.variance_stderr, pred.variance, ratio));
    const double literal = p.c_dalpha / (2.0 * p.c_ds) * pred.seminorm;
    o.note(strf("with the 1/2 read literally, c_dalpha / (2 c_ds) * seminorm = %.4f: ratio %.3f", literal,
                rep.variance / literal));
    o.require(std::abs(rep.skewness) < 0.2, strf("skewness %.4f", rep.skewness));
    o.require(std::abs(rep.excess_kurtosis) < 0.3, strf("excess kurtosis %.4f", rep.excess_kurtosis));
    o.require(std::abs(rep.mean) <= 2.0 * rep.mean_stderr,
              strf("mean %.4f +- %.4f (autocorrelation-corrected), |mean| <= 2 stderr", rep.mean, rep.mean_stderr));
    o.note(strf("KS distance to N(mean, var) %.4f, acceptance %.3f", rep.ks_distance, f.e.acceptance[0]));
    o.summary = strf("variance ratio %.3f, skew %.3f, kurt %.3f, ESS %.0f", ratio, rep.skewness, rep.excess_kurtosis,
                     rep.effective_samples);
    return o;
}

Outcome laplace(const Context& ctx) {
    Outcome o;
    const auto& f = flagship(ctx);
    std::vector<double> raw;
    raw.reserve(f.e.size());
    for (const auto& X : f.e.samples) raw.push_back(fluctuation(X, f.phi, f.eq.mu));
    const auto rep = laplace_estimate(raw, {-0.2, -0.1, 0.1, 0.2}, 2.0, f.phi.ell, f.e.N, f.eq.params);
    bool reliable = true;
    for (const auto& pt : rep.points) {
        o.note(strf("tau = %+.1f: log E = %+.6f, C = %.5f, max weight %.4f", pt.tau, pt.log_mean, pt.constant,
                    pt.max_weight));
        reliable = reliable && !pt.unreliable;
    }
    o.require(reliable, "no estimate dominated by a single sample");
    // error bars: delta method on the mean of exp(t Fluct) with autocorrelation-corrected sample size
    const double beta = 2.0;
    double m = 0.0, v = 0.0;
    for (double x : raw) m += x;
    m /= static_cast<double>(raw.size());
    for (double x : raw) v += (x - m) * (x - m);
    v /= static_cast<double>(raw.size() - 1);
    for (const auto& pt : rep.points) {
        const double t = pt.tau * beta / (1.0 + beta);
        std::vector<double> w(raw.size());
        double mw = 0.0;
        for (std::size_t k = 0; k < raw.size(); ++k) mw += (w[k] = std::exp(t * raw[k]));
        mw /= static_cast<double>(raw.size());
        double vw = 0.0;
        for (double x : w) vw += (x - mw) * (x - mw);
        vw /= static_cast<double>(raw.size() - 1);
        const double ess = effective_sample_size(w).ess;
        const double se = std::sqrt(vw / ess) / mw / (std::abs(pt.tau) + pt.tau * pt.tau);
        o.note(strf("tau = %+.1f: C = %.5f +- %.5f; Gaussian model m t + v t^2 / 2 gives %.5f", pt.tau, pt.constant, se,
                    std::abs(m * t + 0.5 * v * t * t) / (std::abs(pt.tau) + pt.tau * pt.tau)));
    }
    o.note(strf("Fluct mean %.5f, variance %.5f; for a centred Gaussian C(tau) ~ |tau| / (1 + |tau|), so the spread over",
                m, v));
    o.note(strf("|tau| in {0.1, 0.2} is %.3f before any sampling noise in the mean term", (0.2 / 1.2) / (0.1 / 1.1)));
    o.require(rep.spread() <= 2.0, strf("fitted constant spread max/min = %.3f <= 2", rep.spread()));
    o.summary = strf("constant in [%.4f, %.4f], spread %.3f", rep.constant_min, rep.constant_max, rep.spread());
    return o;
}

Outcome commutator(const Context&) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = RieszParams::make(1, 0.5);
    const auto V = Potential::quadratic(1.0);
    const auto eq = solve_equilibrium(V, Grid::line(-2, 2, 512), p);
    ElectricOptions opt;
    opt.y_min_rel = 1e-4;
    opt.grading = 1.5;
    const ElectricEnergy el(eq.mu, p, opt);
    // psi = ell * phi0((x - z) / ell), so |psi'| <= M_1
    const double ell = 0.25, z = 0.1;
    const auto bump = TestFunction::bump(z, ell, ell);
    VectorField1D psi{[bump](double x) { return bump.value(x); }, [bump](double x) { return bump.derivative(x, 1); }};
    const double grad = ell * TestFunction::derivative_bounds()[1] / ell;
    Box box;
    box.center = {z, 0.0};
    box.side = 4.0 * ell;
    // smallest C with |A_1| <= C |psi'| (E + C #I N^s), the positive root of a quadratic
    auto min_constant = [&](const Configuration& X) {
        const double N = static_cast<double>(X.size());
        const auto loc = el.local(X, box);
        const double q = std::abs(commutator_An(X, eq.mu, p, psi, 1)) / grad;
        const double b = loc.value, a = static_cast<double>(loc.point_count) * std::pow(N, p.s);
        return a > 0.0 ? (-b + std::sqrt(b * b + 4.0 * a * q)) / (2.0 * a) : q / b;
    };
    // 100 configurations: Gibbs at N = 16, 32, 64 and uniform at N = 32
    const auto model = GasModel::confined(p, V);
    std::vector<std::pair<std::string, std::vector<double>>> groups;
    for (std::size_t N : {16, 32, 64}) {
        EnsembleOptions eo;
        eo.chain.burn_in = N * 500;
        eo.chain.thinning = N * 20;
        const auto e = sample_ensemble(model, N, 2.0, 25, eo, 600 + N);
        std::vector<double> c;
        for (const auto& X : e.samples) c.push_back(min_constant(X));
        groups.emplace_back(strf("Gibbs N = %zu", N), std::move(c));
    }
    std::mt19937_64 rng(17);
    std::vector<double> cu;
    for (int k = 0; k < 25; ++k) cu.push_back(min_constant(uniform_config(32, rng, 1.1)));
    groups.emplace_back("uniform N = 32", std::move(cu));

    std::vector<double> all;
    for (const auto& [name, c] : groups) all.insert(all.end(), c.begin(), c.end());
    const double C = *std::max_element(all.begin(), all.end());
    std::size_t violations = 0;
    for (double c : all)
        if (c > C) ++violations;
    o.note("|A_1| <= C |psi'|_inf (local electric energy + C #I N^s), box of side 4 ell around supp psi");
    for (const auto& [name, c] : groups)
        o.note(strf("%-15s: own constant %.5f, median %.5f", name.c_str(), *std::max_element(c.begin(), c.end()),
                    quantile(c, 0.5)));
    o.require(violations == 0, strf("single C = %.5f: %zu violations over %zu configurations", C, violations, all.size()));
    // stability: the constant fitted on the smallest N alone must cover every other group
    const auto& first = groups.front().second;
    const double c_small = *std::max_element(first.begin(), first.end());
    std::size_t uncovered = 0, others = 0;
    for (std::size_t g = 1; g < groups.size(); ++g)
        for (double c : groups[g].second) {
            ++others;
            if (c > c_small) ++uncovered;
        }
    o.require(uncovered == 0, strf("C fitted on %s alone covers the other groups: %zu of %zu exceed it",
                                   groups.front().first.c_str(), uncovered, others));
    // held-out diagnostic: fit on even-indexed configurations, count odd-indexed excesses
    double c_even = 0.0;
    std::size_t held = 0, excess = 0;
    for (std::size_t k = 0; k < all.size(); ++k) {
        if (k % 2 == 0) c_even = std::max(c_even, all[k]);
    }
    for (std::size_t k = 1; k < all.size(); k += 2, ++held)
        if (all[k] > c_even) ++excess;
    o.note(strf("held-out: C fitted on half = %.5f, exceeded by %zu of %zu others (largest excess factor %.3f)", c_even,
                excess, held, C / c_even));
    o.summary = strf("C = %.4f, %zu violations, %zu uncovered by the N = 16 fit (%.0fs)", C, violations, uncovered,
                     seconds_since(t0));
    return o;
}

Outcome transport(const Context&) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = RieszParams::make(1, 0.0);
    const auto eq = solve_equilibrium(Potential::quadratic(1.0), Grid::line(-4, 4, 2048), p);
    const auto phi = TestFunction::bump(0.0, 0.2);
    const auto f = solve_transport_1d(phi, eq);
    const auto r = master_residual(f, phi, eq);
    o.require(r.sup < 1e-2 * r.phi_sup,
              strf("sup |psi zeta' - h^{div(psi mu)} + phi - c| = %.2e (c = %.4f) < 1e-2 |phi|_inf", r.sup, r.constant));
    o.note(strf("raw residual without the constant %.3e; offset of the extension %.4f", r.sup_raw, f.offset));
    const auto d = decay_and_continuity_check(f, phi, eq);
    o.require(d.jump < 0.05, strf("boundary continuity: jump left %.4f right %.4f", f.left.relative_jump,
                                  f.right.relative_jump));
    const double want = p.s + 2.0;
    o.require(std::abs(d.tail.exponent - want) < 0.3,
              strf("exterior tail exponent %.3f vs s + 2 = %.1f (fit over r in [%.2f, %.2f], %zu points)", d.tail.exponent,
                   want, d.tail.r_lo, d.tail.r_hi, d.tail.points));
    o.note(strf("zeta' grows like r^%.3f over the same window; |offset| / sup |phi^Sigma - phi| = %.3f",
                -d.zeta_slope.exponent, d.offset_ratio));
    o.note("outside Sigma psi = (phi^Sigma - phi - offset) / zeta'; the constant offset that makes the right-hand");
    o.note("side mean-zero dominates, so psi decays like 1 / zeta' rather than like the extension itself");
    for (const auto& n : d.notes) o.note(n);
    const double dt = seconds_since(t0);
    o.require(dt < 120.0, strf("runtime %.1fs < 120s", dt));
    o.summary = strf("residual %.1e, jump %.3f, tail exponent %.2f (want %.1f +- 0.3)", r.sup / r.phi_sup, d.jump,
                     d.tail.exponent, want);
    return o;
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome(const Context&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rieszlab acceptance runs"};
    std::vector<int> only;
    std::string cache;
    app.add_option("-c,--criterion", only, "criteria to run (default: all)")->check(CLI::Range(1, 13));
    app.add_option("--cache", cache, "directory for the flagship ensemble");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> all{
        {1, "constants", constants},
        {2, "fractional Laplacian", fractional_laplacian},
        {3, "Sobolev seminorms", seminorms},
        {4, "equilibrium measure", equilibrium},
        {5, "splitting identity", splitting},
        {6, "electric formulation", electric},
        {7, "sampler exactness", sampler_exactness},
        {8, "mean-field convergence", mean_field},
        {9, "local laws", local_laws},
        {10, "CLT (flagship)", clt},
        {11, "fluctuation bound", laplace},
        {12, "commutator inequality", commutator},
        {13, "transport", transport},
    };
    Context ctx;
    ctx.cache = cache;
    int failed = 0;
    for (const auto& c : all) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        Outcome o;
        try {
            o = c.run(ctx);
        } catch (const std::exception& e) {
            o.pass = false;
            o.summary = std::string("threw: ") + e.what();
        }
        std::printf("%s %2d %-24s %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.summary.c_str());
        for (const auto& d : o.details) std::printf("        %s\n", d.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    return std::min(failed, 100);
}
