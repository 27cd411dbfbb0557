#include "rieszapp/commands.hpp"

#include "rieszapp/manifest.hpp"
#include "rieszlab/energy.hpp"
#include "rieszlab/equilibrium.hpp"
#include "rieszlab/errors.hpp"
#include "rieszlab/io.hpp"
#include "rieszlab/sampler.hpp"
#include "rieszlab/statistics.hpp"
#include "rieszlab/transport.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <sstream>

namespace rieszapp {

using nlohmann::json;

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

// NaN and infinities are not valid JSON numbers
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

riesz::RieszParams params(const RunConfig& c) { return riesz::RieszParams::make(c.model.d, c.model.s); }

riesz::Grid grid(const RunConfig& c) {
    return c.model.d == 1 ? riesz::Grid::line(c.grid.lo, c.grid.hi, c.grid.cells)
                          : riesz::Grid::square(c.grid.lo, c.grid.hi, c.grid.cells);
}

riesz::EquilibriumResult equilibrium(const RunConfig& c, const riesz::Grid& g) {
    riesz::EquilibriumOptions eo;
    eo.tol = c.grid.tol;
    return riesz::solve_equilibrium(riesz::Potential::parse(c.model.potential), g, params(c), eo);
}

riesz::GasModel gas_model(const RunConfig& c) {
    const auto p = params(c);
    if (c.model.mode == "periodic") {
        const double side = c.model.box > 0.0 ? c.model.box
                                              : std::pow(static_cast<double>(c.gas.N), 1.0 / c.model.d);
        return riesz::GasModel::periodic(p, side);
    }
    return riesz::GasModel::confined(p, riesz::Potential::parse(c.model.potential));
}

riesz::Ensemble sample(const RunConfig& c) {
    riesz::EnsembleOptions eo;
    const std::uint64_t N = c.gas.N;
    eo.chain.burn_in = c.sampler.burn_in_sweeps * N;
    eo.chain.thinning = c.sampler.thinning_sweeps * N;
    eo.chain.initial_scale = c.sampler.initial_scale;
    eo.chain.target_acceptance = c.sampler.target_acceptance;
    eo.n_chains = c.sampler.chains;
    eo.threads = c.run.threads;
    return riesz::sample_ensemble(gas_model(c), c.gas.N, c.gas.beta, c.sampler.samples, eo, c.run.seed);
}

riesz::Ensemble load_or_sample(const RunConfig& c, std::ostream& log) {
    if (!c.sampler.ensemble.empty()) {
        if (!std::filesystem::exists(c.sampler.ensemble))
            throw riesz::ValidationError("ensemble file '" + c.sampler.ensemble + "' does not exist");
        riesz::Ensemble e = riesz::read_ensemble(c.sampler.ensemble);
        if (e.d != c.model.d || e.N != c.gas.N)
            throw riesz::ValidationError("ensemble has d = " + std::to_string(e.d) + ", N = " + std::to_string(e.N) +
                                         " but the config asks for d = " + std::to_string(c.model.d) +
                                         ", N = " + std::to_string(c.gas.N));
        log << "loaded " << e.size() << " samples from " << c.sampler.ensemble << "\n";
        return e;
    }
    log << "sampling " << c.sampler.samples << " configurations per chain\n";
    return sample(c);
}

json ensemble_summary(const riesz::Ensemble& e) {
    json j;
    j["samples"] = e.size();
    j["acceptance"] = e.acceptance;
    j["proposal_scale"] = e.proposal_scale;
    j["gelman_rubin"] = num(e.gelman_rubin);
    j["max_cache_drift"] = e.max_cache_drift;
    j["warnings"] = e.warnings;
    j["model"] = e.model;
    return j;
}

json cmd_equilibrium(const RunConfig& c, RunDirectory& dir, std::ostream& log) {
    const riesz::Grid g = grid(c);
    const auto eq = equilibrium(c, g);
    log << "equilibrium: " << eq.report.iterations << " iterations, gap " << eq.report.duality_gap << "\n";
    std::ostringstream csv;
    csv << (c.model.d == 1 ? "x" : "x,y") << ",density,zeta,in_support\n";
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto pt = g.point(k);
        csv << fmt(pt[0]) << ",";
        if (c.model.d == 2) csv << fmt(pt[1]) << ",";
        csv << fmt(eq.mu.density[k]) << "," << fmt(eq.zeta.values[k]) << "," << (eq.sigma[k] ? 1 : 0) << "\n";
    }
    dir.write_text("equilibrium.csv", csv.str());
    const auto el = riesz::el_residual(eq);
    json r;
    r["c_V"] = eq.c_V;
    r["energy"] = eq.energy;
    r["iterations"] = eq.report.iterations;
    r["duality_gap"] = eq.report.duality_gap;
    r["polished"] = eq.report.polished;
    r["el_below"] = el.below;
    r["el_on_support"] = el.on_support;
    r["el_scale"] = el.scale;
    r["notes"] = eq.report.notes;
    if (c.model.d == 1) {
        try {
            const auto bf = riesz::boundary_exponent_fit(eq);
            r["density_exponent"] = bf.density_exponent;
            r["liftoff_exponent"] = bf.liftoff_exponent;
            r["support"] = {bf.density_left.boundary, bf.density_right.boundary};
        } catch (const riesz::Error& e) {
            r["boundary_fit"] = std::string("unavailable: ") + e.what();
        }
    }
    return r;
}

json cmd_sample(const RunConfig& c, RunDirectory& dir, std::ostream& log) {
    const riesz::Ensemble e = sample(c);
    for (const auto& w : e.warnings) log << "warning: " << w << "\n";
    riesz::write_ensemble((dir.path() / "ensemble.bin").string(), e);
    dir.record("ensemble.bin");
    std::ostringstream csv;
    csv << "index,chain,energy\n";
    for (std::size_t k = 0; k < e.size(); ++k) csv << k << "," << e.chain[k] << "," << fmt(e.energies[k]) << "\n";
    dir.write_text("energies.csv", csv.str());
    log << "sample: " << e.size() << " configurations of N = " << e.N << " written to ensemble.bin\n";
    return ensemble_summary(e);
}

json cmd_locallaw(const RunConfig& c, RunDirectory& dir, std::ostream& log) {
    if (c.model.d != 1) throw riesz::Unsupported("locallaw needs the extended-space energy, available for d = 1");
    const riesz::Ensemble e = load_or_sample(c, log);
    const auto eq = equilibrium(c, grid(c));
    riesz::ElectricOptions eo;
    eo.grading = c.locallaw.grading;
    eo.y_min_rel = c.locallaw.y_min_rel;
    const riesz::ElectricEnergy electric(eq.mu, eq.params, eo);
    riesz::LocalLawOptions lo;
    lo.window_lo = c.locallaw.window_lo;
    lo.window_hi = c.locallaw.window_hi;
    lo.threads = c.run.threads;
    lo.fit_fraction = c.locallaw.fit_fraction;
    const auto rep = riesz::local_law_report(e, eq, electric, c.locallaw.scales, lo);
    std::ostringstream csv;
    csv << "scale,cubes,skipped,energy_mean,energy_q50,energy_q90,energy_q99,energy_max,count_mean,count_max\n";
    for (const auto& row : rep.rows)
        csv << fmt(row.scale) << "," << row.cubes << "," << row.skipped << "," << fmt(row.energy_mean) << ","
            << fmt(row.energy_q50) << "," << fmt(row.energy_q90) << "," << fmt(row.energy_q99) << ","
            << fmt(row.energy_max) << "," << fmt(row.count_mean) << "," << fmt(row.count_max) << "\n";
    dir.write_text("locallaw.csv", csv.str());
    json r;
    r["energy_slope"] = num(rep.energy_slope);
    r["count_constant"] = rep.count_constant;
    r["count_violation"] = rep.count_violation;
    r["held_out"] = rep.held_out;
    r["ensemble"] = ensemble_summary(e);
    return r;
}

json cmd_clt(const RunConfig& c, RunDirectory& dir, std::ostream& log) {
    if (c.sampler.ensemble.empty())
        throw riesz::ValidationError("clt needs an ensemble: set sampler.ensemble to a file written by 'sample'");
    const riesz::Ensemble e = load_or_sample(c, log);
    const auto eq = equilibrium(c, grid(c));
    const auto phi = riesz::TestFunction::bump(c.clt.center, c.clt.ell);
    const auto mode = c.clt.mode == "macroscopic" ? riesz::CltMode::macroscopic : riesz::CltMode::mesoscopic;
    const auto pred = riesz::predicted_clt(phi, eq, e.beta, e.N, mode);
    const auto values = riesz::rescaled_fluctuations(e, phi, eq.mu, eq.params);
    const auto rep = riesz::clt_report(values, e.chain, pred, c.clt.min_ess);
    std::vector<double> raw;
    raw.reserve(e.size());
    for (const auto& X : e.samples) raw.push_back(riesz::fluctuation(X, phi, eq.mu));
    const auto lap = riesz::laplace_estimate(raw, c.clt.taus, e.beta, c.clt.ell, e.N, eq.params);
    std::ostringstream csv;
    csv << "index,chain,fluctuation,rescaled\n";
    for (std::size_t k = 0; k < e.size(); ++k)
        csv << k << "," << e.chain[k] << "," << fmt(raw[k]) << "," << fmt(values[k]) << "\n";
    dir.write_text("fluctuations.csv", csv.str());
    json r;
    r["mean"] = rep.mean;
    r["mean_stderr"] = rep.mean_stderr;
    r["variance"] = rep.variance;
    r["variance_stderr"] = rep.variance_stderr;
    r["predicted_variance"] = rep.predicted_variance;
    r["predicted_mean"] = rep.predicted_mean;
    r["skewness"] = rep.skewness;
    r["excess_kurtosis"] = rep.excess_kurtosis;
    r["effective_samples"] = rep.effective_samples;
    r["ks_distance"] = rep.ks_distance;
    r["non_binding"] = rep.non_binding;
    r["prediction_notes"] = pred.notes;
    json pts = json::array();
    for (const auto& p : lap.points)
        pts.push_back({{"tau", p.tau},
                       {"log_mean", p.log_mean},
                       {"constant", p.constant},
                       {"unreliable", p.unreliable}});
    r["laplace"] = pts;
    r["laplace_spread"] = lap.spread();
    return r;
}

json cmd_transport(const RunConfig& c, RunDirectory& dir, std::ostream& log) {
    if (c.model.d != 1) throw riesz::Unsupported("transport is implemented for d = 1 only");
    const riesz::Grid g = riesz::Grid::line(c.transport.lo, c.transport.hi, c.transport.cells);
    const auto eq = equilibrium(c, g);
    const auto phi = riesz::TestFunction::bump(c.transport.center, c.transport.ell);
    const auto f = riesz::solve_transport_1d(phi, eq);
    const auto res = riesz::master_residual(f, phi, eq);
    log << "transport: residual " << res.sup << " (modulo a constant)\n";
    std::ostringstream csv;
    csv << "x,psi,region\n";
    for (std::size_t k = 0; k < g.size(); ++k)
        csv << fmt(g.x(k)) << "," << fmt(f.psi[k]) << ","
            << (f.region[k] == riesz::TransportRegion::inside ? "inside" : "outside") << "\n";
    dir.write_text("transport.csv", csv.str());
    json fit;
    fit["residual"] = res.sup;
    fit["residual_raw"] = res.sup_raw;
    fit["residual_constant"] = res.constant;
    fit["residual_at"] = g.x(res.where);
    fit["phi_sup"] = res.phi_sup;
    fit["offset"] = f.offset;
    fit["mass_defect"] = f.mass_defect;
    fit["boundary"] = {{{"x", f.left.boundary}, {"inside", f.left.inside}, {"outside", f.left.outside},
                        {"jump", f.left.relative_jump}},
                       {{"x", f.right.boundary}, {"inside", f.right.inside}, {"outside", f.right.outside},
                        {"jump", f.right.relative_jump}}};
    try {
        const auto d = riesz::decay_and_continuity_check(f, phi, eq);
        fit["inner_bound_ratio"] = d.inner_bound_ratio;
        fit["tail_exponent"] = d.tail.exponent;
        fit["tail_window"] = {d.tail.r_lo, d.tail.r_hi};
        fit["zeta_slope_exponent"] = d.zeta_slope.exponent;
        fit["offset_ratio"] = d.offset_ratio;
        if (d.middle_valid) fit["middle_exponent"] = d.middle.exponent;
        fit["notes"] = d.notes;
    } catch (const riesz::ValidationError& e) {
        fit["decay"] = std::string("refused: ") + e.what();
    }
    dir.write_text("transport_fit.json", fit.dump(2) + "\n");
    return fit;
}

json cmd_selftest(RunDirectory& dir, std::ostream& log, bool& ok) {
    const auto cases = run_selftest();
    std::ostringstream csv;
    csv << "case,passed,detail\n";
    ok = true;
    json r = json::array();
    for (const auto& t : cases) {
        log << (t.passed ? "PASS " : "FAIL ") << t.name << (t.detail.empty() ? "" : "  (" + t.detail + ")") << "\n";
        csv << "\"" << t.name << "\"," << (t.passed ? 1 : 0) << ",\"" << t.detail << "\"\n";
        r.push_back({{"case", t.name}, {"passed", t.passed}});
        ok = ok && t.passed;
    }
    dir.write_text("selftest.csv", csv.str());
    return r;
}

}  // namespace

int run(const std::string& subcommand, const RunConfig& config, std::ostream& log, std::ostream& err) {
    bool known = false;
    for (const auto& s : subcommands()) known = known || s == subcommand;
    if (!known) {
        err << "unknown subcommand '" << subcommand << "'\n";
        return exit_usage;
    }
    RunConfig c = config;
    if (c.run.deterministic) c.run.threads = 1;
    if (subcommand != "selftest") {
        const auto violations = validate_config(c);
        if (!violations.empty()) {
            for (const auto& v : violations) err << "config: " << v << "\n";
            return exit_validation;
        }
    }
    const auto t0 = std::chrono::steady_clock::now();
    try {
        RunDirectory dir(c.run.out);
        json results;
        bool ok = true;
        if (subcommand == "equilibrium") results = cmd_equilibrium(c, dir, log);
        else if (subcommand == "sample") results = cmd_sample(c, dir, log);
        else if (subcommand == "locallaw") results = cmd_locallaw(c, dir, log);
        else if (subcommand == "clt") results = cmd_clt(c, dir, log);
        else if (subcommand == "transport") results = cmd_transport(c, dir, log);
        else results = cmd_selftest(dir, log, ok);
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        dir.write_manifest(subcommand, to_json(c), results, c.run.deterministic, elapsed);
        return ok ? exit_ok : exit_failure;
    } catch (const riesz::ConvergenceError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const riesz::ResolutionError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const riesz::InternalError& e) {
        err << "internal error: " << e.what() << "\n";
        return exit_failure;
    } catch (const riesz::Error& e) {
        // validation, domain, range and unsupported-feature errors
        err << "error: " << e.what() << "\n";
        return exit_validation;
    } catch (const std::exception& e) {
        err << "unexpected error: " << e.what() << "\n";
        return exit_failure;
    }
}

}  // namespace rieszapp
