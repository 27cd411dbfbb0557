#include "rieszlab/statistics.hpp"

#include "rieszlab/errors.hpp"
#include "rieszlab/quadrature.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace riesz {

std::array<double, 6> bump_jet(double u) {
    std::array<double, 6> f{};
    if (!(std::abs(u) < 1.0)) return f;
    // derivatives of w = 1 - 1/(1 - u^2) = 1 - (1/(1-u) + 1/(1+u)) / 2
    std::array<double, 6> w{};
    w[0] = 1.0 - 1.0 / (1.0 - u * u);
    double fact = 1.0;
    for (int k = 1; k <= 5; ++k) {
        fact *= k;
        const double a = fact / std::pow(1.0 - u, k + 1);
        const double b = (k % 2 ? -1.0 : 1.0) * fact / std::pow(1.0 + u, k + 1);
        w[k] = -0.5 * (a + b);
    }
    // (e^w)^{(n)} = sum_k C(n-1, k) w^{(k+1)} (e^w)^{(n-1-k)}
    f[0] = std::exp(w[0]);
    for (int n = 1; n <= 5; ++n) {
        double acc = 0.0, binom = 1.0;
        for (int k = 0; k <= n - 1; ++k) {
            acc += binom * w[k + 1] * f[n - 1 - k];
            binom = binom * (n - 1 - k) / (k + 1);
        }
        f[n] = acc;
    }
    return f;
}

const std::array<double, 6>& TestFunction::derivative_bounds() {
    static const std::array<double, 6> M = [] {
        std::array<double, 6> m{};
        const int n = 200000;
        for (int i = 1; i < n; ++i) {
            const auto j = bump_jet(-1.0 + 2.0 * i / n);
            for (int k = 0; k < 6; ++k) m[k] = std::max(m[k], std::abs(j[k]));
        }
        return m;
    }();
    return M;
}

TestFunction TestFunction::bump(double z, double ell, double amplitude) {
    if (!(ell > 0.0)) throw ValidationError("test function scale must be positive");
    TestFunction t;
    t.center = {z, 0.0};
    t.ell = ell;
    t.amplitude = amplitude;
    return t;
}

double TestFunction::value(std::array<double, 2> x, int d) const {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += (x[a] - center[a]) * (x[a] - center[a]);
    const double u2 = r2 / (ell * ell);
    if (u2 >= 1.0) return 0.0;
    return amplitude * std::exp(1.0 - 1.0 / (1.0 - u2));
}

double TestFunction::derivative(double x, int k) const {
    if (k < 0 || k > 5) throw ValidationError("derivative order must be 0..5");
    return amplitude * bump_jet((x - center[0]) / ell)[k] * std::pow(ell, -k);
}

SampledFunction TestFunction::sample(const Grid& g) const {
    return SampledFunction::from(g, [&](double x, double y) { return value({x, y}, g.d); });
}

double integrate_against(const TestFunction& phi, const GridMeasure& mu) {
    const Grid& g = mu.grid;
    const GaussRule& r = gauss_legendre(6);
    CompensatedSum acc;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (mu.density[k] == 0.0) continue;
        const auto c = g.point(k);
        double v = 0.0;
        if (g.d == 1) {
            for (std::size_t a = 0; a < r.x.size(); ++a) v += 0.5 * r.w[a] * phi.value(c[0] + 0.5 * g.h * r.x[a]);
        } else {
            for (std::size_t a = 0; a < r.x.size(); ++a)
                for (std::size_t b = 0; b < r.x.size(); ++b)
                    v += 0.25 * r.w[a] * r.w[b] * phi.value({c[0] + 0.5 * g.h * r.x[a], c[1] + 0.5 * g.h * r.x[b]}, 2);
        }
        acc.add(mu.density[k] * g.cell_volume() * v);
    }
    return acc.value();
}

double fluctuation(const Configuration& X, const TestFunction& phi, const GridMeasure& mu) {
    if (X.d != mu.grid.d) throw ValidationError("configuration and measure dimensions differ");
    CompensatedSum acc;
    for (std::size_t i = 0; i < X.size(); ++i) acc.add(phi.value(X.point(i), X.d));
    acc.add(-static_cast<double>(X.size()) * integrate_against(phi, mu));
    return acc.value();
}

CltPrediction predicted_clt(const TestFunction& phi, const EquilibriumResult& eq, double beta, std::size_t N,
                            CltMode mode, const std::optional<PressureData>& pressure) {
    const RieszParams& p = eq.params;
    if (!(beta > 0.0)) throw ValidationError("beta must be positive");
    CltPrediction out;
    const double ratio = p.c_dalpha / p.c_frac;
    if (phi.amplitude == 0.0) return out;
    if (mode == CltMode::mesoscopic) {
        // phi0 itself, ell-independent after the (N^{1/d} ell)^{s/2} normalisation
        TestFunction unit = TestFunction::bump(0.0, 1.0, phi.amplitude);
        const Grid g = p.d == 1 ? Grid::line(-4.0, 4.0, 4096) : Grid::square(-4.0, 4.0, 256);
        out.seminorm = sobolev_seminorm(unit.sample(g), p.alpha, SeminormMethod::fourier);
        out.variance = ratio * out.seminorm;
        out.mean_shift = 0.0;
        return out;
    }
    if (p.d != 1) throw Unsupported("macroscopic predictions need the alpha-harmonic extension (d = 1)");
    const SampledFunction f = phi.sample(eq.mu.grid);
    const ExtensionResult ext = alpha_harmonic_extension(f, eq.sigma, p);
    out.seminorm = sobolev_seminorm(ext.ext, p.alpha, SeminormMethod::gagliardo);
    out.variance = ratio * out.seminorm / std::pow(phi.ell, p.s);
    const Grid& g = eq.mu.grid;
    CompensatedSum logint, press;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!eq.sigma[k] || eq.mu.density[k] <= 0.0) continue;
        const double L = ext.frac_laplacian[k], m = eq.mu.density[k];
        logint.add(L * std::log(m) * g.h);
        if (p.s > 0.0 && pressure) {
            const double ms = std::pow(m, p.s / p.d);
            press.add(L * ((1.0 + p.s / p.d) * pressure->f(beta * ms) * ms + (p.s / p.d) * pressure->fprime(beta * ms) * ms * ms) * g.h);
        }
    }
    double mean = std::sqrt(2.0 / beta) / p.c_frac * (-1.0 + (p.s == 0.0 ? beta / (2.0 * p.d) : 0.0)) * logint.value();
    if (p.s > 0.0) {
        if (pressure)
            mean -= std::sqrt(2.0 * beta) / p.c_frac * press.value();
        else {
            out.mean_partial = true;
            out.notes.push_back("pressure terms omitted: no f_{d,s} data supplied");
        }
    }
    const double n = static_cast<double>(N);
    out.mean_shift = std::pow(phi.ell * std::pow(n, -1.0 / p.d), -0.5 * p.s) * mean;
    return out;
}

AutocorrelationReport effective_sample_size(const std::vector<double>& x) {
    AutocorrelationReport r;
    const std::size_t n = x.size();
    if (n < 4) {
        r.ess = static_cast<double>(n);
        return r;
    }
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    auto acov = [&](std::size_t lag) {
        double a = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) a += (x[i] - mean) * (x[i + lag] - mean);
        return a / static_cast<double>(n);
    };
    const double g0 = acov(0);
    if (g0 <= 0.0) {
        r.ess = static_cast<double>(n);
        return r;
    }
    double sum = 0.0, prev = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; 2 * m + 1 < n / 2; ++m) {
        double G = acov(2 * m) + acov(2 * m + 1);
        if (G <= 0.0) break;
        G = std::min(G, prev);  // initial monotone sequence
        prev = G;
        sum += G;
    }
    r.tau = std::max(1.0, -1.0 + 2.0 * sum / g0);
    r.ess = static_cast<double>(n) / r.tau;
    return r;
}

double ks_distance_normal(std::vector<double> v, double mean, double sd) {
    if (v.empty()) return 0.0;
    if (!(sd > 0.0)) return 1.0;
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double D = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double F = 0.5 * std::erfc(-(v[i] - mean) / (sd * std::sqrt(2.0)));
        D = std::max({D, std::abs(F - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - F)});
    }
    return D;
}

CltReport clt_report(const std::vector<double>& values, const std::vector<int>& chain, const CltPrediction& pred,
                     double min_ess) {
    CltReport r;
    r.predicted_variance = pred.variance;
    r.predicted_mean = pred.mean_shift;
    r.samples = values.size();
    if (values.size() < 2) throw ValidationError("a CLT report needs at least two samples");
    bool all_zero = std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
    if (all_zero) {
        r.effective_samples = static_cast<double>(values.size());
        return r;
    }
    // effective samples summed over chain blocks
    std::size_t start = 0;
    for (std::size_t i = 1; i <= values.size(); ++i) {
        if (i == values.size() || (!chain.empty() && chain[i] != chain[start])) {
            std::vector<double> block(values.begin() + static_cast<long>(start), values.begin() + static_cast<long>(i));
            r.effective_samples += effective_sample_size(block).ess;
            start = i;
        }
    }
    if (r.effective_samples < min_ess)
        throw ValidationError("effective sample size " + std::to_string(r.effective_samples) + " is below " +
                              std::to_string(min_ess));
    const double n = static_cast<double>(values.size());
    CompensatedSum s1;
    for (double v : values) s1.add(v);
    r.mean = s1.value() / n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : values) {
        const double d = v - r.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    r.variance = m2 * n / (n - 1.0);
    r.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
    r.excess_kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
    r.mean_stderr = std::sqrt(r.variance / r.effective_samples);
    r.variance_stderr = r.variance * std::sqrt(std::max(0.0, 2.0 + r.excess_kurtosis) / r.effective_samples);
    r.ks_distance = ks_distance_normal(values, r.mean, std::sqrt(r.variance));
    return r;
}

std::vector<double> rescaled_fluctuations(const Ensemble& e, const TestFunction& phi, const GridMeasure& mu,
                                          const RieszParams& p) {
    const double N = static_cast<double>(e.N);
    const double norm = std::sqrt(2.0 * e.beta) / std::pow(std::pow(N, 1.0 / p.d) * phi.ell, 0.5 * p.s);
    const double mass = N * integrate_against(phi, mu);
    std::vector<double> out;
    out.reserve(e.size());
    for (const auto& X : e.samples) {
        CompensatedSum acc;
        for (std::size_t i = 0; i < X.size(); ++i) acc.add(phi.value(X.point(i), X.d));
        acc.add(-mass);
        out.push_back(norm * acc.value());
    }
    return out;
}

CltReport clt_report(const Ensemble& e, const TestFunction& phi, const EquilibriumResult& eq, double beta,
                     const CltPrediction& pred, double min_ess) {
    if (std::abs(e.beta - beta) > 1e-12 * std::max(1.0, beta)) throw ValidationError("ensemble beta differs");
    CltReport r = clt_report(rescaled_fluctuations(e, phi, eq.mu, eq.params), e.chain, pred, min_ess);
    // the d = 1 guarantee covers s up to about 0.0397 only
    r.non_binding = eq.params.s > 0.03973;
    return r;
}

LaplaceReport laplace_estimate(const std::vector<double>& fluct, const std::vector<double>& taus, double beta,
                               double ell, std::size_t N, const RieszParams& p) {
    if (fluct.empty()) throw ValidationError("laplace_estimate needs samples");
    LaplaceReport rep;
    const double scale = std::pow(ell * std::pow(static_cast<double>(N), 1.0 / p.d), p.s);
    const double k = beta / (1.0 + beta);
    bool first = true;
    for (double tau : taus) {
        LaplacePoint pt;
        pt.tau = tau;
        if (tau != 0.0) {
            double mx = -std::numeric_limits<double>::infinity();
            for (double f : fluct) mx = std::max(mx, tau * k * f);
            CompensatedSum acc;
            double big = 0.0;
            for (double f : fluct) {
                const double w = std::exp(tau * k * f - mx);
                acc.add(w);
                big = std::max(big, w);
            }
            pt.log_mean = mx + std::log(acc.value() / static_cast<double>(fluct.size()));
            pt.max_weight = big / acc.value();
            pt.unreliable = pt.max_weight > 0.5;
            pt.constant = std::abs(pt.log_mean) / ((std::abs(tau) + tau * tau) * scale);
            if (first) {
                rep.constant_min = rep.constant_max = pt.constant;
                first = false;
            } else {
                rep.constant_min = std::min(rep.constant_min, pt.constant);
                rep.constant_max = std::max(rep.constant_max, pt.constant);
            }
        }
        rep.points.push_back(pt);
    }
    return rep;
}

double discrepancy(const Configuration& X, const GridMeasure& mu, std::array<double, 2> c, double R) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < X.size(); ++i)
        if (distance(X.point(i), c, X.d) <= R) ++count;
    return static_cast<double>(count) - static_cast<double>(X.size()) * mu.ball_mass(c, R);
}

double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw ValidationError("quantile of an empty sample");
    std::sort(v.begin(), v.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

namespace {

std::pair<double, double> support_interval(const EquilibriumResult& eq) {
    const Grid& g = eq.mu.grid;
    double a = std::numeric_limits<double>::infinity(), b = -a;
    for (std::size_t k = 0; k < g.n[0]; ++k)
        if (eq.sigma[k]) {
            a = std::min(a, g.x(k) - 0.5 * g.h);
            b = std::max(b, g.x(k) + 0.5 * g.h);
        }
    if (!(b > a)) throw ValidationError("empty support");
    return {a, b};
}

}  // namespace

LocalLawReport local_law_report(const Ensemble& e, const EquilibriumResult& eq, const ElectricEnergy& electric,
                                const std::vector<double>& scales, const LocalLawOptions& opt) {
    const RieszParams& p = eq.params;
    if (p.d != 1) throw Unsupported("local law reports use the 1-D electric energy");
    if (scales.empty()) throw ValidationError("at least one scale is required");
    if (e.size() < 2) throw ValidationError("local law report needs at least two samples");
    const double N = static_cast<double>(e.N);
    const double floor_scale = 4.0 / N;
    const auto [a, b] = support_interval(eq);
    const double bulk_lo = a + opt.bulk_margin, bulk_hi = b - opt.bulk_margin;
    const double lo = opt.window_lo.value_or(bulk_lo), hi = opt.window_hi.value_or(bulk_hi);
    if (!(hi > lo)) throw ValidationError("local law window is empty");

    struct ScaleBoxes {
        double ell;
        std::vector<Box> boxes;
        std::size_t skipped = 0;
    };
    std::vector<ScaleBoxes> plan;
    for (double ell : scales) {
        if (ell < floor_scale * (1.0 - 1e-12))
            throw ValidationError("scale below the 4 N^{-1/d} floor");
        ScaleBoxes sb{ell, {}, 0};
        const auto m = static_cast<std::size_t>(std::floor((hi - lo) / ell + 1e-9));
        const double start = 0.5 * (lo + hi) - 0.5 * static_cast<double>(m) * ell;
        for (std::size_t k = 0; k < m; ++k) {
            Box bx;
            bx.center = {start + (static_cast<double>(k) + 0.5) * ell, 0.0};
            bx.side = ell;
            if (bx.lo() < bulk_lo - 1e-12 || bx.hi() > bulk_hi + 1e-12)
                ++sb.skipped;
            else
                sb.boxes.push_back(bx);
        }
        if (sb.boxes.empty()) throw ValidationError("no bulk cube fits at scale " + std::to_string(ell));
        plan.push_back(std::move(sb));
    }

    // energies[sample][scale][box], counts likewise
    const std::size_t S = e.size();
    std::vector<std::vector<std::vector<double>>> energy(S), count(S);
    detail::parallel_for(S, opt.threads, [&](std::size_t i) {
        const Configuration& X = e.samples[i];
        energy[i].resize(plan.size());
        count[i].resize(plan.size());
        for (std::size_t k = 0; k < plan.size(); ++k)
            for (const Box& bx : plan[k].boxes) {
                const LocalEnergyReport r = electric.local(X, bx);
                energy[i][k].push_back(r.value);
                count[i][k].push_back(static_cast<double>(r.point_count));
            }
    });

    LocalLawReport rep;
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < plan.size(); ++k) {
        LocalLawRow row;
        row.scale = plan[k].ell;
        row.cubes = plan[k].boxes.size();
        row.skipped = plan[k].skipped;
        std::vector<double> ev, cv;
        for (std::size_t i = 0; i < S; ++i) {
            ev.insert(ev.end(), energy[i][k].begin(), energy[i][k].end());
            cv.insert(cv.end(), count[i][k].begin(), count[i][k].end());
        }
        row.energy_mean = std::accumulate(ev.begin(), ev.end(), 0.0) / static_cast<double>(ev.size());
        row.energy_q50 = quantile(ev, 0.5);
        row.energy_q90 = quantile(ev, 0.9);
        row.energy_q99 = quantile(ev, 0.99);
        row.energy_max = *std::max_element(ev.begin(), ev.end());
        row.count_mean = std::accumulate(cv.begin(), cv.end(), 0.0) / static_cast<double>(cv.size());
        row.count_max = *std::max_element(cv.begin(), cv.end());
        rep.rows.push_back(row);
        if (row.energy_mean > 0.0) {
            lx.push_back(std::log(row.scale));
            ly.push_back(std::log(row.energy_mean));
        }
    }
    rep.energy_slope = lx.size() >= 2 ? fit_line(lx, ly).slope : std::numeric_limits<double>::quiet_NaN();

    const auto n_fit = std::clamp<std::size_t>(static_cast<std::size_t>(opt.fit_fraction * static_cast<double>(S)), 1, S - 1);
    for (std::size_t i = 0; i < n_fit; ++i)
        for (std::size_t k = 0; k < plan.size(); ++k)
            for (double c : count[i][k]) rep.count_constant = std::max(rep.count_constant, c / (std::pow(plan[k].ell, p.d) * N));
    std::size_t bad = 0;
    for (std::size_t i = n_fit; i < S; ++i)
        for (std::size_t k = 0; k < plan.size(); ++k)
            for (double c : count[i][k]) {
                ++rep.held_out;
                if (c > rep.count_constant * std::pow(plan[k].ell, p.d) * N) ++bad;
            }
    rep.count_violation = rep.held_out ? static_cast<double>(bad) / static_cast<double>(rep.held_out) : 0.0;
    return rep;
}

MinDistanceReport min_distance_report(const Ensemble& e, const RieszParams& p, const std::vector<Box>& boxes) {
    MinDistanceReport rep;
    const double N = static_cast<double>(e.N);
    std::vector<std::vector<double>> sums(boxes.size());
    std::vector<bool> flagged(boxes.size(), false);
    // near-coincident: r_i six orders below the lattice value N^{-1/d} / 4
    const double coincident = 0.25e-6 * std::pow(N, -1.0 / p.d);
    for (const auto& X : e.samples) {
        const auto r = minimal_distances(X, p);
        for (std::size_t b = 0; b < boxes.size(); ++b) {
            CompensatedSum acc;
            for (std::size_t i = 0; i < X.size(); ++i) {
                if (!boxes[b].contains(X.point(i), X.d)) continue;
                if (r[i] < coincident) flagged[b] = true;
                const double arg = p.s == 0.0 ? 40.0 * r[i] * std::pow(N, 1.0 / p.d) : r[i];
                acc.add(arg > 0.0 ? riesz_g(arg, p.s) : std::numeric_limits<double>::infinity());
            }
            sums[b].push_back(acc.value());
        }
    }
    std::vector<double> lx, ly;
    for (std::size_t b = 0; b < boxes.size(); ++b) {
        MinDistanceRow row;
        row.box = boxes[b];
        row.flagged = flagged[b];
        if (!sums[b].empty()) {
            row.mean = std::accumulate(sums[b].begin(), sums[b].end(), 0.0) / static_cast<double>(sums[b].size());
            row.max = *std::max_element(sums[b].begin(), sums[b].end());
        }
        if (row.mean > 0.0 && std::isfinite(row.mean)) {
            lx.push_back(std::log(row.box.side));
            ly.push_back(std::log(row.mean));
        }
        rep.rows.push_back(row);
    }
    bool distinct = false;
    for (double v : lx)
        if (v != lx.front()) distinct = true;
    rep.slope = distinct ? fit_line(lx, ly).slope : std::numeric_limits<double>::quiet_NaN();
    return rep;
}

}  // namespace riesz
