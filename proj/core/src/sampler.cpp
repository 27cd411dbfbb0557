#include "rieszlab/sampler.hpp"

#include "rieszlab/errors.hpp"
#include "rieszlab/quadrature.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace riesz {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

CounterRng::result_type CounterRng::operator()() { return mix64(key_ + kGolden * ++counter_); }

double CounterRng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double CounterRng::normal() {
    double u1 = uniform();
    const double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::uint64_t CounterRng::below(std::uint64_t n) {
    if (n == 0) throw ValidationError("below(0)");
    const std::uint64_t limit = max() - max() % n;  // reject the biased top
    std::uint64_t x = 0;
    do {
        x = (*this)();
    } while (x >= limit);
    return x % n;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index) {
    std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a over the label
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return mix64(mix64(master ^ h) + kGolden * (index + 1));
}

GasModel GasModel::confined(const RieszParams& p, Potential V) {
    GasModel m;
    m.mode = Mode::confined;
    m.params = p;
    m.V = std::move(V);
    return m;
}

GasModel GasModel::periodic(const RieszParams& p, double side) {
    if (!(side > 0.0)) throw ValidationError("periodic box side must be positive");
    GasModel m;
    m.mode = Mode::periodic;
    m.params = p;
    m.box = side;
    return m;
}

double GasModel::pair(std::array<double, 2> a, std::array<double, 2> b) const {
    const int d = params.d;
    if (mode == Mode::confined) return riesz_g(distance(a, b, d), params.s);
    double r2 = 0.0;
    for (int k = 0; k < d; ++k) {
        double t = a[k] - b[k];
        t -= box * std::round(t / box);
        r2 += t * t;
    }
    const double r = std::sqrt(r2), R = 0.5 * box;
    return r >= R ? 0.0 : riesz_g(r, params.s) - riesz_g(R, params.s);
}

double GasModel::one_body(std::array<double, 2> x, std::size_t N) const {
    return mode == Mode::confined ? static_cast<double>(N) * V.value(x, params.d) : 0.0;
}

double GasModel::energy(const Configuration& X) const {
    CompensatedSum acc;
    const std::size_t n = X.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto xi = X.point(i);
        for (std::size_t j = i + 1; j < n; ++j) acc.add(pair(xi, X.point(j)));
        acc.add(one_body(xi, n));
    }
    return acc.value();
}

double GasModel::temperature_scale(std::size_t N) const {
    if (mode == Mode::periodic) return 1.0;
    return std::pow(static_cast<double>(N), -params.s / params.d);
}

std::string GasModel::describe() const {
    std::ostringstream os;
    os << (mode == Mode::confined ? "confined" : "periodic") << " d=" << params.d << " s=" << params.s;
    if (mode == Mode::confined)
        os << " V=" << V.describe();
    else
        os << " box=" << box;
    return os.str();
}

ChainState ChainState::make(const GasModel& model, Configuration X, double beta, std::uint64_t seed,
                            double proposal_scale) {
    if (X.d != model.params.d) throw ValidationError("configuration dimension differs from the model");
    if (!(proposal_scale > 0.0)) throw ValidationError("proposal scale must be positive");
    ChainState st;
    st.config = std::move(X);
    st.rng = CounterRng(seed);
    st.stats.scale = proposal_scale;
    st.refresh(model, beta);
    return st;
}

double ChainState::refresh(const GasModel& model, double beta) {
    const std::size_t n = config.size();
    std::vector<double> sums(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        CompensatedSum acc;
        const auto xi = config.point(i);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) acc.add(model.pair(xi, config.point(j)));
        sums[i] = acc.value();
    }
    const double H = model.energy(config);
    const double drift = pair_sums.empty() ? 0.0 : std::abs(H - energy);
    pair_sums = std::move(sums);
    energy = H;
    log_density = -beta * model.temperature_scale(n) * H;
    return drift;
}

bool metropolis_step(ChainState& st, const GasModel& model, double beta) {
    const std::size_t n = st.config.size();
    const int d = st.config.d;
    if (!(st.stats.scale > 0.0)) throw ValidationError("proposal scale must be positive");
    const std::size_t i = static_cast<std::size_t>(st.rng.below(n));
    const auto old = st.config.point(i);
    auto prop = old;
    for (int k = 0; k < d; ++k) prop[k] += st.stats.scale * st.rng.normal();
    if (model.mode == GasModel::Mode::periodic)
        for (int k = 0; k < d; ++k) prop[k] -= model.box * std::floor(prop[k] / model.box);
    const double u = st.rng.uniform();
    ++st.stats.proposals;

    static thread_local std::vector<double> delta;
    delta.assign(n, 0.0);
    double dpair = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const auto xj = st.config.point(j);
        if (model.mode == GasModel::Mode::confined && distance(prop, xj, d) < 1e-14) return false;
        const double v = model.pair(prop, xj) - model.pair(old, xj);
        delta[j] = v;
        dpair += v;
    }
    const double dH = dpair + model.one_body(prop, n) - model.one_body(old, n);
    const double dlog = -beta * model.temperature_scale(n) * dH;
    if (!(std::log(u) < dlog)) return false;

    st.config.set_point(i, prop);
    for (std::size_t j = 0; j < n; ++j)
        if (j != i) st.pair_sums[j] += delta[j];
    st.pair_sums[i] += dpair;
    st.energy += dH;
    st.log_density += dlog;
    ++st.stats.acceptances;
    return true;
}

Configuration initial_configuration(const GasModel& model, std::size_t N) {
    const int d = model.params.d;
    Configuration X;
    X.d = d;
    X.coords.assign(N * static_cast<std::size_t>(d), 0.0);
    const double n = static_cast<double>(N);
    for (std::size_t i = 0; i < N; ++i) {
        const double t = (static_cast<double>(i) + 0.5) / n;
        if (model.mode == GasModel::Mode::periodic) {
            if (d == 1) {
                X.coords[i] = t * model.box;
            } else {
                const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(n)));
                X.coords[2 * i] = (static_cast<double>(i % side) + 0.5) * model.box / static_cast<double>(side);
                X.coords[2 * i + 1] = (static_cast<double>(i / side) + 0.5) * model.box / static_cast<double>(side);
            }
        } else if (d == 1) {
            X.coords[i] = 2.0 * t - 1.0;
        } else {
            // sunflower spiral in the unit disk
            const double r = std::sqrt(t), th = static_cast<double>(i) * M_PI * (3.0 - std::sqrt(5.0));
            X.coords[2 * i] = r * std::cos(th);
            X.coords[2 * i + 1] = r * std::sin(th);
        }
    }
    return X;
}

namespace {

double default_scale(const GasModel& model, std::size_t N) {
    if (model.mode == GasModel::Mode::periodic) return 0.5 * model.box / std::pow(static_cast<double>(N), 1.0 / model.params.d);
    return 0.5 * std::pow(static_cast<double>(N), -1.0 / model.params.d);
}

}  // namespace

Ensemble run_chain(const GasModel& model, const Configuration& initial, double beta, const ChainOptions& opt,
                   std::uint64_t seed) {
    if (!(beta >= 0.0)) throw ValidationError("beta must be non-negative");
    if (opt.steps <= opt.burn_in) throw ValidationError("run_chain needs steps > burn_in");
    if (opt.thinning < 1) throw ValidationError("thinning must be at least 1");
    const std::size_t N = initial.size();
    if (N == 0) throw ValidationError("empty initial configuration");
    const double scale0 = opt.initial_scale > 0.0 ? opt.initial_scale : default_scale(model, N);
    ChainState st = ChainState::make(model, initial, beta, seed, scale0);

    Ensemble e;
    e.d = initial.d;
    e.N = N;
    e.beta = beta;
    e.model = model.describe();
    e.seed = seed;
    e.burn_in = opt.burn_in;
    e.thinning = opt.thinning;

    const std::uint64_t window = 200;
    std::uint64_t win_acc = 0, win_n = 0;
    const double max_scale = model.mode == GasModel::Mode::periodic ? 0.5 * model.box : 10.0;
    for (std::uint64_t step = 1; step <= opt.steps; ++step) {
        const bool acc = metropolis_step(st, model, beta);
        if (step <= opt.burn_in) {
            win_acc += acc;
            if (++win_n == window) {
                const double rate = static_cast<double>(win_acc) / static_cast<double>(window);
                st.stats.scale = std::clamp(st.stats.scale * std::exp(2.0 * (rate - opt.target_acceptance)), 1e-8, max_scale);
                win_acc = win_n = 0;
            }
            if (step == opt.burn_in) st.stats = ChainStats{0, 0, st.stats.scale};
        }
        if (opt.check_every > 0 && step % opt.check_every == 0) {
            const double drift = st.refresh(model, beta);
            e.max_cache_drift = std::max(e.max_cache_drift, drift);
            if (drift > 1e-8 * std::max(1.0, std::abs(st.energy)))
                throw InternalError("cached energy drifted from the recomputed value by " + std::to_string(drift));
        }
        if (step > opt.burn_in && (step - opt.burn_in) % opt.thinning == 0) {
            e.samples.push_back(st.config);
            e.energies.push_back(st.energy);
            e.chain.push_back(0);
        }
    }
    e.acceptance.push_back(st.stats.acceptance_rate());
    e.proposal_scale.push_back(st.stats.scale);
    return e;
}

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
    const std::size_t m = chains.size();
    if (m < 2) return std::numeric_limits<double>::quiet_NaN();
    std::size_t n = chains[0].size();
    for (const auto& c : chains) n = std::min(n, c.size());
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    std::vector<double> means(m), vars(m);
    for (std::size_t c = 0; c < m; ++c) {
        double mean = 0.0;
        for (std::size_t k = 0; k < n; ++k) mean += chains[c][k];
        mean /= static_cast<double>(n);
        double v = 0.0;
        for (std::size_t k = 0; k < n; ++k) v += (chains[c][k] - mean) * (chains[c][k] - mean);
        means[c] = mean;
        vars[c] = v / static_cast<double>(n - 1);
    }
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(m);
    double B = 0.0;
    for (double mu : means) B += (mu - grand) * (mu - grand);
    B *= static_cast<double>(n) / static_cast<double>(m - 1);
    const double W = std::accumulate(vars.begin(), vars.end(), 0.0) / static_cast<double>(m);
    if (W == 0.0) return B == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    const double nn = static_cast<double>(n);
    return std::sqrt(((nn - 1.0) / nn * W + B / nn) / W);
}

Ensemble sample_ensemble(const GasModel& model, std::size_t N, double beta, std::size_t n_samples,
                         const EnsembleOptions& opt, std::uint64_t seed) {
    if (opt.n_chains < 1) throw ValidationError("n_chains must be at least 1");
    if (n_samples == 0) throw ValidationError("n_samples must be positive");
    ChainOptions co = opt.chain;
    if (co.thinning < 1) co.thinning = 1;
    co.steps = co.burn_in + co.thinning * n_samples;
    const auto chains = static_cast<std::size_t>(opt.n_chains);
    std::vector<Ensemble> parts(chains);
    const Configuration init = initial_configuration(model, N);
    detail::parallel_for(chains, opt.threads,
                 [&](std::size_t c) { parts[c] = run_chain(model, init, beta, co, derive_seed(seed, "chain", c)); });

    Ensemble e;
    e.d = model.params.d;
    e.N = N;
    e.beta = beta;
    e.model = model.describe();
    e.seed = seed;
    e.burn_in = co.burn_in;
    e.thinning = co.thinning;
    e.chains = opt.n_chains;
    std::vector<std::vector<double>> traces;
    for (std::size_t c = 0; c < chains; ++c) {
        auto& p = parts[c];
        for (std::size_t k = 0; k < p.samples.size(); ++k) {
            e.samples.push_back(std::move(p.samples[k]));
            e.energies.push_back(p.energies[k]);
            e.chain.push_back(static_cast<int>(c));
        }
        e.acceptance.push_back(p.acceptance.front());
        e.proposal_scale.push_back(p.proposal_scale.front());
        e.max_cache_drift = std::max(e.max_cache_drift, p.max_cache_drift);
        traces.push_back(std::move(p.energies));
    }
    e.gelman_rubin = gelman_rubin(traces);
    if (std::isfinite(e.gelman_rubin) && e.gelman_rubin > 1.1)
        e.warnings.push_back("chains have not mixed: potential scale reduction " + std::to_string(e.gelman_rubin));
    return e;
}

namespace {

// 1/2 N iint of the shifted periodic kernel against unit density.
double periodic_mean_field(const GasModel& m, std::size_t N) {
    const double s = m.params.s, R = 0.5 * m.box;
    double C = 0.0;
    if (m.params.d == 1) {
        C = 2.0 * (riesz_G1(R, s) - R * riesz_g(R, s));
    } else if (s == 0.0) {
        C = 0.5 * M_PI * R * R;
    } else {
        C = 2.0 * M_PI * (std::pow(R, 2.0 - s) / (s * (2.0 - s)) - 0.5 * R * R * riesz_g(R, s));
    }
    return 0.5 * static_cast<double>(N) * C;
}

}  // namespace

std::vector<FreeEnergyPoint> free_energy_curve(const GasModel& model, std::size_t N,
                                               const std::vector<double>& beta_grid,
                                               const FreeEnergyOptions& opt, std::uint64_t seed) {
    if (beta_grid.size() < 4) throw ValidationError("free_energy_curve needs at least 4 beta values");
    for (std::size_t k = 1; k < beta_grid.size(); ++k)
        if (beta_grid[k] < beta_grid[k - 1]) throw ValidationError("beta grid must be non-decreasing");
    if (opt.samples_per_beta < 2) throw ValidationError("need at least two samples per beta");
    const double shift = model.mode == GasModel::Mode::periodic
                             ? periodic_mean_field(model, N)
                             : static_cast<double>(N) * static_cast<double>(N) * opt.mean_field_energy;
    const double tscale = model.temperature_scale(N);
    std::vector<FreeEnergyPoint> out(beta_grid.size());
    detail::parallel_for(beta_grid.size(), opt.threads, [&](std::size_t k) {
        ChainOptions co;
        co.burn_in = opt.burn_in_sweeps * N;
        co.thinning = std::max<std::uint64_t>(1, opt.sweeps_between * N);
        co.steps = co.burn_in + co.thinning * opt.samples_per_beta;
        const Ensemble e =
            run_chain(model, initial_configuration(model, N), beta_grid[k], co, derive_seed(seed, "beta", k));
        // batch means over 10 batches for the standard error
        const std::size_t n = e.energies.size(), nb = std::min<std::size_t>(10, n);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = -tscale * (e.energies[i] - shift);
        const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
        double v = 0.0;
        const std::size_t bs = n / nb;
        for (std::size_t b = 0; b < nb; ++b) {
            double bm = 0.0;
            for (std::size_t i = b * bs; i < (b + 1) * bs; ++i) bm += y[i];
            bm /= static_cast<double>(bs);
            v += (bm - mean) * (bm - mean);
        }
        out[k].beta = beta_grid[k];
        out[k].dlogk = mean;
        out[k].dlogk_stderr = nb > 1 ? std::sqrt(v / static_cast<double>(nb * (nb - 1))) : 0.0;
    });
    for (std::size_t k = 1; k < out.size(); ++k)
        out[k].logk_offset = out[k - 1].logk_offset +
                             0.5 * (out[k].beta - out[k - 1].beta) * (out[k].dlogk + out[k - 1].dlogk);
    return out;
}

DiscreteChain discrete_single_particle(const Potential& V, double beta, double a, double b, std::size_t n,
                                       double sigma) {
    if (n < 2 || !(b > a) || !(sigma > 0.0)) throw ValidationError("invalid discrete chain setup");
    DiscreteChain c;
    c.step_sigma = sigma;
    const double h = (b - a) / static_cast<double>(n);
    c.states.resize(n);
    std::vector<double> logw(n);
    for (std::size_t k = 0; k < n; ++k) {
        c.states[k] = a + (static_cast<double>(k) + 0.5) * h;
        logw[k] = -beta * V.value(c.states[k]);
    }
    const double mx = *std::max_element(logw.begin(), logw.end());
    c.target.resize(n);
    CompensatedSum z;
    for (std::size_t k = 0; k < n; ++k) z.add(c.target[k] = std::exp(logw[k] - mx));
    for (double& v : c.target) v /= z.value();
    // step m = round(sigma Z / h) has probability Phi((m + 1/2) h / sigma) - Phi((m - 1/2) h / sigma)
    auto pstep = [&](long m) {
        const double t = h / sigma, fm = static_cast<double>(m);
        return normal_cdf((fm + 0.5) * t) - normal_cdf((fm - 0.5) * t);
    };
    c.transition.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t k = 0; k < n; ++k) {
        double off = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            if (l == k) continue;
            const double acc = std::min(1.0, std::exp(logw[l] - logw[k]));
            c.transition[k][l] = pstep(static_cast<long>(l) - static_cast<long>(k)) * acc;
            off += c.transition[k][l];
        }
        c.transition[k][k] = 1.0 - off;
    }
    return c;
}

StationarityCheck check_stationarity(const DiscreteChain& c) {
    const std::size_t n = c.states.size();
    StationarityCheck r;
    for (std::size_t l = 0; l < n; ++l) {
        CompensatedSum acc;
        for (std::size_t k = 0; k < n; ++k) acc.add(c.target[k] * c.transition[k][l]);
        r.stationarity = std::max(r.stationarity, std::abs(acc.value() - c.target[l]));
        for (std::size_t k = 0; k < n; ++k)
            r.detailed_balance = std::max(r.detailed_balance,
                                          std::abs(c.target[k] * c.transition[k][l] - c.target[l] * c.transition[l][k]));
    }
    return r;
}

std::vector<double> simulate_discrete(const DiscreteChain& c, std::uint64_t steps, std::uint64_t seed) {
    const std::size_t n = c.states.size();
    const double h = c.states.size() > 1 ? c.states[1] - c.states[0] : 1.0;
    CounterRng rng(seed);
    std::vector<double> hist(n, 0.0);
    long k = static_cast<long>(n / 2);
    for (std::uint64_t t = 0; t < steps; ++t) {
        const long m = std::lround(c.step_sigma * rng.normal() / h);
        const long l = k + m;
        const double u = rng.uniform();
        if (m != 0 && l >= 0 && l < static_cast<long>(n) &&
            u < c.target[static_cast<std::size_t>(l)] / c.target[static_cast<std::size_t>(k)])
            k = l;
        hist[static_cast<std::size_t>(k)] += 1.0;
    }
    for (double& v : hist) v /= static_cast<double>(steps);
    return hist;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw ValidationError("distributions differ in size");
    double tv = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) tv += std::abs(p[k] - q[k]);
    return 0.5 * tv;
}

}  // namespace riesz
