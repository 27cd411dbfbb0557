#pragma once

#include "rieszlab/configuration.hpp"
#include "rieszlab/kernel.hpp"
#include "rieszlab/potential.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace riesz {

// Counter-based generator: output k of stream `key` is a SplitMix64 finaliser
// of key + k * golden. Streams for different keys are independent for all
// practical purposes and any position can be reached in O(1).
class CounterRng {
public:
    using result_type = std::uint64_t;
    CounterRng() = default;
    explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0) : key_(key), counter_(counter) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    // Standard normal by Box-Muller on two consecutive draws.
    double normal();
    std::uint64_t below(std::uint64_t n);

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

// Deterministic child seed for (master, purpose label, index).
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index = 0);

// Energy model of the chain.
//  confined: H_N = 1/2 sum_{i != j} g + N sum V, target exp(-beta N^{-s/d} H_N).
//  periodic: unit-density box [0, L)^d, minimum-image g cut off at L/2 and
//            shifted to vanish there, target exp(-beta H); no confinement.
struct GasModel {
    enum class Mode { confined, periodic };
    Mode mode = Mode::confined;
    RieszParams params;
    Potential V = Potential::quadratic(1.0);
    double box = 0.0;  // periodic side length

    static GasModel confined(const RieszParams& p, Potential V);
    static GasModel periodic(const RieszParams& p, double side);

    // Pair interaction at displacement a - b (minimum image when periodic).
    double pair(std::array<double, 2> a, std::array<double, 2> b) const;
    double one_body(std::array<double, 2> x, std::size_t N) const;
    double energy(const Configuration& X) const;
    // Factor multiplying beta * H in the log-density.
    double temperature_scale(std::size_t N) const;
    std::string describe() const;
};

struct ChainStats {
    std::uint64_t proposals = 0;
    std::uint64_t acceptances = 0;
    double scale = 0.1;
    double acceptance_rate() const {
        return proposals ? static_cast<double>(acceptances) / static_cast<double>(proposals) : 0.0;
    }
};

struct ChainState {
    Configuration config;
    // sum_j pair(x_i, x_j) for every i
    std::vector<double> pair_sums;
    double energy = 0.0;
    double log_density = 0.0;
    CounterRng rng;
    ChainStats stats;

    static ChainState make(const GasModel& model, Configuration X, double beta, std::uint64_t seed,
                           double proposal_scale);
    // Full recompute; returns |cached - recomputed| before resetting the caches.
    double refresh(const GasModel& model, double beta);
};

// One single-particle random-walk proposal with the exact Metropolis accept.
// Returns true when the move is accepted.
bool metropolis_step(ChainState& state, const GasModel& model, double beta);

struct ChainOptions {
    std::uint64_t steps = 0;
    std::uint64_t burn_in = 0;
    std::uint64_t thinning = 1;
    double target_acceptance = 0.3;
    double initial_scale = 0.0;  // 0 picks a scale from the mean spacing
    std::uint64_t check_every = 1000;
};

struct Ensemble {
    int d = 1;
    std::size_t N = 0;
    std::vector<Configuration> samples;
    std::vector<double> energies;
    std::vector<int> chain;
    double beta = 0.0;
    std::string model;
    std::uint64_t seed = 0;
    std::uint64_t burn_in = 0;
    std::uint64_t thinning = 1;
    int chains = 1;
    std::vector<double> acceptance;
    std::vector<double> proposal_scale;
    // Potential scale reduction factor on H across chains (NaN for one chain).
    double gelman_rubin = std::numeric_limits<double>::quiet_NaN();
    double max_cache_drift = 0.0;
    std::vector<std::string> warnings;

    std::size_t size() const { return samples.size(); }
};

Configuration initial_configuration(const GasModel& model, std::size_t N);

Ensemble run_chain(const GasModel& model, const Configuration& initial, double beta, const ChainOptions& opt,
                   std::uint64_t seed);

struct EnsembleOptions {
    ChainOptions chain;
    int n_chains = 1;
    int threads = 1;
};

// n_samples recorded per chain; chain c uses derive_seed(seed, "chain", c).
Ensemble sample_ensemble(const GasModel& model, std::size_t N, double beta, std::size_t n_samples,
                         const EnsembleOptions& opt, std::uint64_t seed);

double gelman_rubin(const std::vector<std::vector<double>>& chains);

struct FreeEnergyPoint {
    double beta = 0.0;
    // d/dbeta log K
    double dlogk = 0.0;
    double dlogk_stderr = 0.0;
    // log K(beta) - log K(beta_0), trapezoid rule
    double logk_offset = 0.0;
};

struct FreeEnergyOptions {
    std::size_t samples_per_beta = 200;
    std::uint64_t sweeps_between = 5;
    std::uint64_t burn_in_sweeps = 200;
    // E(mu_V) for confined models: F_N + N sum zeta = H_N - N^2 E(mu_V).
    double mean_field_energy = 0.0;
    int threads = 1;
};

// Thermodynamic integration of log K over an increasing beta grid (>= 4 points).
// Confined: d/dbeta log K = -N^{-s/d} E[H_N - N^2 E(mu_V)].
// Periodic: d/dbeta log K = -E[H], H the shifted minimum-image pair energy.
std::vector<FreeEnergyPoint> free_energy_curve(const GasModel& model, std::size_t N,
                                               const std::vector<double>& beta_grid,
                                               const FreeEnergyOptions& opt, std::uint64_t seed);

// N = 1 system on n equal cells of [a, b] with the rounded-Gaussian proposal.
struct DiscreteChain {
    std::vector<double> states;
    std::vector<double> target;                   // brute-force normalised exp(-beta V)
    std::vector<std::vector<double>> transition;  // row-stochastic
    double step_sigma = 0.0;
};

DiscreteChain discrete_single_particle(const Potential& V, double beta, double a, double b, std::size_t n,
                                       double sigma);
// max_k |(pi P)_k - pi_k| and the detailed-balance defect max |pi_k P_kl - pi_l P_lk|.
struct StationarityCheck {
    double stationarity = 0.0;
    double detailed_balance = 0.0;
};
StationarityCheck check_stationarity(const DiscreteChain& c);
// Empirical visit histogram of a simulated run of the same chain.
std::vector<double> simulate_discrete(const DiscreteChain& c, std::uint64_t steps, std::uint64_t seed);
double total_variation(const std::vector<double>& p, const std::vector<double>& q);

}  // namespace riesz
