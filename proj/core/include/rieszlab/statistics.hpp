#pragma once

#include "rieszlab/configuration.hpp"
#include "rieszlab/energy.hpp"
#include "rieszlab/equilibrium.hpp"
#include "rieszlab/kernel.hpp"
#include "rieszlab/measure.hpp"
#include "rieszlab/sampler.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace riesz {

// phi(x) = phi0((x - z) / ell) with phi0(u) = exp(1 - 1 / (1 - |u|^2)) on |u| < 1.
// In 2-D the bump is radial. The support is the ball of radius ell around z.
struct TestFunction {
    std::array<double, 2> center{0.0, 0.0};
    double ell = 1.0;
    double amplitude = 1.0;
    // max_u |phi0^{(k)}(u)|, k = 0..5, so |phi|_{C^k} <= M_k ell^{-k}.
    static const std::array<double, 6>& derivative_bounds();

    static TestFunction bump(double z, double ell, double amplitude = 1.0);

    double value(std::array<double, 2> x, int d) const;
    double value(double x) const { return value({x, 0.0}, 1); }
    // k-th derivative in 1-D, k <= 5, from the closed-form derivatives of 1 - 1/(1 - u^2).
    double derivative(double x, int k) const;
    SampledFunction sample(const Grid& g) const;
};

// phi0 and its derivatives at u (1-D), exact.
std::array<double, 6> bump_jet(double u);

// sum phi(x_i) - N int phi dmu.
double fluctuation(const Configuration& X, const TestFunction& phi, const GridMeasure& mu);
double integrate_against(const TestFunction& phi, const GridMeasure& mu);

enum class CltMode { macroscopic, mesoscopic };

struct CltPrediction {
    // variance of sqrt(2 beta) Fluct / (N^{1/d} ell)^{s/2}
    double variance = 0.0;
    // limit mean of the same quantity
    double mean_shift = 0.0;
    // raw Gagliardo seminorm of phi0 (mesoscopic) or of the alpha-harmonic extension
    double seminorm = 0.0;
    // the pressure contribution could not be included
    bool mean_partial = false;
    std::vector<std::string> notes;
};

// Pressure data for the macroscopic mean (s > 0): f(b) and f'(b).
struct PressureData {
    std::function<double(double)> f;
    std::function<double(double)> fprime;
};

// The variance follows from the second-order Laplace-transform expansion:
// Var = (c_dalpha / c_frac) * raw seminorm. See the notes on the 1/2 convention
// in the README.
CltPrediction predicted_clt(const TestFunction& phi, const EquilibriumResult& eq, double beta, std::size_t N,
                            CltMode mode, const std::optional<PressureData>& pressure = std::nullopt);

// Integrated autocorrelation via Geyer's initial positive sequence.
struct AutocorrelationReport {
    double tau = 1.0;
    double ess = 0.0;
};
AutocorrelationReport effective_sample_size(const std::vector<double>& series);

// sup |F_emp - Phi((x - m) / sd)|
double ks_distance_normal(std::vector<double> values, double mean, double sd);

struct CltReport {
    double mean = 0.0;
    double variance = 0.0;
    double mean_stderr = 0.0;
    double variance_stderr = 0.0;
    double predicted_variance = 0.0;
    double predicted_mean = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    std::size_t samples = 0;
    double effective_samples = 0.0;
    double ks_distance = 0.0;
    bool non_binding = false;
};

// Moments of a series (chains concatenated, `chain` ids delimit blocks for the
// effective sample size). Throws ValidationError below `min_ess` effective samples.
CltReport clt_report(const std::vector<double>& values, const std::vector<int>& chain, const CltPrediction& pred,
                     double min_ess = 100.0);
// Rescaled fluctuations sqrt(2 beta) Fluct / (N^{1/d} ell)^{s/2} per sample.
std::vector<double> rescaled_fluctuations(const Ensemble& e, const TestFunction& phi, const GridMeasure& mu,
                                          const RieszParams& p);
CltReport clt_report(const Ensemble& e, const TestFunction& phi, const EquilibriumResult& eq, double beta,
                     const CltPrediction& pred, double min_ess = 100.0);

struct LaplacePoint {
    double tau = 0.0;
    double log_mean = 0.0;
    // largest single-sample share of the mean
    double max_weight = 0.0;
    bool unreliable = false;
    // |log_mean| / ((|tau| + tau^2) (ell N^{1/d})^s)
    double constant = 0.0;
};
struct LaplaceReport {
    std::vector<LaplacePoint> points;
    double constant_min = 0.0;
    double constant_max = 0.0;
    double spread() const { return constant_min > 0.0 ? constant_max / constant_min : 0.0; }
};
// log E[exp(tau (beta / (1 + beta)) Fluct)] with max-shifted summation.
LaplaceReport laplace_estimate(const std::vector<double>& fluct, const std::vector<double>& taus, double beta,
                               double ell, std::size_t N, const RieszParams& p);

// #{x_i in B(c, R)} - N mu(B(c, R)).
double discrepancy(const Configuration& X, const GridMeasure& mu, std::array<double, 2> c, double R);

struct LocalLawOptions {
    // cubes tile [window_lo, window_hi]; defaults to the bulk {dist(x, dSigma) >= bulk_margin}
    std::optional<double> window_lo, window_hi;
    double bulk_margin = 0.2;
    int threads = 1;
    // fraction of samples used to fit the count constant; the rest are held out
    double fit_fraction = 0.5;
};

struct LocalLawRow {
    double scale = 0.0;
    std::size_t cubes = 0;
    std::size_t skipped = 0;
    double energy_mean = 0.0;
    double energy_q50 = 0.0, energy_q90 = 0.0, energy_q99 = 0.0, energy_max = 0.0;
    double count_mean = 0.0;
    double count_max = 0.0;
};

struct LocalLawReport {
    std::vector<LocalLawRow> rows;
    // log-log slope of the mean cube energy against ell
    double energy_slope = 0.0;
    // C fitted as max count / (ell^d N) on the fit samples
    double count_constant = 0.0;
    // share of held-out (cube, sample) pairs with count > C ell^d N
    double count_violation = 0.0;
    std::size_t held_out = 0;
};

LocalLawReport local_law_report(const Ensemble& e, const EquilibriumResult& eq, const ElectricEnergy& electric,
                                const std::vector<double>& scales, const LocalLawOptions& opt = {});

struct MinDistanceRow {
    Box box;
    double mean = 0.0;
    double max = 0.0;
    bool flagged = false;  // some r_i below 1e-6 N^{-1/d} / 4
};
struct MinDistanceReport {
    std::vector<MinDistanceRow> rows;
    double slope = 0.0;  // log-log slope of the mean against the box side (NaN if < 2 sides)
};
// Per box: sum over x_i in the box of g(r_i) (s != 0) or g(40 r_i N^{-1/d}) (s = 0).
MinDistanceReport min_distance_report(const Ensemble& e, const RieszParams& p, const std::vector<Box>& boxes);

// Empirical quantile with linear interpolation, q in [0, 1].
double quantile(std::vector<double> v, double q);

}  // namespace riesz
