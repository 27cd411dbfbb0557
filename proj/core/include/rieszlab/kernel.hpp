#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace riesz {

struct KernelConstants {
    double c_ds = 0.0;
    double c_dalpha = 0.0;
    double cbar_alpha = 0.0;
};

// Closed-form constants; s = 0 uses the log-kernel value c_{1,0} = pi (d = 1)
// and 2 pi (d = 2).
KernelConstants kernel_constants(int d, double s);

struct RieszParams {
    int d = 1;
    double s = 0.0;
    double alpha = 0.5;
    double gamma = 0.0;
    double c_ds = 0.0;
    double c_dalpha = 0.0;
    double cbar_alpha = 0.0;
    // (-Delta)^alpha g = c_frac delta for g = |x|^{-s}/s (or -log|x|).
    double c_frac = 0.0;
    // -div(|y|^gamma grad g) = c_ext delta in R^{d+1}; the one-sided
    // weighted Neumann trace of h^mu is (c_ext / 2) mu.
    double c_ext = 0.0;

    static RieszParams make(int d, double s);
    bool log_case() const { return s == 0.0; }
};

// g as a function of the distance r > 0.
double riesz_g(double r, double s);
// g'(r) = -r^{-s-1}.
double riesz_dg(double r, double s);
double riesz_g(std::span<const double> x, const RieszParams& p);

// Antiderivatives of g(|t|) in one variable: G1' = g, G2'' = g, G1 odd, G2 even.
double riesz_G1(double t, double s);
double riesz_G2(double t, double s);

// Average of g(x - y) over x in [a, a + h], y in [b, b + h] (1-D, exact).
double cell_pair_weight_1d(double offset, double h, double s);
// Average of g(x - y) over y in [b0, b1] at point x (1-D, exact).
double cell_potential_1d(double x, double b0, double b1, double s);

// Uniform cell-centred lattice in 1 or 2 dimensions. Node i sits at the centre
// of cell i; the cells tile [lo, lo + n h] per axis.
struct Grid {
    int d = 1;
    std::array<std::size_t, 2> n{0, 1};
    std::array<double, 2> lo{0.0, 0.0};
    double h = 0.0;

    static Grid line(double lo, double hi, std::size_t n);
    static Grid square(double lo, double hi, std::size_t n);

    std::size_t size() const { return n[0] * n[1]; }
    double x(std::size_t i) const { return lo[0] + (static_cast<double>(i) + 0.5) * h; }
    double coord(int axis, std::size_t i) const {
        return lo[axis] + (static_cast<double>(i) + 0.5) * h;
    }
    double hi(int axis) const { return lo[axis] + static_cast<double>(n[axis]) * h; }
    double cell_volume() const { return d == 1 ? h : h * h; }
    std::array<double, 2> point(std::size_t flat) const;
    std::size_t flat(std::size_t i, std::size_t j) const { return i * n[1] + j; }
    bool same_geometry(const Grid& o) const;
};

// Power-law continuation beyond the grid: amp * |x - center|^{-exponent}.
// In 1-D left and right amplitudes differ; in 2-D amp_right is radial.
// A negative exponent models growth (needed for (x)_+^alpha type profiles).
struct PowerTail {
    double amp_left = 0.0;
    double amp_right = 0.0;
    double exponent = 1.0;
    double center = 0.0;
};

struct SampledFunction {
    Grid grid;
    std::vector<double> values;
    std::optional<PowerTail> tail;

    SampledFunction() = default;
    SampledFunction(Grid g, std::vector<double> v, std::optional<PowerTail> t = std::nullopt);

    template <class F>
    static SampledFunction from(const Grid& g, F&& f) {
        std::vector<double> v(g.size());
        for (std::size_t k = 0; k < g.size(); ++k) {
            const auto p = g.point(k);
            v[k] = f(p[0], p[1]);
        }
        return SampledFunction(g, std::move(v));
    }

    // Linear interpolation inside the grid, tail model outside (1-D), zero
    // outside when no tail is attached.
    double eval(double x) const;
    double tail_value(double x) const;
    // Attach a tail whose amplitudes match the edge values.
    void attach_matched_tail(double exponent, double center);
    bool vanishes_at_edge(double rel_tol = 1e-12) const;
};

// (-Delta)^alpha f at x: near-field second-order Taylor subtraction within
// radius 4h, product integration of the piecewise-linear interpolant beyond,
// closed-form/adaptive integration of the tail. Off-grid x is interpolated
// from neighbouring nodes. Throws TailRequired when f does not vanish at the
// grid edge and carries no tail.
double frac_laplacian_pv(const SampledFunction& f, double alpha, double x);
double frac_laplacian_pv(const SampledFunction& f, double alpha, std::array<double, 2> x);
// All grid nodes at once.
std::vector<double> frac_laplacian_grid(const SampledFunction& f, double alpha);

enum class SeminormMethod { fourier, gagliardo };

// Raw Gagliardo seminorm: iint (f(x) - f(y))^2 / |x - y|^{d + 2 alpha}.
// With this normalisation int f (-Delta)^alpha f = (c_dalpha / 2) * value.
double sobolev_seminorm(const SampledFunction& f, double alpha, SeminormMethod method);

struct NegativeNormResult {
    double value = 0.0;
    bool mean_zero_warning = false;
};
// iint g(x - y) f(x) f(y) for a signed density f. method = gagliardo uses exact
// cell-pair weights; fourier uses c_frac (2 pi)^{-d} int |xi|^{-2 alpha} |f^|^2.
NegativeNormResult negative_order_norm(const SampledFunction& f, const RieszParams& p,
                                       SeminormMethod method);

struct ExtensionResult {
    SampledFunction ext;
    // phi^Sigma = phi + offset on Sigma; see alpha_harmonic_extension.
    double offset = 0.0;
    // c_dalpha * (A u) for the discrete operator A of the extension problem;
    // a consistent (-Delta)^alpha phi^Sigma whose sum over Sigma vanishes.
    std::vector<double> frac_laplacian;
    double residual = 0.0;
    int iterations = 0;
};

struct ExtensionOptions {
    // Exponent of the power tail beyond the box; defaults to s + 2.
    std::optional<double> tail_exponent;
    double tol = 1e-10;
    int max_iter = 2000;
    // When false the constant offset on Sigma is pinned to 0 (plain Dirichlet
    // minimiser); see the notes in the implementation.
    bool free_offset = true;
};

// alpha-harmonic extension of phi from the mask sigma (1-D). Minimises the
// discrete Gagliardo energy over functions equal to phi + c on Sigma, c a free
// constant, with a decaying power tail beyond the box. The constant leaves all
// fluctuation quantities unchanged and makes (-Delta)^alpha phi^Sigma mean-zero.
ExtensionResult alpha_harmonic_extension(const SampledFunction& phi, const std::vector<bool>& sigma,
                                         const RieszParams& p, const ExtensionOptions& opt = {});

// Discrete Gagliardo energy of the extension problem (used to verify minimality).
double discrete_gagliardo_energy(const SampledFunction& f, double alpha);

}  // namespace riesz
