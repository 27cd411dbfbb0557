#pragma once

#include "rieszlab/equilibrium.hpp"
#include "rieszlab/kernel.hpp"
#include "rieszlab/statistics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace riesz {

enum class TransportRegion : std::uint8_t { inside, outside };

struct BoundaryLimits {
    // one-sided limits of psi at the boundary point
    double inside = 0.0;
    double outside = 0.0;
    double boundary = 0.0;  // face location used as the boundary
    // |inside - outside| / max |psi| over both fit windows
    double relative_jump = 0.0;
};

// Transport field of the master-operator equation in d = 1 on the
// equilibrium grid.
struct TransportField {
    Grid grid;
    std::vector<double> psi;
    std::vector<TransportRegion> region;
    std::size_t first = 0, last = 0;  // cell range of Sigma
    BoundaryLimits left, right;
    // alpha-harmonic extension of phi (phi + offset on Sigma)
    std::vector<double> extension;
    double offset = 0.0;
    // psi * mu, the antiderivative of the right-hand side
    std::vector<double> flux;
    // h * sum of the right-hand side over Sigma, before it is removed
    double mass_defect = 0.0;
};

struct TransportOptions {
    // boundary fit window, in cells from the boundary face
    std::size_t window_lo = 8;
    std::size_t window_hi = 32;
    double min_density = 1e-8;
};

// psi on Sigma from div(psi mu) = (-Delta)^alpha phi^Sigma / c_frac with psi mu
// vanishing at both ends; psi zeta' = phi^Sigma - phi - offset outside, so that
// the equation holds with one constant on the whole line.
TransportField solve_transport_1d(const TestFunction& phi, const EquilibriumResult& eq,
                                  const TransportOptions& opt = {});

struct ResidualReport {
    // sup |R| with R = psi zeta' - h^{div(psi mu)} + phi on the grid
    double sup_raw = 0.0;
    std::size_t where_raw = 0;
    // min over constants c of sup |R - c|, and the minimising c
    double sup = 0.0;
    std::size_t where = 0;
    double constant = 0.0;
    double phi_sup = 0.0;
};

// h^{div(rho)} = g * rho' at the grid nodes for rho linear between nodes and
// zero beyond the grid.
std::vector<double> divergence_potential(const Grid& g, const std::vector<double>& rho, double s);

ResidualReport master_residual(const std::vector<double>& psi, const TestFunction& phi,
                               const EquilibriumResult& eq);
inline ResidualReport master_residual(const TransportField& f, const TestFunction& phi,
                                      const EquilibriumResult& eq) {
    return master_residual(f.psi, phi, eq);
}

struct PowerFit {
    double exponent = 0.0;  // psi ~ amp * r^{-exponent}
    double amplitude = 0.0;
    double r_lo = 0.0, r_hi = 0.0;
    std::size_t points = 0;
    double rms = 0.0;
};

struct DecayReport {
    // sup |psi| over |x - z| < 2 ell divided by M ell^{s}
    double inner_bound_ratio = 0.0;
    // psi on Sigma between the bump and the boundary
    PowerFit middle;
    bool middle_valid = false;
    // psi outside U
    PowerFit tail;
    // zeta' over the same window (a negative exponent means growth); psi
    // follows -offset / zeta' once the offset dominates
    PowerFit zeta_slope;
    // |offset| / sup |phi^Sigma - phi| outside U
    double offset_ratio = 0.0;
    double jump = 0.0;  // max relative jump over both boundary points
    std::vector<std::string> notes;
};

struct DecayOptions {
    // U is Sigma widened by this fraction of its length on each side
    double u_margin = 0.25;
    // tail window ends this fraction short of the grid edge
    double edge_margin = 0.05;
    double min_span = 1.5;
    std::size_t min_points = 16;
};

// Throws ValidationError when the exterior window is too short to fit.
DecayReport decay_and_continuity_check(const TransportField& f, const TestFunction& phi,
                                       const EquilibriumResult& eq, const DecayOptions& opt = {});

// Derivative of the sampled effective potential (central differences).
std::vector<double> zeta_derivative(const EquilibriumResult& eq);

}  // namespace riesz
