#pragma once

#include "rieszlab/kernel.hpp"
#include "rieszlab/measure.hpp"
#include "rieszlab/potential.hpp"

#include <string>
#include <vector>

namespace riesz {

struct SolverReport {
    int iterations = 0;
    // Frank-Wolfe gap  grad . m - min grad, an upper bound on E(m) - E*.
    double duality_gap = 0.0;
    bool converged = false;
    // Active-set KKT solve on the identified support after the gradient phase.
    bool polished = false;
    int polish_rounds = 0;
    // Energy after each accepted gradient step (non-increasing).
    std::vector<double> energy_trace;
    std::vector<std::string> notes;
};

struct EquilibriumResult {
    RieszParams params;
    Potential V;
    GridMeasure mu;
    std::vector<bool> sigma;
    double c_V = 0.0;
    SampledFunction zeta;
    // E(mu) = 1/2 iint g dmu dmu + int V dmu
    double energy = 0.0;
    SolverReport report;
};

struct EquilibriumOptions {
    double tol = 1e-11;
    int max_iter = 200000;
    double support_theta = 1e-4;
    bool polish = true;
    int max_polish_rounds = 60;
};

// Minimise the discretised mean-field energy over probability vectors on the
// grid cells. Throws ConvergenceError when the gap stays above tol and
// BoxTooSmall when the support reaches the grid edge.
EquilibriumResult solve_equilibrium(const Potential& V, const Grid& grid, const RieszParams& p,
                                    const EquilibriumOptions& opt = {});

// zeta = h^mu + V - c, c the mass-weighted mean of h^mu + V over {mu > 0.1 max}.
SampledFunction effective_potential(const GridMeasure& mu, const Potential& V, const RieszParams& p,
                                    double* c_out = nullptr);
SampledFunction effective_potential(const EquilibriumResult& r);

struct ElResidual {
    // max over the grid of (-zeta)_+
    double below = 0.0;
    // max |zeta| over Sigma, at least two cells away from its boundary
    double on_support = 0.0;
    std::size_t where_below = 0;
    std::size_t where_support = 0;
    // max(1, |c_V|), the scale the residuals are judged against
    double scale = 1.0;
};
ElResidual el_residual(const EquilibriumResult& r);
ElResidual el_residual(const GridMeasure& mu, const Potential& V, const RieszParams& p);

// Largest connected component of {density > theta * max}.
std::vector<bool> extract_support(const GridMeasure& mu, double theta);

struct EdgeFit {
    double boundary = 0.0;
    double exponent = 0.0;
    double prefactor = 0.0;
    double rms = 0.0;
    std::size_t points = 0;
};

struct BoundaryFit {
    EdgeFit density_left, density_right;
    EdgeFit liftoff_left, liftoff_right;
    double density_exponent = 0.0;  // mean of the two sides
    double liftoff_exponent = 0.0;
    // mu / dist^{1 - alpha} on the right-hand fit window
    std::vector<double> prefactor_x, prefactor_values;
};

struct BoundaryFitOptions {
    std::size_t skip = 2;    // cells nearest the boundary left out
    std::size_t window = 40;  // cells used per side
    std::size_t min_layer = 16;
};

// Log-log fits mu ~ dist^{1-alpha} inside and zeta ~ dist^{1+alpha} outside,
// with the boundary location fitted jointly (1-D).
BoundaryFit boundary_exponent_fit(const EquilibriumResult& r, const BoundaryFitOptions& opt = {});

}  // namespace riesz
