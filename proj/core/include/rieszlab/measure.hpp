#pragma once

#include "rieszlab/kernel.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace riesz {

// Average of g(x - y) over y in the rectangle [x0, x1] x [y0, y1] (2-D). Polar
// integration from x with exact radial moments, so x may lie anywhere.
double cell_potential_2d(std::array<double, 2> x, double x0, double x1, double y0, double y1, double s);
// Average of g(x - y) over x in cell (0, 0) and y in cell (k, l) of an h-lattice.
double cell_pair_weight_2d(long k, long l, double h, double s);

// Piecewise-constant density on the cells of a uniform grid. The total mass is
// sum_i density_i * cell_volume.
struct GridMeasure {
    Grid grid;
    std::vector<double> density;
    std::vector<bool> support;

    GridMeasure() = default;
    GridMeasure(Grid g, std::vector<double> dens);

    double mass() const;
    double cell_mass(std::size_t i) const { return density[i] * grid.cell_volume(); }
    std::vector<double> cell_masses() const;
    // Density at x (zero outside the grid).
    double eval(std::array<double, 2> x) const;
    double eval(double x) const { return eval({x, 0.0}); }
    // int_a^b dmu, exact for the piecewise-constant density (1-D).
    double interval_mass(double a, double b) const;
    // Mass in the closed ball B(c, r); exact in 1-D, cell-subsampled in 2-D.
    double ball_mass(std::array<double, 2> c, double r) const;
    double max_density() const;
    // Rebuild the support mask as {density > theta * max}.
    void threshold_support(double theta);
};

// Potentials of a GridMeasure, g * mu, with the near-field singularity
// integrated exactly per cell. The constructor samples the per-offset weights
// once; evaluations at grid nodes and cell averages use FFT convolution.
class MeasurePotential {
public:
    MeasurePotential(const GridMeasure& mu, const RieszParams& p);

    // h^mu at an arbitrary point (direct sum over cells).
    double at(std::array<double, 2> x) const;
    double at(double x) const { return at({x, 0.0}); }
    // d/dx h^mu at x (1-D), from jumps of the density at cell faces.
    double derivative_1d(double x) const;
    // h^mu at every grid node.
    const std::vector<double>& on_nodes() const { return nodes_; }
    // Cell averages of h^mu.
    const std::vector<double>& cell_averages() const { return averages_; }
    // iint g dmu dmu.
    double self_energy() const { return self_energy_; }

private:
    GridMeasure mu_;
    RieszParams p_;
    std::vector<double> nodes_, averages_;
    double self_energy_ = 0.0;
};

}  // namespace riesz
