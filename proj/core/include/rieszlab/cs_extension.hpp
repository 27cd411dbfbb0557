#pragma once

#include "rieszlab/configuration.hpp"
#include "rieszlab/kernel.hpp"
#include "rieszlab/measure.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace riesz {

// Tensor grid over the upper half of the extended plane R x [0, inf) (d = 1),
// graded geometrically toward y = 0. Values on y < 0 follow by symmetry.
struct ExtendedGrid {
    std::vector<double> x;
    std::vector<double> y;

    // y levels: 0, y_min, y_min * ratio, ... capped at steps of max(h_cap, y / 4), up to y_max.
    static std::vector<double> graded_levels(double y_min, double h_cap, double y_max, double ratio = 1.3);
    static ExtendedGrid make(double x_lo, double x_hi, double hx, double y_max, double ratio = 1.3);
};

// Potential h(x, y) = g * source in R^{d+1} on an ExtendedGrid; weight |y|^gamma.
struct ExtensionField {
    ExtendedGrid grid;
    std::vector<double> values;  // row-major in (x, y)
    double gamma = 0.0;

    double at(std::size_t i, std::size_t j) const { return values[i * grid.y.size() + j]; }
    double weight(double y) const;
};

// Gradient in the extended plane of the potential of a piecewise-constant
// density on the line y = 0. Near cells use closed forms (the y-derivative via
// the incomplete beta function), far cells three-point Gauss.
class MeasureExtension {
public:
    MeasureExtension(const GridMeasure& mu, const RieszParams& p);
    double value(double x, double y) const;
    std::array<double, 2> gradient(double x, double y) const;
    // Weighted trace density -|y|^gamma d_y h at (x, y), y > 0.
    double flux(double x, double y) const { return -std::pow(y, gamma_) * gradient(x, y)[1]; }
    const GridMeasure& measure() const { return mu_; }

private:
    GridMeasure mu_;
    RieszParams p_;
    double gamma_;
};

// Extended potential of a measure or of unit point charges (d = 1).
ExtensionField cs_extension(const GridMeasure& mu, const ExtendedGrid& grid, const RieszParams& p);
ExtensionField cs_extension(const Configuration& X, const ExtendedGrid& grid, const RieszParams& p);

// int phi(x) (-y0^gamma d_y h)(x, y0) dx; tends to (c_ext / 2) int phi dmu as y0 -> 0.
double weak_trace(const MeasureExtension& ext, const SampledFunction& phi, double y0);

}  // namespace riesz
