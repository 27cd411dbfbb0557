#include "rieszlab/cs_extension.hpp"

#include "rieszlab/errors.hpp"
#include "rieszlab/quadrature.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <limits>

namespace riesz {

namespace {

// g of the planar distance sqrt(u^2 + y^2)
double g2(double u, double y, double s) { return riesz_g(std::hypot(u, y), s); }

// int_0^theta cos^s(phi) dphi for |theta| <= pi/2
double cos_power_integral(double theta, double s) {
    if (s == 0.0) return theta;
    const double a = 0.5, b = 0.5 * (s + 1.0);
    const double sn = std::sin(theta);
    const double v = 0.5 * boost::math::beta(a, b, sn * sn);  // non-regularised incomplete beta
    return theta < 0.0 ? -v : v;
}

}  // namespace

std::vector<double> ExtendedGrid::graded_levels(double y_min, double h_cap, double y_max, double ratio) {
    if (!(y_min > 0.0 && y_max > y_min && ratio > 1.0)) throw ValidationError("invalid y grading");
    std::vector<double> y{0.0, y_min};
    while (y.back() < y_max) {
        const double cur = y.back();
        const double step = std::min((ratio - 1.0) * cur, std::max(h_cap, 0.25 * cur));
        y.push_back(std::min(cur + step, y_max));
    }
    return y;
}

ExtendedGrid ExtendedGrid::make(double x_lo, double x_hi, double hx, double y_max, double ratio) {
    ExtendedGrid g;
    const auto n = static_cast<std::size_t>(std::ceil((x_hi - x_lo) / hx));
    for (std::size_t i = 0; i <= n; ++i) g.x.push_back(x_lo + (x_hi - x_lo) * static_cast<double>(i) / static_cast<double>(n));
    g.y = graded_levels(1e-3 * hx, hx, y_max, ratio);
    return g;
}

double ExtensionField::weight(double y) const {
    return y == 0.0 ? (gamma == 0.0 ? 1.0 : (gamma > 0.0 ? 0.0 : std::numeric_limits<double>::infinity()))
                    : std::pow(std::abs(y), gamma);
}

MeasureExtension::MeasureExtension(const GridMeasure& mu, const RieszParams& p) : mu_(mu), p_(p), gamma_(p.gamma) {
    if (mu.grid.d != 1 || p.d != 1) throw Unsupported("extended-space quadrature is implemented for d = 1");
}

double MeasureExtension::value(double x, double y) const {
    y = std::abs(y);
    const Grid& g = mu_.grid;
    const double h = g.h, s = p_.s;
    if (y == 0.0) {
        CompensatedSum acc;
        for (std::size_t j = 0; j < g.n[0]; ++j)
            if (mu_.density[j] != 0.0) {
                const double b0 = g.lo[0] + static_cast<double>(j) * h;
                acc.add(mu_.density[j] * h * cell_potential_1d(x, b0, b0 + h, s));
            }
        return acc.value();
    }
    const GaussRule& r3 = gauss_legendre(4);
    CompensatedSum acc;
    for (std::size_t j = 0; j < g.n[0]; ++j) {
        const double dj = mu_.density[j];
        if (dj == 0.0) continue;
        const double b0 = g.lo[0] + static_cast<double>(j) * h, b1 = b0 + h;
        const double dx = x < b0 ? b0 - x : (x > b1 ? x - b1 : 0.0);
        double v = 0.0;
        if (std::hypot(dx, y) > 3.0 * h) {
            for (std::size_t k = 0; k < r3.x.size(); ++k) {
                const double t = 0.5 * (b0 + b1) + 0.5 * h * r3.x[k];
                v += 0.5 * h * r3.w[k] * g2(x - t, y, s);
            }
        } else {
            // integrate_graded refines toward its first endpoint
            auto f = [&](double t) { return g2(x - t, y, s); };
            if (x > b0 && x < b1)
                v = integrate_graded(f, x, b1, 40, 8) - integrate_graded(f, x, b0, 40, 8);
            else if (x <= b0)
                v = integrate_graded(f, b0, b1, 40, 8);
            else
                v = -integrate_graded(f, b1, b0, 40, 8);
        }
        acc.add(dj * v);
    }
    return acc.value();
}

std::array<double, 2> MeasureExtension::gradient(double x, double y) const {
    const double sy = y < 0.0 ? -1.0 : 1.0;
    y = std::abs(y);
    const Grid& g = mu_.grid;
    const double h = g.h, s = p_.s;
    const std::size_t n = g.n[0];
    CompensatedSum gx, gy;
    for (std::size_t k = 0; k <= n; ++k) {
        const double left = k > 0 ? mu_.density[k - 1] : 0.0;
        const double right = k < n ? mu_.density[k] : 0.0;
        if (right == left) continue;
        const double face = g.lo[0] + static_cast<double>(k) * h;
        const double r = std::hypot(x - face, y);
        if (r == 0.0) throw DomainError("extended gradient is singular at a density jump on the slab");
        gx.add((right - left) * riesz_g(r, s));
    }
    if (y > 0.0) {
        const GaussRule& r3 = gauss_legendre(3);
        for (std::size_t j = 0; j < n; ++j) {
            const double dj = mu_.density[j];
            if (dj == 0.0) continue;
            const double b0 = g.lo[0] + static_cast<double>(j) * h, b1 = b0 + h;
            const double dx = x < b0 ? b0 - x : (x > b1 ? x - b1 : 0.0);
            if (std::hypot(dx, y) > 3.0 * h) {
                double v = 0.0;
                for (std::size_t q = 0; q < r3.x.size(); ++q) {
                    const double t = 0.5 * (b0 + b1) + 0.5 * h * r3.x[q];
                    const double rr = std::hypot(x - t, y);
                    v -= 0.5 * h * r3.w[q] * y * std::pow(rr, -s - 2.0);
                }
                gy.add(dj * v);
            } else {
                const double c = cos_power_integral(std::atan((x - b0) / y), s) -
                                 cos_power_integral(std::atan((x - b1) / y), s);
                gy.add(-dj * std::pow(y, -s) * c);
            }
        }
    }
    return {gx.value(), sy * gy.value()};
}

ExtensionField cs_extension(const GridMeasure& mu, const ExtendedGrid& grid, const RieszParams& p) {
    MeasureExtension ext(mu, p);
    ExtensionField f;
    f.grid = grid;
    f.gamma = p.gamma;
    f.values.resize(grid.x.size() * grid.y.size());
    for (std::size_t i = 0; i < grid.x.size(); ++i)
        for (std::size_t j = 0; j < grid.y.size(); ++j) f.values[i * grid.y.size() + j] = ext.value(grid.x[i], grid.y[j]);
    return f;
}

ExtensionField cs_extension(const Configuration& X, const ExtendedGrid& grid, const RieszParams& p) {
    if (X.d != 1 || p.d != 1) throw Unsupported("extended-space quadrature is implemented for d = 1");
    ExtensionField f;
    f.grid = grid;
    f.gamma = p.gamma;
    f.values.assign(grid.x.size() * grid.y.size(), 0.0);
    for (std::size_t i = 0; i < grid.x.size(); ++i)
        for (std::size_t j = 0; j < grid.y.size(); ++j) {
            double v = 0.0;
            for (std::size_t k = 0; k < X.size(); ++k) {
                const double r = std::hypot(grid.x[i] - X.coords[k], grid.y[j]);
                if (r == 0.0) {
                    v = std::numeric_limits<double>::quiet_NaN();  // source node excluded
                    break;
                }
                v += riesz_g(r, p.s);
            }
            f.values[i * grid.y.size() + j] = v;
        }
    return f;
}

double weak_trace(const MeasureExtension& ext, const SampledFunction& phi, double y0) {
    if (!(y0 > 0.0)) throw ValidationError("weak trace needs y0 > 0");
    const Grid& g = phi.grid;
    const GaussRule& r = gauss_legendre(4);
    CompensatedSum acc;
    for (std::size_t i = 0; i < g.n[0]; ++i) {
        const double c = g.x(i);
        for (std::size_t q = 0; q < r.x.size(); ++q) {
            const double x = c + 0.5 * g.h * r.x[q];
            const double f = phi.eval(x);
            if (f == 0.0) continue;
            acc.add(0.5 * g.h * r.w[q] * f * ext.flux(x, y0));
        }
    }
    return acc.value();
}

}  // namespace riesz
