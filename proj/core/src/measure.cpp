#include "rieszlab/measure.hpp"

#include "rieszlab/errors.hpp"
#include "rieszlab/quadrature.hpp"
#include "rieszlab/toeplitz.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace riesz {

namespace {

// int_0^R g(r) r dr
double radial_moment(double R, double s) {
    if (R <= 0.0) return 0.0;
    if (s == 0.0) return 0.25 * R * R - 0.5 * R * R * std::log(R);
    return std::pow(R, 2.0 - s) / (s * (2.0 - s));
}

// int over [0, A] x [0, B] of g(|t|) dt.
double corner_integral(double A, double B, double s) {
    if (A <= 0.0 || B <= 0.0) return 0.0;
    const double split = std::atan2(B, A);
    const GaussRule& r = gauss_legendre(16);
    double acc = 0.0;
    const double m1 = 0.5 * split, c1 = 0.5 * split;
    const double m2 = 0.5 * (0.5 * std::numbers::pi - split), c2 = 0.5 * (0.5 * std::numbers::pi + split);
    for (std::size_t k = 0; k < r.x.size(); ++k) {
        const double t1 = c1 + m1 * r.x[k];
        const double t2 = c2 + m2 * r.x[k];
        acc += r.w[k] * (m1 * radial_moment(A / std::cos(t1), s) + m2 * radial_moment(B / std::sin(t2), s));
    }
    return acc;
}

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

constexpr long kNear2D = 6;

double node_weight_2d(long k, long l, double h, double s) {
    const double r = h * std::hypot(static_cast<double>(k), static_cast<double>(l));
    if (std::max(std::abs(k), std::abs(l)) <= kNear2D)
        return cell_potential_2d({k * h, l * h}, -0.5 * h, 0.5 * h, -0.5 * h, 0.5 * h, s);
    // average of g over a square of side h: g + (h^2 / 24) Laplacian g, Laplacian g = s r^{-s-2}
    return riesz_g(r, s) + h * h / 24.0 * s * std::pow(r, -s - 2.0);
}

}  // namespace

double cell_potential_2d(std::array<double, 2> x, double x0, double x1, double y0, double y1, double s) {
    const double area = (x1 - x0) * (y1 - y0);
    if (!(area > 0.0)) throw ValidationError("cell_potential_2d: empty rectangle");
    double acc = 0.0;
    const double ax[2] = {x0, x1}, ay[2] = {y0, y1};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const double sx = (i == 1 ? 1.0 : -1.0) * sgn(ax[i] - x[0]);
            const double sy = (j == 1 ? 1.0 : -1.0) * sgn(ay[j] - x[1]);
            if (sx == 0.0 || sy == 0.0) continue;
            acc += sx * sy * corner_integral(std::abs(ax[i] - x[0]), std::abs(ay[j] - x[1]), s);
        }
    return acc / area;
}

double cell_pair_weight_2d(long k, long l, double h, double s) {
    k = std::abs(k);
    l = std::abs(l);
    if (std::max(k, l) > kNear2D) {
        // 5-point corrected midpoint: g + (h^2 / 12) Laplacian g with the
        // Laplacian taken from the five-point stencil.
        auto g = [&](long a, long b) { return riesz_g(h * std::hypot(double(a), double(b)), s); };
        return (2.0 / 3.0) * g(k, l) + (g(k + 1, l) + g(k - 1, l) + g(k, l + 1) + g(k, l - 1)) / 12.0;
    }
    const GaussRule& r = gauss_legendre(8);
    const double cx0 = (k - 0.5) * h, cx1 = (k + 0.5) * h, cy0 = (l - 0.5) * h, cy1 = (l + 0.5) * h;
    double acc = 0.0;
    const int sub = 2;
    const double hs = h / sub;
    for (int a = 0; a < sub; ++a)
        for (int b = 0; b < sub; ++b) {
            const double ox = -0.5 * h + (a + 0.5) * hs, oy = -0.5 * h + (b + 0.5) * hs;
            for (std::size_t i = 0; i < r.x.size(); ++i)
                for (std::size_t j = 0; j < r.x.size(); ++j) {
                    const std::array<double, 2> p{ox + 0.5 * hs * r.x[i], oy + 0.5 * hs * r.x[j]};
                    acc += r.w[i] * r.w[j] * cell_potential_2d(p, cx0, cx1, cy0, cy1, s);
                }
        }
    return acc / (4.0 * sub * sub);
}

GridMeasure::GridMeasure(Grid g, std::vector<double> dens) : grid(g), density(std::move(dens)) {
    if (density.size() != grid.size()) throw ValidationError("GridMeasure: density size does not match grid");
    support.assign(density.size(), false);
    for (std::size_t i = 0; i < density.size(); ++i) support[i] = density[i] > 0.0;
}

double GridMeasure::mass() const {
    return compensated_sum(density) * grid.cell_volume();
}

std::vector<double> GridMeasure::cell_masses() const {
    std::vector<double> m(density.size());
    const double v = grid.cell_volume();
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = density[i] * v;
    return m;
}

double GridMeasure::eval(std::array<double, 2> x) const {
    const auto idx = [&](int axis, double v) -> long {
        const double t = (v - grid.lo[axis]) / grid.h;
        if (t < 0.0 || t >= static_cast<double>(grid.n[axis])) return -1;
        return static_cast<long>(t);
    };
    const long i = idx(0, x[0]);
    if (i < 0) return 0.0;
    if (grid.d == 1) return density[static_cast<std::size_t>(i)];
    const long j = idx(1, x[1]);
    if (j < 0) return 0.0;
    return density[grid.flat(static_cast<std::size_t>(i), static_cast<std::size_t>(j))];
}

double GridMeasure::interval_mass(double a, double b) const {
    if (grid.d != 1) throw Unsupported("interval_mass is 1-D only");
    if (b < a) std::swap(a, b);
    CompensatedSum acc;
    for (std::size_t i = 0; i < density.size(); ++i) {
        const double c0 = grid.lo[0] + static_cast<double>(i) * grid.h;
        const double lo = std::max(a, c0), hi = std::min(b, c0 + grid.h);
        if (hi > lo) acc.add(density[i] * (hi - lo));
    }
    return acc.value();
}

double GridMeasure::ball_mass(std::array<double, 2> c, double r) const {
    if (grid.d == 1) return interval_mass(c[0] - r, c[0] + r);
    CompensatedSum acc;
    const int q = 8;
    const double h = grid.h;
    for (std::size_t i = 0; i < grid.n[0]; ++i)
        for (std::size_t j = 0; j < grid.n[1]; ++j) {
            const double dens = density[grid.flat(i, j)];
            if (dens == 0.0) continue;
            const double cx = grid.coord(0, i), cy = grid.coord(1, j);
            const double far = std::hypot(std::abs(cx - c[0]) + h, std::abs(cy - c[1]) + h);
            const double near = std::hypot(std::max(0.0, std::abs(cx - c[0]) - h), std::max(0.0, std::abs(cy - c[1]) - h));
            if (near > r) continue;
            if (far <= r) {
                acc.add(dens * h * h);
                continue;
            }
            int inside = 0;
            for (int a = 0; a < q; ++a)
                for (int b = 0; b < q; ++b) {
                    const double px = cx - 0.5 * h + (a + 0.5) * h / q, py = cy - 0.5 * h + (b + 0.5) * h / q;
                    if (std::hypot(px - c[0], py - c[1]) <= r) ++inside;
                }
            acc.add(dens * h * h * inside / double(q * q));
        }
    return acc.value();
}

double GridMeasure::max_density() const {
    return density.empty() ? 0.0 : *std::max_element(density.begin(), density.end());
}

void GridMeasure::threshold_support(double theta) {
    const double cut = theta * max_density();
    support.assign(density.size(), false);
    for (std::size_t i = 0; i < density.size(); ++i) support[i] = density[i] > cut;
}

MeasurePotential::MeasurePotential(const GridMeasure& mu, const RieszParams& p) : mu_(mu), p_(p) {
    if (mu.grid.d != p.d) throw ValidationError("measure and kernel dimensions differ");
    const Grid& g = mu.grid;
    const double h = g.h, s = p.s;
    const std::vector<double> m = mu.cell_masses();
    if (g.d == 1) {
        ToeplitzOperator node(g.n[0], [&](long k) { return cell_potential_1d(k * h, -0.5 * h, 0.5 * h, s); });
        ToeplitzOperator avg(g.n[0], [&](long k) { return cell_pair_weight_1d(k * h, h, s); });
        nodes_ = node.apply(m);
        averages_ = avg.apply(m);
    } else {
        // weights depend on (|k|, |l|) only; tabulate one octant
        const long n0 = static_cast<long>(g.n[0]), n1 = static_cast<long>(g.n[1]);
        const long M = std::max(n0, n1);
        std::vector<double> wn(static_cast<std::size_t>(M * M), 0.0), wa(wn.size(), 0.0);
        for (long k = 0; k < M; ++k)
            for (long l = 0; l <= k; ++l) {
                const double a = node_weight_2d(k, l, h, s);
                const double b = cell_pair_weight_2d(k, l, h, s);
                wn[static_cast<std::size_t>(k * M + l)] = wn[static_cast<std::size_t>(l * M + k)] = a;
                wa[static_cast<std::size_t>(k * M + l)] = wa[static_cast<std::size_t>(l * M + k)] = b;
            }
        auto look = [M](const std::vector<double>& w) {
            return [&w, M](long k, long l) { return w[static_cast<std::size_t>(std::abs(k) * M + std::abs(l))]; };
        };
        ToeplitzOperator node(g.n[0], g.n[1], look(wn));
        ToeplitzOperator avg(g.n[0], g.n[1], look(wa));
        nodes_ = node.apply(m);
        averages_ = avg.apply(m);
    }
    CompensatedSum e;
    for (std::size_t i = 0; i < m.size(); ++i) e.add(m[i] * averages_[i]);
    self_energy_ = e.value();
}

double MeasurePotential::at(std::array<double, 2> x) const {
    const Grid& g = mu_.grid;
    const double h = g.h, s = p_.s;
    CompensatedSum acc;
    if (g.d == 1) {
        for (std::size_t j = 0; j < g.n[0]; ++j) {
            const double dj = mu_.density[j];
            if (dj == 0.0) continue;
            const double b0 = g.lo[0] + static_cast<double>(j) * h;
            acc.add(dj * h * cell_potential_1d(x[0], b0, b0 + h, s));
        }
        return acc.value();
    }
    for (std::size_t i = 0; i < g.n[0]; ++i)
        for (std::size_t j = 0; j < g.n[1]; ++j) {
            const double dj = mu_.density[g.flat(i, j)];
            if (dj == 0.0) continue;
            const double cx = g.coord(0, i), cy = g.coord(1, j);
            const double r = std::hypot(x[0] - cx, x[1] - cy);
            double w;
            if (r < (kNear2D + 0.5) * h)
                w = cell_potential_2d(x, cx - 0.5 * h, cx + 0.5 * h, cy - 0.5 * h, cy + 0.5 * h, s);
            else
                w = riesz_g(r, s) + h * h / 24.0 * s * std::pow(r, -s - 2.0);
            acc.add(dj * h * h * w);
        }
    return acc.value();
}

double MeasurePotential::derivative_1d(double x) const {
    const Grid& g = mu_.grid;
    if (g.d != 1) throw Unsupported("derivative_1d needs a 1-D measure");
    // telescoped: sum over faces of g(|x - face|) (rho_right - rho_left)
    CompensatedSum acc;
    const std::size_t n = g.n[0];
    for (std::size_t k = 0; k <= n; ++k) {
        const double left = k > 0 ? mu_.density[k - 1] : 0.0;
        const double right = k < n ? mu_.density[k] : 0.0;
        const double jump = right - left;
        if (jump == 0.0) continue;
        const double face = g.lo[0] + static_cast<double>(k) * g.h;
        const double r = std::abs(x - face);
        if (r < 1e-14 * std::max(1.0, std::abs(face)))
            throw DomainError("derivative of the potential is singular at a density jump");
        acc.add(jump * riesz_g(r, p_.s));
    }
    return acc.value();
}

}  // namespace riesz
