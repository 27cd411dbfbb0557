#include "rieszlab/energy.hpp"

#include "rieszlab/errors.hpp"
#include "rieszlab/quadrature.hpp"
#include "rieszlab/toeplitz.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace riesz {

double pair_energy(const Configuration& X, const RieszParams& p) {
    if (X.d != p.d) throw ValidationError("configuration and kernel dimensions differ");
    CompensatedSum acc;
    const std::size_t n = X.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r = X.distance(i, j);
            if (r == 0.0) throw DomainError("coincident points in the pair energy");
            acc.add(riesz_g(r, p.s));
        }
    return acc.value();
}

double hamiltonian(const Configuration& X, const Potential& V, const RieszParams& p) {
    const double N = static_cast<double>(X.size());
    CompensatedSum acc;
    acc.add(pair_energy(X, p));
    for (std::size_t i = 0; i < X.size(); ++i) acc.add(N * V.value(X.point(i), X.d));
    return acc.value();
}

double next_order_energy(const Configuration& X, const MeasurePotential& pot, const RieszParams& p) {
    const double N = static_cast<double>(X.size());
    CompensatedSum acc;
    acc.add(pair_energy(X, p));
    for (std::size_t i = 0; i < X.size(); ++i) acc.add(-N * pot.at(X.point(i)));
    acc.add(0.5 * N * N * pot.self_energy());
    return acc.value();
}

double next_order_energy(const Configuration& X, const GridMeasure& mu, const RieszParams& p) {
    return next_order_energy(X, MeasurePotential(mu, p), p);
}

namespace {

// int V dmu for the piecewise-constant mu, four-point Gauss per cell.
double potential_mass(const GridMeasure& mu, const Potential& V) {
    const Grid& g = mu.grid;
    const GaussRule& r = gauss_legendre(4);
    CompensatedSum acc;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (mu.density[k] == 0.0) continue;
        const auto c = g.point(k);
        double v = 0.0;
        if (g.d == 1) {
            for (std::size_t a = 0; a < r.x.size(); ++a) v += 0.5 * r.w[a] * V.value(c[0] + 0.5 * g.h * r.x[a]);
        } else {
            for (std::size_t a = 0; a < r.x.size(); ++a)
                for (std::size_t b = 0; b < r.x.size(); ++b)
                    v += 0.25 * r.w[a] * r.w[b] *
                         V.value({c[0] + 0.5 * g.h * r.x[a], c[1] + 0.5 * g.h * r.x[b]}, 2);
        }
        acc.add(mu.density[k] * g.cell_volume() * v);
    }
    return acc.value();
}

}  // namespace

double splitting_residual(const Configuration& X, const Potential& V, const EquilibriumResult& eq) {
    const RieszParams& p = eq.params;
    const double N = static_cast<double>(X.size());
    const MeasurePotential pot(eq.mu, p);
    const double E = 0.5 * pot.self_energy() + potential_mass(eq.mu, V);
    CompensatedSum zeta_sum;
    for (std::size_t i = 0; i < X.size(); ++i) {
        const auto x = X.point(i);
        zeta_sum.add(pot.at(x) + V.value(x, X.d) - eq.c_V);
    }
    const double H = hamiltonian(X, V, p);
    const double F = next_order_energy(X, pot, p);
    return std::abs(H - N * N * E - N * zeta_sum.value() - F);
}

std::vector<double> minimal_distances(const Configuration& X, const RieszParams& p) {
    const std::size_t n = X.size();
    if (n == 0) throw ValidationError("minimal distances need N >= 1");
    const double cap = std::pow(static_cast<double>(n), -1.0 / p.d);
    std::vector<double> r = X.nearest_neighbor_distances();
    for (double& v : r) v = 0.25 * std::min(v, cap);
    return r;
}

double truncation_f(double eta, double r, const RieszParams& p) {
    if (!(eta > 0.0)) throw ValidationError("truncation radius must be positive");
    r = std::abs(r);
    if (r >= eta) return 0.0;
    return riesz_g(r, p.s) - riesz_g(eta, p.s);
}

double truncation_mass(double eta, double c, const GridMeasure& mu, const RieszParams& p) {
    if (mu.grid.d != 1) throw Unsupported("truncation_mass is 1-D");
    const Grid& g = mu.grid;
    const double s = p.s, geta = riesz_g(eta, s);
    CompensatedSum acc;
    for (std::size_t j = 0; j < g.n[0]; ++j) {
        if (mu.density[j] == 0.0) continue;
        const double b0 = g.lo[0] + static_cast<double>(j) * g.h;
        const double lo = std::max(b0, c - eta) - c, hi = std::min(b0 + g.h, c + eta) - c;
        if (hi <= lo) continue;
        acc.add(mu.density[j] * (riesz_G1(hi, s) - riesz_G1(lo, s) - geta * (hi - lo)));
    }
    return acc.value();
}

bool Box::contains(std::array<double, 2> x, int d) const {
    for (int a = 0; a < d; ++a)
        if (x[a] < lo(a) || x[a] > hi(a)) return false;
    return true;
}

namespace {

constexpr int kNodes = 3;  // tabulation nodes per direction in each base cell

struct Interp3 {
    // Lagrange basis on the three Gauss nodes of [-1, 1]
    static std::array<double, 3> basis(double t) {
        const GaussRule& r = gauss_legendre(kNodes);
        std::array<double, 3> L{};
        for (int a = 0; a < 3; ++a) {
            double v = 1.0;
            for (int b = 0; b < 3; ++b)
                if (b != a) v *= (t - r.x[b]) / (r.x[a] - r.x[b]);
            L[a] = v;
        }
        return L;
    }
};

struct BaseCell {
    double xa, xb, ya, yb;
    // smooth part of the field (-N grad h^mu plus far particles) at the 3 x 3
    // Gauss nodes, index [ix * 3 + iy]; sf is the far particles' sum of |grad g|^2
    std::array<double, 9> mx, my, sf;

    std::array<double, 3> field(double x, double y) const {
        const auto Lx = Interp3::basis(2.0 * (x - xa) / (xb - xa) - 1.0);
        const auto Ly = Interp3::basis(2.0 * (y - ya) / (yb - ya) - 1.0);
        double fx = 0.0, fy = 0.0, fs = 0.0;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                const double w = Lx[a] * Ly[b];
                fx += w * mx[a * 3 + b];
                fy += w * my[a * 3 + b];
                fs += w * sf[a * 3 + b];
            }
        return {fx, fy, fs};
    }
};

struct Particles {
    std::vector<double> x, r;
};

double rect_distance(double px, double xa, double xb, double ya, double yb) {
    const double dx = px < xa ? xa - px : (px > xb ? px - xb : 0.0);
    const double dy = ya > 0.0 ? ya : (yb < 0.0 ? -yb : 0.0);
    return std::hypot(dx, dy);
}

double rect_far_distance(double px, double xa, double xb, double ya, double yb) {
    const double dx = std::max(std::abs(px - xa), std::abs(px - xb));
    const double dy = std::max(std::abs(ya), std::abs(yb));
    return std::hypot(dx, dy);
}

}  // namespace

struct ElectricEnergy::Impl {
    GridMeasure mu;
    RieszParams p;
    ElectricOptions opt;
    MeasureExtension ext;
    double h = 0.0, width = 0.0, reach = 0.0;
    std::vector<double> levels;
    // table[row][node_y][cell * 3 + node_x] for both components
    std::vector<std::vector<double>> tab_x, tab_y;

    Impl(const GridMeasure& m, const RieszParams& pp, ElectricOptions o)
        : mu(m), p(pp), opt(o), ext(m, pp) {
        if (m.grid.d != 1 || pp.d != 1) throw Unsupported("electric energies are implemented for d = 1");
        if (opt.gauss < 2) throw ValidationError("electric quadrature needs at least 2 Gauss points");
        h = m.grid.h;
        width = m.grid.hi(0) - m.grid.lo[0];
        reach = 20.0 * width;
        levels = ExtendedGrid::graded_levels(opt.y_min_rel * h, h, reach, opt.grading);
        build_table();
    }

    // y-derivative of the unit-density cell potential at horizontal offset u
    double cell_dy(double u, double y) const {
        const double s = p.s;
        const double dx = std::max(0.0, std::abs(u) - 0.5 * h);
        if (std::hypot(dx, y) > 3.0 * h) {
            const GaussRule& r3 = gauss_legendre(3);
            double v = 0.0;
            for (std::size_t q = 0; q < r3.x.size(); ++q) {
                const double rr = std::hypot(u - 0.5 * h * r3.x[q], y);
                v -= 0.5 * h * r3.w[q] * y * std::pow(rr, -s - 2.0);
            }
            return v;
        }
        auto cpi = [s](double th) {
            if (s == 0.0) return th;
            const double sn = std::sin(th);
            const double v = 0.5 * boost::math::beta(0.5, 0.5 * (s + 1.0), sn * sn);
            return th < 0.0 ? -v : v;
        };
        return -std::pow(y, -s) * (cpi(std::atan((u + 0.5 * h) / y)) - cpi(std::atan((u - 0.5 * h) / y)));
    }

    void build_table() {
        const std::size_t n = mu.grid.n[0];
        const GaussRule& r = gauss_legendre(kNodes);
        const std::size_t rows = levels.size() - 1;
        tab_x.assign(rows * kNodes, std::vector<double>(n * kNodes, 0.0));
        tab_y.assign(rows * kNodes, std::vector<double>(n * kNodes, 0.0));
        std::vector<double> out(n);
        for (std::size_t row = 0; row < rows; ++row)
            for (int b = 0; b < kNodes; ++b) {
                const double y = 0.5 * (levels[row] + levels[row + 1]) + 0.5 * (levels[row + 1] - levels[row]) * r.x[b];
                for (int a = 0; a < kNodes; ++a) {
                    const double off = 0.5 * h * r.x[a];
                    ToeplitzOperator Tx(n, [&](long k) {
                        const double u = static_cast<double>(k) * h + off;
                        return riesz_g(std::hypot(u + 0.5 * h, y), p.s) - riesz_g(std::hypot(u - 0.5 * h, y), p.s);
                    });
                    ToeplitzOperator Ty(n, [&](long k) { return cell_dy(static_cast<double>(k) * h + off, y); });
                    auto& tx = tab_x[row * kNodes + b];
                    auto& ty = tab_y[row * kNodes + b];
                    Tx.apply(mu.density, out);
                    for (std::size_t i = 0; i < n; ++i) tx[i * kNodes + a] = out[i];
                    Ty.apply(mu.density, out);
                    for (std::size_t i = 0; i < n; ++i) ty[i * kNodes + a] = out[i];
                }
            }
    }

    // x breakpoints of [xa, xb]: measure faces inside the grid, graded cells outside
    std::vector<double> x_breaks(double xa, double xb) const {
        const double g0 = mu.grid.lo[0], g1 = mu.grid.hi(0);
        std::vector<double> out;
        auto outer = [&](double from, double to, double edge) {
            // cells growing away from `edge`, from `from` to `to` (from < to)
            std::vector<double> pts{from};
            double cur = from;
            while (cur < to) {
                const double step = std::max(h, 0.25 * (cur - edge));
                cur = std::min(cur + step, to);
                pts.push_back(cur);
            }
            return pts;
        };
        if (xa < g0) {
            // grow toward the left edge: build from g0 outward, then reverse
            const double stop = std::min(xb, g0);
            std::vector<double> pts{stop};
            double cur = stop;
            while (cur > xa) {
                const double step = std::max(h, 0.25 * (g0 - cur));
                cur = std::max(cur - step, xa);
                pts.push_back(cur);
            }
            out.assign(pts.rbegin(), pts.rend());
        }
        const double ia = std::max(xa, g0), ib = std::min(xb, g1);
        if (ib > ia) {
            const long ka = std::lround((ia - g0) / h), kb = std::lround((ib - g0) / h);
            for (long k = ka; k <= kb; ++k) {
                const double v = g0 + static_cast<double>(k) * h;
                if (out.empty() || v > out.back() + 1e-12 * h) out.push_back(v);
            }
        }
        if (xb > g1) {
            const auto pts = outer(std::max(xa, g1), xb, g1);
            for (double v : pts)
                if (out.empty() || v > out.back() + 1e-12 * h) out.push_back(v);
        }
        return out;
    }

    // snap a box edge to the nearest measure face when it lies on the grid
    double snap(double v) const {
        const double g0 = mu.grid.lo[0], g1 = mu.grid.hi(0);
        if (v < g0 || v > g1) return v;
        return g0 + std::round((v - g0) / h) * h;
    }

    BaseCell base_cell(double xa, double xb, std::size_t row, double ya, double yb, double N,
                       const std::vector<double>& far) const {
        BaseCell c{xa, xb, ya, yb, {}, {}, {}};
        const GaussRule& r = gauss_legendre(kNodes);
        const double g0 = mu.grid.lo[0];
        const bool on_grid = std::abs((xb - xa) - h) < 1e-9 * h && xa >= g0 - 1e-12 && xb <= mu.grid.hi(0) + 1e-12;
        const bool tabulated = on_grid && row + 1 < levels.size() && std::abs(levels[row + 1] - yb) <= 1e-14 * yb &&
                               levels[row] == ya;
        if (tabulated) {
            const auto cell = static_cast<std::size_t>(std::lround((xa - g0) / h));
            for (int a = 0; a < kNodes; ++a)
                for (int b = 0; b < kNodes; ++b) {
                    c.mx[a * 3 + b] = -N * tab_x[row * kNodes + b][cell * kNodes + a];
                    c.my[a * 3 + b] = -N * tab_y[row * kNodes + b][cell * kNodes + a];
                }
        } else {
            for (int a = 0; a < kNodes; ++a)
                for (int b = 0; b < kNodes; ++b) {
                    const double x = 0.5 * (xa + xb) + 0.5 * (xb - xa) * r.x[a];
                    const double y = 0.5 * (ya + yb) + 0.5 * (yb - ya) * r.x[b];
                    const auto gr = ext.gradient(x, y);
                    c.mx[a * 3 + b] = -N * gr[0];
                    c.my[a * 3 + b] = -N * gr[1];
                }
        }
        for (double px : far)
            for (int a = 0; a < kNodes; ++a)
                for (int b = 0; b < kNodes; ++b) {
                    const double x = 0.5 * (xa + xb) + 0.5 * (xb - xa) * r.x[a];
                    const double y = 0.5 * (ya + yb) + 0.5 * (yb - ya) * r.x[b];
                    const double dx = x - px, rho = std::hypot(dx, y);
                    const double gp = -std::pow(rho, -p.s - 2.0);
                    c.mx[a * 3 + b] += gp * dx;
                    c.my[a * 3 + b] += gp * y;
                    c.sf[a * 3 + b] += gp * gp * rho * rho;
                }
        return c;
    }

    struct Accum {
        CompensatedSum sum;
        std::size_t points = 0;
    };

    void integrate_cell(const BaseCell& base, const Particles& P, double xa, double xb, double ya, double yb,
                        int depth, Accum& acc) const {
        const double size = std::max(xb - xa, yb - ya);
        bool refine = false;
        if (depth < 40) {
            for (std::size_t i = 0; i < P.x.size() && !refine; ++i) {
                if (!(size > opt.finest * P.r[i])) continue;
                const double dn = rect_distance(P.x[i], xa, xb, ya, yb);
                if (dn < opt.refine_factor * size) refine = true;
                else if (dn < P.r[i] && rect_far_distance(P.x[i], xa, xb, ya, yb) > P.r[i]) refine = true;
            }
        }
        if (refine) {
            const bool sx = (xb - xa) > 0.5 * size, sy = (yb - ya) > 0.5 * size;
            const double xm = 0.5 * (xa + xb), ym = 0.5 * (ya + yb);
            if (sx && sy) {
                integrate_cell(base, P, xa, xm, ya, ym, depth + 1, acc);
                integrate_cell(base, P, xm, xb, ya, ym, depth + 1, acc);
                integrate_cell(base, P, xa, xm, ym, yb, depth + 1, acc);
                integrate_cell(base, P, xm, xb, ym, yb, depth + 1, acc);
            } else if (sx) {
                integrate_cell(base, P, xa, xm, ya, yb, depth + 1, acc);
                integrate_cell(base, P, xm, xb, ya, yb, depth + 1, acc);
            } else {
                integrate_cell(base, P, xa, xb, ya, ym, depth + 1, acc);
                integrate_cell(base, P, xa, xb, ym, yb, depth + 1, acc);
            }
            return;
        }
        const GaussRule& r = gauss_legendre(opt.gauss);
        const double s = p.s, gamma = p.gamma;
        double cell = 0.0;
        for (std::size_t a = 0; a < r.x.size(); ++a)
            for (std::size_t b = 0; b < r.x.size(); ++b) {
                const double x = 0.5 * (xa + xb) + 0.5 * (xb - xa) * r.x[a];
                const double y = 0.5 * (ya + yb) + 0.5 * (yb - ya) * r.x[b];
                auto f = base.field(x, y);
                double self = f[2];
                for (std::size_t i = 0; i < P.x.size(); ++i) {
                    const double dx = x - P.x[i];
                    const double rho = std::hypot(dx, y);
                    if (rho <= P.r[i]) continue;
                    const double gp = -std::pow(rho, -s - 1.0) / rho;
                    const double ex = gp * dx, ey = gp * y;
                    f[0] += ex;
                    f[1] += ey;
                    self += ex * ex + ey * ey;
                }
                const double w = gamma == 0.0 ? 1.0 : std::pow(y, gamma);
                cell += 0.25 * (xb - xa) * (yb - ya) * r.w[a] * r.w[b] * w * (f[0] * f[0] + f[1] * f[1] - self);
                ++acc.points;
            }
        acc.sum.add(2.0 * cell);  // lower half-plane by symmetry
    }

    // int over [xa, xb] x [-H, H] minus the ball of |y|^gamma |grad g(. - x0)|^2
    double self_energy(double x0, double r, double xa, double xb, double H) const {
        const double s = p.s, gamma = p.gamma;
        auto integrand = [&](double th) {
            const double c = std::cos(th), sn = std::sin(th);
            double t_in = 0.0, t_out = H / sn;
            if (std::abs(c) < 1e-300) {
                if (x0 < xa || x0 > xb) return 0.0;
            } else {
                double t0 = (xa - x0) / c, t1 = (xb - x0) / c;
                if (t0 > t1) std::swap(t0, t1);
                t_in = std::max(t_in, t0);
                t_out = std::min(t_out, t1);
            }
            if (!(t_out > t_in)) return 0.0;
            const double a = std::max(r, t_in), b = std::max(r, t_out);
            if (b <= a) return 0.0;
            const double dg = s == 0.0 ? std::log(b / a) : (std::pow(a, -s) - std::pow(b, -s)) / s;
            return (gamma == 0.0 ? 1.0 : std::pow(sn, gamma)) * dg;
        };
        std::vector<double> cuts{0.0, std::atan2(H, xb - x0), std::atan2(H, xa - x0), 0.5 * M_PI, M_PI};
        std::sort(cuts.begin(), cuts.end());
        static thread_local boost::math::quadrature::tanh_sinh<double> ts;
        CompensatedSum acc;
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
            if (cuts[k + 1] > cuts[k]) acc.add(ts.integrate(integrand, cuts[k], cuts[k + 1]));
        return 2.0 * acc.value();
    }

    LocalEnergyReport region(const Configuration& X, double xa, double xb, double H) const {
        if (X.d != 1) throw Unsupported("electric energies are implemented for d = 1");
        if (X.size() > static_cast<std::size_t>(opt.max_points))
            throw ValidationError("electric energy quadrature is capped at " + std::to_string(opt.max_points) + " points");
        const double N = static_cast<double>(X.size());
        Particles P;
        P.x = X.coords;
        P.r = minimal_distances(X, p);
        LocalEnergyReport rep;
        rep.box.center = {0.5 * (xa + xb), 0.0};
        rep.box.side = xb - xa;
        rep.height = H;
        for (double x : P.x)
            if (x >= xa && x <= xb) ++rep.point_count;
        CompensatedSum self;
        for (std::size_t i = 0; i < P.x.size(); ++i) self.add(self_energy(P.x[i], P.r[i], xa, xb, H));
        rep.self_part = self.value();

        const auto xs = x_breaks(xa, xb);
        std::vector<double> ys;
        for (double v : levels)
            if (v < H) ys.push_back(v);
        ys.push_back(H);
        Accum acc;
        Particles near;
        std::vector<double> far;
        for (std::size_t i = 0; i + 1 < xs.size(); ++i)
            for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
                const double xa = xs[i], xb = xs[i + 1], ya = ys[j], yb = ys[j + 1];
                const double size = std::max(xb - xa, yb - ya);
                near.x.clear();
                near.r.clear();
                far.clear();
                for (std::size_t k = 0; k < P.x.size(); ++k) {
                    const double dist = rect_distance(P.x[k], xa, xb, ya, yb);
                    if (opt.far_factor > 0.0 && dist > opt.far_factor * size && dist > P.r[k]) {
                        far.push_back(P.x[k]);
                    } else {
                        near.x.push_back(P.x[k]);
                        near.r.push_back(P.r[k]);
                    }
                }
                const BaseCell c = base_cell(xa, xb, j, ya, yb, N, far);
                integrate_cell(c, near, xa, xb, ya, yb, 0, acc);
            }
        rep.cross_part = acc.sum.value();
        rep.quadrature_points = acc.points;
        rep.value = rep.self_part + rep.cross_part;
        return rep;
    }
};

ElectricEnergy::ElectricEnergy(const GridMeasure& mu, const RieszParams& p, ElectricOptions opt)
    : impl_(std::make_unique<Impl>(mu, p, opt)) {}
ElectricEnergy::~ElectricEnergy() = default;
ElectricEnergy::ElectricEnergy(ElectricEnergy&&) noexcept = default;

const GridMeasure& ElectricEnergy::measure() const { return impl_->mu; }

LocalEnergyReport ElectricEnergy::local(const Configuration& X, const Box& box, double height) const {
    const double xa = impl_->snap(box.lo(0)), xb = impl_->snap(box.hi(0));
    if (!(xb > xa)) throw ValidationError("box is narrower than one measure cell");
    const double H = height > 0.0 ? height : xb - xa;
    if (H > impl_->reach) throw ValidationError("box height exceeds the tabulated range");
    LocalEnergyReport rep = impl_->region(X, xa, xb, H);
    rep.box.center = {0.5 * (xa + xb), 0.0};
    rep.box.side = xb - xa;
    return rep;
}

double ElectricEnergy::global(const Configuration& X) const {
    const double L = impl_->reach;
    const double g0 = impl_->mu.grid.lo[0], g1 = impl_->mu.grid.hi(0);
    return impl_->region(X, g0 - L, g1 + L, L).value;
}

double ElectricEnergy::next_order_energy(const Configuration& X) const {
    const RieszParams& p = impl_->p;
    const double N = static_cast<double>(X.size());
    const auto r = minimal_distances(X, p);
    const double E = global(X);
    CompensatedSum gsum, fsum;
    for (std::size_t i = 0; i < X.size(); ++i) {
        gsum.add(riesz_g(r[i], p.s));
        fsum.add(truncation_mass(r[i], X.coords[i], impl_->mu, p));
    }
    return (E - p.c_ext * gsum.value()) / (2.0 * p.c_ext) - N * fsum.value();
}

VectorField1D VectorField1D::constant(double c) {
    return {[c](double) { return c; }, [](double) { return 0.0; }};
}

VectorField1D VectorField1D::identity() {
    return {[](double x) { return x; }, [](double) { return 1.0; }};
}

VectorField1D VectorField1D::scaled(const VectorField1D& f, double lambda) {
    return {[f, lambda](double x) { return lambda * f.value(x); },
            [f, lambda](double x) { return lambda * f.derivative(x); }};
}

Commutator::Commutator(const GridMeasure& mu, const RieszParams& p, VectorField1D psi, int n)
    : mu_(mu), p_(p), psi_(std::move(psi)), n_(n) {
    if (n < 1 || n > 3) throw ValidationError("commutator order must be 1, 2 or 3");
    if (mu.grid.d != 1 || p.d != 1) throw Unsupported("commutators are implemented for d = 1");
    // D^n g(u) u^n = (-1)^n (s+1)_{n-1} |u|^{-s}
    double poch = 1.0;
    for (int k = 1; k < n; ++k) poch *= p.s + k;
    prefactor_ = (n % 2 ? -1.0 : 1.0) * poch;
    const Grid& g = mu.grid;
    const GaussRule& r = gauss_legendre(4);
    CompensatedSum acc;
    for (std::size_t j = 0; j < g.n[0]; ++j) {
        if (mu.density[j] == 0.0) continue;
        const double c = g.x(j);
        for (std::size_t q = 0; q < r.x.size(); ++q) {
            const double x = c + 0.5 * g.h * r.x[q];
            acc.add(0.5 * g.h * r.w[q] * mu.density[j] * against_measure(x));
        }
    }
    mm_ = acc.value();
}

double Commutator::kernel(double x, double y) const {
    const double u = x - y;
    const double q = std::abs(u) > 1e-9 * std::max(1.0, std::abs(x))
                         ? (psi_.value(x) - psi_.value(y)) / u
                         : psi_.derivative(0.5 * (x + y));
    const double w = p_.s == 0.0 ? 1.0 : std::pow(std::abs(u), -p_.s);
    return w * std::pow(q, n_);
}

double Commutator::against_measure(double x) const {
    const Grid& g = mu_.grid;
    const double h = g.h;
    const GaussRule& r = gauss_legendre(4);
    CompensatedSum acc;
    auto f = [&](double y) { return kernel(x, y); };
    for (std::size_t j = 0; j < g.n[0]; ++j) {
        const double dj = mu_.density[j];
        if (dj == 0.0) continue;
        const double b0 = g.lo[0] + static_cast<double>(j) * h, b1 = b0 + h;
        const double dist = x < b0 ? b0 - x : (x > b1 ? x - b1 : 0.0);
        double v = 0.0;
        if (dist > 2.0 * h) {
            for (std::size_t q = 0; q < r.x.size(); ++q) v += 0.5 * h * r.w[q] * f(0.5 * (b0 + b1) + 0.5 * h * r.x[q]);
        } else if (x > b0 && x < b1) {
            v = integrate_graded(f, x, b1, 40, 6) - integrate_graded(f, x, b0, 40, 6);
        } else if (x <= b0) {
            v = integrate_graded(f, b0, b1, 40, 6);
        } else {
            v = -integrate_graded(f, b1, b0, 40, 6);
        }
        acc.add(dj * v);
    }
    return acc.value();
}

double Commutator::operator()(const Configuration& X) const {
    if (X.d != 1) throw Unsupported("commutators are implemented for d = 1");
    const double N = static_cast<double>(X.size());
    CompensatedSum acc;
    for (std::size_t i = 0; i < X.size(); ++i)
        for (std::size_t j = i + 1; j < X.size(); ++j) {
            if (X.coords[i] == X.coords[j]) throw DomainError("coincident points in the commutator");
            acc.add(kernel(X.coords[i], X.coords[j]));  // ordered pairs / 2
        }
    for (std::size_t i = 0; i < X.size(); ++i) acc.add(-N * against_measure(X.coords[i]));
    acc.add(0.5 * N * N * mm_);
    return prefactor_ * acc.value();
}

double commutator_An(const Configuration& X, const GridMeasure& mu, const RieszParams& p, const VectorField1D& psi,
                     int n) {
    return Commutator(mu, p, psi, n)(X);
}

}  // namespace riesz
