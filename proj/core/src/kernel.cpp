#include "rieszlab/kernel.hpp"

#include "rieszlab/errors.hpp"
#include "rieszlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace riesz {

using std::numbers::pi;

KernelConstants kernel_constants(int d, double s) {
    if (d != 1 && d != 2) throw RangeError("dimension must be 1 or 2");
    if (!(s > d - 2.0 && s < static_cast<double>(d))) {
        std::ostringstream os;
        os << "s = " << s << " outside the admissible range (d-2, d) = (" << d - 2 << ", " << d
           << ")";
        throw RangeError(os.str());
    }
    const double dd = static_cast<double>(d);
    const double a = 0.5 * (dd - s);
    KernelConstants k;
    if (s == 0.0)
        k.c_ds = pi;
    else
        k.c_ds = std::pow(pi, 0.5 * dd) * std::pow(4.0, a) * std::tgamma(a) / std::tgamma(0.5 * dd - a);
    k.c_dalpha = a * std::pow(4.0, a) * std::tgamma(0.5 * dd + a) /
                 (std::pow(pi, 0.5 * dd) * std::tgamma(1.0 - a));
    k.cbar_alpha = -std::tgamma(1.0 + a) / std::tgamma(1.0 - a);
    return k;
}

RieszParams RieszParams::make(int d, double s) {
    const KernelConstants k = kernel_constants(d, s);
    RieszParams p;
    p.d = d;
    p.s = s;
    p.alpha = 0.5 * (d - s);
    p.gamma = s + 1.0 - d;
    p.c_ds = k.c_ds;
    p.c_dalpha = k.c_dalpha;
    p.cbar_alpha = k.cbar_alpha;
    p.c_frac = (s == 0.0) ? pi : k.c_ds / s;
    const double dd = static_cast<double>(d);
    p.c_ext = 2.0 * std::pow(pi, 0.5 * dd) * std::tgamma(0.5 * (p.gamma + 1.0)) /
              std::tgamma(0.5 * (dd + p.gamma + 1.0));
    return p;
}

double riesz_g(double r, double s) {
    if (!(r > 0.0)) throw DomainError("riesz kernel evaluated at the singularity");
    if (s == 0.0) return -std::log(r);
    return std::pow(r, -s) / s;
}

double riesz_dg(double r, double s) {
    if (!(r > 0.0)) throw DomainError("riesz kernel derivative evaluated at the singularity");
    return -std::pow(r, -s - 1.0);
}

double riesz_g(std::span<const double> x, const RieszParams& p) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return riesz_g(std::sqrt(r2), p.s);
}

double riesz_G1(double t, double s) {
    if (t == 0.0) return 0.0;
    const double a = std::abs(t);
    if (s == 0.0) return t - t * std::log(a);
    return std::copysign(std::pow(a, 1.0 - s) / (s * (1.0 - s)), t);
}

double riesz_G2(double t, double s) {
    if (t == 0.0) return 0.0;
    const double a = std::abs(t);
    if (s == 0.0) return -0.5 * t * t * std::log(a) + 0.75 * t * t;
    return std::pow(a, 2.0 - s) / (s * (1.0 - s) * (2.0 - s));
}

namespace {

// k-th derivative of g(t) for t > 0 (k >= 1): g^(k) = (-1)^k (s+1)...(s+k-1) t^{-s-k}.
double dg_k(double t, double s, int k) {
    double c = (k % 2 == 0) ? 1.0 : -1.0;
    for (int j = 1; j < k; ++j) c *= (s + j);
    return c * std::pow(t, -s - k);
}

}  // namespace

double cell_pair_weight_1d(double offset, double h, double s) {
    const double D = std::abs(offset);
    if (D < 32.0 * h) {
        const double v = riesz_G2(D + h, s) - 2.0 * riesz_G2(D, s) + riesz_G2(D - h, s);
        return v / (h * h);
    }
    // Moments of the triangular density of x - y: E u^2 = h^2/6, E u^4 = h^4/15, E u^6 = h^6/28.
    const double h2 = h * h;
    return riesz_g(D, s) + dg_k(D, s, 2) * h2 / 12.0 + dg_k(D, s, 4) * h2 * h2 / 360.0 +
           dg_k(D, s, 6) * h2 * h2 * h2 / 20160.0;
}

double cell_potential_1d(double x, double b0, double b1, double s) {
    const double w = b1 - b0;
    const double D = std::abs(x - 0.5 * (b0 + b1));
    if (D < 32.0 * w) return (riesz_G1(x - b0, s) - riesz_G1(x - b1, s)) / w;
    const double w2 = w * w;
    return riesz_g(D, s) + dg_k(D, s, 2) * w2 / 24.0 + dg_k(D, s, 4) * w2 * w2 / 1920.0;
}

// ---------------------------------------------------------------------------
// Grid and SampledFunction

Grid Grid::line(double lo, double hi, std::size_t n) {
    if (n < 2 || !(hi > lo)) throw RangeError("grid needs n >= 2 and hi > lo");
    Grid g;
    g.d = 1;
    g.n = {n, 1};
    g.lo = {lo, 0.0};
    g.h = (hi - lo) / static_cast<double>(n);
    return g;
}

Grid Grid::square(double lo, double hi, std::size_t n) {
    if (n < 2 || !(hi > lo)) throw RangeError("grid needs n >= 2 and hi > lo");
    Grid g;
    g.d = 2;
    g.n = {n, n};
    g.lo = {lo, lo};
    g.h = (hi - lo) / static_cast<double>(n);
    return g;
}

std::array<double, 2> Grid::point(std::size_t flat) const {
    if (d == 1) return {x(flat), 0.0};
    const std::size_t i = flat / n[1], j = flat % n[1];
    return {coord(0, i), coord(1, j)};
}

bool Grid::same_geometry(const Grid& o) const {
    return d == o.d && n == o.n && std::abs(h - o.h) <= 1e-14 * h &&
           std::abs(lo[0] - o.lo[0]) <= 1e-12 * (1.0 + std::abs(lo[0])) &&
           std::abs(lo[1] - o.lo[1]) <= 1e-12 * (1.0 + std::abs(lo[1]));
}

SampledFunction::SampledFunction(Grid g, std::vector<double> v, std::optional<PowerTail> t)
    : grid(g), values(std::move(v)), tail(t) {
    if (!(grid.h > 0.0)) throw RangeError("grid spacing must be positive");
    if (values.size() != grid.size()) throw RangeError("value count does not match grid");
}

double SampledFunction::tail_value(double x) const {
    if (!tail) return 0.0;
    const double r = std::abs(x - tail->center);
    if (r == 0.0) return 0.0;
    const double amp = (x >= tail->center) ? tail->amp_right : tail->amp_left;
    return amp * std::pow(r, -tail->exponent);
}

double SampledFunction::eval(double x) const {
    if (grid.d != 1) throw Unsupported("eval(double) is defined for 1-D grids");
    const std::size_t n = grid.n[0];
    const double x0 = grid.x(0), x1 = grid.x(n - 1);
    if (x < x0 || x > x1) return tail ? tail_value(x) : 0.0;
    const double u = (x - x0) / grid.h;
    std::size_t i = static_cast<std::size_t>(std::floor(u));
    if (i >= n - 1) i = n - 2;
    const double t = u - static_cast<double>(i);
    return (1.0 - t) * values[i] + t * values[i + 1];
}

void SampledFunction::attach_matched_tail(double exponent, double center) {
    if (grid.d != 1) throw Unsupported("matched tails are implemented for 1-D grids");
    const std::size_t n = grid.n[0];
    PowerTail t;
    t.exponent = exponent;
    t.center = center;
    t.amp_left = values[0] * std::pow(std::abs(grid.x(0) - center), exponent);
    t.amp_right = values[n - 1] * std::pow(std::abs(grid.x(n - 1) - center), exponent);
    tail = t;
}

bool SampledFunction::vanishes_at_edge(double rel_tol) const {
    double mx = 0.0;
    for (double v : values) mx = std::max(mx, std::abs(v));
    if (mx == 0.0) return true;
    const double lim = rel_tol * mx;
    if (grid.d == 1) return std::abs(values.front()) <= lim && std::abs(values.back()) <= lim;
    const std::size_t n0 = grid.n[0], n1 = grid.n[1];
    for (std::size_t i = 0; i < n0; ++i)
        for (std::size_t j = 0; j < n1; ++j)
            if ((i == 0 || j == 0 || i == n0 - 1 || j == n1 - 1) &&
                std::abs(values[grid.flat(i, j)]) > lim)
                return false;
    return true;
}

// ---------------------------------------------------------------------------
// Fractional Laplacian, 1-D

namespace {

constexpr int kNear = 4;

// Moments used by the product-integration rules, in units of h.
struct Moments1D {
    double alpha = 0.0;
    // far field: int_k^{k+1} v^{-1-2a} (linear interpolant) -> node weights
    std::vector<double> a, b;
    // near field: int_k^{k+1} v^{1-2a} (linear interpolant of q)
    std::array<double, kNear> na{}, nb{};

    Moments1D(double alpha_, std::size_t kmax) : alpha(alpha_) {
        const double a2 = 2.0 * alpha;
        a.resize(kmax + 1);
        b.resize(kmax + 1);
        for (std::size_t k = kNear; k <= kmax; ++k) {
            const double kk = static_cast<double>(k);
            const double M0 = (std::pow(kk, -a2) - std::pow(kk + 1.0, -a2)) / a2;
            const double M1 = (alpha == 0.5) ? std::log((kk + 1.0) / kk)
                                             : (std::pow(kk + 1.0, 1.0 - a2) - std::pow(kk, 1.0 - a2)) /
                                                   (1.0 - a2);
            const double B = M1 - kk * M0;
            a[k] = M0 - B;
            b[k] = B;
        }
        for (int k = 0; k < kNear; ++k) {
            const double kk = k;
            const double N0 = (std::pow(kk + 1.0, 2.0 - a2) - std::pow(kk, 2.0 - a2)) / (2.0 - a2);
            const double N1 = (std::pow(kk + 1.0, 3.0 - a2) - std::pow(kk, 3.0 - a2)) / (3.0 - a2);
            const double B = N1 - kk * N0;
            na[k] = N0 - B;
            nb[k] = B;
        }
    }
};

// Node value with tail/zero continuation for indices outside the grid.
struct NodeAccess {
    const SampledFunction& f;
    long n;
    double operator()(long j) const {
        if (j >= 0 && j < n) return f.values[static_cast<std::size_t>(j)];
        if (!f.tail) return 0.0;
        return f.tail_value(f.grid.lo[0] + (static_cast<double>(j) + 0.5) * f.grid.h);
    }
};

void require_tail_or_compact(const SampledFunction& f) {
    if (!f.tail && !f.vanishes_at_edge())
        throw TailRequired("function does not vanish at the grid edge and has no tail model");
}

// Far-field integral int_{|t| > R} f(x+t) |t|^{-1-2a} dt over one side.
double far_side(const SampledFunction& f, const NodeAccess& val, const Moments1D& M, long i, int dir) {
    const long n = val.n;
    const double h = f.grid.h;
    const double a2 = 2.0 * M.alpha;
    const long kend = (dir > 0) ? (n - 1 - i) : i;  // offset of the last real node
    double acc = 0.0;
    if (kend > kNear) {
        for (long k = kNear; k <= kend; ++k) {
            double w = 0.0;
            if (k < kend) w += M.a[static_cast<std::size_t>(k)];
            if (k > kNear) w += M.b[static_cast<std::size_t>(k - 1)];
            acc += w * val(i + dir * k);
        }
        acc *= std::pow(h, -a2);
    }
    if (f.tail) {
        const double xi = f.grid.x(static_cast<std::size_t>(i));
        const double ustart = static_cast<double>(std::max<long>(kNear, kend)) * h;
        const double E = xi + dir * ustart;
        auto integrand = [&](double y) {
            return f.tail_value(y) * std::pow(std::abs(y - xi), -1.0 - a2);
        };
        if (dir > 0)
            acc += integrate_to_infinity(integrand, E, xi);
        else
            acc += integrate_to_infinity([&](double y) { return integrand(2.0 * xi - y); }, 2.0 * xi - E, xi);
    }
    return acc;
}

double frac_lap_node_1d(const SampledFunction& f, const NodeAccess& val, const Moments1D& M,
                        double c_dalpha, long i) {
    const double h = f.grid.h;
    const double a2 = 2.0 * M.alpha;
    const double fi = val(i);
    const double f2 = (-val(i + 2) + 16.0 * val(i + 1) - 30.0 * fi + 16.0 * val(i - 1) - val(i - 2)) /
                      (12.0 * h * h);
    std::array<double, kNear + 1> q{};
    q[0] = 0.0;
    for (int k = 1; k <= kNear; ++k) {
        const double y = k * h;
        const double D = val(i + k) + val(i - k) - 2.0 * fi;
        q[k] = (D - f2 * y * y) / (y * y);
    }
    double near = 0.0;
    for (int k = 0; k < kNear; ++k) near += q[k] * M.na[k] + q[k + 1] * M.nb[k];
    near *= std::pow(h, 2.0 - a2);
    const double R = kNear * h;
    near += f2 * std::pow(R, 2.0 - a2) / (2.0 - a2);
    const double far = far_side(f, val, M, i, +1) + far_side(f, val, M, i, -1) -
                       2.0 * fi * std::pow(R, -a2) / a2;
    return -c_dalpha * (near + far);
}

double c_dalpha_of(int d, double alpha) {
    const double dd = d;
    return alpha * std::pow(4.0, alpha) * std::tgamma(0.5 * dd + alpha) /
           (std::pow(pi, 0.5 * dd) * std::tgamma(1.0 - alpha));
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw RangeError("alpha must lie in (0, 1)");
}

// ---------------------------------------------------------------------------
// Fractional Laplacian, 2-D (compact support only)

struct Weights2D {
    double alpha;
    double h;
    long kmax;
    std::vector<double> w;  // int over cell at offset (k1, k2) of |t|^{-2-2a}, k1,k2 >= 0
    double I2 = 0.0;        // int over the near square of y1^2 |y|^{-2-2a}
    double out = 0.0;       // int outside the near square of |y|^{-2-2a}
    double self = 0.0;      // int over the centre cell of |t|^{-2a}

    Weights2D(double alpha_, double h_, long kmax_) : alpha(alpha_), h(h_), kmax(kmax_) {
        const double a2 = 2.0 * alpha;
        w.assign(static_cast<std::size_t>((kmax + 1) * (kmax + 1)), 0.0);
        const GaussRule& g4 = gauss_legendre(4);
        for (long k1 = 0; k1 <= kmax; ++k1)
            for (long k2 = 0; k2 <= kmax; ++k2) {
                if (k1 == 0 && k2 == 0) continue;
                const long km = std::max(k1, k2);
                double val = 0.0;
                if (km > 2 * kNear) {
                    const double r = h * std::hypot(static_cast<double>(k1), static_cast<double>(k2));
                    val = h * h * std::pow(r, -2.0 - a2);
                } else {
                    const int sub = km <= 1 ? 8 : 2;
                    const double hs = h / sub;
                    for (int i1 = 0; i1 < sub; ++i1)
                        for (int i2 = 0; i2 < sub; ++i2) {
                            const double c1 = (k1 - 0.5) * h + (i1 + 0.5) * hs;
                            const double c2 = (k2 - 0.5) * h + (i2 + 0.5) * hs;
                            for (std::size_t p = 0; p < g4.x.size(); ++p)
                                for (std::size_t q = 0; q < g4.x.size(); ++q) {
                                    const double y1 = c1 + 0.5 * hs * g4.x[p];
                                    const double y2 = c2 + 0.5 * hs * g4.x[q];
                                    val += 0.25 * hs * hs * g4.w[p] * g4.w[q] *
                                           std::pow(y1 * y1 + y2 * y2, -1.0 - alpha);
                                }
                        }
                }
                w[static_cast<std::size_t>(k1 * (kmax + 1) + k2)] = val;
            }
        const double R = (kNear + 0.5) * h;
        auto tri = [&](auto&& radial) {
            return 8.0 * gauss_integrate([&](double th) { return radial(R / std::cos(th)); }, 0.0, pi / 4, 20);
        };
        I2 = 0.5 * tri([&](double Rt) { return std::pow(Rt, 2.0 - a2) / (2.0 - a2); });
        out = tri([&](double Rt) { return std::pow(Rt, -a2) / a2; });
        const double hc = 0.5 * h;
        self = 8.0 * gauss_integrate([&](double th) { return std::pow(hc / std::cos(th), 2.0 - a2) / (2.0 - a2); },
                                     0.0, pi / 4, 20);
    }
    double at(long k1, long k2) const {
        k1 = std::abs(k1);
        k2 = std::abs(k2);
        if (k1 > kmax || k2 > kmax) {
            const double r = h * std::hypot(static_cast<double>(k1), static_cast<double>(k2));
            return h * h * std::pow(r, -2.0 - 2.0 * alpha);
        }
        return w[static_cast<std::size_t>(k1 * (kmax + 1) + k2)];
    }
};

double frac_lap_node_2d(const SampledFunction& f, const Weights2D& W, double c, long i, long j) {
    const long n0 = static_cast<long>(f.grid.n[0]), n1 = static_cast<long>(f.grid.n[1]);
    const double h = f.grid.h;
    auto v = [&](long a, long b) -> double {
        if (a < 0 || b < 0 || a >= n0 || b >= n1) return 0.0;
        return f.values[static_cast<std::size_t>(a * n1 + b)];
    };
    const double fi = v(i, j);
    const double H11 = (v(i + 1, j) - 2 * fi + v(i - 1, j)) / (h * h);
    const double H22 = (v(i, j + 1) - 2 * fi + v(i, j - 1)) / (h * h);
    const double H12 = (v(i + 1, j + 1) - v(i + 1, j - 1) - v(i - 1, j + 1) + v(i - 1, j - 1)) / (4 * h * h);
    double near = 0.0;
    for (long k1 = -kNear; k1 <= kNear; ++k1)
        for (long k2 = -kNear; k2 <= kNear; ++k2) {
            if (k1 == 0 && k2 == 0) continue;
            const double y1 = k1 * h, y2 = k2 * h;
            const double D = v(i + k1, j + k2) - fi;
            const double quad = 0.5 * (H11 * y1 * y1 + 2 * H12 * y1 * y2 + H22 * y2 * y2);
            near += (D - quad) * W.at(k1, k2);
        }
    near += 0.5 * (H11 + H22) * W.I2;
    double far = -fi * W.out;
    for (long a = 0; a < n0; ++a)
        for (long b = 0; b < n1; ++b) {
            const long k1 = a - i, k2 = b - j;
            if (std::max(std::abs(k1), std::abs(k2)) <= kNear) continue;
            const double fv = f.values[static_cast<std::size_t>(a * n1 + b)];
            if (fv != 0.0) far += fv * W.at(k1, k2);
        }
    return -c * (near + far);
}

}  // namespace

double frac_laplacian_pv(const SampledFunction& f, double alpha, double x) {
    check_alpha(alpha);
    if (f.grid.d != 1) throw Unsupported("use the point overload for 2-D grids");
    require_tail_or_compact(f);
    const long n = static_cast<long>(f.grid.n[0]);
    const double u = (x - f.grid.x(0)) / f.grid.h;
    if (u < -1e-9 || u > static_cast<double>(n - 1) + 1e-9)
        throw DomainError("evaluation point outside the grid node range");
    const Moments1D M(alpha, static_cast<std::size_t>(n + kNear));
    const NodeAccess val{f, n};
    const double c = c_dalpha_of(1, alpha);
    const long i0 = std::clamp(static_cast<long>(std::floor(u)), 0L, n - 1);
    const double t = u - static_cast<double>(i0);
    const double v0 = frac_lap_node_1d(f, val, M, c, i0);
    if (t < 1e-12 || i0 == n - 1) return v0;
    const double v1 = frac_lap_node_1d(f, val, M, c, i0 + 1);
    return (1.0 - t) * v0 + t * v1;
}

double frac_laplacian_pv(const SampledFunction& f, double alpha, std::array<double, 2> x) {
    if (f.grid.d == 1) return frac_laplacian_pv(f, alpha, x[0]);
    check_alpha(alpha);
    if (!f.vanishes_at_edge()) throw TailRequired("2-D fractional Laplacian needs compact support");
    const long n0 = static_cast<long>(f.grid.n[0]);
    const double h = f.grid.h;
    const Weights2D W(alpha, h, n0 + kNear);
    const double c = c_dalpha_of(2, alpha);
    const double u0 = (x[0] - f.grid.coord(0, 0)) / h, u1 = (x[1] - f.grid.coord(1, 0)) / h;
    const long i = std::clamp(static_cast<long>(std::lround(u0)), 0L, n0 - 1);
    const long j = std::clamp(static_cast<long>(std::lround(u1)), 0L, static_cast<long>(f.grid.n[1]) - 1);
    return frac_lap_node_2d(f, W, c, i, j);
}

std::vector<double> frac_laplacian_grid(const SampledFunction& f, double alpha) {
    check_alpha(alpha);
    std::vector<double> out(f.grid.size());
    if (f.grid.d == 1) {
        require_tail_or_compact(f);
        const long n = static_cast<long>(f.grid.n[0]);
        const Moments1D M(alpha, static_cast<std::size_t>(n + kNear));
        const NodeAccess val{f, n};
        const double c = c_dalpha_of(1, alpha);
        for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = frac_lap_node_1d(f, val, M, c, i);
        return out;
    }
    if (!f.vanishes_at_edge()) throw TailRequired("2-D fractional Laplacian needs compact support");
    const long n0 = static_cast<long>(f.grid.n[0]), n1 = static_cast<long>(f.grid.n[1]);
    const Weights2D W(alpha, f.grid.h, std::max(n0, n1) + kNear);
    const double c = c_dalpha_of(2, alpha);
    for (long i = 0; i < n0; ++i)
        for (long j = 0; j < n1; ++j) out[static_cast<std::size_t>(i * n1 + j)] = frac_lap_node_2d(f, W, c, i, j);
    return out;
}

}  // namespace riesz
