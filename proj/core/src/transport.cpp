#include "rieszlab/transport.hpp"

#include "rieszlab/errors.hpp"
#include "rieszlab/toeplitz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace riesz {

namespace {

// Leading coefficient c0 of the least-squares fit y ~ c0 d^p + c1 d^{p+1};
// the second term absorbs the slope of the profile across the window.
double leading_coefficient(const std::vector<double>& d, const std::vector<double>& y, double p) {
    double a00 = 0.0, a01 = 0.0, a11 = 0.0, b0 = 0.0, b1 = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
        const double u = std::pow(d[k], p), v = u * d[k];
        a00 += u * u;
        a01 += u * v;
        a11 += v * v;
        b0 += u * y[k];
        b1 += v * y[k];
    }
    return (b0 * a11 - b1 * a01) / (a00 * a11 - a01 * a01);
}

PowerFit loglog_fit(const std::vector<double>& r, const std::vector<double>& v) {
    PowerFit f;
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < r.size(); ++k) {
        if (!(std::abs(v[k]) > 0.0)) continue;
        lx.push_back(std::log(r[k]));
        ly.push_back(std::log(std::abs(v[k])));
    }
    f.points = lx.size();
    if (f.points < 2) return f;
    const double n = static_cast<double>(f.points);
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        mx += lx[k];
        my += ly[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        sxx += (lx[k] - mx) * (lx[k] - mx);
        sxy += (lx[k] - mx) * (ly[k] - my);
    }
    const double slope = sxy / sxx;
    f.exponent = -slope;
    f.amplitude = std::exp(my - slope * mx);
    double ss = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        const double e = ly[k] - (my + slope * (lx[k] - mx));
        ss += e * e;
    }
    f.rms = std::sqrt(ss / n);
    f.r_lo = std::exp(*std::min_element(lx.begin(), lx.end()));
    f.r_hi = std::exp(*std::max_element(lx.begin(), lx.end()));
    return f;
}

// One boundary point: fit numerator and zeta' against dist^alpha outside,
// flux and mu against dist^{1-alpha} inside.
BoundaryLimits boundary_limits(const TransportField& f, const std::vector<double>& zp, const GridMeasure& mu,
                               double alpha, bool right, const TransportOptions& opt) {
    const Grid& g = f.grid;
    const long n = static_cast<long>(g.n[0]);
    BoundaryLimits b;
    b.boundary = right ? g.lo[0] + static_cast<double>(f.last + 1) * g.h
                       : g.lo[0] + static_cast<double>(f.first) * g.h;
    std::vector<double> din, dout, flux, dens, num, zd;
    double scale = 0.0;
    for (std::size_t k = opt.window_lo; k < opt.window_hi; ++k) {
        const long kk = static_cast<long>(k);
        const long i_in = right ? static_cast<long>(f.last) - kk : static_cast<long>(f.first) + kk;
        const long i_out = right ? static_cast<long>(f.last) + 1 + kk : static_cast<long>(f.first) - 1 - kk;
        if (i_in < static_cast<long>(f.first) || i_in > static_cast<long>(f.last))
            throw ResolutionError("transport: Sigma is narrower than the boundary fit window");
        if (i_out < 0 || i_out >= n) throw ResolutionError("transport: boundary fit window leaves the grid");
        const auto ui = static_cast<std::size_t>(i_in), uo = static_cast<std::size_t>(i_out);
        din.push_back(std::abs(g.x(ui) - b.boundary));
        flux.push_back(f.flux[ui]);
        dens.push_back(mu.density[ui]);
        dout.push_back(std::abs(g.x(uo) - b.boundary));
        num.push_back(f.psi[uo] * zp[uo]);
        zd.push_back(zp[uo]);
        scale = std::max({scale, std::abs(f.psi[ui]), std::abs(f.psi[uo])});
    }
    b.inside = leading_coefficient(din, flux, 1.0 - alpha) / leading_coefficient(din, dens, 1.0 - alpha);
    b.outside = leading_coefficient(dout, num, alpha) / leading_coefficient(dout, zd, alpha);
    b.relative_jump = scale > 0.0 ? std::abs(b.inside - b.outside) / scale : 0.0;
    return b;
}

}  // namespace

std::vector<double> zeta_derivative(const EquilibriumResult& eq) {
    const Grid& g = eq.zeta.grid;
    const std::vector<double>& z = eq.zeta.values;
    const std::size_t n = z.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0)
            d[i] = (z[1] - z[0]) / g.h;
        else if (i + 1 == n)
            d[i] = (z[n - 1] - z[n - 2]) / g.h;
        else
            d[i] = (z[i + 1] - z[i - 1]) / (2.0 * g.h);
    }
    return d;
}

std::vector<double> divergence_potential(const Grid& g, const std::vector<double>& rho, double s) {
    if (g.d != 1) throw Unsupported("divergence potential is implemented for d = 1");
    const std::size_t n = g.n[0];
    if (rho.size() != n) throw ValidationError("divergence potential: size mismatch");
    // rho' is constant on [x_k, x_{k+1}], D_k = rho_{k+1} - rho_k; the last
    // segment drops to zero past the grid.
    std::vector<double> D(n);
    for (std::size_t k = 0; k < n; ++k) D[k] = (k + 1 < n ? rho[k + 1] : 0.0) - rho[k];
    const double h = g.h;
    ToeplitzOperator op(n, [&](long m) { return cell_potential_1d(static_cast<double>(m) * h, 0.0, h, s); });
    std::vector<double> out = op.apply(D);
    // segment to the left of the first node, where rho rises from zero
    if (rho[0] != 0.0)
        for (std::size_t i = 0; i < n; ++i)
            out[i] += rho[0] * cell_potential_1d(static_cast<double>(i + 1) * h, 0.0, h, s);
    return out;
}

TransportField solve_transport_1d(const TestFunction& phi, const EquilibriumResult& eq,
                                  const TransportOptions& opt) {
    const RieszParams& p = eq.params;
    if (p.d != 1) throw Unsupported("transport is implemented for d = 1 only");
    const Grid& g = eq.mu.grid;
    const std::size_t n = g.n[0];
    TransportField f;
    f.grid = g;
    std::size_t runs = 0;
    bool found = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (eq.sigma[i] && (i == 0 || !eq.sigma[i - 1])) {
            ++runs;
            f.first = i;
        }
        if (eq.sigma[i]) {
            f.last = i;
            found = true;
        }
    }
    if (!found) throw ValidationError("transport: empty support");
    if (runs > 1) throw Unsupported("transport: Sigma is disconnected");
    if (f.first == 0 || f.last + 1 == n) throw BoxTooSmall("transport: Sigma touches the grid edge");

    const SampledFunction ph = phi.sample(g);
    for (std::size_t i = 0; i < n; ++i)
        if (!eq.sigma[i] && ph.values[i] != 0.0)
            throw ValidationError("transport: the test function must be supported inside Sigma");
    for (std::size_t i = f.first; i <= f.last; ++i)
        if (eq.mu.density[i] < opt.min_density)
            throw ResolutionError("transport: equilibrium density below " + std::to_string(opt.min_density) +
                                  " at an interior node");

    ExtensionOptions eo;
    // with the free offset the extension decays like the dipole term
    eo.tail_exponent = p.s + 1.0;
    const ExtensionResult ext = alpha_harmonic_extension(ph, eq.sigma, p, eo);
    f.extension = ext.ext.values;
    f.offset = ext.offset;

    f.flux.assign(n, 0.0);
    double acc = 0.0;
    for (std::size_t i = f.first; i <= f.last; ++i) {
        const double r = ext.frac_laplacian[i] / p.c_frac;
        f.flux[i] = (acc + 0.5 * r) * g.h;
        acc += r;
    }
    f.mass_defect = acc * g.h;
    // spread the residual mass linearly so the flux closes at both ends
    const double width = static_cast<double>(f.last + 1 - f.first);
    for (std::size_t i = f.first; i <= f.last; ++i)
        f.flux[i] -= f.mass_defect * (static_cast<double>(i - f.first) + 0.5) / width;

    const std::vector<double> zp = zeta_derivative(eq);
    f.psi.assign(n, 0.0);
    f.region.assign(n, TransportRegion::outside);
    for (std::size_t i = 0; i < n; ++i) {
        if (i >= f.first && i <= f.last) {
            f.region[i] = TransportRegion::inside;
            f.psi[i] = f.flux[i] / eq.mu.density[i];
        } else {
            if (!(zp[i] != 0.0)) throw ResolutionError("transport: zeta' vanishes outside Sigma");
            f.psi[i] = (f.extension[i] - ph.values[i] - f.offset) / zp[i];
        }
    }
    f.left = boundary_limits(f, zp, eq.mu, p.alpha, false, opt);
    f.right = boundary_limits(f, zp, eq.mu, p.alpha, true, opt);
    return f;
}

ResidualReport master_residual(const std::vector<double>& psi, const TestFunction& phi,
                               const EquilibriumResult& eq) {
    const Grid& g = eq.mu.grid;
    const std::size_t n = g.n[0];
    if (psi.size() != n) throw ValidationError("master residual: psi size does not match the grid");
    std::vector<double> rho(n);
    for (std::size_t i = 0; i < n; ++i) rho[i] = psi[i] * eq.mu.density[i];
    const std::vector<double> h = divergence_potential(g, rho, eq.params.s);
    const std::vector<double> zp = zeta_derivative(eq);
    ResidualReport rep;
    std::vector<double> R(n);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
        const double ph = phi.value(g.x(i));
        rep.phi_sup = std::max(rep.phi_sup, std::abs(ph));
        R[i] = psi[i] * zp[i] - h[i] + ph;
        if (std::abs(R[i]) > rep.sup_raw) {
            rep.sup_raw = std::abs(R[i]);
            rep.where_raw = i;
        }
        lo = std::min(lo, R[i]);
        hi = std::max(hi, R[i]);
    }
    rep.constant = 0.5 * (lo + hi);
    for (std::size_t i = 0; i < n; ++i) {
        const double e = std::abs(R[i] - rep.constant);
        if (e >= rep.sup) {
            rep.sup = e;
            rep.where = i;
        }
    }
    return rep;
}

DecayReport decay_and_continuity_check(const TransportField& f, const TestFunction& phi,
                                       const EquilibriumResult& eq, const DecayOptions& opt) {
    const Grid& g = f.grid;
    const std::size_t n = g.n[0];
    const double s = eq.params.s;
    const double z = phi.center[0], ell = phi.ell;
    const double a = g.lo[0] + static_cast<double>(f.first) * g.h;
    const double b = g.lo[0] + static_cast<double>(f.last + 1) * g.h;
    const double margin = opt.u_margin * (b - a);
    DecayReport rep;
    const double M = std::abs(phi.amplitude);
    if (!(M > 0.0)) throw ValidationError("decay check: zero test function");

    double inner = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(g.x(i) - z) < 2.0 * ell) inner = std::max(inner, std::abs(f.psi[i]));
    rep.inner_bound_ratio = inner / (M * std::pow(ell, s));

    // between the bump and the nearer boundary, clear of the boundary layer
    {
        const double reach = std::min(z - a, b - z) - 8.0 * g.h;
        std::vector<double> r, v;
        for (std::size_t i = f.first; i <= f.last; ++i) {
            const double d = std::abs(g.x(i) - z);
            if (d > 2.0 * ell && d < 0.5 * reach) {
                r.push_back(d);
                v.push_back(f.psi[i]);
            }
        }
        if (r.size() >= opt.min_points && 0.5 * reach > 2.0 * ell * opt.min_span) {
            rep.middle = loglog_fit(r, v);
            rep.middle_valid = true;
        } else {
            rep.notes.push_back("middle window too short for a fit at this scale");
        }
    }

    const std::vector<double> zp = zeta_derivative(eq);
    const double edge = opt.edge_margin * (g.hi(0) - g.lo[0]);
    std::vector<double> r, v, zv;
    double num_sup = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = g.x(i);
        if (x > a - margin && x < b + margin) continue;
        if (x < g.lo[0] + edge || x > g.hi(0) - edge) continue;
        r.push_back(std::abs(x - z));
        v.push_back(f.psi[i]);
        zv.push_back(zp[i]);
        const double num = f.psi[i] * zp[i] + f.offset;
        num_sup = std::max(num_sup, std::abs(num));
    }
    if (r.size() < opt.min_points)
        throw ValidationError("decay check: exterior tail window has too few cells");
    const auto [rmin, rmax] = std::minmax_element(r.begin(), r.end());
    if (*rmax < opt.min_span * *rmin)
        throw ValidationError("decay check: exterior tail window spans less than a factor " +
                              std::to_string(opt.min_span) + "; widen the grid");
    rep.tail = loglog_fit(r, v);
    rep.zeta_slope = loglog_fit(r, zv);
    rep.offset_ratio = num_sup > 0.0 ? std::abs(f.offset) / num_sup : 0.0;
    rep.jump = std::max(f.left.relative_jump, f.right.relative_jump);
    return rep;
}

}  // namespace riesz
