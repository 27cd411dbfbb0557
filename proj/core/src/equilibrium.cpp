#include "rieszlab/equilibrium.hpp"

#include "rieszlab/errors.hpp"
#include "rieszlab/quadrature.hpp"
#include "rieszlab/toeplitz.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace riesz {

namespace {

ToeplitzOperator pair_operator(const Grid& g, const RieszParams& p) {
    const double h = g.h, s = p.s;
    if (g.d == 1) return ToeplitzOperator(g.n[0], [&](long k) { return cell_pair_weight_1d(k * h, h, s); });
    const long M = static_cast<long>(std::max(g.n[0], g.n[1]));
    std::vector<double> w(static_cast<std::size_t>(M * M));
    for (long k = 0; k < M; ++k)
        for (long l = 0; l <= k; ++l)
            w[static_cast<std::size_t>(k * M + l)] = w[static_cast<std::size_t>(l * M + k)] =
                cell_pair_weight_2d(k, l, h, s);
    return ToeplitzOperator(g.n[0], g.n[1],
                            [&](long k, long l) { return w[static_cast<std::size_t>(std::abs(k) * M + std::abs(l))]; });
}

double pair_weight(const ToeplitzOperator& W, const Grid& g, std::size_t a, std::size_t b) {
    if (g.d == 1) return W.weight(static_cast<long>(a) - static_cast<long>(b));
    const long ai = static_cast<long>(a / g.n[1]), aj = static_cast<long>(a % g.n[1]);
    const long bi = static_cast<long>(b / g.n[1]), bj = static_cast<long>(b % g.n[1]);
    return W.weight(ai - bi, aj - bj);
}

// Euclidean projection onto {m >= 0, sum m = 1}.
void project_simplex(std::vector<double>& v) {
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0, theta = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        cum += u[k];
        const double t = (cum - 1.0) / static_cast<double>(k + 1);
        if (u[k] - t > 0.0) theta = t;
    }
    for (double& x : v) x = std::max(0.0, x - theta);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    CompensatedSum s;
    for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
    return s.value();
}

std::vector<double> node_values(const Grid& g, const Potential& V) {
    std::vector<double> v(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) v[k] = V.value(g.point(k), g.d);
    return v;
}

bool touches_edge(const Grid& g, const std::vector<bool>& sig) {
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!sig[k]) continue;
        if (g.d == 1) {
            if (k == 0 || k + 1 == g.n[0]) return true;
        } else {
            const std::size_t i = k / g.n[1], j = k % g.n[1];
            if (i == 0 || j == 0 || i + 1 == g.n[0] || j + 1 == g.n[1]) return true;
        }
    }
    return false;
}

struct Objective {
    const ToeplitzOperator& W;
    const std::vector<double>& Vn;
    // returns E and fills grad = W m + V
    double operator()(const std::vector<double>& m, std::vector<double>& grad) const {
        W.apply(m, grad);
        CompensatedSum e;
        for (std::size_t i = 0; i < m.size(); ++i) {
            e.add(m[i] * (0.5 * grad[i] + Vn[i]));
            grad[i] += Vn[i];
        }
        return e.value();
    }
};

double fw_gap(const std::vector<double>& m, const std::vector<double>& grad) {
    return dot(m, grad) - *std::min_element(grad.begin(), grad.end());
}

// Active-set KKT solve: W_SS m_S - c 1 = -V_S, 1^T m_S = 1, then drop negative
// masses / add violated cells until the simplex conditions hold.
bool polish(const ToeplitzOperator& W, const Grid& g, const std::vector<double>& Vn, const Objective& obj,
            std::vector<double>& m, int max_rounds, int& rounds) {
    const std::size_t n = m.size();
    std::vector<char> active(n);
    for (std::size_t i = 0; i < n; ++i) active[i] = m[i] > 0.0;
    std::vector<double> grad(n), trial(n);
    for (rounds = 1; rounds <= max_rounds; ++rounds) {
        std::vector<std::size_t> S;
        for (std::size_t i = 0; i < n; ++i)
            if (active[i]) S.push_back(i);
        const long k = static_cast<long>(S.size());
        if (k == 0 || k > 6000) return false;
        Eigen::MatrixXd A(k + 1, k + 1);
        Eigen::VectorXd b(k + 1);
        for (long a = 0; a < k; ++a) {
            for (long c = 0; c <= a; ++c)
                A(a, c) = A(c, a) = pair_weight(W, g, S[static_cast<std::size_t>(a)], S[static_cast<std::size_t>(c)]);
            A(a, k) = A(k, a) = -1.0;
            b(a) = -Vn[S[static_cast<std::size_t>(a)]];
        }
        A(k, k) = 0.0;
        b(k) = -1.0;
        // sign flip on the last row keeps the system symmetric
        for (long a = 0; a < k; ++a) A(k, a) = -1.0;
        const Eigen::VectorXd z = A.partialPivLu().solve(b);
        std::fill(trial.begin(), trial.end(), 0.0);
        bool negative = false;
        for (long a = 0; a < k; ++a) {
            const double v = z(a);
            trial[S[static_cast<std::size_t>(a)]] = v;
            if (v < 0.0) negative = true;
        }
        if (negative) {
            // drop the negative cells and retry
            for (long a = 0; a < k; ++a)
                if (z(a) < 0.0) active[S[static_cast<std::size_t>(a)]] = 0;
            continue;
        }
        const double c = z(k);
        obj(trial, grad);
        double worst = 0.0;
        std::size_t arg = n;
        for (std::size_t i = 0; i < n; ++i)
            if (!active[i] && c - grad[i] > worst) {
                worst = c - grad[i];
                arg = i;
            }
        if (arg == n || worst < 1e-13 * std::max(1.0, std::abs(c))) {
            m = trial;
            return true;
        }
        // add every cell violating the lower bound
        for (std::size_t i = 0; i < n; ++i)
            if (!active[i] && c - grad[i] > 1e-13 * std::max(1.0, std::abs(c))) active[i] = 1;
    }
    return false;
}

}  // namespace

std::vector<bool> extract_support(const GridMeasure& mu, double theta) {
    const Grid& g = mu.grid;
    const double cut = theta * mu.max_density();
    const std::size_t n = g.size();
    std::vector<bool> above(n);
    for (std::size_t i = 0; i < n; ++i) above[i] = mu.density[i] > cut;
    std::vector<int> label(n, -1);
    std::vector<std::size_t> sizes;
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (!above[seed] || label[seed] >= 0) continue;
        const int id = static_cast<int>(sizes.size());
        std::size_t count = 0;
        std::deque<std::size_t> q{seed};
        label[seed] = id;
        while (!q.empty()) {
            const std::size_t k = q.front();
            q.pop_front();
            ++count;
            std::vector<std::size_t> nb;
            if (g.d == 1) {
                if (k > 0) nb.push_back(k - 1);
                if (k + 1 < n) nb.push_back(k + 1);
            } else {
                const std::size_t i = k / g.n[1], j = k % g.n[1];
                if (i > 0) nb.push_back(k - g.n[1]);
                if (i + 1 < g.n[0]) nb.push_back(k + g.n[1]);
                if (j > 0) nb.push_back(k - 1);
                if (j + 1 < g.n[1]) nb.push_back(k + 1);
            }
            for (std::size_t t : nb)
                if (above[t] && label[t] < 0) {
                    label[t] = id;
                    q.push_back(t);
                }
        }
        sizes.push_back(count);
    }
    std::vector<bool> out(n, false);
    if (sizes.empty()) return out;
    const int best = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    for (std::size_t i = 0; i < n; ++i) out[i] = label[i] == best;
    return out;
}

SampledFunction effective_potential(const GridMeasure& mu, const Potential& V, const RieszParams& p, double* c_out) {
    const Grid& g = mu.grid;
    MeasurePotential pot(mu, p);
    const auto& hn = pot.on_nodes();
    std::vector<double> total(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) total[k] = hn[k] + V.value(g.point(k), g.d);
    const double cut = 0.1 * mu.max_density();
    CompensatedSum num, den;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (mu.density[k] > cut) {
            num.add(mu.density[k] * total[k]);
            den.add(mu.density[k]);
        }
    if (den.value() <= 0.0) throw ValidationError("effective potential: measure has no mass");
    const double c = num.value() / den.value();
    for (double& v : total) v -= c;
    if (c_out) *c_out = c;
    return SampledFunction(g, std::move(total));
}

SampledFunction effective_potential(const EquilibriumResult& r) {
    return effective_potential(r.mu, r.V, r.params);
}

namespace {

ElResidual residual_of(const SampledFunction& zeta, const std::vector<bool>& sigma, double c) {
    const Grid& g = zeta.grid;
    ElResidual out;
    out.scale = std::max(1.0, std::abs(c));
    // distance (in cells) to the nearest non-support cell
    auto interior = [&](std::size_t k) {
        if (!sigma[k]) return false;
        if (g.d == 1) {
            for (long o = -2; o <= 2; ++o) {
                const long t = static_cast<long>(k) + o;
                if (t < 0 || t >= static_cast<long>(g.n[0]) || !sigma[static_cast<std::size_t>(t)]) return false;
            }
            return true;
        }
        const long i = static_cast<long>(k / g.n[1]), j = static_cast<long>(k % g.n[1]);
        for (long a = -2; a <= 2; ++a)
            for (long b = -2; b <= 2; ++b) {
                const long ti = i + a, tj = j + b;
                if (ti < 0 || tj < 0 || ti >= static_cast<long>(g.n[0]) || tj >= static_cast<long>(g.n[1])) return false;
                if (!sigma[g.flat(static_cast<std::size_t>(ti), static_cast<std::size_t>(tj))]) return false;
            }
        return true;
    };
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double z = zeta.values[k];
        if (-z > out.below) {
            out.below = -z;
            out.where_below = k;
        }
        if (interior(k) && std::abs(z) > out.on_support) {
            out.on_support = std::abs(z);
            out.where_support = k;
        }
    }
    return out;
}

}  // namespace

ElResidual el_residual(const EquilibriumResult& r) {
    return residual_of(r.zeta, r.sigma, r.c_V);
}

ElResidual el_residual(const GridMeasure& mu, const Potential& V, const RieszParams& p) {
    double c = 0.0;
    const SampledFunction z = effective_potential(mu, V, p, &c);
    return residual_of(z, extract_support(mu, 1e-4), c);
}

EquilibriumResult solve_equilibrium(const Potential& V, const Grid& grid, const RieszParams& p,
                                    const EquilibriumOptions& opt) {
    if (grid.d != p.d) throw ValidationError("grid and kernel dimensions differ");
    if (grid.size() < 8) throw ResolutionError("equilibrium grid needs at least 8 cells");
    const ToeplitzOperator W = pair_operator(grid, p);
    const std::vector<double> Vn = node_values(grid, V);
    const Objective obj{W, Vn};
    const std::size_t n = grid.size();

    // start from the uniform measure on the central half of the box
    std::vector<double> m(n, 0.0);
    {
        std::size_t count = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const auto x = grid.point(k);
            bool inner = true;
            for (int a = 0; a < grid.d; ++a) {
                const double mid = 0.5 * (grid.lo[a] + grid.hi(a)), half = 0.5 * (grid.hi(a) - grid.lo[a]);
                if (std::abs(x[a] - mid) > 0.5 * half) inner = false;
            }
            if (inner) {
                m[k] = 1.0;
                ++count;
            }
        }
        for (double& v : m) v /= static_cast<double>(count);
    }

    EquilibriumResult res;
    res.params = p;
    res.V = V;
    SolverReport& rep = res.report;
    std::vector<double> grad(n), trial(n), gtrial(n);
    double E = obj(m, grad);
    rep.energy_trace.push_back(E);
    double step = 1.0 / std::max(1e-300, std::abs(W.weight(0, 0)) + 1.0);
    int it = 0;
    double gap = fw_gap(m, grad);
    const double sigma_armijo = 1e-4;
    for (; it < opt.max_iter && gap > opt.tol; ++it) {
        double t = step;
        double Et = 0.0;
        int backtracks = 0;
        for (;;) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = m[i] - t * grad[i];
            project_simplex(trial);
            Et = obj(trial, gtrial);
            double decrease = 0.0;
            for (std::size_t i = 0; i < n; ++i) decrease += grad[i] * (trial[i] - m[i]);
            if (Et <= E + sigma_armijo * decrease || ++backtracks > 60) break;
            t *= 0.5;
        }
        if (Et > E) break;  // stalled at round-off level
        // Barzilai-Borwein step for the next iteration
        double ss = 0.0, sy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ds = trial[i] - m[i], dy = gtrial[i] - grad[i];
            ss += ds * ds;
            sy += ds * dy;
        }
        step = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e12) : 2.0 * t;
        m.swap(trial);
        grad.swap(gtrial);
        E = Et;
        rep.energy_trace.push_back(E);
        gap = fw_gap(m, grad);
    }
    rep.iterations = it;
    rep.duality_gap = gap;
    rep.converged = gap <= opt.tol;

    if (opt.polish && it > 0) {
        std::vector<double> pm = m;
        int rounds = 0;
        if (polish(W, grid, Vn, obj, pm, opt.max_polish_rounds, rounds)) {
            std::vector<double> pg(n);
            const double Ep = obj(pm, pg);
            if (Ep <= E + 1e-12 * std::max(1.0, std::abs(E))) {
                m = pm;
                grad = pg;
                E = Ep;
                rep.polished = true;
                rep.duality_gap = fw_gap(m, grad);
                rep.converged = rep.converged || rep.duality_gap <= opt.tol;
            }
        }
        rep.polish_rounds = rounds;
    }
    if (!rep.converged)
        throw ConvergenceError("equilibrium solver: duality gap above tolerance", rep.duality_gap, rep.iterations);

    std::vector<double> dens(n);
    const double vol = grid.cell_volume();
    for (std::size_t k = 0; k < n; ++k) dens[k] = m[k] / vol;
    res.mu = GridMeasure(grid, std::move(dens));
    res.sigma = extract_support(res.mu, opt.support_theta);
    res.mu.support = res.sigma;
    if (touches_edge(grid, res.sigma))
        throw BoxTooSmall("equilibrium support reaches the edge of the computational box; enlarge the grid");
    res.zeta = effective_potential(res.mu, V, p, &res.c_V);
    res.energy = E;
    rep.notes.push_back("growth of V is checked on the box only; asymptotic growth at infinity is assumed");
    return res;
}

namespace {

// Best log-log fit of values against |x - xb| over candidate boundary positions.
EdgeFit fit_edge(const std::vector<double>& xs, const std::vector<double>& vals, double lo, double hi, int sign) {
    EdgeFit best;
    best.rms = std::numeric_limits<double>::infinity();
    const int steps = 400;
    for (int c = 0; c <= steps; ++c) {
        const double xb = lo + (hi - lo) * c / steps;
        std::vector<double> lx, ly;
        bool ok = true;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            const double dist = sign * (xb - xs[k]);
            if (dist <= 0.0 || vals[k] <= 0.0) {
                ok = false;
                break;
            }
            lx.push_back(std::log(dist));
            ly.push_back(std::log(vals[k]));
        }
        if (!ok || lx.size() < 4) continue;
        const LineFit f = fit_line(lx, ly);
        if (f.rms < best.rms) {
            best.rms = f.rms;
            best.boundary = xb;
            best.exponent = f.slope;
            best.prefactor = std::exp(f.intercept);
            best.points = lx.size();
        }
    }
    if (!std::isfinite(best.rms)) throw ResolutionError("boundary fit: no admissible boundary position");
    return best;
}

}  // namespace

BoundaryFit boundary_exponent_fit(const EquilibriumResult& r, const BoundaryFitOptions& opt) {
    const Grid& g = r.mu.grid;
    if (g.d != 1) throw Unsupported("boundary exponent fits are implemented for d = 1");
    std::size_t first = g.n[0], last = 0;
    for (std::size_t k = 0; k < g.n[0]; ++k)
        if (r.sigma[k]) {
            first = std::min(first, k);
            last = k;
        }
    const std::size_t width = last - first + 1;
    const std::size_t need = opt.skip + opt.window;
    if (width < 2 * need || width / 2 < opt.min_layer)
        throw ResolutionError("boundary layer unresolved: support spans " + std::to_string(width) +
                              " cells, fits need " + std::to_string(2 * need));
    if (first < need || g.n[0] - 1 - last < need)
        throw ResolutionError("boundary layer unresolved: too few exterior cells for the lift-off fit");
    const double h = g.h;
    BoundaryFit out;
    auto side = [&](int sign) {
        const std::size_t e = sign > 0 ? last : first;
        std::vector<double> xi, mi, xo, zo;
        for (std::size_t k = opt.skip; k < need; ++k) {
            const std::size_t in = sign > 0 ? e - k : e + k;
            xi.push_back(g.x(in));
            mi.push_back(r.mu.density[in]);
            const std::size_t ex = sign > 0 ? e + 1 + k : e - 1 - k;
            xo.push_back(g.x(ex));
            zo.push_back(r.zeta.values[ex]);
        }
        const double xe = g.x(e);
        const double lo = sign > 0 ? xe - 0.5 * h : xe - 2.0 * h;
        const double hi = sign > 0 ? xe + 2.0 * h : xe + 0.5 * h;
        const EdgeFit dens = fit_edge(xi, mi, lo, hi, sign);
        const EdgeFit lift = fit_edge(xo, zo, lo, hi, -sign);
        return std::make_pair(dens, lift);
    };
    std::tie(out.density_right, out.liftoff_right) = side(+1);
    std::tie(out.density_left, out.liftoff_left) = side(-1);
    out.density_exponent = 0.5 * (out.density_left.exponent + out.density_right.exponent);
    out.liftoff_exponent = 0.5 * (out.liftoff_left.exponent + out.liftoff_right.exponent);
    const double p = 1.0 - r.params.alpha;
    for (std::size_t k = opt.skip; k < need; ++k) {
        const std::size_t in = last - k;
        const double dist = out.density_right.boundary - g.x(in);
        out.prefactor_x.push_back(g.x(in));
        out.prefactor_values.push_back(r.mu.density[in] / std::pow(dist, p));
    }
    return out;
}

}  // namespace riesz
