#include "rieszlab/errors.hpp"
#include "rieszlab/kernel.hpp"
#include "rieszlab/quadrature.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>

#include <cmath>
#include <numbers>

namespace riesz {

namespace {

struct TailShape {
    double exponent = 0.0;
    double center = 0.0;
    bool active = false;
};

// Quadratic form of the discrete Gagliardo energy on a 1-D grid:
//   u^T A u = 1/2 sum_{i != j} (u_i - u_j)^2 W_|i-j| + sum_i int_T (u_i - tau(y))^2 K(x_i - y) dy
// where tau continues the edge values with the power tail. Kernel K = |t|^{-1-2 alpha}.
Eigen::MatrixXd gagliardo_matrix(const Grid& grid, double alpha, const TailShape& tail) {
    const long n = static_cast<long>(grid.n[0]);
    const double h = grid.h;
    const double a2 = 2.0 * alpha;
    std::vector<double> W(static_cast<std::size_t>(n), 0.0);
    for (long k = 1; k < n; ++k) {
        const double kk = static_cast<double>(k);
        W[static_cast<std::size_t>(k)] = (std::pow((kk - 0.5) * h, -a2) - std::pow((kk + 0.5) * h, -a2)) / a2;
    }
    // self-cell second-order correction folded into the nearest neighbours
    W[1] += std::pow(0.5 * h, 2.0 - a2) / ((2.0 - a2) * h * h);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j) {
            if (i == j) continue;
            const double w = W[static_cast<std::size_t>(std::abs(i - j))];
            A(i, j) -= w;
            A(i, i) += w;
        }
    const double lo = grid.lo[0], hi = grid.hi(0);
    for (int side = 0; side < 2; ++side) {
        const long e = side == 0 ? 0 : n - 1;
        const double xe = grid.x(static_cast<std::size_t>(e));
        const double edge = side == 0 ? lo : hi;
        auto shape = [&](double y) {
            return std::pow(std::abs(y - tail.center) / std::abs(xe - tail.center), -tail.exponent);
        };
        for (long i = 0; i < n; ++i) {
            const double xi = grid.x(static_cast<std::size_t>(i));
            const double dist = std::abs(edge - xi);
            A(i, i) += std::pow(dist, -a2) / a2;
            if (!tail.active) continue;
            auto k1 = [&](double y) {
                const double yy = side == 0 ? 2.0 * xi - y : y;
                return shape(yy) * std::pow(std::abs(yy - xi), -1.0 - a2);
            };
            auto k2 = [&](double y) {
                const double yy = side == 0 ? 2.0 * xi - y : y;
                const double sv = shape(yy);
                return sv * sv * std::pow(std::abs(yy - xi), -1.0 - a2);
            };
            const double E = xi + dist;
            const double m1 = integrate_to_infinity(k1, E, xi);
            const double m2 = integrate_to_infinity(k2, E, xi);
            A(i, e) -= m1;
            A(e, i) -= m1;
            A(e, e) += m2;
        }
    }
    return A;
}

}  // namespace

double discrete_gagliardo_energy(const SampledFunction& f, double alpha) {
    if (f.grid.d != 1) throw Unsupported("discrete Gagliardo energy is implemented for 1-D grids");
    TailShape ts;
    if (f.tail) {
        ts.active = true;
        ts.exponent = f.tail->exponent;
        ts.center = f.tail->center;
    }
    const Eigen::MatrixXd A = gagliardo_matrix(f.grid, alpha, ts);
    const Eigen::Map<const Eigen::VectorXd> u(f.values.data(), static_cast<long>(f.values.size()));
    return 2.0 * f.grid.h * u.dot(A * u);
}

ExtensionResult alpha_harmonic_extension(const SampledFunction& phi, const std::vector<bool>& sigma,
                                         const RieszParams& p, const ExtensionOptions& opt) {
    if (phi.grid.d != 1) throw Unsupported("alpha-harmonic extension is implemented for d = 1");
    const long n = static_cast<long>(phi.grid.n[0]);
    if (static_cast<long>(sigma.size()) != n) throw ValidationError("support mask size does not match grid");
    std::vector<long> S, E;
    for (long i = 0; i < n; ++i) (sigma[static_cast<std::size_t>(i)] ? S : E).push_back(i);
    if (S.empty()) throw ValidationError("support mask is empty");
    ExtensionResult res;
    if (E.empty()) {
        res.ext = phi;
        res.frac_laplacian = frac_laplacian_grid(phi, p.alpha);
        return res;
    }
    if (sigma.front() || sigma.back()) throw ValidationError("computational box must strictly contain Sigma");
    const double center = 0.5 * (phi.grid.x(static_cast<std::size_t>(S.front())) +
                                 phi.grid.x(static_cast<std::size_t>(S.back())));
    TailShape ts;
    ts.active = true;
    ts.exponent = opt.tail_exponent.value_or(p.s + 2.0);
    ts.center = center;
    const Eigen::MatrixXd A = gagliardo_matrix(phi.grid, p.alpha, ts);

    const long ne = static_cast<long>(E.size());
    const long m = ne + (opt.free_offset ? 1 : 0);
    Eigen::VectorXd u0 = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd one_s = Eigen::VectorXd::Zero(n);
    for (long i : S) {
        u0(i) = phi.values[static_cast<std::size_t>(i)];
        one_s(i) = 1.0;
    }
    const Eigen::VectorXd Au0 = A * u0;
    const Eigen::VectorXd A1 = A * one_s;
    Eigen::MatrixXd M(m, m);
    Eigen::VectorXd rhs(m);
    for (long a = 0; a < ne; ++a) {
        for (long b = 0; b < ne; ++b) M(a, b) = A(E[a], E[b]);
        rhs(a) = -Au0(E[a]);
    }
    if (opt.free_offset) {
        for (long a = 0; a < ne; ++a) {
            M(a, ne) = A1(E[a]);
            M(ne, a) = A1(E[a]);
        }
        M(ne, ne) = one_s.dot(A1);
        rhs(ne) = -one_s.dot(Au0);
    }
    Eigen::ConjugateGradient<Eigen::MatrixXd, Eigen::Lower | Eigen::Upper> cg;
    cg.setMaxIterations(opt.max_iter);
    cg.setTolerance(opt.tol);
    cg.compute(M);
    const Eigen::VectorXd z = cg.solve(rhs);
    res.iterations = static_cast<int>(cg.iterations());
    res.residual = cg.error();
    if (cg.info() != Eigen::Success)
        throw ConvergenceError("alpha-harmonic extension: linear solve hit the iteration limit", cg.error(),
                               static_cast<int>(cg.iterations()));
    Eigen::VectorXd u = u0;
    for (long a = 0; a < ne; ++a) u(E[a]) = z(a);
    res.offset = opt.free_offset ? z(ne) : 0.0;
    u += res.offset * one_s;
    std::vector<double> vals(u.data(), u.data() + n);
    res.ext = SampledFunction(phi.grid, std::move(vals));
    res.ext.attach_matched_tail(ts.exponent, center);
    const Eigen::VectorXd Au = A * u;
    res.frac_laplacian.resize(static_cast<std::size_t>(n));
    const double c = p.c_dalpha;
    for (long i = 0; i < n; ++i) res.frac_laplacian[static_cast<std::size_t>(i)] = c * Au(i);
    return res;
}

}  // namespace riesz
