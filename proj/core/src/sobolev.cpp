#include "rieszlab/errors.hpp"
#include "rieszlab/kernel.hpp"
#include "rieszlab/quadrature.hpp"
#include "fft_lock.hpp"

#include <boost/math/special_functions/zeta.hpp>
#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

namespace riesz {

using std::numbers::pi;

namespace {

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

double c_dalpha_of(int d, double alpha) {
    const double dd = d;
    return alpha * std::pow(4.0, alpha) * std::tgamma(0.5 * dd + alpha) /
           (std::pow(pi, 0.5 * dd) * std::tgamma(1.0 - alpha));
}

// Values on an enlarged 1-D array: the grid plus `pad` nodes of tail on each side.
std::vector<double> padded_values(const SampledFunction& f, std::size_t pad) {
    const std::size_t n = f.grid.n[0];
    std::vector<double> v(n + 2 * pad, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i + pad] = f.values[i];
    if (f.tail) {
        for (std::size_t k = 0; k < pad; ++k) {
            const double xl = f.grid.x(0) - static_cast<double>(pad - k) * f.grid.h;
            const double xr = f.grid.x(n - 1) + static_cast<double>(k + 1) * f.grid.h;
            v[k] = f.tail_value(xl);
            v[n + pad + k] = f.tail_value(xr);
        }
    }
    return v;
}

std::size_t tail_padding(const SampledFunction& f) { return f.tail ? 3 * f.grid.n[0] : 0; }

// Power spectrum sum  sum_k w(|xi_k|) |f^(xi_k)|^2 dxi over the full line (1-D),
// with f^ = h sum f_j e^{-i xi x_j}.
template <class W>
double spectral_sum_1d(const std::vector<double>& v, double h, std::size_t oversample, W&& weight,
                       double* dc_power = nullptr) {
    const std::size_t L = next_pow2(oversample * v.size());
    std::vector<double> in(L, 0.0);
    std::copy(v.begin(), v.end(), in.begin());
    std::vector<std::complex<double>> out(L / 2 + 1);
    {
        std::lock_guard<std::mutex> lock(detail::fftw_mutex());
        fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(L), in.data(),
                                              reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }
    const double dxi = 2.0 * pi / (static_cast<double>(L) * h);
    double acc = 0.0;
    for (std::size_t k = 1; k <= L / 2; ++k) {
        const double xi = dxi * static_cast<double>(k);
        const double p = std::norm(out[k]) * h * h;
        acc += (k == L / 2 ? 1.0 : 2.0) * weight(xi) * p * dxi;
    }
    if (dc_power) *dc_power = std::norm(out[0]) * h * h;
    return acc;
}

// Riemann sums of |xi|^q G(xi) over the lattice k dxi, k != 0, miss the cusp at
// the origin: sum = integral + 2 zeta(-q) dxi^{1+q} G(0) + O(dxi^{3+q}). Returns
// the term to add to the sum.
double cusp_correction(double q, std::size_t len, std::size_t oversample, double h, double dc_power) {
    if (dc_power == 0.0) return 0.0;
    const std::size_t L = next_pow2(oversample * len);
    const double dxi = 2.0 * pi / (static_cast<double>(L) * h);
    return -2.0 * boost::math::zeta(-q) * std::pow(dxi, 1.0 + q) * dc_power;
}

double gagliardo_1d(const SampledFunction& f, double alpha) {
    const std::size_t pad = tail_padding(f);
    const std::vector<double> v = padded_values(f, pad);
    const long n = static_cast<long>(v.size());
    const double h = f.grid.h;
    const double a2 = 2.0 * alpha;
    constexpr int K = 4;
    // Far-field node weights (product integration of the linear interpolant).
    std::vector<double> A(static_cast<std::size_t>(n + 1)), B(static_cast<std::size_t>(n + 1));
    for (long k = K; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        const double M0 = (std::pow(kk, -a2) - std::pow(kk + 1.0, -a2)) / a2;
        const double M1 = (alpha == 0.5) ? std::log((kk + 1.0) / kk)
                                         : (std::pow(kk + 1.0, 1.0 - a2) - std::pow(kk, 1.0 - a2)) / (1.0 - a2);
        B[static_cast<std::size_t>(k)] = M1 - kk * M0;
        A[static_cast<std::size_t>(k)] = M0 - B[static_cast<std::size_t>(k)];
    }
    std::array<double, K> na{}, nb{};
    for (int k = 0; k < K; ++k) {
        const double kk = k;
        const double N0 = (std::pow(kk + 1.0, 2.0 - a2) - std::pow(kk, 2.0 - a2)) / (2.0 - a2);
        const double N1 = (std::pow(kk + 1.0, 3.0 - a2) - std::pow(kk, 3.0 - a2)) / (3.0 - a2);
        nb[k] = N1 - kk * N0;
        na[k] = N0 - nb[k];
    }
    auto val = [&](long j) { return (j >= 0 && j < n) ? v[static_cast<std::size_t>(j)] : 0.0; };
    CompensatedSum total;
    for (long i = 0; i < n; ++i) {
        const double fi = val(i);
        const double d1 = (-val(i + 2) + 8.0 * val(i + 1) - 8.0 * val(i - 1) + val(i - 2)) / (12.0 * h);
        std::array<double, K + 1> q{};
        q[0] = 2.0 * d1 * d1;
        for (int k = 1; k <= K; ++k) {
            const double y = k * h;
            const double dr = val(i + k) - fi, dl = val(i - k) - fi;
            q[k] = (dr * dr + dl * dl) / (y * y);
        }
        double near = 0.0;
        for (int k = 0; k < K; ++k) near += q[k] * na[k] + q[k + 1] * nb[k];
        near *= std::pow(h, 2.0 - a2);
        double far = 0.0;
        for (int dir = -1; dir <= 1; dir += 2) {
            const long kend = dir > 0 ? (n - 1 - i) : i;
            if (kend > K) {
                double acc = 0.0;
                for (long k = K; k <= kend; ++k) {
                    double w = 0.0;
                    if (k < kend) w += A[static_cast<std::size_t>(k)];
                    if (k > K) w += B[static_cast<std::size_t>(k - 1)];
                    const double dv = val(i + dir * k) - fi;
                    acc += w * dv * dv;
                }
                far += acc * std::pow(h, -a2);
            }
            // beyond the last node the function is taken as zero
            const double u = static_cast<double>(std::max<long>(kend, K)) * h;
            far += 2.0 * fi * fi * std::pow(u, -a2) / a2;  // counts (x,y) and (y,x)
        }
        total.add(h * (near + far));
    }
    return total.value();
}

double fourier_1d(const SampledFunction& f, double alpha) {
    const std::size_t pad = tail_padding(f);
    const std::vector<double> v = padded_values(f, pad);
    const double c = c_dalpha_of(1, alpha);
    double dc = 0.0;
    const double S = spectral_sum_1d(v, f.grid.h, 8, [&](double xi) { return std::pow(xi, 2.0 * alpha); }, &dc);
    return 2.0 / c * (S + cusp_correction(2.0 * alpha, v.size(), 8, f.grid.h, dc)) / (2.0 * pi);
}

double fourier_2d(const SampledFunction& f, double alpha) {
    if (!f.vanishes_at_edge()) throw Unsupported("2-D seminorm requires compact support");
    const std::size_t n0 = f.grid.n[0], n1 = f.grid.n[1];
    const std::size_t L0 = next_pow2(4 * n0), L1 = next_pow2(4 * n1);
    std::vector<double> in(L0 * L1, 0.0);
    for (std::size_t i = 0; i < n0; ++i)
        for (std::size_t j = 0; j < n1; ++j) in[i * L1 + j] = f.values[i * n1 + j];
    const std::size_t m1 = L1 / 2 + 1;
    std::vector<std::complex<double>> out(L0 * m1);
    {
        std::lock_guard<std::mutex> lock(detail::fftw_mutex());
        fftw_plan plan = fftw_plan_dft_r2c_2d(static_cast<int>(L0), static_cast<int>(L1), in.data(),
                                              reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }
    const double h = f.grid.h;
    const double d0 = 2.0 * pi / (static_cast<double>(L0) * h), d1 = 2.0 * pi / (static_cast<double>(L1) * h);
    double acc = 0.0;
    for (std::size_t a = 0; a < L0; ++a) {
        const long ka = (a <= L0 / 2) ? static_cast<long>(a) : static_cast<long>(a) - static_cast<long>(L0);
        for (std::size_t b = 0; b < m1; ++b) {
            if (a == 0 && b == 0) continue;
            const double xi0 = d0 * static_cast<double>(ka), xi1 = d1 * static_cast<double>(b);
            const double mult = (b == 0 || b == L1 / 2) ? 1.0 : 2.0;
            const double p = std::norm(out[a * m1 + b]) * h * h * h * h;
            acc += mult * std::pow(xi0 * xi0 + xi1 * xi1, alpha) * p * d0 * d1;
        }
    }
    const double c = c_dalpha_of(2, alpha);
    return 2.0 / c * acc / (4.0 * pi * pi);
}

double gagliardo_2d(const SampledFunction& f, double alpha) {
    if (!f.vanishes_at_edge()) throw Unsupported("2-D seminorm requires compact support");
    const long n0 = static_cast<long>(f.grid.n[0]), n1 = static_cast<long>(f.grid.n[1]);
    const double h = f.grid.h;
    const double a2 = 2.0 * alpha;
    const long kmax = std::max(n0, n1);
    // cell integrals of |t|^{-2-2a} at offset (k1, k2)
    std::vector<double> w(static_cast<std::size_t>((kmax + 1) * (kmax + 1)), 0.0);
    const GaussRule& g4 = gauss_legendre(4);
    for (long k1 = 0; k1 <= kmax; ++k1)
        for (long k2 = 0; k2 <= kmax; ++k2) {
            if (k1 == 0 && k2 == 0) continue;
            const long km = std::max(k1, k2);
            double val = 0.0;
            if (km > 8) {
                val = h * h * std::pow(h * h * static_cast<double>(k1 * k1 + k2 * k2), -1.0 - alpha);
            } else {
                const int sub = km <= 1 ? 8 : 2;
                const double hs = h / sub;
                for (int i1 = 0; i1 < sub; ++i1)
                    for (int i2 = 0; i2 < sub; ++i2)
                        for (std::size_t p = 0; p < g4.x.size(); ++p)
                            for (std::size_t q = 0; q < g4.x.size(); ++q) {
                                const double y1 = (k1 - 0.5) * h + (i1 + 0.5) * hs + 0.5 * hs * g4.x[p];
                                const double y2 = (k2 - 0.5) * h + (i2 + 0.5) * hs + 0.5 * hs * g4.x[q];
                                val += 0.25 * hs * hs * g4.w[p] * g4.w[q] *
                                       std::pow(y1 * y1 + y2 * y2, -1.0 - alpha);
                            }
            }
            w[static_cast<std::size_t>(k1 * (kmax + 1) + k2)] = val;
        }
    const double hc = 0.5 * h;
    const double self = 4.0 * gauss_integrate(
                                  [&](double th) { return std::pow(hc / std::cos(th), 2.0 - a2) / (2.0 - a2); }, 0.0,
                                  pi / 4, 20);  // (1/2) int_cell |t|^{-2a}
    auto v = [&](long a, long b) -> double {
        if (a < 0 || b < 0 || a >= n0 || b >= n1) return 0.0;
        return f.values[static_cast<std::size_t>(a * n1 + b)];
    };
    const double X0 = f.grid.lo[0], X1 = f.grid.hi(0), Y0 = f.grid.lo[1], Y1 = f.grid.hi(1);
    CompensatedSum total;
    for (long i = 0; i < n0; ++i)
        for (long j = 0; j < n1; ++j) {
            const double fi = v(i, j);
            const double gx = (v(i + 1, j) - v(i - 1, j)) / (2 * h), gy = (v(i, j + 1) - v(i, j - 1)) / (2 * h);
            double acc = (gx * gx + gy * gy) * self;
            for (long a = 0; a < n0; ++a)
                for (long b = 0; b < n1; ++b) {
                    if (a == i && b == j) continue;
                    const double dv = v(a, b) - fi;
                    if (dv == 0.0) continue;
                    acc += dv * dv * w[static_cast<std::size_t>(std::abs(a - i) * (kmax + 1) + std::abs(b - j))];
                }
            if (fi != 0.0) {
                // outside the box: polar integral of |t|^{-2-2a} beyond the boundary distance
                const auto p = f.grid.point(static_cast<std::size_t>(i * n1 + j));
                auto rho = [&](double th) {
                    const double c = std::cos(th), s = std::sin(th);
                    double r = 1e300;
                    if (c > 0) r = std::min(r, (X1 - p[0]) / c);
                    if (c < 0) r = std::min(r, (X0 - p[0]) / c);
                    if (s > 0) r = std::min(r, (Y1 - p[1]) / s);
                    if (s < 0) r = std::min(r, (Y0 - p[1]) / s);
                    return std::pow(r, -a2) / a2;
                };
                std::array<double, 6> brk{0.0,
                                          std::atan2(Y1 - p[1], X1 - p[0]),
                                          std::atan2(Y1 - p[1], X0 - p[0]),
                                          std::atan2(Y0 - p[1], X0 - p[0]) + 2 * pi,
                                          std::atan2(Y0 - p[1], X1 - p[0]) + 2 * pi,
                                          2 * pi};
                std::sort(brk.begin(), brk.end());
                double out = 0.0;
                for (std::size_t k = 0; k + 1 < brk.size(); ++k) out += gauss_integrate(rho, brk[k], brk[k + 1], 20);
                acc += 2.0 * fi * fi * out;  // (x, y) and (y, x) orderings
            }
            total.add(h * h * acc);
        }
    return total.value();
}

}  // namespace

double sobolev_seminorm(const SampledFunction& f, double alpha, SeminormMethod method) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw RangeError("alpha must lie in (0, 1)");
    const int d = f.grid.d;
    if (f.tail) {
        if (d != 1) throw Unsupported("tails are implemented for 1-D grids");
        if (!(f.tail->exponent > 0.5 - alpha))
            throw RangeError("tail decays too slowly for a finite seminorm");
    } else if (!f.vanishes_at_edge()) {
        throw TailRequired("function does not vanish at the grid edge and has no tail model");
    }
    if (d == 1) return method == SeminormMethod::fourier ? fourier_1d(f, alpha) : gagliardo_1d(f, alpha);
    return method == SeminormMethod::fourier ? fourier_2d(f, alpha) : gagliardo_2d(f, alpha);
}

NegativeNormResult negative_order_norm(const SampledFunction& f, const RieszParams& p, SeminormMethod method) {
    if (f.grid.d != 1) throw Unsupported("negative-order norm is implemented for 1-D grids");
    if (!f.vanishes_at_edge()) throw TailRequired("negative-order norm requires compact support");
    NegativeNormResult r;
    const std::size_t n = f.grid.n[0];
    const double h = f.grid.h;
    double mass = 0.0, absmass = 0.0;
    for (double v : f.values) {
        mass += v * h;
        absmass += std::abs(v) * h;
    }
    r.mean_zero_warning = p.s <= 0.0 && std::abs(mass) > 1e-10 * std::max(absmass, 1e-300);
    if (method == SeminormMethod::gagliardo) {
        std::vector<double> wk(n);
        for (std::size_t k = 0; k < n; ++k) wk[k] = cell_pair_weight_1d(static_cast<double>(k) * h, h, p.s);
        CompensatedSum acc;
        for (std::size_t i = 0; i < n; ++i) {
            if (f.values[i] == 0.0) continue;
            double row = 0.0;
            for (std::size_t j = 0; j < n; ++j) row += wk[i > j ? i - j : j - i] * f.values[j];
            acc.add(f.values[i] * row * h * h);
        }
        r.value = acc.value();
        return r;
    }
    // Fourier route: g^ = c_frac |xi|^{-2 alpha}.
    double dc = 0.0;
    const double S = spectral_sum_1d(f.values, h, 64, [&](double xi) { return std::pow(xi, -2.0 * p.alpha); }, &dc);
    const double corr = p.log_case() ? 0.0 : cusp_correction(-2.0 * p.alpha, n, 64, h, dc);
    r.value = p.c_frac / (2.0 * pi) * (S + corr);
    return r;
}

}  // namespace riesz
