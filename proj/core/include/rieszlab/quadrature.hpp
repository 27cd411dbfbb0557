#pragma once

#include <cmath>
#include <limits>
#include <cstddef>
#include <span>
#include <vector>

namespace riesz {

struct GaussRule {
    std::vector<double> x;  // nodes on [-1, 1]
    std::vector<double> w;
};

// Gauss-Legendre rule with n in {2, 3, 4, 5, 6, 8, 10, 12, 16, 20, 30}.
const GaussRule& gauss_legendre(int n);

// Integrate f over [a, b] with an n-point rule.
template <class F>
double gauss_integrate(F&& f, double a, double b, int n = 8) {
    const GaussRule& r = gauss_legendre(n);
    const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t k = 0; k < r.x.size(); ++k) acc += r.w[k] * f(c + hw * r.x[k]);
    return acc * hw;
}

// Neumaier compensated accumulator; order-fixed, so results are reproducible.
class CompensatedSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

double compensated_sum(std::span<const double> v);

// Least-squares line y = a + b x; returns {a, b}.
struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double rms = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace riesz

namespace riesz {

// int_a^b f with geometric refinement toward a (integrable endpoint
// singularities or power-law behaviour near a).
template <class F>
double integrate_graded(F&& f, double a, double b, int levels = 48, int n = 8) {
    double acc = 0.0;
    double hi = b;
    const double len = b - a;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    for (int k = 0; k < levels; ++k) {
        const double lo = a + 0.5 * (hi - a);
        acc += gauss_integrate(f, lo, hi, n);
        hi = lo;
        // stop before the nodes collapse onto a in floating point
        if (std::abs(hi - a) < 1e-15 * std::abs(len) || std::abs(hi - a) < 64.0 * eps * std::abs(a)) break;
    }
    return acc;
}

// int_E^inf f(u) du for E > x0, using u - x0 = (E - x0) / w and graded Gauss in w.
template <class F>
double integrate_to_infinity(F&& f, double E, double x0, int levels = 60, int n = 8) {
    const double D = E - x0;
    auto g = [&](double w) { return f(x0 + D / w) * D / (w * w); };
    return integrate_graded(g, 0.0, 1.0, levels, n);
}

}  // namespace riesz
