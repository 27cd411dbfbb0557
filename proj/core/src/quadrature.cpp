#include "rieszlab/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <map>
#include <mutex>
#include <stdexcept>

namespace riesz {

namespace {

template <unsigned N>
GaussRule make_rule() {
    using Q = boost::math::quadrature::gauss<double, N>;
    const auto& a = Q::abscissa();
    const auto& w = Q::weights();
    GaussRule r;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k] == 0.0) {
            r.x.push_back(0.0);
            r.w.push_back(w[k]);
        } else {
            r.x.push_back(a[k]);
            r.w.push_back(w[k]);
            r.x.push_back(-a[k]);
            r.w.push_back(w[k]);
        }
    }
    return r;
}

GaussRule build(int n) {
    switch (n) {
        case 2: return make_rule<2>();
        case 3: return make_rule<3>();
        case 4: return make_rule<4>();
        case 5: return make_rule<5>();
        case 6: return make_rule<6>();
        case 8: return make_rule<8>();
        case 10: return make_rule<10>();
        case 12: return make_rule<12>();
        case 16: return make_rule<16>();
        case 20: return make_rule<20>();
        case 30: return make_rule<30>();
        default: throw std::invalid_argument("unsupported Gauss-Legendre order");
    }
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build(n)).first;
    return it->second;
}

double compensated_sum(std::span<const double> v) {
    CompensatedSum acc;
    for (double x : v) acc.add(x);
    return acc.value();
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("fit_line needs at least two points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double r2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - f.intercept - f.slope * x[i];
        r2 += e * e;
    }
    f.rms = std::sqrt(r2 / static_cast<double>(n));
    return f;
}

}  // namespace riesz
