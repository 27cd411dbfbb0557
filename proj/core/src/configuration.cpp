#include "rieszlab/configuration.hpp"

#include "rieszlab/errors.hpp"

#include <cmath>
#include <limits>

namespace riesz {

double distance(std::array<double, 2> a, std::array<double, 2> b, int d) {
    return d == 1 ? std::abs(a[0] - b[0]) : std::hypot(a[0] - b[0], a[1] - b[1]);
}

Configuration::Configuration(int dim, std::vector<double> c) : d(dim), coords(std::move(c)) {
    if (d != 1 && d != 2) throw ValidationError("configuration dimension must be 1 or 2");
    if (coords.size() % static_cast<std::size_t>(d) != 0)
        throw ValidationError("coordinate count is not a multiple of the dimension");
}

std::array<double, 2> Configuration::point(std::size_t i) const {
    if (d == 1) return {coords[i], 0.0};
    return {coords[2 * i], coords[2 * i + 1]};
}

void Configuration::set_point(std::size_t i, std::array<double, 2> x) {
    if (d == 1) {
        coords[i] = x[0];
    } else {
        coords[2 * i] = x[0];
        coords[2 * i + 1] = x[1];
    }
}

double Configuration::distance(std::size_t i, std::size_t j) const {
    return riesz::distance(point(i), point(j), d);
}

std::vector<double> Configuration::nearest_neighbor_distances() const {
    const std::size_t n = size();
    std::vector<double> nn(n, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r = distance(i, j);
            nn[i] = std::min(nn[i], r);
            nn[j] = std::min(nn[j], r);
        }
    return nn;
}

Configuration Configuration::scaled(double lambda) const {
    Configuration c = *this;
    for (double& v : c.coords) v *= lambda;
    return c;
}

}  // namespace riesz
