#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace riesz {

// N points in R^d stored row-major (x0, y0, x1, y1, ... in 2-D).
struct Configuration {
    int d = 1;
    std::vector<double> coords;

    Configuration() = default;
    Configuration(int dim, std::vector<double> c);
    static Configuration line(std::vector<double> x) { return Configuration(1, std::move(x)); }

    std::size_t size() const { return coords.size() / static_cast<std::size_t>(d); }
    std::array<double, 2> point(std::size_t i) const;
    void set_point(std::size_t i, std::array<double, 2> x);
    double distance(std::size_t i, std::size_t j) const;
    // Distance from each point to its nearest neighbour (infinity for N = 1).
    std::vector<double> nearest_neighbor_distances() const;
    // Dilation x -> lambda x.
    Configuration scaled(double lambda) const;
};

double distance(std::array<double, 2> a, std::array<double, 2> b, int d);

}  // namespace riesz
