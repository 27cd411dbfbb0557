#pragma once

#include "rieszlab/kernel.hpp"

#include <array>
#include <string>
#include <vector>

namespace riesz {

// Confining potential V. Polynomials act on x in 1-D and on |x| in 2-D
// (radial); tabulated potentials interpolate linearly on a 1-D grid.
class Potential {
public:
    enum class Kind { polynomial, tabulated };

    static Potential polynomial(std::vector<double> coeffs);
    static Potential quadratic(double a = 1.0) { return polynomial({0.0, 0.0, a}); }
    static Potential tabulated(SampledFunction table);
    // "poly:c0,c1,c2,..." or "quadratic:a".
    static Potential parse(const std::string& spec);

    Kind kind() const { return kind_; }
    const std::vector<double>& coefficients() const { return coeffs_; }
    double value(std::array<double, 2> x, int d) const;
    double value(double x) const { return value({x, 0.0}, 1); }
    std::array<double, 2> gradient(std::array<double, 2> x, int d) const;
    double derivative(double x) const { return gradient({x, 0.0}, 1)[0]; }
    bool even() const;
    std::string describe() const;

private:
    Kind kind_ = Kind::polynomial;
    std::vector<double> coeffs_;
    SampledFunction table_;
};

}  // namespace riesz
