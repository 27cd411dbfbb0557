#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace riesz {

// y_i = sum_j w(i - j) x_j on a 1-D or 2-D index box, applied by zero-padded
// FFT convolution. The stencil is sampled once at construction.
class ToeplitzOperator {
public:
    ToeplitzOperator(std::size_t n, const std::function<double(long)>& w);
    ToeplitzOperator(std::size_t n0, std::size_t n1, const std::function<double(long, long)>& w);
    ~ToeplitzOperator();
    ToeplitzOperator(ToeplitzOperator&&) noexcept;
    ToeplitzOperator& operator=(ToeplitzOperator&&) noexcept;

    std::size_t size() const { return n0_ * n1_; }
    void apply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> apply(std::span<const double> x) const;
    // Stencil value at offset (k, l), as sampled.
    double weight(long k, long l = 0) const;

private:
    struct Impl;
    std::size_t n0_ = 0, n1_ = 1;
    std::unique_ptr<Impl> impl_;
};

}  // namespace riesz
