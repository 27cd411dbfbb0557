#include "rieszlab/toeplitz.hpp"

#include "fft_lock.hpp"
#include "rieszlab/errors.hpp"

#include <fftw3.h>

#include <complex>
#include <mutex>

namespace riesz {

namespace detail {
std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace detail

struct ToeplitzOperator::Impl {
    std::size_t L0 = 0, L1 = 1;  // padded box
    bool two_d = false;
    std::vector<std::complex<double>> kernel_hat;
    std::vector<double> stencil;  // (2 n0 - 1) x (2 n1 - 1), row major
    long s0 = 0, s1 = 0;
    // Scratch buffers and plans are per operator; apply() is guarded so one
    // operator may be shared between threads.
    mutable std::mutex mtx;
    mutable std::vector<double> buf;
    mutable std::vector<std::complex<double>> spec;
    fftw_plan fwd = nullptr, bwd = nullptr;

    std::size_t nspec() const { return two_d ? L0 * (L1 / 2 + 1) : L0 / 2 + 1; }

    void make_plans() {
        std::lock_guard<std::mutex> lock(detail::fftw_mutex());
        buf.assign(L0 * L1, 0.0);
        spec.assign(nspec(), {});
        auto* cs = reinterpret_cast<fftw_complex*>(spec.data());
        if (two_d) {
            fwd = fftw_plan_dft_r2c_2d(static_cast<int>(L0), static_cast<int>(L1), buf.data(), cs, FFTW_ESTIMATE);
            bwd = fftw_plan_dft_c2r_2d(static_cast<int>(L0), static_cast<int>(L1), cs, buf.data(), FFTW_ESTIMATE);
        } else {
            fwd = fftw_plan_dft_r2c_1d(static_cast<int>(L0), buf.data(), cs, FFTW_ESTIMATE);
            bwd = fftw_plan_dft_c2r_1d(static_cast<int>(L0), cs, buf.data(), FFTW_ESTIMATE);
        }
    }
    ~Impl() {
        std::lock_guard<std::mutex> lock(detail::fftw_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
    }
};

namespace {
std::size_t fft_length(std::size_t n) {
    std::size_t L = 1;
    while (L < 2 * n) L <<= 1;
    return L;
}
}  // namespace

ToeplitzOperator::ToeplitzOperator(std::size_t n, const std::function<double(long)>& w)
    : n0_(n), n1_(1), impl_(std::make_unique<Impl>()) {
    if (n == 0) throw ValidationError("Toeplitz operator needs n > 0");
    auto& I = *impl_;
    I.L0 = fft_length(n);
    I.s0 = static_cast<long>(n) - 1;
    I.stencil.resize(2 * n - 1);
    for (long k = -I.s0; k <= I.s0; ++k) I.stencil[static_cast<std::size_t>(k + I.s0)] = w(k);
    I.make_plans();
    std::fill(I.buf.begin(), I.buf.end(), 0.0);
    for (long k = -I.s0; k <= I.s0; ++k) {
        const std::size_t idx = k >= 0 ? static_cast<std::size_t>(k) : I.L0 - static_cast<std::size_t>(-k);
        I.buf[idx] = I.stencil[static_cast<std::size_t>(k + I.s0)];
    }
    fftw_execute(I.fwd);
    I.kernel_hat = I.spec;
}

ToeplitzOperator::ToeplitzOperator(std::size_t n0, std::size_t n1, const std::function<double(long, long)>& w)
    : n0_(n0), n1_(n1), impl_(std::make_unique<Impl>()) {
    if (n0 == 0 || n1 == 0) throw ValidationError("Toeplitz operator needs a non-empty box");
    auto& I = *impl_;
    I.two_d = true;
    I.L0 = fft_length(n0);
    I.L1 = fft_length(n1);
    I.s0 = static_cast<long>(n0) - 1;
    I.s1 = static_cast<long>(n1) - 1;
    const std::size_t w1 = 2 * n1 - 1;
    I.stencil.resize((2 * n0 - 1) * w1);
    for (long k = -I.s0; k <= I.s0; ++k)
        for (long l = -I.s1; l <= I.s1; ++l)
            I.stencil[static_cast<std::size_t>(k + I.s0) * w1 + static_cast<std::size_t>(l + I.s1)] = w(k, l);
    I.make_plans();
    std::fill(I.buf.begin(), I.buf.end(), 0.0);
    for (long k = -I.s0; k <= I.s0; ++k)
        for (long l = -I.s1; l <= I.s1; ++l) {
            const std::size_t a = k >= 0 ? static_cast<std::size_t>(k) : I.L0 - static_cast<std::size_t>(-k);
            const std::size_t b = l >= 0 ? static_cast<std::size_t>(l) : I.L1 - static_cast<std::size_t>(-l);
            I.buf[a * I.L1 + b] =
                I.stencil[static_cast<std::size_t>(k + I.s0) * w1 + static_cast<std::size_t>(l + I.s1)];
        }
    fftw_execute(I.fwd);
    I.kernel_hat = I.spec;
}

ToeplitzOperator::~ToeplitzOperator() = default;
ToeplitzOperator::ToeplitzOperator(ToeplitzOperator&&) noexcept = default;
ToeplitzOperator& ToeplitzOperator::operator=(ToeplitzOperator&&) noexcept = default;

double ToeplitzOperator::weight(long k, long l) const {
    const auto& I = *impl_;
    if (std::abs(k) > I.s0 || std::abs(l) > I.s1) return 0.0;
    const std::size_t w1 = 2 * n1_ - 1;
    return I.stencil[static_cast<std::size_t>(k + I.s0) * w1 + static_cast<std::size_t>(l + I.s1)];
}

void ToeplitzOperator::apply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != size() || y.size() != size()) throw ValidationError("Toeplitz apply: size mismatch");
    auto& I = *impl_;
    std::lock_guard<std::mutex> lock(I.mtx);
    std::fill(I.buf.begin(), I.buf.end(), 0.0);
    for (std::size_t i = 0; i < n0_; ++i)
        for (std::size_t j = 0; j < n1_; ++j) I.buf[i * I.L1 + j] = x[i * n1_ + j];
    fftw_execute(I.fwd);
    for (std::size_t k = 0; k < I.spec.size(); ++k) I.spec[k] *= I.kernel_hat[k];
    fftw_execute(I.bwd);
    const double scale = 1.0 / static_cast<double>(I.L0 * I.L1);
    for (std::size_t i = 0; i < n0_; ++i)
        for (std::size_t j = 0; j < n1_; ++j) y[i * n1_ + j] = I.buf[i * I.L1 + j] * scale;
}

std::vector<double> ToeplitzOperator::apply(std::span<const double> x) const {
    std::vector<double> y(size());
    apply(x, y);
    return y;
}

}  // namespace riesz
