#include "optosense/fft.hpp"

#include <cstring>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

namespace optosense::fft {

namespace {
// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

std::vector<std::complex<double>> forward(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n == 0) {
        return {};
    }
    std::vector<double> in(x.begin(), x.end());
    std::vector<std::complex<double>> out(n / 2 + 1);
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                    reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

std::vector<double> inverse(std::span<const std::complex<double>> bins, std::size_t n) {
    if (bins.size() != n / 2 + 1) {
        throw std::invalid_argument("fft::inverse: bin count does not match length");
    }
    std::vector<std::complex<double>> in(bins.begin(), bins.end());
    std::vector<double> out(n);
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_c2r_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(in.data()),
                                    out.data(), FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    const double scale = 1.0 / static_cast<double>(n);
    for (double& v : out) {
        v *= scale;
    }
    return out;
}

RealPlan::RealPlan(std::size_t n) : n_(n) {
    std::lock_guard lock(planner_mutex());
    in_ = fftw_alloc_real(n);
    auto* out = fftw_alloc_complex(n / 2 + 1);
    out_ = out;
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out, FFTW_ESTIMATE);
}

RealPlan::~RealPlan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
    fftw_free(in_);
    fftw_free(out_);
}

void RealPlan::power(std::span<const double> x, std::span<double> out) {
    if (x.size() != n_ || out.size() != n_ / 2 + 1) {
        throw std::invalid_argument("RealPlan::power: size mismatch");
    }
    std::memcpy(in_, x.data(), n_ * sizeof(double));
    fftw_execute(static_cast<fftw_plan>(plan_));
    const auto* bins = static_cast<const fftw_complex*>(out_);
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = bins[k][0] * bins[k][0] + bins[k][1] * bins[k][1];
    }
}

}  // namespace optosense::fft
