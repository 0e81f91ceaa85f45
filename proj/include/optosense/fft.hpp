#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace optosense::fft {

// Unnormalised real-to-complex transform, n/2 + 1 bins.
std::vector<std::complex<double>> forward(std::span<const double> x);

// Inverse of forward() including the 1/n factor.
std::vector<double> inverse(std::span<const std::complex<double>> bins, std::size_t n);

// Reusable plan for many transforms of one length (Welch segments).
class RealPlan {
public:
    explicit RealPlan(std::size_t n);
    ~RealPlan();
    RealPlan(const RealPlan&) = delete;
    RealPlan& operator=(const RealPlan&) = delete;

    std::size_t size() const { return n_; }
    // Writes n/2 + 1 bins of |X_k|^2.
    void power(std::span<const double> x, std::span<double> out);

private:
    std::size_t n_;
    double* in_;
    void* out_;
    void* plan_;
};

}  // namespace optosense::fft
