#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace optosense {

// Squeezed vacuum carried on a bright carrier. Only the phase quadrature is
// tracked; anti-squeezing of the amplitude quadrature is not modelled.
struct SqueezedSource {
    double squeezing_db = 0.0;  // below shot noise, >= 0
    double carrier_flux = 0.0;  // alpha_c^2, photons/s

    double variance_factor() const;
};

// Passive split of one input mode into M arms followed by detection-side loss.
struct SplitNetwork {
    std::vector<double> weights;     // intensity fractions t_i, sum to 1
    std::vector<double> efficiency;  // power transmission eta_i in [0, 1]

    std::size_t arms() const { return weights.size(); }

    static SplitNetwork even(std::size_t arms, double efficiency = 1.0);
    void validate() const;
};

// Phase-quadrature covariance across arms, white over the band. Vacuum gives
// 1/2 on the diagonal.
class QuadratureNoise {
public:
    QuadratureNoise() = default;
    explicit QuadratureNoise(std::size_t arms);

    std::size_t arms() const { return arms_; }
    double operator()(std::size_t i, std::size_t j) const { return cov_[i * arms_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return cov_[i * arms_ + j]; }

    std::vector<double> per_arm_variance() const;

    // Lower-triangular factor L with L L^T = this, row-major.
    std::vector<double> cholesky() const;

    static QuadratureNoise vacuum(std::size_t arms);

private:
    std::size_t arms_ = 0;
    std::vector<double> cov_;
};

// 10^(-dB/10). Throws std::domain_error for negative input.
double variance_from_db(double squeezing_db);

QuadratureNoise probe_noise(const SqueezedSource& source, const SplitNetwork& net);

// Coherent probes on every arm: losses leave vacuum unchanged.
QuadratureNoise coherent_noise(std::size_t arms);

// sum_ij w_i w_j Cov(Y_i, Y_j)
double weighted_sum_variance(const QuadratureNoise& noise, std::span<const double> w);

}  // namespace optosense
