#include "optosense/gaussian_probe.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace optosense {

double variance_from_db(double squeezing_db) {
    if (!(squeezing_db >= 0.0) || !std::isfinite(squeezing_db)) {
        throw std::domain_error("variance_from_db: squeezing must be a finite non-negative dB value");
    }
    return std::pow(10.0, -squeezing_db / 10.0);
}

double SqueezedSource::variance_factor() const { return variance_from_db(squeezing_db); }

SplitNetwork SplitNetwork::even(std::size_t arms, double efficiency) {
    if (arms == 0) {
        throw std::invalid_argument("SplitNetwork: at least one arm required");
    }
    SplitNetwork net;
    net.weights.assign(arms, 1.0 / static_cast<double>(arms));
    net.efficiency.assign(arms, efficiency);
    return net;
}

void SplitNetwork::validate() const {
    if (weights.empty()) {
        throw std::invalid_argument("SplitNetwork: at least one arm required");
    }
    if (efficiency.size() != weights.size()) {
        throw std::invalid_argument("SplitNetwork: efficiency and weight counts differ");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] >= 0.0)) {
            throw std::invalid_argument("SplitNetwork: negative split weight on arm " + std::to_string(i));
        }
        if (!(efficiency[i] >= 0.0 && efficiency[i] <= 1.0)) {
            throw std::invalid_argument("SplitNetwork: efficiency outside [0,1] on arm " + std::to_string(i));
        }
        total += weights[i];
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("SplitNetwork: split weights must sum to 1");
    }
}

QuadratureNoise::QuadratureNoise(std::size_t arms) : arms_(arms), cov_(arms * arms, 0.0) {}

QuadratureNoise QuadratureNoise::vacuum(std::size_t arms) {
    QuadratureNoise q(arms);
    for (std::size_t i = 0; i < arms; ++i) {
        q(i, i) = 0.5;
    }
    return q;
}

std::vector<double> QuadratureNoise::per_arm_variance() const {
    std::vector<double> d(arms_);
    for (std::size_t i = 0; i < arms_; ++i) {
        d[i] = (*this)(i, i);
    }
    return d;
}

std::vector<double> QuadratureNoise::cholesky() const {
    const std::size_t n = arms_;
    std::vector<double> l(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double diag = (*this)(j, j);
        for (std::size_t k = 0; k < j; ++k) {
            diag -= l[j * n + k] * l[j * n + k];
        }
        if (diag < 0.0) {
            if (diag < -1e-12 * (*this)(j, j)) {
                throw std::domain_error("QuadratureNoise: covariance is not positive semidefinite");
            }
            diag = 0.0;
        }
        const double ljj = std::sqrt(diag);
        l[j * n + j] = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = (*this)(i, j);
            for (std::size_t k = 0; k < j; ++k) {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = ljj > 0.0 ? s / ljj : 0.0;
        }
    }
    return l;
}

QuadratureNoise probe_noise(const SqueezedSource& source, const SplitNetwork& net) {
    net.validate();
    if (!(source.carrier_flux >= 0.0)) {
        throw std::invalid_argument("SqueezedSource: carrier flux must be non-negative");
    }
    const double v = source.variance_factor();
    const std::size_t m = net.arms();
    QuadratureNoise q(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double ti = net.weights[i];
        const double ei = net.efficiency[i];
        q(i, i) = ei * (ti * v / 2.0 + (1.0 - ti) / 2.0) + (1.0 - ei) / 2.0;
        for (std::size_t j = 0; j < m; ++j) {
            if (j != i) {
                const double tj = net.weights[j];
                const double ej = net.efficiency[j];
                q(i, j) = std::sqrt(ei * ej * ti * tj) * (v - 1.0) / 2.0;
            }
        }
    }
    return q;
}

QuadratureNoise coherent_noise(std::size_t arms) { return QuadratureNoise::vacuum(arms); }

double weighted_sum_variance(const QuadratureNoise& noise, std::span<const double> w) {
    if (w.size() != noise.arms()) {
        throw std::invalid_argument("weighted_sum_variance: weight count " + std::to_string(w.size()) +
                                    " does not match " + std::to_string(noise.arms()) + " arms");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        for (std::size_t j = 0; j < w.size(); ++j) {
            total += w[i] * w[j] * noise(i, j);
        }
    }
    return total;
}

}  // namespace optosense
