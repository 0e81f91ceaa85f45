#include "optosense/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace optosense {

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("loglog_slope: need two equally sized series of length >= 2");
    }
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
            throw std::domain_error("loglog_slope: values must be positive");
        }
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) {
        throw std::domain_error("loglog_slope: degenerate abscissa");
    }
    return (n * sxy - sx * sy) / denom;
}

double rms_relative_deviation(std::span<const double> measured, std::span<const double> reference) {
    if (measured.size() != reference.size() || measured.empty()) {
        throw std::invalid_argument("rms_relative_deviation: size mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < measured.size(); ++i) {
        const double r = (measured[i] - reference[i]) / reference[i];
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(measured.size()));
}

double to_db(double ratio) { return 10.0 * std::log10(ratio); }

}  // namespace optosense
