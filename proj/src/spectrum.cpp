#include "optosense/spectrum.hpp"

#include <stdexcept>

namespace optosense {

SpectrumGrid SpectrumGrid::symmetrized() const {
    if (sides == Sidedness::symmetrized) {
        return *this;
    }
    SpectrumGrid out = *this;
    for (double& v : out.psd) {
        v *= 0.5;
    }
    out.sides = Sidedness::symmetrized;
    return out;
}

SpectrumGrid SpectrumGrid::one_sided() const {
    if (sides == Sidedness::one_sided) {
        return *this;
    }
    SpectrumGrid out = *this;
    for (double& v : out.psd) {
        v *= 2.0;
    }
    out.sides = Sidedness::one_sided;
    return out;
}

std::string SpectrumGrid::unit_label() const {
    return unit == PsdUnit::force ? "N^2/Hz" : "quadrature^2/Hz";
}

std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
    if (points < 2 || !(hi > lo)) {
        throw std::invalid_argument("linear_grid: need hi > lo and at least two points");
    }
    std::vector<double> g(points);
    const double step = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
        g[i] = lo + step * static_cast<double>(i);
    }
    g.back() = hi;
    return g;
}

}  // namespace optosense
