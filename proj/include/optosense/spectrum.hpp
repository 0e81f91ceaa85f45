#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace optosense {

enum class PsdUnit { quadrature, force };

// Symmetrized: vacuum quadrature noise reads 1/2 and the Langevin force reads
// 2*Gamma*m*kB*T. OneSided: integral over [0, fs/2] equals the variance of a
// real record, i.e. twice the symmetrized value.
enum class Sidedness { symmetrized, one_sided };

// Frequency axis in lab-frame angular frequency (rad/s).
struct SpectrumGrid {
    std::vector<double> omega;
    std::vector<double> psd;
    PsdUnit unit = PsdUnit::quadrature;
    Sidedness sides = Sidedness::symmetrized;

    std::size_t size() const { return omega.size(); }

    SpectrumGrid symmetrized() const;
    SpectrumGrid one_sided() const;
    std::string unit_label() const;
};

std::vector<double> linear_grid(double lo, double hi, std::size_t points);

}  // namespace optosense
