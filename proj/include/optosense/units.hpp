#pragma once

#include <numbers>

namespace optosense {

inline constexpr double kBoltzmann = 1.380649e-23;      // J/K
inline constexpr double kPlanck = 6.62607015e-34;       // J s
inline constexpr double kSpeedOfLight = 299792458.0;    // m/s
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double hz_to_rad(double f_hz) { return kTwoPi * f_hz; }
inline constexpr double rad_to_hz(double omega) { return omega / kTwoPi; }

// Photon flux (photons/s) carried by an optical power at a given wavelength.
inline constexpr double power_to_flux(double power_w, double wavelength_m) {
    return power_w * wavelength_m / (kPlanck * kSpeedOfLight);
}

inline constexpr double flux_to_power(double flux, double wavelength_m) {
    return flux * kPlanck * kSpeedOfLight / wavelength_m;
}

inline constexpr double kDefaultWavelength = 1550e-9;

}  // namespace optosense
