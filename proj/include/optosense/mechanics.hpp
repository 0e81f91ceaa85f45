#pragma once

#include <complex>
#include <optional>
#include <span>
#include <variant>

#include "optosense/spectrum.hpp"

namespace optosense {

struct MechanicalMode {
    double omega0 = 0.0;  // resonance, rad/s
    double gamma = 0.0;   // energy damping rate, rad/s
    double mass = 0.0;    // effective mass, kg

    double quality_factor() const { return omega0 / gamma; }
    void validate() const;
};

// Force tone F(t) = amplitude * cos(omega t + phase).
struct CoherentTone {
    double omega = 0.0;
    double amplitude = 0.0;  // N
    double phase = 0.0;
};

// White force noise confined to [omega_lo, omega_hi], same PSD convention as
// the thermal force.
struct IncoherentForce {
    double omega_lo = 0.0;
    double omega_hi = 0.0;
    double psd = 0.0;  // N^2/Hz
};

using SignalSpec = std::variant<CoherentTone, IncoherentForce>;

struct SensorChannel {
    MechanicalMode mode;
    double beta = 0.0;         // displacement-to-quadrature transduction, 1/m
    double alpha_flux = 0.0;   // alpha_i^2, photons/s
    double temperature = 0.0;  // K
    std::optional<SignalSpec> signal;

    void validate() const;
};

// chi(omega) = (1/m) / (Omega^2 - omega^2 + i omega Gamma)
std::complex<double> susceptibility(const MechanicalMode& mode, double omega);

// |chi(omega)|^-2 without cancellation in Omega^2 - omega^2.
double inverse_susceptibility_sq(const MechanicalMode& mode, double omega);

// beta = 4 sqrt(2) G / kappa
double derive_beta(double coupling_g, double kappa);

// 2 Gamma m kB T
double thermal_force_psd(const MechanicalMode& mode, double temperature);

// S_YY(omega) = S_in + alpha^2 beta^2 |chi|^2 [S_th + S_sig(omega)].
// A coherent tone puts amplitude^2/4 (half of the one-sided power) into the
// bin nearest its frequency, divided by that bin's width in Hz.
SpectrumGrid output_psd(const SensorChannel& ch, double noise_in, std::span<const double> omega_grid);

}  // namespace optosense
