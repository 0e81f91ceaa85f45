#include "optosense/mechanics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "optosense/units.hpp"

namespace optosense {

void MechanicalMode::validate() const {
    if (!(omega0 > 0.0) || !(gamma > 0.0) || !(mass > 0.0) || !std::isfinite(omega0 / gamma)) {
        throw std::invalid_argument("MechanicalMode: omega0, gamma and mass must be positive and finite");
    }
}

void SensorChannel::validate() const {
    mode.validate();
    if (!(beta > 0.0)) {
        throw std::invalid_argument("SensorChannel: beta must be positive");
    }
    if (!(alpha_flux >= 0.0)) {
        throw std::invalid_argument("SensorChannel: probe flux must be non-negative");
    }
    if (!(temperature >= 0.0)) {
        throw std::invalid_argument("SensorChannel: temperature must be non-negative");
    }
    if (signal) {
        if (const auto* tone = std::get_if<CoherentTone>(&*signal)) {
            if (!(tone->amplitude >= 0.0)) {
                throw std::invalid_argument("SensorChannel: tone amplitude must be non-negative");
            }
        } else {
            const auto& inc = std::get<IncoherentForce>(*signal);
            if (!(inc.psd >= 0.0) || !(inc.omega_hi > inc.omega_lo)) {
                throw std::invalid_argument("SensorChannel: incoherent force needs psd >= 0 and a non-empty band");
            }
        }
    }
}

std::complex<double> susceptibility(const MechanicalMode& mode, double omega) {
    const double detuning = (mode.omega0 - omega) * (mode.omega0 + omega);
    return (1.0 / mode.mass) / std::complex<double>(detuning, omega * mode.gamma);
}

double inverse_susceptibility_sq(const MechanicalMode& mode, double omega) {
    const double detuning = (mode.omega0 - omega) * (mode.omega0 + omega);
    const double damping = omega * mode.gamma;
    return mode.mass * mode.mass * (detuning * detuning + damping * damping);
}

double derive_beta(double coupling_g, double kappa) {
    if (!(coupling_g > 0.0) || !(kappa > 0.0)) {
        throw std::domain_error("derive_beta: G and kappa must be positive");
    }
    return 4.0 * std::numbers::sqrt2 * coupling_g / kappa;
}

double thermal_force_psd(const MechanicalMode& mode, double temperature) {
    return 2.0 * mode.gamma * mode.mass * kBoltzmann * temperature;
}

namespace {

void check_grid(std::span<const double> grid) {
    if (grid.empty()) {
        throw std::invalid_argument("output_psd: empty frequency grid");
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || (i > 0 && !(grid[i] > grid[i - 1]))) {
            throw std::invalid_argument("output_psd: grid must be positive and strictly increasing");
        }
    }
}

double bin_width_hz(std::span<const double> grid, std::size_t i) {
    if (grid.size() == 1) {
        return 1.0;
    }
    const double lo = i == 0 ? grid[0] : 0.5 * (grid[i - 1] + grid[i]);
    const double hi = i + 1 == grid.size() ? grid[i] : 0.5 * (grid[i] + grid[i + 1]);
    double w = hi - lo;
    if (i == 0 || i + 1 == grid.size()) {
        w *= 2.0;
    }
    return rad_to_hz(w);
}

}  // namespace

SpectrumGrid output_psd(const SensorChannel& ch, double noise_in, std::span<const double> omega_grid) {
    ch.validate();
    check_grid(omega_grid);

    SpectrumGrid out;
    out.unit = PsdUnit::quadrature;
    out.sides = Sidedness::symmetrized;
    out.omega.assign(omega_grid.begin(), omega_grid.end());
    out.psd.resize(omega_grid.size());

    const double gain = ch.alpha_flux * ch.beta * ch.beta;
    const double s_th = thermal_force_psd(ch.mode, ch.temperature);
    for (std::size_t i = 0; i < omega_grid.size(); ++i) {
        out.psd[i] = noise_in + gain * s_th / inverse_susceptibility_sq(ch.mode, omega_grid[i]);
    }

    if (!ch.signal) {
        return out;
    }
    const double lo = omega_grid.front();
    const double hi = omega_grid.back();
    if (const auto* tone = std::get_if<CoherentTone>(&*ch.signal)) {
        if (tone->omega < lo || tone->omega > hi) {
            throw std::out_of_range("output_psd: tone frequency outside the analysis grid");
        }
        std::size_t best = 0;
        for (std::size_t i = 1; i < omega_grid.size(); ++i) {
            if (std::abs(omega_grid[i] - tone->omega) < std::abs(omega_grid[best] - tone->omega)) {
                best = i;
            }
        }
        const double power = tone->amplitude * tone->amplitude / 4.0;
        out.psd[best] += gain * power / bin_width_hz(omega_grid, best) /
                         inverse_susceptibility_sq(ch.mode, omega_grid[best]);
    } else {
        const auto& inc = std::get<IncoherentForce>(*ch.signal);
        if (inc.omega_lo < lo || inc.omega_hi > hi) {
            throw std::out_of_range("output_psd: incoherent force band outside the analysis grid");
        }
        for (std::size_t i = 0; i < omega_grid.size(); ++i) {
            if (omega_grid[i] >= inc.omega_lo && omega_grid[i] <= inc.omega_hi) {
                out.psd[i] += gain * inc.psd / inverse_susceptibility_sq(ch.mode, omega_grid[i]);
            }
        }
    }
    return out;
}

}  // namespace optosense
