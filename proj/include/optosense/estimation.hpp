#pragma once

#include <string>
#include <vector>

#include "optosense/gaussian_probe.hpp"
#include "optosense/mechanics.hpp"
#include "optosense/spectrum.hpp"

namespace optosense {

enum class ProbeKind { classical, entangled, optimal };

std::string to_string(ProbeKind kind);
ProbeKind probe_kind_from_string(const std::string& name);

// A sensor array read out by one probe family. The joint estimator averages
// the force-rescaled outputs with weight 1/M.
struct ArrayConfig {
    std::vector<SensorChannel> channels;
    ProbeKind kind = ProbeKind::classical;
    SqueezedSource source;    // ignored for classical probes
    SplitNetwork network;     // split used by entangled probes; losses also used by optimal
    std::vector<double> grid; // rad/s, strictly increasing

    std::size_t sensors() const { return channels.size(); }
    void validate() const;

    // Probe covariance for classical and entangled kinds (frequency-flat).
    QuadratureNoise input_noise() const;
    // Covariance at one frequency; only the optimal kind depends on omega.
    QuadratureNoise input_noise_at(double omega) const;

    ArrayConfig with_kind(ProbeKind k) const;
};

struct ForceNoiseTerms {
    double imprecision = 0.0;
    double thermal = 0.0;
    double total() const { return imprecision + thermal; }
};

// Per-sensor rescaling weights w_i = 1 / (alpha_i beta_i |chi_i(omega)|).
std::vector<double> force_weights(const ArrayConfig& cfg, double omega);

ForceNoiseTerms force_noise_terms(const ArrayConfig& cfg, double omega);

// S_FF(omega) of the averaged force, coherent signals excluded.
SpectrumGrid force_noise_psd(const ArrayConfig& cfg);

// Force noise with the squeezed direction re-aligned with w(omega) at every
// frequency; the attainable bound for a frequency-dependent entangled probe.
SpectrumGrid optimal_probe_bound(const ArrayConfig& cfg);

// Minimum of the shot-noise part of the classical two-sensor force PSD.
double omega_min_closed_form(const MechanicalMode& a, const MechanicalMode& b);

struct ForceMinimum {
    double s_min = 0.0;
    double omega_min = 0.0;
    std::size_t grid_index = 0;
};

ForceMinimum min_force_noise(const ArrayConfig& cfg);

// Small-detuning approximation of the minimum force-noise PSD,
// (m^2 / beta^2 alpha_c^2) Omega_bar^2 (Gamma_bar^2 + dOmega^2) S_Y0 + S_th_bar.
double min_force_noise_approx(const ArrayConfig& cfg);

struct FrequencyBand {
    double lo = 0.0;  // rad/s
    double hi = 0.0;
    double width() const { return hi - lo; }
};

// Contiguous band around omega_min where S_FF <= 2 S_min.
FrequencyBand band_3db(const ArrayConfig& cfg, const ForceMinimum& minimum);
double bandwidth_3db(const ArrayConfig& cfg);

enum class NoiseRegime { thermal_dominant, imprecision_dominant };
std::string to_string(NoiseRegime regime);

struct MetricsReport {
    double s_min = 0.0;          // N^2/Hz
    double omega_min = 0.0;      // rad/s
    double bandwidth_3db = 0.0;  // rad/s
    FrequencyBand band;
    double sensitivity = 0.0;    // 1/(N^2/Hz)
    double sbp = 0.0;            // sensitivity * bandwidth
    double sbp_approx = 0.0;     // closed-form approximation of the same product
    double s_min_approx = 0.0;
    NoiseRegime regime = NoiseRegime::imprecision_dominant;
};

MetricsReport sbp(const ArrayConfig& cfg);

// Joint phase-quadrature noise per mode, (1^T Sigma 1) / M. V/2 for an even
// lossless split, 1/2 for coherent probes.
double effective_quadrature_noise(const ArrayConfig& cfg);

// beta such that (1/2) / (alpha^2 beta^2 |chi(omega_ref)|^2) = target_floor.
double calibrate_beta(double target_floor, const SensorChannel& ch, double omega_ref);

}  // namespace optosense
