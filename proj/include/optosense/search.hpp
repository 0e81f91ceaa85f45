#pragma once

#include <span>
#include <vector>

#include "optosense/estimation.hpp"
#include "optosense/timedomain.hpp"

namespace optosense {

// Running noise-force energy E_N(t) = (1/t) int_0^t F_N^2 dt inside a band,
// in record power units (one-sided spectra).
struct EnergyTrace {
    std::vector<double> times;           // s
    std::vector<double> e_n;             // N^2
    std::vector<double> std_e_n;         // N^2
    std::vector<double> efsr;            // sqrt(std_e_n), N
    std::vector<double> efsr_per_rthz;   // sqrt(std_e_n / b_eff), N/sqrt(Hz)
    FrequencyBand band;                  // rad/s
    double e_bar = 0.0;                  // N^2
    double b_eff = 0.0;                  // noise-equivalent bandwidth, Hz
    double variance_rate = 0.0;          // int S^2 df, so that var(E_N(t)) = variance_rate / t
};

// Radiometer model: mean int_band S df, std = e_bar / sqrt(b_eff t) with
// b_eff = (int S)^2 / int S^2 taken from the actual force-noise shape.
EnergyTrace energy_trace_analytic(const ArrayConfig& cfg, FrequencyBand band, std::span<const double> times);

// E_N at each requested time of one force stream.
std::vector<double> energy_running_mean(std::span<const double> force, double sample_rate,
                                        std::span<const double> times);

// Mean and sample standard deviation across trials.
EnergyTrace energy_trace_ensemble(const std::vector<std::vector<double>>& per_trial, std::span<const double> times,
                                  FrequencyBand band);

// Simulates plan.trials records, band-passes the force-rescaled joint record
// and builds the ensemble trace.
EnergyTrace energy_trace_montecarlo(const ArrayConfig& cfg, const SimPlan& plan, FrequencyBand band,
                                    std::span<const double> times);

std::vector<double> efsr(const EnergyTrace& trace);

// true where signal_energy > std(E_N(t))
std::vector<bool> detectability(const EnergyTrace& trace, double signal_energy);

// Integration time at which the radiometer EFSR reaches target_efsr (N).
double time_to_resolution(const EnergyTrace& trace, double target_efsr);

// Integration time at which std(E_N) falls to signal_energy.
double time_to_detection(const EnergyTrace& trace, double signal_energy);

std::vector<double> log_spaced(double lo, double hi, std::size_t points);

}  // namespace optosense
