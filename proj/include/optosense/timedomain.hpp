#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "optosense/estimation.hpp"
#include "optosense/spectrum.hpp"

namespace optosense {

// Monte Carlo plan. Records are band-pass sampled: the lab-frame oscillators
// are advanced with their exact one-step map at sample_rate, so the band
// around the resonances appears shifted down by an integer multiple of
// sample_rate (the local oscillator).
struct SimPlan {
    double sample_rate = 51200.0;  // Hz
    double duration = 1.0;         // s
    std::uint64_t seed = 1;
    std::size_t segment_length = 2048;
    double overlap = 0.5;
    std::size_t trials = 1;
    double center_omega = 0.0;     // rad/s; 0 selects the mean resonance

    std::size_t samples() const;
};

// Sample rate close to approx_rate that puts center_hz at a quarter of the
// rate inside its Nyquist zone.
double bandpass_sample_rate(double center_hz, double approx_rate);

struct Record {
    std::vector<std::vector<double>> quadrature;  // per-sensor homodyne output
    std::vector<std::vector<double>> position;    // per-sensor displacement, m
    double sample_rate = 0.0;
    double lo_hz = 0.0;  // lab frequency of record DC

    std::size_t sensors() const { return quadrature.size(); }
    std::size_t samples() const { return quadrature.empty() ? 0 : quadrature.front().size(); }
    std::vector<double> time_axis() const;
    double lab_omega(double record_hz) const;
    void validate() const;
};

// Checks the plan against an array; throws std::invalid_argument.
void validate_plan(const ArrayConfig& cfg, const SimPlan& plan);

// Local oscillator frequency (Hz) used for cfg under plan.
double local_oscillator_hz(const ArrayConfig& cfg, const SimPlan& plan);

Record simulate(const ArrayConfig& cfg, const SimPlan& plan, std::size_t trial = 0);

// One record per trial, trial i seeded from (plan.seed, i).
std::vector<Record> simulate_trials(const ArrayConfig& cfg, const SimPlan& plan);

// One-sided Hann-windowed averaged periodogram.
SpectrumGrid welch_psd(std::span<const double> samples, double sample_rate, std::size_t segment_length,
                       double overlap, double lo_hz = 0.0, PsdUnit unit = PsdUnit::quadrature);

// Per-sensor Welch spectra of a record.
std::vector<SpectrumGrid> welch_psd(const Record& rec, const SimPlan& plan);

std::size_t welch_segments(std::size_t samples, std::size_t segment_length, double overlap);

enum class JointMode { sum, average_force };

// Sum of the quadrature streams, or the force-rescaled average
// (1/M) sum_i Y_i / (alpha_i beta_i |chi_i|) applied per frequency bin.
// The optional band (lab rad/s) keeps only bins inside it.
std::vector<double> joint_record(const Record& rec, JointMode mode, const ArrayConfig* cfg = nullptr,
                                 std::optional<FrequencyBand> band = std::nullopt);

// Analytic S_YY of each sensor and of the summed record on the Welch grid.
SpectrumGrid analytic_output_psd(const ArrayConfig& cfg, std::size_t sensor, std::span<const double> omega);
SpectrumGrid analytic_joint_sum_psd(const ArrayConfig& cfg, std::span<const double> omega);

void write_record_csv(const std::filesystem::path& path, const Record& rec);

}  // namespace optosense
