#include "optosense/search.hpp"

#include <cmath>
#include <stdexcept>

#include "optosense/parallel.hpp"
#include "optosense/units.hpp"

namespace optosense {

namespace {

void check_band(const FrequencyBand& band) {
    if (!(band.hi > band.lo) || !(band.lo > 0.0)) {
        throw std::invalid_argument("energy estimator: empty or invalid band");
    }
}

void check_times(std::span<const double> times) {
    if (times.empty()) {
        throw std::invalid_argument("energy estimator: no integration times");
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] > 0.0) || (i > 0 && !(times[i] > times[i - 1]))) {
            throw std::invalid_argument("energy estimator: times must be positive and strictly increasing");
        }
    }
}

void fill_resolution(EnergyTrace& trace) {
    trace.efsr.resize(trace.times.size());
    trace.efsr_per_rthz.resize(trace.times.size());
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        trace.efsr[i] = std::sqrt(trace.std_e_n[i]);
        trace.efsr_per_rthz[i] = trace.b_eff > 0.0 ? std::sqrt(trace.std_e_n[i] / trace.b_eff) : 0.0;
    }
}

}  // namespace

std::vector<double> log_spaced(double lo, double hi, std::size_t points) {
    if (!(lo > 0.0) || !(hi > lo) || points < 2) {
        throw std::invalid_argument("log_spaced: need 0 < lo < hi and at least two points");
    }
    std::vector<double> out(points);
    const double step = std::log(hi / lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
        out[i] = lo * std::exp(step * static_cast<double>(i));
    }
    out.back() = hi;
    return out;
}

EnergyTrace energy_trace_analytic(const ArrayConfig& cfg, FrequencyBand band, std::span<const double> times) {
    check_band(band);
    check_times(times);
    cfg.validate();

    // composite Simpson over the band in Hz, one-sided spectrum
    constexpr std::size_t intervals = 4096;
    const double h = (band.hi - band.lo) / intervals;
    double mean = 0.0;
    double square = 0.0;
    for (std::size_t i = 0; i <= intervals; ++i) {
        const double omega = band.lo + h * static_cast<double>(i);
        const double s = 2.0 * force_noise_terms(cfg, omega).total();
        const double weight = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        mean += weight * s;
        square += weight * s * s;
    }
    const double df = rad_to_hz(h) / 3.0;
    mean *= df;
    square *= df;

    EnergyTrace trace;
    trace.band = band;
    trace.times.assign(times.begin(), times.end());
    trace.e_bar = mean;
    trace.variance_rate = square;
    trace.b_eff = square > 0.0 ? mean * mean / square : 0.0;
    trace.e_n.assign(times.size(), mean);
    trace.std_e_n.resize(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        trace.std_e_n[i] = std::sqrt(square / times[i]);
    }
    fill_resolution(trace);
    return trace;
}

std::vector<double> energy_running_mean(std::span<const double> force, double sample_rate,
                                        std::span<const double> times) {
    check_times(times);
    std::vector<double> out(times.size());
    double acc = 0.0;
    std::size_t consumed = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto upto = static_cast<std::size_t>(std::llround(times[i] * sample_rate));
        if (upto == 0 || upto > force.size()) {
            throw std::out_of_range("energy_running_mean: integration time outside the record");
        }
        for (; consumed < upto; ++consumed) {
            acc += force[consumed] * force[consumed];
        }
        out[i] = acc / static_cast<double>(upto);
    }
    return out;
}

EnergyTrace energy_trace_ensemble(const std::vector<std::vector<double>>& per_trial, std::span<const double> times,
                                  FrequencyBand band) {
    check_times(times);
    if (per_trial.size() < 2) {
        throw std::invalid_argument("energy_trace_ensemble: need at least two trials");
    }
    EnergyTrace trace;
    trace.band = band;
    trace.times.assign(times.begin(), times.end());
    trace.e_n.assign(times.size(), 0.0);
    trace.std_e_n.assign(times.size(), 0.0);
    const double n = static_cast<double>(per_trial.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        double mean = 0.0;
        for (const auto& tr : per_trial) mean += tr.at(i);
        mean /= n;
        double var = 0.0;
        for (const auto& tr : per_trial) var += (tr[i] - mean) * (tr[i] - mean);
        var /= n - 1.0;
        trace.e_n[i] = mean;
        trace.std_e_n[i] = std::sqrt(var);
    }
    trace.e_bar = trace.e_n.back();
    // b_eff from the radiometer relation at the longest time
    const double last = trace.std_e_n.back();
    trace.variance_rate = last * last * times.back();
    trace.b_eff = trace.variance_rate > 0.0 ? trace.e_bar * trace.e_bar / trace.variance_rate : 0.0;
    fill_resolution(trace);
    return trace;
}

EnergyTrace energy_trace_montecarlo(const ArrayConfig& cfg, const SimPlan& plan, FrequencyBand band,
                                    std::span<const double> times) {
    check_band(band);
    check_times(times);
    validate_plan(cfg, plan);
    std::vector<std::vector<double>> per_trial(plan.trials);
    parallel_for(plan.trials, [&](std::size_t t) {
        const auto rec = simulate(cfg, plan, t);
        const auto force = joint_record(rec, JointMode::average_force, &cfg, band);
        per_trial[t] = energy_running_mean(force, rec.sample_rate, times);
    });
    return energy_trace_ensemble(per_trial, times, band);
}

std::vector<double> efsr(const EnergyTrace& trace) {
    std::vector<double> out(trace.std_e_n.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::sqrt(trace.std_e_n[i]);
    }
    return out;
}

std::vector<bool> detectability(const EnergyTrace& trace, double signal_energy) {
    if (!(signal_energy >= 0.0)) {
        throw std::invalid_argument("detectability: signal energy must be non-negative");
    }
    std::vector<bool> out(trace.std_e_n.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = signal_energy > trace.std_e_n[i];
    }
    return out;
}

double time_to_resolution(const EnergyTrace& trace, double target_efsr) {
    if (!(target_efsr > 0.0)) {
        throw std::invalid_argument("time_to_resolution: target must be positive");
    }
    const double target_std = target_efsr * target_efsr;
    return trace.variance_rate / (target_std * target_std);
}

double time_to_detection(const EnergyTrace& trace, double signal_energy) {
    if (!(signal_energy > 0.0)) {
        throw std::invalid_argument("time_to_detection: signal energy must be positive");
    }
    return trace.variance_rate / (signal_energy * signal_energy);
}

}  // namespace optosense
