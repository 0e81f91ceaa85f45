#include "optosense/timedomain.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "optosense/fft.hpp"
#include "optosense/parallel.hpp"
#include "optosense/units.hpp"

namespace optosense {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

double center_hz(const ArrayConfig& cfg, const SimPlan& plan) {
    if (plan.center_omega > 0.0) {
        return rad_to_hz(plan.center_omega);
    }
    double mean = 0.0;
    for (const auto& ch : cfg.channels) {
        mean += ch.mode.omega0;
    }
    return rad_to_hz(mean / static_cast<double>(cfg.channels.size()));
}

std::mt19937_64 trial_engine(std::uint64_t seed, std::size_t trial) {
    const auto t = static_cast<std::uint64_t>(trial);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(t >> 32), 0x6f707473u};
    return std::mt19937_64(seq);
}

// Exact one-step map of a viscously damped oscillator driven by a white
// Langevin force: state (x, v) advances as Phi*state + chol(Q)*n.
struct OscillatorStep {
    double phi[2][2] = {};
    double chol[2][2] = {};
    double sigma_x = 0.0;
    double sigma_v = 0.0;

    OscillatorStep(const MechanicalMode& mode, double temperature, double dt) {
        const double g = 0.5 * mode.gamma;
        const double wd = std::sqrt(mode.omega0 * mode.omega0 - g * g);
        const double c = std::cos(wd * dt);
        const double s = std::sin(wd * dt);
        const double e = std::exp(-g * dt);
        phi[0][0] = e * (c + g / wd * s);
        phi[0][1] = e * s / wd;
        phi[1][0] = -e * mode.omega0 * mode.omega0 * s / wd;
        phi[1][1] = e * (c - g / wd * s);

        // stationary covariance diag(kT/(m W^2), kT/m); Q = P - Phi P Phi^T
        const double px = kBoltzmann * temperature / (mode.mass * mode.omega0 * mode.omega0);
        const double pv = kBoltzmann * temperature / mode.mass;
        sigma_x = std::sqrt(px);
        sigma_v = std::sqrt(pv);
        const double q00 = px - (phi[0][0] * phi[0][0] * px + phi[0][1] * phi[0][1] * pv);
        const double q01 = -(phi[0][0] * phi[1][0] * px + phi[0][1] * phi[1][1] * pv);
        const double q11 = pv - (phi[1][0] * phi[1][0] * px + phi[1][1] * phi[1][1] * pv);
        const double l00 = std::sqrt(std::max(q00, 0.0));
        const double l10 = l00 > 0.0 ? q01 / l00 : 0.0;
        const double l11 = std::sqrt(std::max(q11 - l10 * l10, 0.0));
        chol[0][0] = l00;
        chol[1][0] = l10;
        chol[1][1] = l11;
    }
};

// Stationary Gaussian vector process with per-frequency covariance
// density(omega) (symmetrized convention), synthesised bin by bin.
template <typename CovarianceAt>
std::vector<std::vector<double>> synthesize(std::size_t n, double fs, double lo_hz, std::size_t streams,
                                            CovarianceAt&& density, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    const std::size_t bins = n / 2 + 1;
    std::vector<std::vector<std::complex<double>>> spectra(streams, std::vector<std::complex<double>>(bins));
    const double scale = std::sqrt(static_cast<double>(n) * fs);
    std::vector<double> a(streams), b(streams);
    for (std::size_t k = 0; k < bins; ++k) {
        const double omega = hz_to_rad(lo_hz + static_cast<double>(k) * fs / static_cast<double>(n));
        const std::vector<double> l = density(omega);  // row-major lower factor, streams x streams
        if (l.empty()) {
            continue;
        }
        const bool real_bin = k == 0 || (n % 2 == 0 && k == n / 2);
        for (std::size_t i = 0; i < streams; ++i) {
            a[i] = normal(rng);
            b[i] = real_bin ? 0.0 : normal(rng);
        }
        const double f = real_bin ? scale : scale / std::sqrt(2.0);
        for (std::size_t i = 0; i < streams; ++i) {
            double re = 0.0;
            double im = 0.0;
            for (std::size_t j = 0; j <= i; ++j) {
                re += l[i * streams + j] * a[j];
                im += l[i * streams + j] * b[j];
            }
            spectra[i][k] = {f * re, f * im};
        }
    }
    std::vector<std::vector<double>> out(streams);
    for (std::size_t i = 0; i < streams; ++i) {
        out[i] = fft::inverse(spectra[i], n);
    }
    return out;
}

}  // namespace

std::size_t SimPlan::samples() const {
    return static_cast<std::size_t>(std::llround(duration * sample_rate));
}

double bandpass_sample_rate(double center_hz, double approx_rate) {
    if (!(center_hz > 0.0) || !(approx_rate > 0.0)) {
        throw std::invalid_argument("bandpass_sample_rate: positive frequencies required");
    }
    const double zone = std::max(0.0, std::round(center_hz / approx_rate - 0.25));
    return center_hz / (zone + 0.25);
}

double local_oscillator_hz(const ArrayConfig& cfg, const SimPlan& plan) {
    const double fc = center_hz(cfg, plan);
    return std::floor(fc / plan.sample_rate) * plan.sample_rate;
}

void validate_plan(const ArrayConfig& cfg, const SimPlan& plan) {
    if (cfg.channels.empty()) {
        throw std::invalid_argument("SimPlan: array has no sensors");
    }
    for (const auto& ch : cfg.channels) {
        if (!(ch.mode.gamma > 0.0)) {
            throw std::invalid_argument("SimPlan: unstable oscillator (gamma <= 0)");
        }
        ch.validate();
    }
    if (!(plan.sample_rate > 0.0) || !(plan.duration > 0.0)) {
        throw std::invalid_argument("SimPlan: sample rate and duration must be positive");
    }
    if (!is_power_of_two(plan.segment_length)) {
        throw std::invalid_argument("SimPlan: segment length must be a power of two");
    }
    if (!(plan.overlap >= 0.0 && plan.overlap < 1.0)) {
        throw std::invalid_argument("SimPlan: overlap must lie in [0, 1)");
    }
    if (plan.trials == 0) {
        throw std::invalid_argument("SimPlan: at least one trial required");
    }
    const double fc = center_hz(cfg, plan);
    const double lo = local_oscillator_hz(cfg, plan);
    double max_offset = 0.0;
    for (const auto& ch : cfg.channels) {
        const double f = rad_to_hz(ch.mode.omega0);
        max_offset = std::max(max_offset, std::abs(f - fc));
        if (!(f > lo && f < lo + 0.5 * plan.sample_rate)) {
            throw std::invalid_argument("SimPlan: resonance at " + std::to_string(f) +
                                        " Hz folds across a Nyquist edge; pick the rate with bandpass_sample_rate");
        }
    }
    if (!(plan.sample_rate > 4.0 * max_offset)) {
        throw std::invalid_argument("SimPlan: sample rate must exceed 4x the largest resonance offset");
    }
}

std::vector<double> Record::time_axis() const {
    std::vector<double> t(samples());
    for (std::size_t k = 0; k < t.size(); ++k) {
        t[k] = static_cast<double>(k) / sample_rate;
    }
    return t;
}

double Record::lab_omega(double record_hz) const { return hz_to_rad(lo_hz + record_hz); }

void Record::validate() const {
    if (quadrature.empty()) {
        throw std::invalid_argument("Record: no sensor streams");
    }
    const std::size_t n = quadrature.front().size();
    for (const auto& s : quadrature) {
        if (s.size() != n) {
            throw std::invalid_argument("Record: sensor streams have different lengths");
        }
        for (double v : s) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("Record: non-finite sample");
            }
        }
    }
}

Record simulate(const ArrayConfig& cfg, const SimPlan& plan, std::size_t trial) {
    validate_plan(cfg, plan);
    const std::size_t m = cfg.channels.size();
    const std::size_t n = plan.samples();
    const double fs = plan.sample_rate;
    const double dt = 1.0 / fs;

    Record rec;
    rec.sample_rate = fs;
    rec.lo_hz = local_oscillator_hz(cfg, plan);
    rec.quadrature.assign(m, std::vector<double>(n, 0.0));
    rec.position.assign(m, std::vector<double>(n, 0.0));

    auto rng = trial_engine(plan.seed, trial);
    std::normal_distribution<double> normal;

    // Shot noise: white probe covariance drawn per sample, scaled so the
    // symmetrized density equals the probe covariance.
    if (cfg.kind == ProbeKind::optimal) {
        auto shot = synthesize(n, fs, rec.lo_hz, m,
                               [&](double omega) { return cfg.input_noise_at(omega).cholesky(); }, rng);
        for (std::size_t i = 0; i < m; ++i) {
            rec.quadrature[i] = std::move(shot[i]);
        }
    } else {
        QuadratureNoise sigma = cfg.input_noise();
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                sigma(i, j) *= fs;
            }
        }
        const auto l = sigma.cholesky();
        std::vector<double> z(m);
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t i = 0; i < m; ++i) {
                z[i] = normal(rng);
            }
            for (std::size_t i = 0; i < m; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j <= i; ++j) {
                    acc += l[i * m + j] * z[j];
                }
                rec.quadrature[i][k] = acc;
            }
        }
    }

    for (std::size_t i = 0; i < m; ++i) {
        const auto& ch = cfg.channels[i];
        const OscillatorStep step(ch.mode, ch.temperature, dt);
        auto& x = rec.position[i];
        double pos = step.sigma_x * normal(rng);
        double vel = step.sigma_v * normal(rng);
        for (std::size_t k = 0; k < n; ++k) {
            x[k] = pos;
            const double n0 = normal(rng);
            const double n1 = normal(rng);
            const double np = step.phi[0][0] * pos + step.phi[0][1] * vel + step.chol[0][0] * n0;
            const double nv = step.phi[1][0] * pos + step.phi[1][1] * vel + step.chol[1][0] * n0 +
                              step.chol[1][1] * n1;
            pos = np;
            vel = nv;
        }

        if (ch.signal) {
            if (const auto* tone = std::get_if<CoherentTone>(&*ch.signal)) {
                const auto chi = susceptibility(ch.mode, tone->omega);
                const double amp = tone->amplitude * std::abs(chi);
                const double phase0 = tone->phase + std::arg(chi);
                const double cycles = rad_to_hz(tone->omega) / fs;
                const double frac = cycles - std::floor(cycles);
                for (std::size_t k = 0; k < n; ++k) {
                    const double turns = std::fmod(frac * static_cast<double>(k), 1.0);
                    x[k] += amp * std::cos(kTwoPi * turns + phase0);
                }
            } else {
                const auto& inc = std::get<IncoherentForce>(*ch.signal);
                auto driven = synthesize(
                    n, fs, rec.lo_hz, 1,
                    [&](double omega) -> std::vector<double> {
                        if (omega < inc.omega_lo || omega > inc.omega_hi) return {};
                        return {std::sqrt(inc.psd) * std::abs(susceptibility(ch.mode, omega))};
                    },
                    rng);
                for (std::size_t k = 0; k < n; ++k) {
                    x[k] += driven[0][k];
                }
            }
        }

        const double gain = std::sqrt(ch.alpha_flux) * ch.beta;
        auto& y = rec.quadrature[i];
        for (std::size_t k = 0; k < n; ++k) {
            y[k] += gain * x[k];
        }
    }
    return rec;
}

std::vector<Record> simulate_trials(const ArrayConfig& cfg, const SimPlan& plan) {
    validate_plan(cfg, plan);
    std::vector<Record> out(plan.trials);
    parallel_for(plan.trials, [&](std::size_t t) { out[t] = simulate(cfg, plan, t); });
    return out;
}

std::size_t welch_segments(std::size_t samples, std::size_t segment_length, double overlap) {
    if (samples < segment_length || segment_length == 0) {
        return 0;
    }
    const auto hop = std::max<std::size_t>(
        1, segment_length - static_cast<std::size_t>(std::llround(overlap * static_cast<double>(segment_length))));
    return 1 + (samples - segment_length) / hop;
}

SpectrumGrid welch_psd(std::span<const double> samples, double sample_rate, std::size_t segment_length,
                       double overlap, double lo_hz, PsdUnit unit) {
    if (!is_power_of_two(segment_length)) {
        throw std::invalid_argument("welch_psd: segment length must be a power of two");
    }
    if (!(overlap >= 0.0 && overlap < 1.0)) {
        throw std::invalid_argument("welch_psd: overlap must lie in [0, 1)");
    }
    if (samples.size() < segment_length) {
        throw std::invalid_argument("welch_psd: record shorter than one segment");
    }
    const std::size_t len = segment_length;
    const auto hop = std::max<std::size_t>(
        1, len - static_cast<std::size_t>(std::llround(overlap * static_cast<double>(len))));
    const std::size_t segments = welch_segments(samples.size(), len, overlap);

    std::vector<double> window(len);
    double window_power = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        window[i] = 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(len)));
        window_power += window[i] * window[i];
    }

    const std::size_t bins = len / 2 + 1;
    std::vector<double> acc(bins, 0.0);
    std::vector<double> seg(len);
    std::vector<double> power(bins);
    fft::RealPlan plan(len);
    for (std::size_t s = 0; s < segments; ++s) {
        const auto chunk = samples.subspan(s * hop, len);
        double mean = 0.0;
        for (double v : chunk) mean += v;
        mean /= static_cast<double>(len);
        for (std::size_t i = 0; i < len; ++i) {
            seg[i] = (chunk[i] - mean) * window[i];
        }
        plan.power(seg, power);
        for (std::size_t k = 0; k < bins; ++k) {
            acc[k] += power[k];
        }
    }

    SpectrumGrid out;
    out.unit = unit;
    out.sides = Sidedness::one_sided;
    out.omega.resize(bins);
    out.psd.resize(bins);
    const double norm = 1.0 / (sample_rate * window_power * static_cast<double>(segments));
    for (std::size_t k = 0; k < bins; ++k) {
        const bool edge = k == 0 || k == len / 2;
        out.psd[k] = acc[k] * norm * (edge ? 1.0 : 2.0);
        out.omega[k] = hz_to_rad(lo_hz + static_cast<double>(k) * sample_rate / static_cast<double>(len));
    }
    return out;
}

std::vector<SpectrumGrid> welch_psd(const Record& rec, const SimPlan& plan) {
    rec.validate();
    std::vector<SpectrumGrid> out;
    out.reserve(rec.sensors());
    for (const auto& stream : rec.quadrature) {
        out.push_back(welch_psd(stream, rec.sample_rate, plan.segment_length, plan.overlap, rec.lo_hz));
    }
    return out;
}

std::vector<double> joint_record(const Record& rec, JointMode mode, const ArrayConfig* cfg,
                                 std::optional<FrequencyBand> band) {
    rec.validate();
    if (rec.sensors() < 2) {
        throw std::invalid_argument("joint_record: at least two sensors required");
    }
    const std::size_t n = rec.samples();
    const std::size_t m = rec.sensors();

    if (mode == JointMode::sum && !band) {
        std::vector<double> out(n, 0.0);
        for (const auto& s : rec.quadrature) {
            for (std::size_t k = 0; k < n; ++k) out[k] += s[k];
        }
        return out;
    }
    if (mode == JointMode::average_force && (cfg == nullptr || cfg->channels.size() != m)) {
        throw std::invalid_argument("joint_record: force rescaling needs the matching array configuration");
    }

    const std::size_t bins = n / 2 + 1;
    std::vector<std::complex<double>> total(bins, {0.0, 0.0});
    for (std::size_t i = 0; i < m; ++i) {
        const auto spec = fft::forward(rec.quadrature[i]);
        for (std::size_t k = 0; k < bins; ++k) {
            const double omega = rec.lab_omega(static_cast<double>(k) * rec.sample_rate / static_cast<double>(n));
            if (band && (omega < band->lo || omega > band->hi)) {
                continue;
            }
            double gain = 1.0;
            if (mode == JointMode::average_force) {
                const auto& ch = cfg->channels[i];
                gain = std::sqrt(inverse_susceptibility_sq(ch.mode, omega) / ch.alpha_flux) /
                       (ch.beta * static_cast<double>(m));
            }
            total[k] += gain * spec[k];
        }
    }
    return fft::inverse(total, n);
}

SpectrumGrid analytic_output_psd(const ArrayConfig& cfg, std::size_t sensor, std::span<const double> omega) {
    const auto& ch = cfg.channels.at(sensor);
    SpectrumGrid out;
    out.unit = PsdUnit::quadrature;
    out.sides = Sidedness::symmetrized;
    out.omega.assign(omega.begin(), omega.end());
    out.psd.resize(omega.size());
    const double gain = ch.alpha_flux * ch.beta * ch.beta;
    const double s_th = thermal_force_psd(ch.mode, ch.temperature);
    for (std::size_t k = 0; k < omega.size(); ++k) {
        out.psd[k] = cfg.input_noise_at(omega[k])(sensor, sensor) +
                     gain * s_th / inverse_susceptibility_sq(ch.mode, omega[k]);
    }
    return out;
}

SpectrumGrid analytic_joint_sum_psd(const ArrayConfig& cfg, std::span<const double> omega) {
    const std::size_t m = cfg.channels.size();
    const std::vector<double> ones(m, 1.0);
    SpectrumGrid out;
    out.unit = PsdUnit::quadrature;
    out.sides = Sidedness::symmetrized;
    out.omega.assign(omega.begin(), omega.end());
    out.psd.resize(omega.size());
    for (std::size_t k = 0; k < omega.size(); ++k) {
        double v = weighted_sum_variance(cfg.input_noise_at(omega[k]), ones);
        for (const auto& ch : cfg.channels) {
            v += ch.alpha_flux * ch.beta * ch.beta * thermal_force_psd(ch.mode, ch.temperature) /
                 inverse_susceptibility_sq(ch.mode, omega[k]);
        }
        out.psd[k] = v;
    }
    return out;
}

void write_record_csv(const std::filesystem::path& path, const Record& rec) {
    rec.validate();
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out.precision(17);
    out << "time_s";
    for (std::size_t i = 0; i < rec.sensors(); ++i) {
        out << ",y" << (i + 1) << "_quadrature";
    }
    out << '\n';
    for (std::size_t k = 0; k < rec.samples(); ++k) {
        out << static_cast<double>(k) / rec.sample_rate;
        for (const auto& s : rec.quadrature) {
            out << ',' << s[k];
        }
        out << '\n';
    }
}

}  // namespace optosense
