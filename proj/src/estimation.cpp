#include "optosense/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

namespace optosense {

std::string to_string(ProbeKind kind) {
    switch (kind) {
        case ProbeKind::classical: return "classical";
        case ProbeKind::entangled: return "entangled";
        case ProbeKind::optimal: return "optimal";
    }
    return "unknown";
}

ProbeKind probe_kind_from_string(const std::string& name) {
    if (name == "classical") return ProbeKind::classical;
    if (name == "entangled") return ProbeKind::entangled;
    if (name == "optimal") return ProbeKind::optimal;
    throw std::invalid_argument("unknown probe kind '" + name + "'");
}

std::string to_string(NoiseRegime regime) {
    return regime == NoiseRegime::thermal_dominant ? "thermal-dominant" : "imprecision-dominant";
}

void ArrayConfig::validate() const {
    if (channels.empty()) {
        throw std::invalid_argument("ArrayConfig: at least one sensor channel required");
    }
    double max_gamma = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& ch : channels) {
        ch.validate();
        max_gamma = std::max(max_gamma, ch.mode.gamma);
        lo = std::min(lo, ch.mode.omega0);
        hi = std::max(hi, ch.mode.omega0);
    }
    if (kind != ProbeKind::classical) {
        network.validate();
        if (network.arms() != channels.size()) {
            throw std::invalid_argument("ArrayConfig: split network arm count differs from sensor count");
        }
        (void)source.variance_factor();
    }
    if (grid.size() < 3) {
        throw std::invalid_argument("ArrayConfig: frequency grid needs at least three points");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1]) || !(grid[i - 1] > 0.0)) {
            throw std::invalid_argument("ArrayConfig: frequency grid must be positive and strictly increasing");
        }
    }
    const double margin = 10.0 * max_gamma;
    if (grid.front() > lo - margin || grid.back() < hi + margin) {
        throw std::invalid_argument("ArrayConfig: grid must cover every resonance with a margin of 10 max(Gamma)");
    }
}

QuadratureNoise ArrayConfig::input_noise() const {
    switch (kind) {
        case ProbeKind::classical: return coherent_noise(channels.size());
        case ProbeKind::entangled: return probe_noise(source, network);
        case ProbeKind::optimal: break;
    }
    throw std::logic_error("input_noise: optimal probe covariance is frequency dependent");
}

QuadratureNoise ArrayConfig::input_noise_at(double omega) const {
    if (kind != ProbeKind::optimal) {
        return input_noise();
    }
    const auto w = force_weights(*this, omega);
    double norm = 0.0;
    for (double x : w) norm += x * x;
    SplitNetwork aligned;
    aligned.efficiency = network.efficiency.size() == channels.size()
                             ? network.efficiency
                             : std::vector<double>(channels.size(), 1.0);
    aligned.weights.resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        aligned.weights[i] = w[i] * w[i] / norm;
    }
    // renormalise to absorb rounding so the split validates at 1e-12
    double total = 0.0;
    for (double t : aligned.weights) total += t;
    for (double& t : aligned.weights) t /= total;
    return probe_noise(source, aligned);
}

ArrayConfig ArrayConfig::with_kind(ProbeKind k) const {
    ArrayConfig copy = *this;
    copy.kind = k;
    return copy;
}

std::vector<double> force_weights(const ArrayConfig& cfg, double omega) {
    std::vector<double> w(cfg.channels.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto& ch = cfg.channels[i];
        if (!(ch.alpha_flux > 0.0)) {
            throw std::domain_error("force estimator undefined: sensor " + std::to_string(i) +
                                    " has zero probe flux");
        }
        w[i] = std::sqrt(inverse_susceptibility_sq(ch.mode, omega) / ch.alpha_flux) / ch.beta;
    }
    return w;
}

ForceNoiseTerms force_noise_terms(const ArrayConfig& cfg, double omega) {
    const auto w = force_weights(cfg, omega);
    const double m = static_cast<double>(cfg.channels.size());
    ForceNoiseTerms terms;
    terms.imprecision = weighted_sum_variance(cfg.input_noise_at(omega), w) / (m * m);
    for (const auto& ch : cfg.channels) {
        terms.thermal += thermal_force_psd(ch.mode, ch.temperature);
    }
    terms.thermal /= m * m;
    return terms;
}

SpectrumGrid force_noise_psd(const ArrayConfig& cfg) {
    cfg.validate();
    SpectrumGrid out;
    out.unit = PsdUnit::force;
    out.sides = Sidedness::symmetrized;
    out.omega = cfg.grid;
    out.psd.resize(cfg.grid.size());
    for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
        out.psd[i] = force_noise_terms(cfg, cfg.grid[i]).total();
    }
    return out;
}

SpectrumGrid optimal_probe_bound(const ArrayConfig& cfg) {
    return force_noise_psd(cfg.with_kind(ProbeKind::optimal));
}

double omega_min_closed_form(const MechanicalMode& a, const MechanicalMode& b) {
    const double radicand = -a.gamma * a.gamma - b.gamma * b.gamma +
                            2.0 * (a.omega0 * a.omega0 + b.omega0 * b.omega0);
    if (!(radicand > 0.0)) {
        throw std::domain_error("omega_min_closed_form: non-positive radicand");
    }
    return 0.5 * std::sqrt(radicand);
}

ForceMinimum min_force_noise(const ArrayConfig& cfg) {
    cfg.validate();
    const auto& grid = cfg.grid;
    std::size_t best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = force_noise_terms(cfg, grid[i]).total();
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    const std::size_t left = best == 0 ? 0 : best - 1;
    const std::size_t right = std::min(best + 1, grid.size() - 1);
    auto objective = [&](double omega) { return force_noise_terms(cfg, omega).total(); };
    const auto [omega, value] =
        boost::math::tools::brent_find_minima(objective, grid[left], grid[right], std::numeric_limits<double>::digits / 2);

    ForceMinimum result;
    result.grid_index = best;
    if (value <= best_val) {
        result.s_min = value;
        result.omega_min = omega;
    } else {
        result.s_min = best_val;
        result.omega_min = grid[best];
    }
    return result;
}

double effective_quadrature_noise(const ArrayConfig& cfg) {
    const std::size_t m = cfg.channels.size();
    const std::vector<double> ones(m, 1.0);
    QuadratureNoise noise;
    if (cfg.kind == ProbeKind::optimal) {
        noise = probe_noise(cfg.source, cfg.network.arms() == m ? cfg.network : SplitNetwork::even(m));
    } else {
        noise = cfg.input_noise();
    }
    return weighted_sum_variance(noise, ones) / static_cast<double>(m);
}

namespace {

struct ArrayAverages {
    double omega_bar = 0.0;
    double gamma_bar_sq = 0.0;
    double spread_sq = 0.0;  // 4 <(Omega_i - Omega_bar)^2>, equals dOmega^2 for two sensors
    double mass = 0.0;
    double beta = 0.0;
    double carrier_flux = 0.0;
    double thermal = 0.0;
};

ArrayAverages averages(const ArrayConfig& cfg) {
    ArrayAverages a;
    const double m = static_cast<double>(cfg.channels.size());
    for (const auto& ch : cfg.channels) {
        a.omega_bar += ch.mode.omega0 / m;
        a.gamma_bar_sq += ch.mode.gamma * ch.mode.gamma / m;
        a.mass += ch.mode.mass / m;
        a.beta += ch.beta / m;
        a.carrier_flux += ch.alpha_flux;
        a.thermal += thermal_force_psd(ch.mode, ch.temperature) / (m * m);
    }
    for (const auto& ch : cfg.channels) {
        const double d = ch.mode.omega0 - a.omega_bar;
        a.spread_sq += 4.0 * d * d / m;
    }
    return a;
}

}  // namespace

double min_force_noise_approx(const ArrayConfig& cfg) {
    const auto a = averages(cfg);
    const double s_y0 = effective_quadrature_noise(cfg);
    return a.mass * a.mass / (a.beta * a.beta * a.carrier_flux) * a.omega_bar * a.omega_bar *
               (a.gamma_bar_sq + a.spread_sq) * s_y0 +
           a.thermal;
}

FrequencyBand band_3db(const ArrayConfig& cfg, const ForceMinimum& minimum) {
    const auto& grid = cfg.grid;
    const double level = 2.0 * minimum.s_min;
    auto excess = [&](double omega) { return force_noise_terms(cfg, omega).total() - level; };
    boost::math::tools::eps_tolerance<double> tol(44);

    auto find_edge = [&](bool upward) {
        std::size_t i = minimum.grid_index;
        double inner = minimum.omega_min;
        while (true) {
            if (upward ? i + 1 >= grid.size() : i == 0) {
                throw std::runtime_error("bandwidth_3db: no 3-dB crossing inside the grid (grid too narrow)");
            }
            i = upward ? i + 1 : i - 1;
            if ((upward && grid[i] <= inner) || (!upward && grid[i] >= inner)) {
                continue;
            }
            if (excess(grid[i]) >= 0.0) {
                break;
            }
            inner = grid[i];
        }
        double a = upward ? inner : grid[i];
        double b = upward ? grid[i] : inner;
        std::uintmax_t iters = 200;
        const auto [r0, r1] = boost::math::tools::toms748_solve(excess, a, b, tol, iters);
        return 0.5 * (r0 + r1);
    };

    FrequencyBand band;
    band.lo = find_edge(false);
    band.hi = find_edge(true);
    return band;
}

double bandwidth_3db(const ArrayConfig& cfg) {
    return band_3db(cfg, min_force_noise(cfg)).width();
}

MetricsReport sbp(const ArrayConfig& cfg) {
    const auto minimum = min_force_noise(cfg);
    MetricsReport r;
    r.s_min = minimum.s_min;
    r.omega_min = minimum.omega_min;
    r.band = band_3db(cfg, minimum);
    r.bandwidth_3db = r.band.width();
    r.sensitivity = 1.0 / r.s_min;
    r.sbp = r.sensitivity * r.bandwidth_3db;

    const auto a = averages(cfg);
    const double s_y0 = effective_quadrature_noise(cfg);
    r.sbp_approx = a.beta * std::sqrt(a.carrier_flux) / (r.omega_min * a.mass * std::sqrt(s_y0)) *
                   std::sqrt(1.0 / r.s_min);
    r.s_min_approx = min_force_noise_approx(cfg);

    const auto terms = force_noise_terms(cfg, r.omega_min);
    r.regime = terms.thermal >= terms.imprecision ? NoiseRegime::thermal_dominant
                                                  : NoiseRegime::imprecision_dominant;
    return r;
}

double calibrate_beta(double target_floor, const SensorChannel& ch, double omega_ref) {
    if (!(target_floor > 0.0) || !std::isfinite(target_floor)) {
        throw std::domain_error("calibrate_beta: target floor must be positive and finite");
    }
    if (!(ch.alpha_flux > 0.0)) {
        throw std::domain_error("calibrate_beta: probe flux must be positive to reach any floor");
    }
    ch.mode.validate();
    const double beta_sq = 0.5 * inverse_susceptibility_sq(ch.mode, omega_ref) / (ch.alpha_flux * target_floor);
    if (!(beta_sq > 0.0) || !std::isfinite(beta_sq)) {
        throw std::domain_error("calibrate_beta: target floor unreachable");
    }
    return std::sqrt(beta_sq);
}

}  // namespace optosense
