#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "optosense/estimation.hpp"
#include "optosense/run_config.hpp"
#include "optosense/units.hpp"

using namespace optosense;

namespace {

RunConfig baseline(double delta_hz, double power_uw = 50.0) {
    RunConfig rc;
    rc.delta_freq_hz = delta_hz;
    rc.power_uw = power_uw;
    return rc;
}

// Array at a different power with the transduction calibrated at 50 uW.
ArrayConfig at_power(double delta_hz, double power_uw, ProbeKind kind) {
    return build_array(baseline(delta_hz, power_uw), kind, resolve_beta(baseline(delta_hz)));
}

ArrayConfig cold(ArrayConfig cfg) {
    for (auto& ch : cfg.channels) ch.temperature = 0.0;
    return cfg;
}

ArrayConfig identical_pair(ProbeKind kind, double temperature) {
    RunConfig rc = baseline(0.0);
    rc.gamma_hz = {230.0, 230.0};
    rc.temperature_k = temperature;
    return build_array(rc, kind);
}

}  // namespace

TEST(ForceNoise, SingleSensorTextbookForm) {
    const RunConfig rc = baseline(0.0);
    const double beta = resolve_beta(rc);
    const auto cfg = build_single_sensor(rc, beta);
    const auto& ch = cfg.channels[0];
    const auto s = force_noise_psd(cfg);
    for (std::size_t k = 0; k < s.size(); k += 97) {
        const double w = s.omega[k];
        const double chi_sq = std::norm(susceptibility(ch.mode, w));
        const double expected = 0.5 / (ch.alpha_flux * beta * beta * chi_sq) +
                                2.0 * ch.mode.gamma * ch.mode.mass * kBoltzmann * ch.temperature;
        EXPECT_NEAR(s.psd[k], expected, 1e-9 * expected);
    }
}

TEST(ForceNoise, EqualSensorsEntangledOverClassicalIsV) {
    const auto c = force_noise_psd(identical_pair(ProbeKind::classical, 0.0));
    const auto e = force_noise_psd(identical_pair(ProbeKind::entangled, 0.0));
    const double v = variance_from_db(2.0);
    for (std::size_t k = 0; k < c.size(); k += 101) {
        EXPECT_NEAR(e.psd[k] / c.psd[k], v, 1e-12);
    }
}

TEST(ForceNoise, BaselineOffResonanceRatioApproachesV) {
    const auto c = force_noise_psd(build_array(baseline(1422.0), ProbeKind::classical));
    const auto e = force_noise_psd(build_array(baseline(1422.0), ProbeKind::entangled));
    // far wings: w1/w2 -> 1 and thermal negligible
    EXPECT_NEAR(e.psd.front() / c.psd.front(), variance_from_db(2.0), 0.01);
    EXPECT_NEAR(e.psd.back() / c.psd.back(), variance_from_db(2.0), 0.01);
}

TEST(ForceMinimum, MatchesDenseScan) {
    const auto cfg = build_array(baseline(1422.0), ProbeKind::classical);
    const auto m = min_force_noise(cfg);
    const auto dense = linear_grid(m.omega_min - 2000.0, m.omega_min + 2000.0, 400001);
    double best = std::numeric_limits<double>::infinity();
    double best_w = 0.0;
    for (double w : dense) {
        const double v = force_noise_terms(cfg, w).total();
        if (v < best) {
            best = v;
            best_w = w;
        }
    }
    EXPECT_LE(m.s_min, best * (1.0 + 1e-12));
    EXPECT_NEAR(m.s_min, best, 1e-9 * best);
    EXPECT_NEAR(m.omega_min, best_w, 2.0 * (dense[1] - dense[0]));
}

TEST(OmegaMin, DegenerateIdenticalSensors) {
    const MechanicalMode a{3.7e7, 1e-6, 1e-12};
    EXPECT_NEAR(omega_min_closed_form(a, a), a.omega0, 1e-9 * a.omega0);
}

TEST(OmegaMin, BaselineModesNearMean) {
    const MechanicalMode a{hz_to_rad(5.953e6), hz_to_rad(200.0), 6.75e-13};
    const MechanicalMode b{hz_to_rad(5.955e6), hz_to_rad(260.0), 6.75e-13};
    const double gamma_bar = 0.5 * (a.gamma + b.gamma);
    EXPECT_LT(std::abs(omega_min_closed_form(a, b) - 0.5 * (a.omega0 + b.omega0)), 0.1 * gamma_bar);
}

TEST(OmegaMin, NumericMinimiserAgreesWithClosedForm) {
    for (double delta : {0.0, 262.0, 1422.0, 2641.0}) {
        const auto cfg = cold(build_array(baseline(delta), ProbeKind::classical));
        const double closed = omega_min_closed_form(cfg.channels[0].mode, cfg.channels[1].mode);
        EXPECT_NEAR(min_force_noise(cfg).omega_min / closed, 1.0, 1e-6) << delta;
    }
}

TEST(ForceMinimum, ThermalLimitedProbesConverge) {
    const auto c = sbp(at_power(0.0, 5000.0, ProbeKind::classical));
    const auto e = sbp(at_power(0.0, 5000.0, ProbeKind::entangled));
    EXPECT_EQ(c.regime, NoiseRegime::thermal_dominant);
    EXPECT_NEAR(e.s_min / c.s_min, 1.0, 0.02);
}

TEST(ForceMinimum, ApproximationWithinFivePercent) {
    RunConfig rc = baseline(0.0);
    const double gamma_bar = 230.0;
    for (double delta = 0.0; delta <= 10.0 * gamma_bar; delta += gamma_bar) {
        rc.delta_freq_hz = delta;
        for (auto kind : {ProbeKind::classical, ProbeKind::entangled}) {
            const auto cfg = build_array(rc, kind);
            const double exact = min_force_noise(cfg).s_min;
            EXPECT_NEAR(min_force_noise_approx(cfg) / exact, 1.0, 0.05) << delta << " " << to_string(kind);
        }
    }
}

TEST(ForceMinimum, TwoIdenticalSensorsHalveSingleSensor) {
    const auto pair = identical_pair(ProbeKind::classical, 295.0);
    ArrayConfig single = pair;
    single.channels.resize(1);
    single.network = SplitNetwork::even(1);
    EXPECT_NEAR(min_force_noise(pair).s_min / min_force_noise(single).s_min, 0.5, 1e-6);
}

TEST(Bandwidth, SymmetricForIdenticalSensors) {
    const auto cfg = identical_pair(ProbeKind::classical, 295.0);
    const auto m = min_force_noise(cfg);
    const auto band = band_3db(cfg, m);
    // |chi|^-2 is symmetric about omega0 only to O(Gamma/Omega); allow that
    EXPECT_NEAR(m.omega_min - band.lo, band.hi - m.omega_min, 1e-3 * band.width());
}

TEST(Bandwidth, TooNarrowGridThrows) {
    auto cfg = build_array(baseline(1422.0), ProbeKind::classical);
    const double c = cfg.grid[cfg.grid.size() / 2];
    const double margin = 10.5 * cfg.channels[1].mode.gamma;
    const double lo = cfg.channels[0].mode.omega0 < cfg.channels[1].mode.omega0 ? cfg.channels[0].mode.omega0
                                                                              : cfg.channels[1].mode.omega0;
    (void)c;
    cfg.grid = linear_grid(lo - margin, lo + margin + hz_to_rad(1422.0), 4097);
    // high power widens the band beyond this narrow window
    for (auto& ch : cfg.channels) ch.alpha_flux *= 1e4;
    EXPECT_THROW(bandwidth_3db(cfg), std::runtime_error);
}

TEST(Bandwidth, SingleSensorShotLimitedIsLinewidth) {
    // below the thermal floor the band is set by |chi|^-2 alone: width ~ Gamma
    RunConfig rc = baseline(0.0);
    rc.temperature_k = 0.0;
    const double beta = resolve_beta(rc);
    for (double p : {0.5, 5.0, 50.0}) {
        rc.power_uw = p;
        const auto cfg = build_single_sensor(rc, beta);
        EXPECT_NEAR(bandwidth_3db(cfg) / cfg.channels[0].mode.gamma, 1.0, 1e-3) << p;
    }
}

TEST(Bandwidth, SingleSensorThermalLimitedScalesWithAlpha) {
    RunConfig rc = baseline(0.0);
    const double beta = resolve_beta(rc);
    std::vector<double> alpha;
    std::vector<double> bw;
    for (double p : {500.0, 1000.0, 2000.0, 5000.0}) {
        rc.power_uw = p;
        const auto cfg = build_single_sensor(rc, beta);
        alpha.push_back(std::sqrt(cfg.channels[0].alpha_flux));
        bw.push_back(bandwidth_3db(cfg));
    }
    const double slope = std::log(bw.back() / bw.front()) / std::log(alpha.back() / alpha.front());
    EXPECT_NEAR(slope, 1.0, 0.1);
}

TEST(Bandwidth, EntangledWiderAtSmallDetuning) {
    const auto c = bandwidth_3db(build_array(baseline(262.0), ProbeKind::classical));
    const auto e = bandwidth_3db(build_array(baseline(262.0), ProbeKind::entangled));
    EXPECT_GT(e / c, 1.15);
    EXPECT_LT(e / c, 1.25);
}

TEST(OptimalProbe, CoincidesWithEvenSplitForEqualWeights) {
    const auto e = force_noise_psd(identical_pair(ProbeKind::entangled, 295.0));
    const auto o = force_noise_psd(identical_pair(ProbeKind::optimal, 295.0));
    for (std::size_t k = 0; k < e.size(); k += 53) EXPECT_NEAR(o.psd[k], e.psd[k], 1e-12 * e.psd[k]);
}

TEST(OptimalProbe, PointwiseBelowBothOthers) {
    for (double delta : {262.0, 1422.0, 2641.0, 8000.0}) {
        const auto rc = baseline(delta);
        const auto c = force_noise_psd(build_array(rc, ProbeKind::classical));
        const auto e = force_noise_psd(build_array(rc, ProbeKind::entangled));
        const auto o = optimal_probe_bound(build_array(rc, ProbeKind::classical));
        for (std::size_t k = 0; k < c.size(); ++k) {
            EXPECT_LE(o.psd[k], std::min(c.psd[k], e.psd[k]) * (1.0 + 1e-12));
        }
    }
}

TEST(OptimalProbe, RestoresBandwidthAtLargeDetuning) {
    const auto rc = baseline(2641.0);
    const double c = bandwidth_3db(build_array(rc, ProbeKind::classical));
    const double o = bandwidth_3db(build_array(rc, ProbeKind::optimal));
    EXPECT_GE(o, c);
}

TEST(CalibrateBeta, RoundTrip) {
    SensorChannel ch;
    ch.mode = {hz_to_rad(5.954e6), hz_to_rad(200.0), 6.75e-13};
    ch.alpha_flux = power_to_flux(50e-6, kDefaultWavelength);
    ch.beta = 1.0;
    const double target = 1e-30;
    ch.beta = calibrate_beta(target, ch, ch.mode.omega0);

    ArrayConfig cfg;
    cfg.channels = {ch};
    cfg.grid = linear_grid(ch.mode.omega0 - 1e5, ch.mode.omega0 + 1e5, 11);
    EXPECT_NEAR(force_noise_terms(cfg, ch.mode.omega0).imprecision / target, 1.0, 1e-9);

    // algebraic rearrangement: beta^2 = (1/2) m^2 Omega^2 Gamma^2 / (alpha^2 S)
    const double expected = std::sqrt(0.5 * std::pow(ch.mode.mass * ch.mode.omega0 * ch.mode.gamma, 2) /
                                      (ch.alpha_flux * target));
    EXPECT_NEAR(ch.beta / expected, 1.0, 1e-12);

    SensorChannel brighter = ch;
    brighter.alpha_flux *= 4.0;
    EXPECT_NEAR(calibrate_beta(target, brighter, ch.mode.omega0) / ch.beta, 0.5, 1e-12);
    EXPECT_THROW(calibrate_beta(-1.0, ch, ch.mode.omega0), std::domain_error);
}

TEST(Metrics, SbpFieldConsistency) {
    const auto r = sbp(build_array(baseline(1422.0), ProbeKind::entangled));
    EXPECT_DOUBLE_EQ(r.sensitivity, 1.0 / r.s_min);
    EXPECT_DOUBLE_EQ(r.sbp, r.sensitivity * r.bandwidth_3db);
    EXPECT_DOUBLE_EQ(r.bandwidth_3db, r.band.width());
}

TEST(Metrics, SbpApproximationInShotLimitedRegime) {
    std::size_t checked = 0;
    for (double delta : {0.0, 500.0, 1422.0, 2300.0}) {
        const auto cfg = at_power(delta, 0.5, ProbeKind::classical);
        const auto r = sbp(cfg);
        const auto terms = force_noise_terms(cfg, r.omega_min);
        if (terms.imprecision < 3.0 * terms.thermal) continue;
        ++checked;
        EXPECT_NEAR(r.sbp_approx / r.sbp, 1.0, 0.10) << delta;
    }
    EXPECT_GE(checked, 3u);
}

TEST(Metrics, InvariantUnderRelabelling) {
    for (auto kind : {ProbeKind::classical, ProbeKind::entangled, ProbeKind::optimal}) {
        const auto a = build_array(baseline(1422.0), kind);
        ArrayConfig b = a;
        std::swap(b.channels[0], b.channels[1]);
        const auto ra = sbp(a);
        const auto rb = sbp(b);
        EXPECT_NEAR(rb.s_min / ra.s_min, 1.0, 1e-12);
        EXPECT_NEAR(rb.omega_min / ra.omega_min, 1.0, 1e-12);
        EXPECT_NEAR(rb.bandwidth_3db / ra.bandwidth_3db, 1.0, 1e-9);
    }
}

TEST(ForceWeights, ZeroFluxRejected) {
    auto cfg = build_array(baseline(1422.0), ProbeKind::classical);
    cfg.channels[0].alpha_flux = 0.0;
    EXPECT_THROW(force_weights(cfg, cfg.channels[0].mode.omega0), std::domain_error);
}

TEST(ArrayConfig, GridMustCoverResonances) {
    auto cfg = build_array(baseline(1422.0), ProbeKind::classical);
    cfg.grid = linear_grid(cfg.channels[0].mode.omega0, cfg.channels[0].mode.omega0 + 10.0, 11);
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(ProbeKindNames, RoundTrip) {
    for (auto kind : {ProbeKind::classical, ProbeKind::entangled, ProbeKind::optimal}) {
        EXPECT_EQ(probe_kind_from_string(to_string(kind)), kind);
    }
    EXPECT_THROW(probe_kind_from_string("squeezed"), std::invalid_argument);
}
