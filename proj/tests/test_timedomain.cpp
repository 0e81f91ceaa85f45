#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "optosense/csv.hpp"
#include "optosense/run_config.hpp"
#include "optosense/stats.hpp"
#include "optosense/timedomain.hpp"
#include "optosense/units.hpp"

using namespace optosense;

namespace {

RunConfig short_run(double duration_s = 4.0) {
    RunConfig rc;
    rc.mc_duration_s = duration_s;
    return rc;
}

double mean_of(const std::vector<double>& v, std::size_t from, std::size_t to) {
    double s = 0.0;
    for (std::size_t k = from; k < to; ++k) s += v[k];
    return s / static_cast<double>(to - from);
}

// Integrated one-sided power in a window around the largest bin, floor removed.
double peak_power(const SpectrumGrid& s, double floor, std::size_t half_width = 6) {
    const auto it = std::max_element(s.psd.begin(), s.psd.end());
    const std::size_t c = static_cast<std::size_t>(it - s.psd.begin());
    const double df = rad_to_hz(s.omega[1] - s.omega[0]);
    double p = 0.0;
    for (std::size_t k = c - half_width; k <= c + half_width; ++k) p += (s.psd[k] - floor) * df;
    return p;
}

}  // namespace

TEST(BandpassSampling, CentreSitsAtQuarterRate) {
    for (double fc : {5.954e6, 1.0e6, 3.3e5}) {
        for (double approx : {25600.0, 51200.0, 100000.0}) {
            const double fs = bandpass_sample_rate(fc, approx);
            EXPECT_NEAR(std::fmod(fc, fs) / fs, 0.25, 1e-9);
            EXPECT_NEAR(fs / approx, 1.0, 0.5 * approx / fc + 1e-12);
        }
    }
    EXPECT_THROW(bandpass_sample_rate(-1.0, 1.0), std::invalid_argument);
}

TEST(Welch, UnitWhiteNoiseLevel) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    const double fs = 1000.0;
    std::vector<double> x(1 << 20);
    for (auto& v : x) v = normal(rng);
    const auto s = welch_psd(x, fs, 1024, 0.5);
    EXPECT_EQ(s.sides, Sidedness::one_sided);
    EXPECT_NEAR(mean_of(s.psd, 1, s.size() - 1) / (2.0 / fs), 1.0, 0.01);
}

TEST(Welch, SineIntegratedPower) {
    const double fs = 1000.0;
    const double a = 3.0;
    std::vector<double> x(1 << 16);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = a * std::sin(kTwoPi * 123.4 * static_cast<double>(k) / fs);
    const auto s = welch_psd(x, fs, 1024, 0.5);
    double total = 0.0;
    const double df = fs / 1024.0;
    for (double v : s.psd) total += v * df;
    EXPECT_NEAR(total / (a * a / 2.0), 1.0, 0.02);
}

TEST(Welch, SegmentCountAndErrors) {
    EXPECT_EQ(welch_segments(4096, 1024, 0.5), 7u);
    EXPECT_EQ(welch_segments(4096, 1024, 0.0), 4u);
    std::vector<double> x(100, 0.0);
    EXPECT_THROW(welch_psd(x, 1.0, 1024, 0.5), std::invalid_argument);
}

TEST(Simulate, ColdCoherentShotNoiseIsHalf) {
    RunConfig rc = short_run(2.0);
    rc.temperature_k = 0.0;
    const auto cfg = build_array(rc, ProbeKind::classical);
    const auto plan = build_plan(rc);
    const auto rec = simulate(cfg, plan);
    for (const auto& s : welch_psd(rec, plan)) {
        const auto sym = s.symmetrized();
        const double avg = static_cast<double>(welch_segments(rec.samples(), plan.segment_length, plan.overlap));
        EXPECT_NEAR(mean_of(sym.psd, 1, sym.size() - 1), 0.5, 0.01);
        std::size_t inside = 0;
        for (std::size_t k = 1; k + 1 < sym.size(); ++k) {
            if (std::abs(sym.psd[k] - 0.5) / 0.5 <= 3.0 / std::sqrt(avg)) ++inside;
        }
        EXPECT_GE(static_cast<double>(inside) / static_cast<double>(sym.size() - 2), 0.95);
    }
}

TEST(Simulate, EntangledSumIsVTimesClassicalSum) {
    RunConfig rc = short_run(2.0);
    rc.temperature_k = 0.0;
    const auto plan = build_plan(rc);
    auto level = [&](ProbeKind kind) {
        const auto rec = simulate(build_array(rc, kind), plan);
        const auto sum = joint_record(rec, JointMode::sum);
        const auto s = welch_psd(sum, rec.sample_rate, plan.segment_length, plan.overlap, rec.lo_hz).symmetrized();
        return mean_of(s.psd, 1, s.size() - 1);
    };
    const double c = level(ProbeKind::classical);
    const double e = level(ProbeKind::entangled);
    EXPECT_NEAR(c, 1.0, 0.01);
    EXPECT_NEAR(e / c, variance_from_db(2.0), 0.01);
    EXPECT_NEAR(to_db(e / c), -2.0, 0.1);
}

TEST(Simulate, MatchesAnalyticSpectrumPerBin) {
    const RunConfig rc = short_run(20.0);
    for (auto kind : {ProbeKind::classical, ProbeKind::entangled, ProbeKind::optimal}) {
        const auto cfg = build_array(rc, kind);
        const auto plan = build_plan(rc);
        const auto rec = simulate(cfg, plan);
        const double avg = static_cast<double>(welch_segments(rec.samples(), plan.segment_length, plan.overlap));
        ASSERT_GE(avg, 200.0);
        const auto spectra = welch_psd(rec, plan);
        for (std::size_t i = 0; i < rec.sensors(); ++i) {
            const auto sym = spectra[i].symmetrized();
            const std::vector<double> omega(sym.omega.begin() + 1, sym.omega.end() - 1);
            const std::vector<double> measured(sym.psd.begin() + 1, sym.psd.end() - 1);
            const auto ref = analytic_output_psd(cfg, i, omega);
            std::size_t inside = 0;
            for (std::size_t k = 0; k < omega.size(); ++k) {
                if (std::abs(measured[k] - ref.psd[k]) / ref.psd[k] <= 3.0 / std::sqrt(avg)) ++inside;
            }
            EXPECT_GE(static_cast<double>(inside) / static_cast<double>(omega.size()), 0.95) << to_string(kind);
        }
    }
}

TEST(Simulate, Equipartition) {
    const RunConfig rc = short_run(20.0);
    const auto cfg = build_array(rc, ProbeKind::classical);
    const auto rec = simulate(cfg, build_plan(rc));
    for (std::size_t i = 0; i < rec.sensors(); ++i) {
        const auto& x = rec.position[i];
        const double mu = mean_of(x, 0, x.size());
        double var = 0.0;
        for (double v : x) var += (v - mu) * (v - mu);
        var /= static_cast<double>(x.size() - 1);
        const auto& mode = cfg.channels[i].mode;
        const double expected = kBoltzmann * rc.temperature_k / (mode.mass * mode.omega0 * mode.omega0);
        EXPECT_NEAR(var / expected, 1.0, 0.03);
    }
}

TEST(Simulate, DeterministicPerSeedAndTrial) {
    const RunConfig rc = short_run(0.2);
    const auto cfg = build_array(rc, ProbeKind::entangled);
    const auto plan = build_plan(rc);
    const auto a = simulate(cfg, plan, 3);
    const auto b = simulate(cfg, plan, 3);
    const auto c = simulate(cfg, plan, 4);
    EXPECT_EQ(a.quadrature, b.quadrature);
    EXPECT_EQ(a.position, b.position);
    EXPECT_NE(a.quadrature, c.quadrature);
}

TEST(Simulate, InPhaseTonesAddCoherently) {
    RunConfig rc = short_run(2.0);
    rc.delta_freq_hz = 0.0;
    rc.gamma_hz = {230.0, 230.0};
    rc.temperature_k = 0.0;
    auto cfg = build_array(rc, ProbeKind::classical);
    const double w = cfg.channels[0].mode.omega0 + hz_to_rad(500.0);
    for (auto& ch : cfg.channels) ch.signal = CoherentTone{w, 1e-8, 0.4};
    const auto plan = build_plan(rc);
    const auto rec = simulate(cfg, plan);
    const auto single = welch_psd(rec, plan)[0];
    const auto sum = welch_psd(joint_record(rec, JointMode::sum), rec.sample_rate, plan.segment_length, plan.overlap,
                               rec.lo_hz);
    // one-sided noise floors: 1 per sensor stream, 2 for the sum
    const double p1 = peak_power(single, 2.0 * 0.5);
    const double p2 = peak_power(sum, 2.0 * 1.0);
    EXPECT_NEAR(p2 / p1, 4.0, 0.1);

    const double y_amp = std::sqrt(cfg.channels[0].alpha_flux) * cfg.channels[0].beta * 1e-8 *
                         std::abs(susceptibility(cfg.channels[0].mode, w));
    EXPECT_NEAR(p1 / (y_amp * y_amp / 2.0), 1.0, 0.05);

    for (auto& ch : cfg.channels) ch.signal = CoherentTone{w, 2e-8, 0.4};
    const auto doubled = welch_psd(simulate(cfg, plan), plan)[0];
    EXPECT_NEAR(peak_power(doubled, 1.0) / p1, 4.0, 0.1);
}

TEST(Simulate, IndependentSensorsSumDoubles) {
    RunConfig rc = short_run(2.0);
    rc.delta_freq_hz = 0.0;
    rc.gamma_hz = {230.0, 230.0};
    const auto cfg = build_array(rc, ProbeKind::classical);
    const auto plan = build_plan(rc);
    const auto rec = simulate(cfg, plan);
    const auto y1 = welch_psd(rec, plan)[0].symmetrized();
    const auto sum = welch_psd(joint_record(rec, JointMode::sum), rec.sample_rate, plan.segment_length, plan.overlap,
                               rec.lo_hz)
                         .symmetrized();
    const std::vector<double> ratio_ref(y1.size() - 2, 2.0);
    std::vector<double> ratio(y1.size() - 2);
    for (std::size_t k = 1; k + 1 < y1.size(); ++k) ratio[k - 1] = sum.psd[k] / y1.psd[k];
    // the two streams are independent draws; the bin-wise ratio scatters, the average does not
    double mean_ratio = 0.0;
    for (double r : ratio) mean_ratio += r / static_cast<double>(ratio.size());
    EXPECT_NEAR(mean_ratio, 2.0, 0.05);
}

TEST(Simulate, RejectsFoldingPlans) {
    const RunConfig rc = short_run(0.1);
    const auto cfg = build_array(rc, ProbeKind::classical);
    SimPlan plan = build_plan(rc);
    plan.sample_rate = 4000.0;  // narrower than 4x the resonance spread
    EXPECT_THROW(simulate(cfg, plan), std::invalid_argument);
    plan = build_plan(rc);
    plan.segment_length = 1000;
    EXPECT_THROW(simulate(cfg, plan), std::invalid_argument);
}

TEST(JointRecord, ForceRescaleNeedsConfig) {
    const RunConfig rc = short_run(0.1);
    const auto cfg = build_array(rc, ProbeKind::classical);
    const auto rec = simulate(cfg, build_plan(rc));
    EXPECT_THROW(joint_record(rec, JointMode::average_force), std::invalid_argument);
    const auto f = joint_record(rec, JointMode::average_force, &cfg);
    EXPECT_EQ(f.size(), rec.samples());
}

TEST(Record, CsvExportRoundTrips) {
    const RunConfig rc = short_run(0.01);
    const auto rec = simulate(build_array(rc, ProbeKind::classical), build_plan(rc));
    const auto path = std::filesystem::temp_directory_path() / "optosense_record_test.csv";
    write_record_csv(path, rec);
    const auto table = read_csv(path);
    EXPECT_EQ(table.header, (std::vector<std::string>{"time_s", "y1_quadrature", "y2_quadrature"}));
    EXPECT_EQ(table.numeric_column("y2_quadrature"), rec.quadrature[1]);
    std::filesystem::remove(path);
}
