#include "optosense/commands.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "optosense/parallel.hpp"
#include "optosense/search.hpp"
#include "optosense/stats.hpp"
#include "optosense/timedomain.hpp"
#include "optosense/units.hpp"

namespace optosense {

namespace {

std::string sensor_label(std::size_t i) { return "y" + std::to_string(i + 1); }

ArrayConfig with_beta_scale(ArrayConfig cfg, double scale) {
    for (auto& ch : cfg.channels) ch.beta *= scale;
    return cfg;
}

// Lab-frame band that holds every resonance with ten linewidths to spare.
FrequencyBand resonance_band(const ArrayConfig& cfg) {
    FrequencyBand band{cfg.channels.front().mode.omega0, cfg.channels.front().mode.omega0};
    double max_gamma = 0.0;
    for (const auto& ch : cfg.channels) {
        band.lo = std::min(band.lo, ch.mode.omega0);
        band.hi = std::max(band.hi, ch.mode.omega0);
        max_gamma = std::max(max_gamma, ch.mode.gamma);
    }
    band.lo -= 10.0 * max_gamma;
    band.hi += 10.0 * max_gamma;
    return band;
}

std::vector<double> sweep_values(const RunConfig& rc) {
    if (rc.sweep_variable == SweepVariable::time_s) {
        throw std::invalid_argument("sweep: time_s sweeps are produced by the incoherent command");
    }
    if (!std::isfinite(rc.sweep_min) || !std::isfinite(rc.sweep_max) || rc.sweep_min == rc.sweep_max) {
        throw std::invalid_argument("sweep: degenerate range [" + format_double(rc.sweep_min) + ", " +
                                    format_double(rc.sweep_max) + "]");
    }
    if (rc.sweep_variable == SweepVariable::power_uw && !(std::min(rc.sweep_min, rc.sweep_max) > 0.0)) {
        throw std::invalid_argument("sweep: power range must be positive");
    }
    if (rc.sweep_log) {
        if (!(rc.sweep_min > 0.0) || !(rc.sweep_max > 0.0)) {
            throw std::invalid_argument("sweep: log scale needs a positive range");
        }
        return log_spaced(rc.sweep_min, rc.sweep_max, rc.sweep_points);
    }
    std::vector<double> out(rc.sweep_points);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = rc.sweep_min + (rc.sweep_max - rc.sweep_min) * static_cast<double>(i) /
                                    static_cast<double>(rc.sweep_points - 1);
    }
    return out;
}

RunConfig at_sweep_value(RunConfig rc, double value) {
    if (rc.sweep_variable == SweepVariable::power_uw) {
        rc.power_uw = value;
    } else {
        if (rc.freq_offset_hz) {
            throw std::invalid_argument("sweep: delta_freq_hz sweeps need freq_offset_hz unset");
        }
        rc.delta_freq_hz = value;
    }
    return rc;
}

void append_metrics_header(std::vector<std::string>& header, const std::string& prefix) {
    for (const char* name : {"s_min_n2_per_hz", "f_min_hz", "bandwidth_hz", "sensitivity_hz_per_n2",
                             "sbp_hz2_per_n2", "sbp_approx_hz2_per_n2", "s_min_approx_n2_per_hz"}) {
        header.push_back(prefix + "_" + name);
    }
}

void append_metrics(std::vector<double>& row, const MetricsReport& r) {
    row.push_back(r.s_min);
    row.push_back(rad_to_hz(r.omega_min));
    row.push_back(rad_to_hz(r.bandwidth_3db));
    row.push_back(r.sensitivity);
    row.push_back(rad_to_hz(r.sbp));
    row.push_back(rad_to_hz(r.sbp_approx));
    row.push_back(r.s_min_approx);
}

std::filesystem::path emit(const CommandOptions& opts, const std::string& name, const CsvTable& table) {
    std::filesystem::create_directories(opts.out_dir);
    const auto path = opts.out_dir / name;
    write_csv(path, table);
    return path;
}

std::vector<double> trace_times(const RunConfig& rc) { return log_spaced(rc.time_min_s, rc.time_max_s, rc.time_points); }

CsvTable trace_table(const EnergyTrace& trace) {
    CsvTable t;
    t.header = {"t_s", "e_n_n2", "std_e_n_n2", "efsr_n", "efsr_per_rthz_n_per_rthz"};
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        t.add_row(std::vector<double>{trace.times[i], trace.e_n[i], trace.std_e_n[i], trace.efsr[i],
                                      trace.efsr_per_rthz[i]});
    }
    return t;
}

SimPlan energy_plan(const RunConfig& rc) {
    SimPlan plan = build_plan(rc);
    plan.duration = rc.time_max_s;
    if (rc.time_min_s * plan.sample_rate < 1.0) {
        throw std::invalid_argument("incoherent: time_min_s is shorter than one Monte Carlo sample");
    }
    return plan;
}

void add_summary(CsvTable& t, const std::string& quantity, double value, const std::string& unit) {
    t.add_row(std::vector<std::string>{quantity, format_double(value), unit});
}

double relative(double measured, double reference) { return std::abs(measured - reference) / std::abs(reference); }

}  // namespace

Engine engine_from_string(const std::string& name) {
    if (name == "analytic") return Engine::analytic;
    if (name == "montecarlo") return Engine::montecarlo;
    if (name == "both") return Engine::both;
    throw std::invalid_argument("unknown engine '" + name + "'");
}

CsvTable analytic_psd_table(const RunConfig& rc, const std::vector<ProbeKind>& kinds) {
    const double beta = resolve_beta(rc);
    CsvTable t;
    t.header.push_back("freq_hz");
    std::vector<ArrayConfig> arrays;
    for (auto kind : kinds) {
        arrays.push_back(build_array(rc, kind, beta));
        for (std::size_t i = 0; i < rc.sensors; ++i) {
            t.header.push_back(to_string(kind) + "_" + sensor_label(i) + "_psd_per_snl");
        }
        t.header.push_back(to_string(kind) + "_joint_psd_per_joint_snl");
    }
    const auto& grid = arrays.empty() ? build_array(rc, ProbeKind::classical, beta).grid : arrays.front().grid;
    const double snl = 0.5;
    const double joint_snl = 0.5 * static_cast<double>(rc.sensors);

    std::vector<std::vector<double>> columns;
    for (const auto& cfg : arrays) {
        for (std::size_t i = 0; i < cfg.sensors(); ++i) {
            columns.push_back(analytic_output_psd(cfg, i, grid).psd);
        }
        columns.push_back(analytic_joint_sum_psd(cfg, grid).psd);
    }
    for (std::size_t k = 0; k < grid.size(); ++k) {
        std::vector<double> row{rad_to_hz(grid[k])};
        std::size_t c = 0;
        for (const auto& cfg : arrays) {
            for (std::size_t i = 0; i < cfg.sensors(); ++i) row.push_back(columns[c++][k] / snl);
            row.push_back(columns[c++][k] / joint_snl);
        }
        t.add_row(row);
    }
    return t;
}

CsvTable montecarlo_psd_table(const RunConfig& rc, const std::vector<ProbeKind>& kinds) {
    const double beta = resolve_beta(rc);
    const SimPlan plan = build_plan(rc);
    CsvTable t;
    t.header.push_back("freq_hz");
    std::vector<std::vector<double>> columns;
    std::vector<double> freq;
    for (auto kind : kinds) {
        const auto cfg = build_array(rc, kind, beta);
        const auto sim_cfg = with_beta_scale(cfg, rc.mc_beta_scale);
        const auto rec = simulate(sim_cfg, plan, 0);
        auto spectra = welch_psd(rec, plan);
        if (rec.sensors() > 1) {
            const auto joint = joint_record(rec, JointMode::sum);
            spectra.push_back(welch_psd(joint, rec.sample_rate, plan.segment_length, plan.overlap, rec.lo_hz));
        }
        const auto& omega = spectra.front().omega;
        if (freq.empty()) {
            for (double w : omega) freq.push_back(rad_to_hz(w));
        }
        for (std::size_t i = 0; i < spectra.size(); ++i) {
            const bool joint = i == rec.sensors();
            const std::string label = joint ? std::string("joint") : sensor_label(i);
            const double snl = joint ? 0.5 * static_cast<double>(rec.sensors()) : 0.5;
            const auto measured = spectra[i].symmetrized();
            const auto reference = joint ? analytic_joint_sum_psd(cfg, omega) : analytic_output_psd(cfg, i, omega);
            std::vector<double> mc(omega.size());
            std::vector<double> an(omega.size());
            for (std::size_t k = 0; k < omega.size(); ++k) {
                mc[k] = measured.psd[k] / snl;
                an[k] = reference.psd[k] / snl;
            }
            t.header.push_back(to_string(kind) + "_" + label + "_montecarlo_psd_per_snl");
            t.header.push_back(to_string(kind) + "_" + label + "_analytic_psd_per_snl");
            columns.push_back(std::move(mc));
            columns.push_back(std::move(an));
        }
    }
    // drop the DC and Nyquist bins, where the window and band edge dominate
    for (std::size_t k = 1; k + 1 < freq.size(); ++k) {
        std::vector<double> row{freq[k]};
        for (const auto& c : columns) row.push_back(c[k]);
        t.add_row(row);
    }
    return t;
}

CsvTable force_noise_table(const RunConfig& rc, const std::vector<ProbeKind>& kinds) {
    const double beta = resolve_beta(rc);
    CsvTable t;
    t.header.push_back("freq_hz");
    std::vector<SpectrumGrid> spectra;
    for (auto kind : kinds) {
        spectra.push_back(force_noise_psd(build_array(rc, kind, beta)));
        t.header.push_back(to_string(kind) + "_force_psd_n2_per_hz");
    }
    const auto grid = build_array(rc, ProbeKind::classical, beta).grid;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        std::vector<double> row{rad_to_hz(grid[k])};
        for (const auto& s : spectra) row.push_back(s.psd[k]);
        t.add_row(row);
    }
    return t;
}

CsvTable sweep_table(const RunConfig& rc, const std::vector<ProbeKind>& kinds) {
    const auto values = sweep_values(rc);
    const double beta = resolve_beta(rc);
    CsvTable t;
    t.header = {"sweep_value_" + to_string(rc.sweep_variable), "probe_flux_photons_per_s"};
    for (auto kind : kinds) append_metrics_header(t.header, to_string(kind));
    append_metrics_header(t.header, "single_classical");

    std::vector<std::vector<double>> rows(values.size());
    parallel_for(values.size(), [&](std::size_t p) {
        const RunConfig point = at_sweep_value(rc, values[p]);
        std::vector<double> row{values[p], power_to_flux(point.power_uw * 1e-6, point.wavelength_nm * 1e-9)};
        for (auto kind : kinds) append_metrics(row, sbp(build_array(point, kind, beta)));
        append_metrics(row, sbp(build_single_sensor(point, beta)));
        rows[p] = std::move(row);
    });
    for (const auto& row : rows) t.add_row(row);
    return t;
}

IncoherentResult incoherent_tables(const RunConfig& rc, const CommandOptions& opts) {
    const double beta = resolve_beta(rc);
    const auto times = trace_times(rc);
    IncoherentResult out;
    out.summary.header = {"quantity", "value", "unit"};

    const bool analytic = opts.engine != Engine::montecarlo;
    const bool montecarlo = opts.engine != Engine::analytic;
    std::vector<std::pair<ProbeKind, EnergyTrace>> traces;

    for (auto kind : opts.kinds) {
        const std::string name = to_string(kind);
        const auto cfg = build_array(rc, kind, beta);
        const auto band = band_3db(cfg, min_force_noise(cfg));
        const auto trace = energy_trace_analytic(cfg, band, times);
        traces.emplace_back(kind, trace);
        if (analytic) {
            out.files.emplace_back("efsr_" + name + ".csv", trace_table(trace));
        }
        add_summary(out.summary, name + "_band_lo", rad_to_hz(band.lo), "Hz");
        add_summary(out.summary, name + "_band_hi", rad_to_hz(band.hi), "Hz");
        add_summary(out.summary, name + "_b_eff", trace.b_eff, "Hz");
        add_summary(out.summary, name + "_e_bar", trace.e_bar, "N^2");
        add_summary(out.summary, name + "_variance_rate", trace.variance_rate, "N^4/Hz");
        add_summary(out.summary, name + "_efsr_slope", loglog_slope(trace.times, trace.efsr), "log-log");

        if (montecarlo) {
            const auto sim_cfg = with_beta_scale(cfg, rc.mc_beta_scale);
            const auto mc = energy_trace_montecarlo(sim_cfg, energy_plan(rc), band, times);
            out.files.emplace_back("efsr_" + name + "_montecarlo.csv", trace_table(mc));
            add_summary(out.summary, name + "_montecarlo_efsr_slope", loglog_slope(mc.times, mc.efsr), "log-log");
            add_summary(out.summary, name + "_montecarlo_std_over_radiometer",
                        mc.std_e_n.back() / trace.std_e_n.back(), "ratio");
        }

        if (analytic) {
            const std::size_t nd = rc.contour_delta_points;
            std::vector<std::vector<std::vector<double>>> cells(nd);
            parallel_for(nd, [&](std::size_t d) {
                const double delta =
                    nd == 1 ? rc.contour_delta_min_hz
                            : rc.contour_delta_min_hz + (rc.contour_delta_max_hz - rc.contour_delta_min_hz) *
                                                            static_cast<double>(d) / static_cast<double>(nd - 1);
                RunConfig point = rc;
                point.freq_offset_hz.reset();
                point.delta_freq_hz = delta;
                const auto c = build_array(point, kind, beta);
                const auto tr = energy_trace_analytic(c, band_3db(c, min_force_noise(c)), times);
                for (std::size_t i = 0; i < times.size(); ++i) {
                    cells[d].push_back({delta, times[i], tr.efsr[i], tr.efsr_per_rthz[i]});
                }
            });
            CsvTable contour;
            contour.header = {"delta_freq_hz", "t_s", "efsr_n", "efsr_per_rthz_n_per_rthz"};
            for (const auto& block : cells) {
                for (const auto& row : block) contour.add_row(row);
            }
            out.files.emplace_back("contour_" + name + ".csv", std::move(contour));
        }
    }

    auto find = [&](ProbeKind k) -> const EnergyTrace* {
        for (const auto& [kind, tr] : traces) {
            if (kind == k) return &tr;
        }
        return nullptr;
    };
    if (const auto* c = find(ProbeKind::classical)) {
        for (auto k : {ProbeKind::entangled, ProbeKind::optimal}) {
            if (const auto* e = find(k)) {
                add_summary(out.summary, "time_ratio_" + to_string(k) + "_over_classical",
                            e->variance_rate / c->variance_rate, "ratio");
            }
        }
    }
    return out;
}

bool ValidationReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

CsvTable ValidationReport::table() const {
    CsvTable t;
    t.header = {"check", "measured_deviation", "tolerance", "pass"};
    for (const auto& c : checks) {
        t.add_row(std::vector<std::string>{c.name, format_double(c.measured), format_double(c.tolerance),
                                           c.pass ? "true" : "false"});
    }
    return t;
}

ValidationReport validation_checks(const RunConfig& rc) {
    ValidationReport report;
    auto check = [&report](std::string name, double measured, double tolerance) {
        report.checks.push_back({std::move(name), measured, tolerance, std::isfinite(measured) && measured <= tolerance});
    };
    const double beta = resolve_beta(rc);

    // analytic invariants
    const auto entangled = build_array(rc, ProbeKind::entangled, beta);
    const double v = entangled.source.variance_factor();
    if (std::all_of(rc.efficiency.begin(), rc.efficiency.end(), [](double e) { return e == 1.0; })) {
        const double floor_db = to_db(effective_quadrature_noise(entangled) / 0.5);
        check("joint_floor_db", std::abs(floor_db - to_db(v)), 0.05);
    }
    if (rc.sensors == 2) {
        auto cold = build_array(rc, ProbeKind::classical, beta);
        for (auto& ch : cold.channels) ch.temperature = 0.0;
        const double closed = omega_min_closed_form(cold.channels[0].mode, cold.channels[1].mode);
        check("omega_min_closed_form", relative(min_force_noise(cold).omega_min, closed), 1e-6);
    }

    // analytic vs Monte Carlo spectra and equipartition
    const SimPlan plan = build_plan(rc);
    std::vector<double> pos_var(rc.sensors, 0.0);
    std::size_t records = 0;
    for (auto kind : {ProbeKind::classical, ProbeKind::entangled}) {
        const auto cfg = build_array(rc, kind, beta);
        const auto rec = simulate(with_beta_scale(cfg, rc.mc_beta_scale), plan, 0);
        const auto spectra = welch_psd(rec, plan);
        const auto band = resonance_band(cfg);
        for (std::size_t i = 0; i < rec.sensors(); ++i) {
            const auto measured = spectra[i].symmetrized();
            std::vector<double> omega;
            std::vector<double> mc;
            for (std::size_t k = 0; k < measured.size(); ++k) {
                if (measured.omega[k] >= band.lo && measured.omega[k] <= band.hi) {
                    omega.push_back(measured.omega[k]);
                    mc.push_back(measured.psd[k]);
                }
            }
            const auto reference = analytic_output_psd(cfg, i, omega);
            check("psd_rms_" + to_string(kind) + "_" + sensor_label(i), rms_relative_deviation(mc, reference.psd),
                  0.05);

            const auto& x = rec.position[i];
            double mean = 0.0;
            for (double s : x) mean += s;
            mean /= static_cast<double>(x.size());
            double var = 0.0;
            for (double s : x) var += (s - mean) * (s - mean);
            pos_var[i] += var / static_cast<double>(x.size() - 1);
        }
        ++records;
    }
    for (std::size_t i = 0; i < rc.sensors; ++i) {
        const auto cfg = build_array(rc, ProbeKind::classical, beta);
        const auto& mode = cfg.channels[i].mode;
        const double expected = kBoltzmann * rc.temperature_k / (mode.mass * mode.omega0 * mode.omega0);
        if (expected > 0.0) {
            check("equipartition_" + sensor_label(i), relative(pos_var[i] / static_cast<double>(records), expected),
                  0.03);
        }
    }

    // radiometer model vs Monte Carlo ensemble
    const auto times = trace_times(rc);
    const double tol = 3.0 / std::sqrt(static_cast<double>(rc.mc_trials));
    for (auto kind : {ProbeKind::classical, ProbeKind::entangled}) {
        const auto cfg = build_array(rc, kind, beta);
        const auto band = band_3db(cfg, min_force_noise(cfg));
        const auto analytic = energy_trace_analytic(cfg, band, times);
        const auto mc = energy_trace_montecarlo(with_beta_scale(cfg, rc.mc_beta_scale), energy_plan(rc), band, times);
        check("energy_mean_" + to_string(kind), relative(mc.e_n.back(), analytic.e_bar),
              tol * analytic.std_e_n.back() / analytic.e_bar);
        check("radiometer_std_" + to_string(kind), relative(mc.std_e_n.back(), analytic.std_e_n.back()), tol);
    }
    return report;
}

std::vector<std::filesystem::path> cmd_psd(const RunConfig& rc, const CommandOptions& opts) {
    std::vector<std::filesystem::path> out;
    if (opts.engine != Engine::montecarlo) {
        out.push_back(emit(opts, "psd.csv", analytic_psd_table(rc, opts.kinds)));
        out.push_back(emit(opts, "force_noise.csv", force_noise_table(rc, opts.kinds)));
    }
    if (opts.engine != Engine::analytic) {
        out.push_back(emit(opts, "psd_montecarlo.csv", montecarlo_psd_table(rc, opts.kinds)));
    }
    return out;
}

std::vector<std::filesystem::path> cmd_sweep(const RunConfig& rc, const CommandOptions& opts) {
    if (opts.engine == Engine::montecarlo) {
        throw std::invalid_argument("sweep: only the analytic engine computes sweeps");
    }
    return {emit(opts, "sweep_" + to_string(rc.sweep_variable) + ".csv", sweep_table(rc, opts.kinds))};
}

std::vector<std::filesystem::path> cmd_incoherent(const RunConfig& rc, const CommandOptions& opts) {
    const auto result = incoherent_tables(rc, opts);
    std::vector<std::filesystem::path> out;
    for (const auto& [name, table] : result.files) out.push_back(emit(opts, name, table));
    out.push_back(emit(opts, "summary.csv", result.summary));
    return out;
}

ValidationReport cmd_validate(const RunConfig& rc, const CommandOptions& opts) {
    auto report = validation_checks(rc);
    emit(opts, "validate.csv", report.table());
    return report;
}

}  // namespace optosense
