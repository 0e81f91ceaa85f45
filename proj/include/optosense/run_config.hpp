#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "optosense/estimation.hpp"
#include "optosense/timedomain.hpp"

namespace optosense {

inline constexpr int kSchemaVersion = 1;

// Raised for anything wrong with the configuration text itself; carries one
// diagnostic per offending key.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

enum class SweepVariable { power_uw, delta_freq_hz, time_s };
std::string to_string(SweepVariable v);

// Flat `key = value` run configuration. Every physical key carries its unit in
// the name. Lists are comma separated.
struct RunConfig {
    int schema_version = kSchemaVersion;

    // array
    std::size_t sensors = 2;
    double mass_kg = 6.75e-13;
    double center_freq_hz = 5.954e6;
    double delta_freq_hz = 1422.0;  // Omega_1 - Omega_2 for two sensors
    std::vector<double> gamma_hz{200.0, 260.0};
    std::optional<std::vector<double>> freq_offset_hz;
    double temperature_k = 295.0;

    // probe
    double power_uw = 50.0;  // per sensor
    double wavelength_nm = 1550.0;
    double squeezing_db = 2.0;
    std::vector<double> efficiency{1.0, 1.0};

    // transduction: explicit beta, or calibrated to a single-sensor shot-noise
    // force floor on resonance at power_uw
    std::optional<double> beta_per_m;
    double imprecision_floor_fn_rthz = 0.45;

    // analysis grid, centred on center_freq_hz
    double grid_span_hz = 25000.0;
    std::size_t grid_points = 8193;

    // sweep
    SweepVariable sweep_variable = SweepVariable::power_uw;
    double sweep_min = 5.0;
    double sweep_max = 500.0;
    std::size_t sweep_points = 21;
    bool sweep_log = true;

    // incoherent sensing
    double time_min_s = 0.01;
    double time_max_s = 1.0;
    std::size_t time_points = 41;
    double contour_delta_min_hz = 0.0;
    double contour_delta_max_hz = 3000.0;
    std::size_t contour_delta_points = 31;

    // Monte Carlo
    double mc_sample_rate_hz = 51200.0;
    double mc_duration_s = 20.0;
    std::size_t mc_segment_length = 2048;
    double mc_overlap = 0.5;
    std::size_t mc_trials = 200;
    double mc_beta_scale = 1.0;

    std::uint64_t seed = 12345;

    void validate() const;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string format_run_config(const RunConfig& cfg);
std::string default_run_config_text();

// Transduction shared by every sensor (explicit or calibrated at the base power).
double resolve_beta(const RunConfig& rc);

// Array for one probe family with the given transduction.
ArrayConfig build_array(const RunConfig& rc, ProbeKind kind, double beta);
ArrayConfig build_array(const RunConfig& rc, ProbeKind kind);

// Single classical sensor (mode 1) at the same per-sensor power.
ArrayConfig build_single_sensor(const RunConfig& rc, double beta);

SimPlan build_plan(const RunConfig& rc);

}  // namespace optosense
