#include "optosense/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "optosense/units.hpp"

namespace optosense {

namespace {

std::string join(const std::vector<std::string>& items, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw std::invalid_argument(key + ": '" + text + "' is not a finite number");
    }
    return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        throw std::invalid_argument(key + ": '" + text + "' is not a non-negative integer");
    }
    return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(parse_double(key, trim(item)));
    }
    if (out.empty()) {
        throw std::invalid_argument(key + ": empty list");
    }
    return out;
}

std::string fmt(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string fmt_list(const std::vector<double>& v) {
    std::vector<std::string> parts;
    for (double x : v) parts.push_back(fmt(x));
    return join(parts, ", ");
}

struct KeySpec {
    std::string name;
    bool required;
    std::string comment;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::optional<std::string>(const RunConfig&)> get;
};

#define OPTO_DOUBLE(field, doc)                                                                     \
    KeySpec {                                                                                       \
        #field, true, doc, [](RunConfig& c, const std::string& v) { c.field = parse_double(#field, v); }, \
            [](const RunConfig& c) -> std::optional<std::string> { return fmt(c.field); }           \
    }
#define OPTO_COUNT(field, doc)                                                                      \
    KeySpec {                                                                                       \
        #field, true, doc,                                                                          \
            [](RunConfig& c, const std::string& v) {                                               \
                c.field = static_cast<std::size_t>(parse_uint(#field, v));                          \
            },                                                                                      \
            [](const RunConfig& c) -> std::optional<std::string> { return std::to_string(c.field); } \
    }

const std::vector<KeySpec>& key_table() {
    static const std::vector<KeySpec> table = {
        {"schema_version", true, "configuration schema version",
         [](RunConfig& c, const std::string& v) { c.schema_version = static_cast<int>(parse_uint("schema_version", v)); },
         [](const RunConfig& c) -> std::optional<std::string> { return std::to_string(c.schema_version); }},
        OPTO_COUNT(sensors, "number of optomechanical sensors M"),
        OPTO_DOUBLE(mass_kg, "effective mass of every mode"),
        OPTO_DOUBLE(center_freq_hz, "mean mechanical resonance"),
        OPTO_DOUBLE(delta_freq_hz, "resonance difference f1 - f2 (sensors spread evenly across it)"),
        {"gamma_hz", true, "energy damping rate per sensor (list of M)",
         [](RunConfig& c, const std::string& v) { c.gamma_hz = parse_list("gamma_hz", v); },
         [](const RunConfig& c) -> std::optional<std::string> { return fmt_list(c.gamma_hz); }},
        {"freq_offset_hz", false, "optional explicit resonance offsets from center_freq_hz (list of M)",
         [](RunConfig& c, const std::string& v) { c.freq_offset_hz = parse_list("freq_offset_hz", v); },
         [](const RunConfig& c) -> std::optional<std::string> {
             if (!c.freq_offset_hz) return std::nullopt;
             return fmt_list(*c.freq_offset_hz);
         }},
        OPTO_DOUBLE(temperature_k, "bath temperature"),
        OPTO_DOUBLE(power_uw, "probe power at each sensor"),
        OPTO_DOUBLE(wavelength_nm, "probe wavelength (power to photon flux)"),
        OPTO_DOUBLE(squeezing_db, "phase squeezing of the entangled source below shot noise"),
        {"efficiency", true, "per-arm detection efficiency in [0,1] (list of M)",
         [](RunConfig& c, const std::string& v) { c.efficiency = parse_list("efficiency", v); },
         [](const RunConfig& c) -> std::optional<std::string> { return fmt_list(c.efficiency); }},
        {"beta_per_m", false, "optional explicit transduction; overrides the calibration below",
         [](RunConfig& c, const std::string& v) { c.beta_per_m = parse_double("beta_per_m", v); },
         [](const RunConfig& c) -> std::optional<std::string> {
             if (!c.beta_per_m) return std::nullopt;
             return fmt(*c.beta_per_m);
         }},
        OPTO_DOUBLE(imprecision_floor_fn_rthz,
                    "calibration: single-sensor on-resonance shot-noise force floor at power_uw"),
        OPTO_DOUBLE(grid_span_hz, "analysis grid half-width around center_freq_hz"),
        OPTO_COUNT(grid_points, "analysis grid points"),
        {"sweep_variable", true, "power_uw | delta_freq_hz | time_s",
         [](RunConfig& c, const std::string& v) {
             if (v == "power_uw") c.sweep_variable = SweepVariable::power_uw;
             else if (v == "delta_freq_hz") c.sweep_variable = SweepVariable::delta_freq_hz;
             else if (v == "time_s") c.sweep_variable = SweepVariable::time_s;
             else throw std::invalid_argument("sweep_variable: '" + v + "' is not power_uw, delta_freq_hz or time_s");
         },
         [](const RunConfig& c) -> std::optional<std::string> { return to_string(c.sweep_variable); }},
        OPTO_DOUBLE(sweep_min, "sweep start in units of sweep_variable"),
        OPTO_DOUBLE(sweep_max, "sweep end in units of sweep_variable"),
        OPTO_COUNT(sweep_points, "sweep points"),
        {"sweep_scale", true, "log | linear",
         [](RunConfig& c, const std::string& v) {
             if (v == "log") c.sweep_log = true;
             else if (v == "linear") c.sweep_log = false;
             else throw std::invalid_argument("sweep_scale: '" + v + "' is not log or linear");
         },
         [](const RunConfig& c) -> std::optional<std::string> { return std::string(c.sweep_log ? "log" : "linear"); }},
        OPTO_DOUBLE(time_min_s, "shortest integration time"),
        OPTO_DOUBLE(time_max_s, "longest integration time (also the Monte Carlo record length for incoherent runs)"),
        OPTO_COUNT(time_points, "log-spaced integration times"),
        OPTO_DOUBLE(contour_delta_min_hz, "contour grid: smallest resonance difference"),
        OPTO_DOUBLE(contour_delta_max_hz, "contour grid: largest resonance difference"),
        OPTO_COUNT(contour_delta_points, "contour grid: resonance difference points"),
        OPTO_DOUBLE(mc_sample_rate_hz, "Monte Carlo rate (adjusted so the centre sits at a quarter of it)"),
        OPTO_DOUBLE(mc_duration_s, "Monte Carlo record length for spectra"),
        OPTO_COUNT(mc_segment_length, "Welch segment length (power of two)"),
        OPTO_DOUBLE(mc_overlap, "Welch segment overlap in [0,1)"),
        OPTO_COUNT(mc_trials, "Monte Carlo ensemble size for energy statistics"),
        {"mc_beta_scale", false, "optional transduction scale applied only to the Monte Carlo engine",
         [](RunConfig& c, const std::string& v) { c.mc_beta_scale = parse_double("mc_beta_scale", v); },
         [](const RunConfig& c) -> std::optional<std::string> {
             if (c.mc_beta_scale == 1.0) return std::nullopt;
             return fmt(c.mc_beta_scale);
         }},
        {"seed", false, "random seed",
         [](RunConfig& c, const std::string& v) { c.seed = parse_uint("seed", v); },
         [](const RunConfig& c) -> std::optional<std::string> { return std::to_string(c.seed); }},
    };
    return table;
}

#undef OPTO_DOUBLE
#undef OPTO_COUNT

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error("invalid configuration:\n  " + join(problems, "\n  ")), problems_(std::move(problems)) {}

std::string to_string(SweepVariable v) {
    switch (v) {
        case SweepVariable::power_uw: return "power_uw";
        case SweepVariable::delta_freq_hz: return "delta_freq_hz";
        case SweepVariable::time_s: return "time_s";
    }
    return "unknown";
}

void RunConfig::validate() const {
    std::vector<std::string> p;
    if (schema_version != kSchemaVersion) {
        p.push_back("schema_version: expected " + std::to_string(kSchemaVersion) + ", got " +
                    std::to_string(schema_version));
    }
    if (sensors == 0) p.push_back("sensors: must be at least 1");
    if (!(mass_kg > 0)) p.push_back("mass_kg: must be positive");
    if (!(center_freq_hz > 0)) p.push_back("center_freq_hz: must be positive");
    if (gamma_hz.size() != sensors) p.push_back("gamma_hz: needs one value per sensor");
    for (double g : gamma_hz) {
        if (!(g > 0)) p.push_back("gamma_hz: damping rates must be positive");
    }
    if (freq_offset_hz && freq_offset_hz->size() != sensors) {
        p.push_back("freq_offset_hz: needs one value per sensor");
    }
    if (!(temperature_k >= 0)) p.push_back("temperature_k: must be non-negative");
    if (!(power_uw > 0)) p.push_back("power_uw: must be positive");
    if (!(wavelength_nm > 0)) p.push_back("wavelength_nm: must be positive");
    if (!(squeezing_db >= 0)) p.push_back("squeezing_db: must be non-negative");
    if (efficiency.size() != sensors) p.push_back("efficiency: needs one value per sensor");
    for (double e : efficiency) {
        if (!(e >= 0 && e <= 1)) p.push_back("efficiency: values must lie in [0,1]");
    }
    if (beta_per_m && !(*beta_per_m > 0)) p.push_back("beta_per_m: must be positive");
    if (!(imprecision_floor_fn_rthz > 0)) p.push_back("imprecision_floor_fn_rthz: must be positive");
    if (!(grid_span_hz > 0)) p.push_back("grid_span_hz: must be positive");
    if (grid_points < 4096) p.push_back("grid_points: at least 4096 points required");
    if (sweep_points < 2) p.push_back("sweep_points: at least two points required");
    if (!(time_min_s > 0) || !(time_max_s > time_min_s)) p.push_back("time_min_s/time_max_s: need 0 < min < max");
    if (time_points < 2) p.push_back("time_points: at least two points required");
    if (!(contour_delta_max_hz >= contour_delta_min_hz)) p.push_back("contour_delta_*: max below min");
    if (contour_delta_points < 1) p.push_back("contour_delta_points: at least one point required");
    if (!(mc_sample_rate_hz > 0)) p.push_back("mc_sample_rate_hz: must be positive");
    if (!(mc_duration_s > 0)) p.push_back("mc_duration_s: must be positive");
    if (mc_segment_length == 0 || (mc_segment_length & (mc_segment_length - 1)) != 0) {
        p.push_back("mc_segment_length: must be a power of two");
    }
    if (!(mc_overlap >= 0 && mc_overlap < 1)) p.push_back("mc_overlap: must lie in [0,1)");
    if (mc_trials < 2) p.push_back("mc_trials: at least two trials required");
    if (!(mc_beta_scale > 0)) p.push_back("mc_beta_scale: must be positive");
    if (!p.empty()) throw ConfigError(std::move(p));
}

RunConfig parse_run_config(const std::string& text) {
    const auto& table = key_table();
    std::map<std::string, const KeySpec*> by_name;
    for (const auto& k : table) by_name[k.name] = &k;

    RunConfig cfg;
    std::vector<std::string> problems;
    std::set<std::string> seen;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            problems.push_back("line " + std::to_string(lineno) + ": expected 'key = value'");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = by_name.find(key);
        if (it == by_name.end()) {
            problems.push_back("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
            continue;
        }
        if (!seen.insert(key).second) {
            problems.push_back("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
            continue;
        }
        try {
            it->second->set(cfg, value);
        } catch (const std::exception& e) {
            problems.push_back("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    for (const auto& k : table) {
        if (k.required && !seen.count(k.name)) {
            problems.push_back("missing key '" + k.name + "'");
        }
    }
    if (!problems.empty()) throw ConfigError(std::move(problems));
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError({"cannot open configuration file " + path.string()});
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str());
}

std::string format_run_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "# optosense run configuration\n";
    for (const auto& k : key_table()) {
        const auto value = k.get(cfg);
        if (!value) {
            out << "# " << k.name << " = ...    (" << k.comment << ")\n";
            continue;
        }
        out << "# " << k.comment << '\n' << k.name << " = " << *value << '\n';
    }
    return out.str();
}

std::string default_run_config_text() { return format_run_config(RunConfig{}); }

double resolve_beta(const RunConfig& rc) {
    if (rc.beta_per_m) return *rc.beta_per_m;
    SensorChannel ref;
    ref.mode = {hz_to_rad(rc.center_freq_hz), hz_to_rad(rc.gamma_hz.at(0)), rc.mass_kg};
    ref.alpha_flux = power_to_flux(rc.power_uw * 1e-6, rc.wavelength_nm * 1e-9);
    ref.beta = 1.0;
    const double floor = rc.imprecision_floor_fn_rthz * 1e-15;
    return calibrate_beta(floor * floor, ref, ref.mode.omega0);
}

namespace {

std::vector<double> resonance_offsets_hz(const RunConfig& rc) {
    if (rc.freq_offset_hz) return *rc.freq_offset_hz;
    std::vector<double> off(rc.sensors, 0.0);
    if (rc.sensors > 1) {
        for (std::size_t i = 0; i < rc.sensors; ++i) {
            off[i] = rc.delta_freq_hz * (0.5 - static_cast<double>(i) / static_cast<double>(rc.sensors - 1));
        }
    }
    return off;
}

std::vector<double> analysis_grid(const RunConfig& rc) {
    return linear_grid(hz_to_rad(rc.center_freq_hz - rc.grid_span_hz), hz_to_rad(rc.center_freq_hz + rc.grid_span_hz),
                       rc.grid_points);
}

}  // namespace

ArrayConfig build_array(const RunConfig& rc, ProbeKind kind, double beta) {
    rc.validate();
    const double flux = power_to_flux(rc.power_uw * 1e-6, rc.wavelength_nm * 1e-9);
    const auto offsets = resonance_offsets_hz(rc);
    ArrayConfig cfg;
    cfg.kind = kind;
    for (std::size_t i = 0; i < rc.sensors; ++i) {
        SensorChannel ch;
        ch.mode = {hz_to_rad(rc.center_freq_hz + offsets[i]), hz_to_rad(rc.gamma_hz[i]), rc.mass_kg};
        ch.beta = beta;
        ch.alpha_flux = flux;
        ch.temperature = rc.temperature_k;
        cfg.channels.push_back(ch);
    }
    cfg.source = {rc.squeezing_db, flux * static_cast<double>(rc.sensors)};
    cfg.network = SplitNetwork::even(rc.sensors);
    cfg.network.efficiency = rc.efficiency;
    cfg.grid = analysis_grid(rc);
    return cfg;
}

ArrayConfig build_array(const RunConfig& rc, ProbeKind kind) { return build_array(rc, kind, resolve_beta(rc)); }

ArrayConfig build_single_sensor(const RunConfig& rc, double beta) {
    ArrayConfig cfg = build_array(rc, ProbeKind::classical, beta);
    cfg.channels.resize(1);
    cfg.network = SplitNetwork::even(1);
    cfg.network.efficiency = {rc.efficiency.at(0)};
    cfg.source.carrier_flux = cfg.channels[0].alpha_flux;
    return cfg;
}

SimPlan build_plan(const RunConfig& rc) {
    SimPlan plan;
    plan.sample_rate = bandpass_sample_rate(rc.center_freq_hz, rc.mc_sample_rate_hz);
    plan.duration = rc.mc_duration_s;
    plan.seed = rc.seed;
    plan.segment_length = rc.mc_segment_length;
    plan.overlap = rc.mc_overlap;
    plan.trials = rc.mc_trials;
    plan.center_omega = hz_to_rad(rc.center_freq_hz);
    return plan;
}

}  // namespace optosense
