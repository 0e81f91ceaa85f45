#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "optosense/csv.hpp"
#include "optosense/run_config.hpp"

namespace optosense {

enum class Engine { analytic, montecarlo, both };
Engine engine_from_string(const std::string& name);

struct CommandOptions {
    std::filesystem::path out_dir = ".";
    std::vector<ProbeKind> kinds{ProbeKind::classical, ProbeKind::entangled, ProbeKind::optimal};
    Engine engine = Engine::analytic;
};

// Output PSDs normalised by the shot-noise level: 1/2 per sensor and M/2 for
// the summed record.
CsvTable analytic_psd_table(const RunConfig& rc, const std::vector<ProbeKind>& kinds);
CsvTable montecarlo_psd_table(const RunConfig& rc, const std::vector<ProbeKind>& kinds);
CsvTable force_noise_table(const RunConfig& rc, const std::vector<ProbeKind>& kinds);

CsvTable sweep_table(const RunConfig& rc, const std::vector<ProbeKind>& kinds);

struct IncoherentResult {
    std::vector<std::pair<std::string, CsvTable>> files;  // file name -> table
    CsvTable summary;
};
IncoherentResult incoherent_tables(const RunConfig& rc, const CommandOptions& opts);

struct CheckResult {
    std::string name;
    double measured = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct ValidationReport {
    std::vector<CheckResult> checks;
    bool all_passed() const;
    CsvTable table() const;
};

ValidationReport validation_checks(const RunConfig& rc);

// Each command writes its CSVs into opts.out_dir and returns the paths.
std::vector<std::filesystem::path> cmd_psd(const RunConfig& rc, const CommandOptions& opts);
std::vector<std::filesystem::path> cmd_sweep(const RunConfig& rc, const CommandOptions& opts);
std::vector<std::filesystem::path> cmd_incoherent(const RunConfig& rc, const CommandOptions& opts);
ValidationReport cmd_validate(const RunConfig& rc, const CommandOptions& opts);

}  // namespace optosense
