#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "optosense/commands.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitValidation = 4;

struct Args {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::string probe = "all";
    std::string engine = "analytic";
};

optosense::RunConfig load(const Args& args) {
    optosense::RunConfig rc =
        args.config.empty() ? optosense::RunConfig{} : optosense::load_run_config(args.config);
    if (args.seed) rc.seed = *args.seed;
    rc.validate();
    return rc;
}

optosense::CommandOptions options(const Args& args) {
    optosense::CommandOptions opts;
    opts.out_dir = args.out;
    opts.engine = optosense::engine_from_string(args.engine);
    if (args.probe != "all") {
        opts.kinds = {optosense::probe_kind_from_string(args.probe)};
    }
    return opts;
}

void report(const std::vector<std::filesystem::path>& written) {
    for (const auto& p : written) std::cout << p.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Force-noise analysis of optomechanical sensor arrays read out with entangled probes"};
    app.require_subcommand(1);

    Args args;
    auto add_common = [&args](CLI::App* cmd) {
        cmd->add_option("--config", args.config, "run configuration file (defaults if omitted)");
        cmd->add_option("--out", args.out, "output directory")->capture_default_str();
        cmd->add_option("--seed", args.seed, "override the configured random seed");
        cmd->add_option("--probe", args.probe, "probe family")
            ->check(CLI::IsMember({"classical", "entangled", "optimal", "all"}))
            ->capture_default_str();
        cmd->add_option("--engine", args.engine, "analytic, Monte Carlo or both")
            ->check(CLI::IsMember({"analytic", "montecarlo", "both"}))
            ->capture_default_str();
    };

    auto* psd = app.add_subcommand("psd", "shot-noise-normalised output spectra and force-noise spectra");
    auto* sweep = app.add_subcommand("sweep", "minimum force noise, bandwidth and SBP over power or detuning");
    auto* incoherent = app.add_subcommand("incoherent", "energy force-resolution traces and contour grids");
    auto* validate = app.add_subcommand("validate", "analytic vs Monte Carlo consistency checks");
    auto* defaults = app.add_subcommand("defaults", "print the default run configuration");
    for (auto* cmd : {psd, sweep, incoherent, validate}) add_common(cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (defaults->parsed()) {
            std::cout << optosense::default_run_config_text();
            return 0;
        }
        const auto rc = load(args);
        const auto opts = options(args);
        if (psd->parsed()) {
            report(optosense::cmd_psd(rc, opts));
        } else if (sweep->parsed()) {
            report(optosense::cmd_sweep(rc, opts));
        } else if (incoherent->parsed()) {
            report(optosense::cmd_incoherent(rc, opts));
        } else if (validate->parsed()) {
            const auto result = optosense::cmd_validate(rc, opts);
            std::cout << optosense::to_csv_text(result.table());
            if (!result.all_passed()) {
                std::cerr << "validation failed\n";
                return kExitValidation;
            }
        }
    } catch (const optosense::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    }
    return EXIT_SUCCESS;
}
