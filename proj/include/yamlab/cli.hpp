#pragma once

#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "yamlab/config.hpp"
#include "yamlab/report.hpp"
#include "yamlab/scenarios.hpp"

namespace yamlab {

// exit codes: 0 all pass, 1 tolerance failure, 2 config/usage, 3 I/O
enum ExitCode { exit_ok = 0, exit_tolerance = 1, exit_usage = 2, exit_io = 3 };

inline void print_report(const Report& rep, std::ostream& os) {
    os << "scenario " << rep.scenario;
    if (!rep.params.empty()) os << " [" << rep.params << "]";
    os << "\n";
    for (const auto& row : rep.rows) {
        os << (row.pass ? "  pass  " : "  FAIL  ") << row.case_id;
        if (!row.params.empty()) os << " (" << row.params << ")";
        os << "  value=" << format_g12(row.value) << "  reference=" << format_g12(row.reference)
           << "  margin=" << format_g12(row.margin) << "\n";
    }
    os << (rep.all_pass() ? "all cases pass" : "TOLERANCE FAILURES PRESENT") << "\n";
}

/// Full command-line entry point, factored out of main() so the exit
/// code contract can be exercised in-process.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
    CLI::App app{"numerical laboratory for quotient minimization and rearrangement on product models"};
    app.name("yamlab");

    std::string scenario, config_path, out_path;
    std::uint64_t seed = 0;
    int res = 0, res_fiber = 0;

    app.add_option("scenario", scenario, "one of: constants, sphere-constant, theorem-yoon, "
                                         "symmetrize-props, radial-minimizer, schoen-limit, "
                                         "lambda1-product")
        ->required();
    app.add_option("--config", config_path, "key = value config file");
    app.add_option("--out", out_path, "write the report as CSV");
    app.add_option("--seed", seed, "seed for batteries and restarts");
    app.add_option("--res", res, "primary resolution override");
    app.add_option("--res-fiber", res_fiber, "fiber resolution override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return exit_usage;
    }

    ScenarioConfig cfg;
    cfg.scenario = scenario;
    if (!config_path.empty()) {
        std::ifstream f(config_path, std::ios::binary);
        if (!f) {
            err << "cannot read config file: " << config_path << "\n";
            return exit_io;
        }
        std::ostringstream ss;
        ss << f.rdbuf();
        try {
            apply_config_text(cfg, ss.str());
        } catch (const ConfigError& e) {
            err << e.what() << "\n";
            return exit_usage;
        }
        cfg.scenario = scenario;  // the positional always names the scenario
    }
    if (app.count("--seed") > 0) cfg.seed = seed;
    if (app.count("--res") > 0) cfg.res = res;
    if (app.count("--res-fiber") > 0) cfg.res_fiber = res_fiber;
    if (!out_path.empty()) cfg.out_path = out_path;

    Report rep;
    try {
        rep = run_scenario(cfg);
    } catch (const ConfigError& e) {
        err << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        err << "run failed: " << e.what() << "\n";
        return exit_tolerance;
    }

    print_report(rep, out);
    if (!cfg.out_path.empty()) {
        if (!emit_csv(rep, cfg.out_path)) {
            err << "cannot write: " << cfg.out_path << "\n";
            return exit_io;
        }
        out << "wrote " << cfg.out_path << "\n";
    }
    return rep.all_pass() ? exit_ok : exit_tolerance;
}

}  // namespace yamlab
