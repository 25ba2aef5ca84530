// Batch front door: run a scenario config, list the shipped presets, or
// validate a config without simulating.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sdelab/scenario.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read config file " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

int do_validate(const std::string& config_path) {
    std::vector<std::string> errors;
    sdelab::ScenarioConfig cfg = sdelab::parse_config(slurp(config_path), errors);
    for (const auto& e : errors) std::cerr << config_path << ": " << e << "\n";
    if (!errors.empty()) return sdelab::kExitValidation;

    sdelab::ValidationReport rep = sdelab::validate_config(cfg);
    for (const auto& e : rep.errors) std::cerr << config_path << ": " << e << "\n";
    for (const auto& c : rep.admissibility)
        std::cout << (c.pass ? "pass" : "FAIL") << "  " << c.analysis << ": " << c.condition
                  << "  (constant " << c.constant << ", threshold " << c.threshold << ")\n";
    std::cout << (rep.ok ? "config valid\n" : "config invalid\n");
    return rep.ok ? sdelab::kExitOk : sdelab::kExitValidation;
}

int do_run(const std::string& config_path, const sdelab::RunOptions& opts) {
    std::vector<std::string> errors;
    sdelab::ScenarioConfig cfg = sdelab::parse_config(slurp(config_path), errors);
    if (!errors.empty()) {
        for (const auto& e : errors) std::cerr << config_path << ": " << e << "\n";
        return sdelab::kExitValidation;
    }
    sdelab::RunResult res = sdelab::run_scenario(cfg, opts);
    if (res.exit_code == sdelab::kExitValidation) {
        for (const auto& e : res.report["validation"]["errors"])
            std::cerr << config_path << ": " << e.get<std::string>() << "\n";
        for (const auto& c : res.report["validation"]["admissibility"])
            if (!c["pass"].get<bool>())
                std::cerr << config_path << ": admissibility failed for "
                          << c["analysis"].get<std::string>() << ": "
                          << c["condition"].get<std::string>() << "\n";
    } else if (res.report.contains("error")) {
        std::cerr << "error: " << res.report["error"].get<std::string>() << "\n";
    }
    if (!res.report_path.empty()) std::cout << "report: " << res.report_path << "\n";
    std::cout << "exit code " << res.exit_code << "\n";
    return res.exit_code;
}

int do_presets() {
    for (const auto& p : sdelab::list_presets()) {
        std::cout << p.name << ": nu = " << p.nu << ", N = " << p.N << ", A0 = " << p.A0
                  << ", L = " << p.L << ", M = " << p.M << "\n    " << p.notes << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation and verification laboratory for semilinear SDEs with "
                 "exponentially stable linear part"};
    app.require_subcommand(1);

    std::string config_path;
    sdelab::RunOptions opts;

    auto* run = app.add_subcommand("run", "execute the analyses requested in a config");
    run->add_option("config", config_path, "scenario config (JSON)")->required();
    run->add_option("--out", opts.out_dir_override, "override the output directory");
    run->add_option("--threads", opts.threads, "worker threads (results do not depend on this)");
    run->add_flag("--fixed-clock", opts.fixed_clock, "zero wall-time stamps for byte-stable reports");

    auto* validate = app.add_subcommand("validate", "validate a config without simulating");
    validate->add_option("config", config_path, "scenario config (JSON)")->required();

    app.add_subcommand("presets", "list the shipped presets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return do_run(config_path, opts);
        if (validate->parsed()) return do_validate(config_path);
        return do_presets();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return sdelab::kExitRuntime;
    }
}
