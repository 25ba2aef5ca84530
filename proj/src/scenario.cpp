#include "sdelab/scenario.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>

#include "sdelab/probes.hpp"
#include "sdelab/ref.hpp"
#include "sdelab/thresholds.hpp"

namespace sdelab {

namespace {

constexpr const char* kVersion = "sdelab 0.1.0";
const std::vector<std::string> kKnownAnalyses = {"solve", "dissipativity", "convergence",
                                                 "comparability", "recurrence_scan"};

struct Resolved {
    SpectralOperator op;
    CoefficientField F;
    CoefficientField G;
    double A0 = 0.0;
    double L = 0.0;
    double M = 0.0;
    // purely time-dependent factors of the coefficients, for recurrence scans
    std::function<void(double, std::span<double>)> time_factors;
    std::size_t n_factors = 0;
    // scalar factor driving the shift detection of the comparability probe
    std::function<double(double)> drift_factor;
};

Resolved resolve(const ScenarioConfig& cfg) {
    Resolved r;
    if (cfg.coefficients.preset == "example1") {
        r.op = make_scalar_operator(cfg.op.nu);
        r.F = example1_drift();
        r.G = example1_diffusion();
        r.time_factors = [](double t, std::span<double> out) { example1_time_factors(t, out); };
        r.n_factors = 2;
        r.drift_factor = [](double t) {
            double out[2];
            example1_time_factors(t, out);
            return out[0];
        };
    } else if (cfg.coefficients.preset == "example2") {
        auto red = galerkin_reduce(cfg.op.n_modes, cfg.op.grid_points, example2_pointwise_drift,
                                   example2_pointwise_diffusion, 0.0, 1.0, 1.0);
        r.op = red.op;
        r.F = red.drift;
        r.G = red.diffusion;
        r.time_factors = [](double t, std::span<double> out) { example2_time_factors(t, out); };
        r.n_factors = 2;
        r.drift_factor = [](double t) {
            double out[2];
            example2_time_factors(t, out);
            return out[0];
        };
    } else {
        r.op = make_scalar_operator(cfg.op.nu);
        r.F = make_affine_field(cfg.coefficients.drift_base, cfg.coefficients.drift_slope);
        r.G = make_affine_field(cfg.coefficients.diff_base, cfg.coefficients.diff_slope);
        SampledPath drift_base = cfg.coefficients.drift_base;
        r.time_factors = [drift_base](double t, std::span<double> out) {
            drift_base.value_at(t, out);
        };
        r.n_factors = drift_base.dim;
        r.drift_factor = [drift_base](double t) { return drift_base.scalar_at(t); };
    }
    r.A0 = std::max(r.F.A0, r.G.A0);
    r.L = std::max(r.F.L, r.G.L);
    r.M = std::max(r.F.M, r.G.M);
    return r;
}

bool wants(const ScenarioConfig& cfg, const std::string& a) {
    return std::find(cfg.analyses.begin(), cfg.analyses.end(), a) != cfg.analyses.end();
}

InitialLaw initial_from(const ScenarioConfig::InitialSpec& s, std::size_t dim, bool second) {
    double mean = second ? s.mean2 : s.mean;
    double sd = second ? s.std_dev2 : s.std_dev;
    if (s.kind == "fixed") return fixed_initial(std::vector<double>(dim, mean));
    return gaussian_initial(std::vector<double>(dim, mean), std::vector<double>(dim, sd));
}

std::vector<double> detect_shifts(const Resolved& r, const ScenarioConfig::ComparabilitySpec& c) {
    auto rep = epsilon_almost_periods_fn(
        [&](double t, std::span<double> out) { out[0] = r.drift_factor(t); }, 1, c.epsilon,
        c.scan_lo, c.scan_hi, c.scan_step, 8.0, 0.02);
    // cluster contiguous detections, keep the cluster centers
    std::vector<double> centers;
    std::size_t i = 0;
    while (i < rep.periods.size()) {
        std::size_t j = i;
        while (j + 1 < rep.periods.size() &&
               rep.periods[j + 1] - rep.periods[j] < 2.5 * c.scan_step)
            ++j;
        centers.push_back(0.5 * (rep.periods[i] + rep.periods[j]));
        i = j + 1;
    }
    // drop the trivial shift at 0 if the scan included it
    while (!centers.empty() && std::abs(centers.front()) < 1e-9)
        centers.erase(centers.begin());
    if (centers.size() > c.max_shifts) {
        std::vector<double> pick;
        for (std::size_t k = 0; k < c.max_shifts; ++k)
            pick.push_back(centers[k * (centers.size() - 1) / (c.max_shifts - 1)]);
        pick.erase(std::unique(pick.begin(), pick.end()), pick.end());
        centers = std::move(pick);
    }
    return centers;
}

}  // namespace

ScenarioConfig default_config() { return ScenarioConfig{}; }

ScenarioConfig parse_config(const std::string& text, std::vector<std::string>& errors) {
    ScenarioConfig cfg;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        errors.push_back(std::string("config is not valid JSON: ") + e.what());
        return cfg;
    }
    try {
        if (j.contains("operator")) {
            const auto& o = j["operator"];
            std::string kind = o.value("kind", "scalar");
            if (kind == "scalar")
                cfg.op.kind = ScenarioConfig::OperatorSpec::Kind::scalar;
            else if (kind == "galerkin")
                cfg.op.kind = ScenarioConfig::OperatorSpec::Kind::galerkin;
            else
                errors.push_back("operator.kind must be 'scalar' or 'galerkin'");
            cfg.op.nu = o.value("nu", cfg.op.nu);
            cfg.op.n_modes = o.value("n_modes", cfg.op.n_modes);
            cfg.op.grid_points = o.value("grid_points", cfg.op.grid_points);
        }
        if (j.contains("coefficients")) {
            const auto& c = j["coefficients"];
            if (c.contains("preset")) {
                cfg.coefficients.preset = c["preset"].get<std::string>();
            } else if (c.contains("custom")) {
                cfg.coefficients.custom = true;
                const auto& cu = c["custom"];
                cfg.coefficients.drift_base = path_from_json(cu.at("drift_base"));
                cfg.coefficients.drift_slope = path_from_json(cu.at("drift_slope"));
                cfg.coefficients.diff_base = path_from_json(cu.at("diff_base"));
                cfg.coefficients.diff_slope = path_from_json(cu.at("diff_slope"));
            } else {
                errors.push_back("coefficients: need 'preset' or 'custom'");
            }
        } else {
            errors.push_back("missing 'coefficients'");
        }
        if (j.contains("grid")) {
            cfg.grid.t0 = j["grid"].value("t0", cfg.grid.t0);
            cfg.grid.h = j["grid"].value("h", cfg.grid.h);
            cfg.grid.horizon = j["grid"].value("horizon", cfg.grid.horizon);
        }
        if (j.contains("ensemble")) {
            cfg.ensemble.n_paths = j["ensemble"].value("n_paths", cfg.ensemble.n_paths);
            cfg.ensemble.seed = j["ensemble"].value("seed", cfg.ensemble.seed);
        }
        if (j.contains("analyses"))
            cfg.analyses = j["analyses"].get<std::vector<std::string>>();
        if (j.contains("outputs")) {
            const auto& o = j["outputs"];
            cfg.outputs.dir = o.value("dir", cfg.outputs.dir);
            if (o.contains("formats")) {
                cfg.outputs.json = false;
                cfg.outputs.csv = false;
                for (const auto& f : o["formats"]) {
                    if (f == "json") cfg.outputs.json = true;
                    else if (f == "csv") cfg.outputs.csv = true;
                    else errors.push_back("outputs.formats entries must be 'json' or 'csv'");
                }
            }
            cfg.outputs.ensemble_csv = o.value("ensemble_csv", cfg.outputs.ensemble_csv);
        }
        if (j.contains("comparability")) {
            const auto& c = j["comparability"];
            cfg.comparability.epsilon = c.value("epsilon", cfg.comparability.epsilon);
            cfg.comparability.scan_lo = c.value("scan_lo", cfg.comparability.scan_lo);
            cfg.comparability.scan_hi = c.value("scan_hi", cfg.comparability.scan_hi);
            cfg.comparability.scan_step = c.value("scan_step", cfg.comparability.scan_step);
            cfg.comparability.max_shifts = c.value("max_shifts", cfg.comparability.max_shifts);
            cfg.comparability.n_window_times =
                c.value("n_window_times", cfg.comparability.n_window_times);
        }
        if (j.contains("recurrence")) {
            const auto& c = j["recurrence"];
            if (c.contains("epsilons"))
                cfg.recurrence.epsilons = c["epsilons"].get<std::vector<double>>();
            cfg.recurrence.scan_hi = c.value("scan_hi", cfg.recurrence.scan_hi);
            cfg.recurrence.scan_step = c.value("scan_step", cfg.recurrence.scan_step);
            cfg.recurrence.core_half_width =
                c.value("core_half_width", cfg.recurrence.core_half_width);
        }
        if (j.contains("initial")) {
            const auto& c = j["initial"];
            cfg.initial.kind = c.value("kind", cfg.initial.kind);
            cfg.initial.mean = c.value("mean", cfg.initial.mean);
            cfg.initial.std_dev = c.value("std_dev", cfg.initial.std_dev);
            cfg.initial.mean2 = c.value("mean2", cfg.initial.mean2);
            cfg.initial.std_dev2 = c.value("std_dev2", cfg.initial.std_dev2);
        }
    } catch (const std::exception& e) {
        errors.push_back(std::string("config structure: ") + e.what());
    }
    return cfg;
}

json config_to_json(const ScenarioConfig& cfg) {
    json j;
    j["operator"]["kind"] =
        cfg.op.kind == ScenarioConfig::OperatorSpec::Kind::scalar ? "scalar" : "galerkin";
    j["operator"]["nu"] = cfg.op.nu;
    j["operator"]["n_modes"] = cfg.op.n_modes;
    j["operator"]["grid_points"] = cfg.op.grid_points;
    if (cfg.coefficients.custom) {
        j["coefficients"]["custom"]["drift_base"] = to_json(cfg.coefficients.drift_base);
        j["coefficients"]["custom"]["drift_slope"] = to_json(cfg.coefficients.drift_slope);
        j["coefficients"]["custom"]["diff_base"] = to_json(cfg.coefficients.diff_base);
        j["coefficients"]["custom"]["diff_slope"] = to_json(cfg.coefficients.diff_slope);
    } else {
        j["coefficients"]["preset"] = cfg.coefficients.preset;
    }
    j["grid"] = {{"t0", cfg.grid.t0}, {"h", cfg.grid.h}, {"horizon", cfg.grid.horizon}};
    j["ensemble"] = {{"n_paths", cfg.ensemble.n_paths}, {"seed", cfg.ensemble.seed}};
    j["analyses"] = cfg.analyses;
    j["outputs"] = {{"dir", cfg.outputs.dir},
                    {"json", cfg.outputs.json},
                    {"csv", cfg.outputs.csv},
                    {"ensemble_csv", cfg.outputs.ensemble_csv}};
    j["comparability"] = {{"epsilon", cfg.comparability.epsilon},
                          {"scan_lo", cfg.comparability.scan_lo},
                          {"scan_hi", cfg.comparability.scan_hi},
                          {"scan_step", cfg.comparability.scan_step},
                          {"max_shifts", cfg.comparability.max_shifts},
                          {"n_window_times", cfg.comparability.n_window_times}};
    j["recurrence"] = {{"epsilons", cfg.recurrence.epsilons},
                       {"scan_hi", cfg.recurrence.scan_hi},
                       {"scan_step", cfg.recurrence.scan_step},
                       {"core_half_width", cfg.recurrence.core_half_width}};
    j["initial"] = {{"kind", cfg.initial.kind},
                    {"mean", cfg.initial.mean},
                    {"std_dev", cfg.initial.std_dev},
                    {"mean2", cfg.initial.mean2},
                    {"std_dev2", cfg.initial.std_dev2}};
    return j;
}

ValidationReport validate_config(const ScenarioConfig& cfg) {
    ValidationReport rep;
    if (!(cfg.grid.h > 0.0)) rep.errors.push_back("grid.h must be positive");
    if (!(cfg.grid.horizon > cfg.grid.h)) rep.errors.push_back("grid.horizon must exceed grid.h");
    if (cfg.ensemble.n_paths < 2) rep.errors.push_back("ensemble.n_paths must be >= 2");
    if (cfg.analyses.empty()) rep.errors.push_back("analyses must be nonempty");
    for (const auto& a : cfg.analyses)
        if (std::find(kKnownAnalyses.begin(), kKnownAnalyses.end(), a) == kKnownAnalyses.end())
            rep.errors.push_back("unknown analysis '" + a + "'");

    bool preset_ok = true;
    if (!cfg.coefficients.custom) {
        if (cfg.coefficients.preset != "example1" && cfg.coefficients.preset != "example2") {
            rep.errors.push_back("coefficients.preset must be 'example1' or 'example2'");
            preset_ok = false;
        }
        if (cfg.coefficients.preset == "example2" &&
            cfg.op.kind != ScenarioConfig::OperatorSpec::Kind::galerkin)
            rep.errors.push_back("preset example2 requires operator.kind = galerkin");
        if (cfg.coefficients.preset == "example1" &&
            cfg.op.kind != ScenarioConfig::OperatorSpec::Kind::scalar)
            rep.errors.push_back("preset example1 requires operator.kind = scalar");
    } else {
        if (cfg.op.kind != ScenarioConfig::OperatorSpec::Kind::scalar)
            rep.errors.push_back("custom coefficients require operator.kind = scalar");
        else if (cfg.coefficients.drift_base.dim != 1)
            rep.errors.push_back("custom coefficient tables must be scalar (dim 1)");
    }
    if (cfg.op.kind == ScenarioConfig::OperatorSpec::Kind::scalar && !(cfg.op.nu > 0.0))
        rep.errors.push_back("operator.nu must be positive");
    if (cfg.op.kind == ScenarioConfig::OperatorSpec::Kind::galerkin &&
        2 * cfg.op.n_modes > cfg.op.grid_points)
        rep.errors.push_back("operator.n_modes exceeds grid_points/2 (aliasing guard)");
    if (cfg.outputs.ensemble_csv != "none" && cfg.outputs.ensemble_csv != "wide" &&
        cfg.outputs.ensemble_csv != "per_replicate")
        rep.errors.push_back("outputs.ensemble_csv must be none|wide|per_replicate");

    if (!rep.errors.empty() || !preset_ok) {
        rep.ok = false;
        return rep;
    }

    Resolved r = resolve(cfg);
    const double N = r.op.stability_constant, nu = r.op.stability_rate;
    auto add = [&](const std::string& analysis, const std::string& cond, double value,
                   double threshold) {
        rep.admissibility.push_back({analysis, cond, value, threshold, value < threshold});
    };
    if (wants(cfg, "solve")) add("solve", "L < nu/(N sqrt(2+nu))", r.L, thresholds::contraction(N, nu));
    if (wants(cfg, "dissipativity"))
        add("dissipativity", "M < nu/(N sqrt(6(nu+1)))", r.M, thresholds::dissipativity(N, nu));
    if (wants(cfg, "convergence")) {
        add("convergence", "L < nu/(N sqrt(3(nu+1)))", r.L, thresholds::convergence(N, nu));
        add("convergence", "L < nu/(N sqrt(2+nu))", r.L, thresholds::contraction(N, nu));
    }
    if (wants(cfg, "comparability")) {
        add("comparability", "L < nu/(2N sqrt(1+nu))", r.L, thresholds::comparability(N, nu));
        add("comparability", "L < nu/(N sqrt(2(1+nu)))", r.L, thresholds::lp_limit(N, nu));
    }
    rep.ok = true;
    for (const auto& c : rep.admissibility)
        if (!c.pass) rep.ok = false;
    return rep;
}

std::vector<PresetInfo> list_presets() {
    return {
        {"example1", 5.0, 1.0, 0.0, 2.0 / 3.0, 2.0 / 3.0,
         "scalar equation: drift (cos t + sin sqrt2 t)/(4 + cos sqrt3 t) * y/(y^2+1) "
         "(quasi-periodic factor), diffusion y/2 sin(1/(2 + cos t + cos sqrt2 t)); "
         "A0 and M derived by brute-force maximization (see derive-preset-constants)"},
        {"example2", M_PI * M_PI, 1.0, 0.0, 1.0, 1.0,
         "stochastic heat equation on [0,1], Dirichlet; sine-mode rates (k pi)^2; "
         "drift (sin t + cos sqrt3 t) sin(u)/3, diffusion u/(u^2+1) "
         "cos(1/(2 + sin t + sin sqrt2 t)); pointwise constants preserved by the "
         "isometric mode transform"},
    };
}

namespace {

json admissibility_json(const ValidationReport& rep) {
    json arr = json::array();
    for (const auto& c : rep.admissibility)
        arr.push_back(json{{"analysis", c.analysis},
                           {"condition", c.condition},
                           {"constant", c.constant},
                           {"threshold", c.threshold},
                           {"pass", c.pass}});
    return json{{"ok", rep.ok}, {"errors", rep.errors}, {"admissibility", std::move(arr)}};
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    os << text;
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg, const RunOptions& opts) {
    RunResult result;
    if (opts.threads > 0) omp_set_num_threads(opts.threads);

    result.report["version"] = kVersion;
    result.report["config"] = config_to_json(cfg);

    ValidationReport val = validate_config(cfg);
    result.report["validation"] = admissibility_json(val);
    if (!val.ok) {
        result.exit_code = kExitValidation;
        return result;
    }

    const std::string out_dir = opts.out_dir_override.empty() ? cfg.outputs.dir
                                                              : opts.out_dir_override;
    std::filesystem::create_directories(out_dir);
    auto out_path = [&](const std::string& name) {
        return std::filesystem::path(out_dir) / name;
    };
    auto t_start = std::chrono::steady_clock::now();

    try {
        Resolved r = resolve(cfg);

        // declared-constant audits gate every analysis
        AuditOptions audit_opts;
        AuditReport audit_F = audit_field(r.F, audit_opts);
        AuditReport audit_G = audit_field(r.G, audit_opts);
        result.report["audits"] = {{"drift", to_json(audit_F)}, {"diffusion", to_json(audit_G)}};
        if (!audit_F.pass || !audit_G.pass) {
            result.exit_code = kExitAudit;
            if (cfg.outputs.json)
                write_text(out_path("report.json"), result.report.dump(2) + "\n");
            return result;
        }

        const std::size_t steps =
            static_cast<std::size_t>(std::round(cfg.grid.horizon / cfg.grid.h));
        UniformGrid grid = make_grid(cfg.grid.t0, cfg.grid.h, steps + 1);

        std::size_t violations = 0;
        std::optional<FixedPointTrace> solution;

        auto ensure_solution = [&]() -> FixedPointTrace& {
            if (!solution) {
                SolveOptions sopts;
                sopts.n_replicates = cfg.ensemble.n_paths;
                sopts.seed = cfg.ensemble.seed;
                solution = solve_bounded_solution(r.op, r.F, r.G, grid, sopts);
            }
            return *solution;
        };

        json& analyses = result.report["analyses"];

        if (wants(cfg, "solve")) {
            FixedPointTrace& tr = ensure_solution();
            json entry = to_json(tr);
            entry["contraction"] =
                to_json(contraction_constants(r.op.stability_constant, r.op.stability_rate, r.L,
                                              3.0, r.A0));
            if (!tr.converged) entry["error"] = "fixed-point iteration did not converge";
            analyses["solve"] = std::move(entry);
            if (cfg.outputs.csv) {
                std::ofstream os(out_path("solve_sup_l2.csv"), std::ios::binary);
                os << std::setprecision(17);
                os << "t,sup_l2,stderr\n";
                for (std::size_t k = 0; k < grid.n; ++k)
                    os << grid.time(k) << "," << tr.sup_l2[k] << "," << tr.sup_l2_stderr[k]
                       << "\n";
            }
            if (cfg.outputs.ensemble_csv == "wide") {
                std::ofstream os(out_path("solution_ensemble.csv"), std::ios::binary);
                write_ensemble_csv_wide(os, tr.ensemble);
            } else if (cfg.outputs.ensemble_csv == "per_replicate") {
                for (std::size_t rr = 0; rr < tr.ensemble.n_paths; ++rr) {
                    std::ofstream os(out_path("solution_path_" + std::to_string(rr) + ".csv"),
                                     std::ios::binary);
                    write_ensemble_csv_replicate(os, tr.ensemble, rr);
                }
            }
        }

        if (wants(cfg, "dissipativity")) {
            auto ens = euler_maruyama_ensemble(r.op, r.F, r.G,
                                               initial_from(cfg.initial, r.op.dim(), false), grid,
                                               cfg.ensemble.n_paths, cfg.ensemble.seed);
            BoundCheckReport rep = dissipativity_check(ens, r.op.stability_constant,
                                                       r.op.stability_rate, r.A0, r.M, grid.t0);
            violations += rep.violations;
            analyses["dissipativity"] = to_json(rep);
            if (cfg.outputs.csv) {
                std::ofstream os(out_path("dissipativity.csv"), std::ios::binary);
                write_bound_report_csv(os, rep);
            }
        }

        if (wants(cfg, "convergence")) {
            BoundCheckReport coupled = convergence_check(
                r.op, r.F, r.G, initial_from(cfg.initial, r.op.dim(), false),
                initial_from(cfg.initial, r.op.dim(), true), grid, cfg.ensemble.n_paths,
                cfg.ensemble.seed, r.op.stability_constant, r.op.stability_rate, r.L);
            violations += coupled.violations;
            analyses["convergence"]["two_solutions"] = to_json(coupled);
            if (cfg.outputs.csv) {
                std::ofstream os(out_path("convergence_coupled.csv"), std::ios::binary);
                write_bound_report_csv(os, coupled);
            }
            FixedPointTrace& tr = ensure_solution();
            BoundCheckReport to_bounded = convergence_to_bounded(
                r.op, r.F, r.G, initial_from(cfg.initial, r.op.dim(), false), tr.ensemble,
                r.op.stability_constant, r.op.stability_rate, r.L);
            violations += to_bounded.violations;
            analyses["convergence"]["to_bounded_solution"] = to_json(to_bounded);
            if (cfg.outputs.csv) {
                std::ofstream os(out_path("convergence_to_bounded.csv"), std::ios::binary);
                write_bound_report_csv(os, to_bounded);
            }
        }

        if (wants(cfg, "comparability")) {
            std::vector<double> shifts = detect_shifts(r, cfg.comparability);
            ProbeOptions popts;
            popts.n_paths = cfg.ensemble.n_paths;
            popts.seed = cfg.ensemble.seed + 17;
            popts.n_window_times = cfg.comparability.n_window_times;
            ComparabilityProbeReport rep =
                semilinear_comparability_probe(r.op, r.F, r.G, shifts, r.F, r.G, grid, popts);
            json entry = to_json(rep);
            entry["detected_epsilon"] = cfg.comparability.epsilon;
            if (shifts.empty())
                entry["note"] = "no epsilon-almost periods detected in the scan window";
            analyses["comparability"] = std::move(entry);
            if (cfg.outputs.csv) {
                std::ofstream os(out_path("comparability.csv"), std::ios::binary);
                os << std::setprecision(17);
                os << "shift,beta_sup,input_sup_diff,ceiling,noise_floor\n";
                for (const auto& s : rep.shifts)
                    os << s.shift << "," << s.beta_sup << "," << s.input_sup_diff << ","
                       << s.ceiling << "," << rep.noise_floor << "\n";
            }
        }

        if (wants(cfg, "recurrence_scan")) {
            json scans = json::array();
            for (double eps : cfg.recurrence.epsilons) {
                for (std::size_t comp = 0; comp < r.n_factors; ++comp) {
                    auto rep = epsilon_almost_periods_fn(
                        [&](double t, std::span<double> out) {
                            thread_local std::vector<double> buf;
                            buf.resize(r.n_factors);
                            r.time_factors(t, buf);
                            out[0] = buf[comp];
                        },
                        1, eps, 0.0, cfg.recurrence.scan_hi, cfg.recurrence.scan_step,
                        cfg.recurrence.core_half_width, 0.02);
                    json entry = to_json(rep);
                    entry["component"] = comp == 0 ? "drift_factor" : "diffusion_factor";
                    scans.push_back(std::move(entry));
                }
                // joint scan across all factors
                auto joint = epsilon_almost_periods_fn(
                    [&](double t, std::span<double> out) { r.time_factors(t, out); },
                    r.n_factors, eps, 0.0, cfg.recurrence.scan_hi, cfg.recurrence.scan_step,
                    cfg.recurrence.core_half_width, 0.02);
                json entry = to_json(joint);
                entry["component"] = "joint";
                scans.push_back(std::move(entry));
            }
            analyses["recurrence_scan"] = std::move(scans);
            if (cfg.outputs.csv) {
                std::ofstream os(out_path("recurrence_scan.csv"), std::ios::binary);
                os << std::setprecision(17);
                os << "epsilon,component,n_periods,max_gap\n";
                for (const auto& e : analyses["recurrence_scan"])
                    os << e["epsilon"].get<double>() << "," << e["component"].get<std::string>()
                       << "," << e["periods"].size() << "," << e["max_gap"].get<double>() << "\n";
            }
        }

        result.report["violations"] = violations;
        double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        result.report["wall_time_s"] = opts.fixed_clock ? 0.0 : wall;

        if (cfg.outputs.json) {
            result.report_path = out_path("report.json").string();
            write_text(result.report_path, result.report.dump(2) + "\n");
        }
        result.exit_code = violations == 0 ? kExitOk : kExitBoundViolation;
    } catch (const AuditError& e) {
        result.report["error"] = e.what();
        result.exit_code = kExitAudit;
    } catch (const std::exception& e) {
        result.report["error"] = e.what();
        result.exit_code = kExitRuntime;
    }
    return result;
}

}  // namespace sdelab
