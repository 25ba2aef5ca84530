#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sdelab/serialize.hpp"

// The batch front door: structured scenario configs, the two application
// presets, pipeline orchestration and report emission.

namespace sdelab {

struct ScenarioConfig {
    struct OperatorSpec {
        enum class Kind { scalar, galerkin };
        Kind kind = Kind::scalar;
        double nu = 5.0;              // scalar kind
        std::size_t n_modes = 8;      // galerkin kind
        std::size_t grid_points = 64;
    } op;

    struct CoefficientSpec {
        std::string preset;  // "example1" | "example2" | "" when custom
        bool custom = false;
        SampledPath drift_base, drift_slope, diff_base, diff_slope;
    } coefficients;

    struct GridSpec {
        double t0 = 0.0;
        double h = 1e-3;
        double horizon = 2.0;
    } grid;

    struct EnsembleSpec {
        std::size_t n_paths = 256;
        std::uint64_t seed = 1;
    } ensemble;

    std::vector<std::string> analyses;  // solve, dissipativity, convergence,
                                        // comparability, recurrence_scan

    struct OutputSpec {
        std::string dir = "out";
        bool json = true;
        bool csv = true;
        std::string ensemble_csv = "none";  // none | wide | per_replicate
    } outputs;

    struct ComparabilitySpec {
        double epsilon = 0.05;
        double scan_lo = 0.0;
        double scan_hi = 2000.0;
        double scan_step = 0.01;
        std::size_t max_shifts = 4;
        std::size_t n_window_times = 17;
    } comparability;

    struct RecurrenceSpec {
        std::vector<double> epsilons = {0.05, 0.1, 0.25};
        double scan_hi = 500.0;
        double scan_step = 0.01;
        double core_half_width = 8.0;
    } recurrence;

    struct InitialSpec {
        std::string kind = "gaussian";  // gaussian | fixed
        double mean = 0.0;
        double std_dev = 1.0;
        double mean2 = 1.0;   // second sampler for the convergence coupling
        double std_dev2 = 0.5;
    } initial;
};

ScenarioConfig default_config();

/// Parse a config JSON document; structural problems are appended to errors.
ScenarioConfig parse_config(const std::string& text, std::vector<std::string>& errors);
json config_to_json(const ScenarioConfig& cfg);

struct AdmissibilityCheck {
    std::string analysis;
    std::string condition;
    double constant = 0.0;   // the constant being tested (L or M)
    double threshold = 0.0;  // must be strictly below this
    bool pass = false;
};

struct ValidationReport {
    bool ok = false;
    std::vector<std::string> errors;             // structural, line-anchored where possible
    std::vector<AdmissibilityCheck> admissibility;
};

ValidationReport validate_config(const ScenarioConfig& cfg);

struct PresetInfo {
    std::string name;
    double nu = 0.0;
    double N = 1.0;
    double A0 = 0.0;
    double L = 0.0;
    double M = 0.0;
    std::string notes;
};

/// The two shipped presets.
std::vector<PresetInfo> list_presets();

struct RunOptions {
    std::string out_dir_override;
    int threads = 0;          // 0 keeps the ambient setting
    bool fixed_clock = false; // zero wall time, fixed version stamp
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitBoundViolation = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitAudit = 3;
inline constexpr int kExitRuntime = 4;

struct RunResult {
    int exit_code = kExitOk;
    json report;
    std::string report_path;
};

/// Execute the requested analyses in dependency order, write report.json and
/// per-analysis CSVs into the output directory, and map the outcome onto the
/// exit-code contract.
RunResult run_scenario(const ScenarioConfig& cfg, const RunOptions& opts = {});

}  // namespace sdelab
