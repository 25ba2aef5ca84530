#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "sdelab/coefficients.hpp"
#include "sdelab/core.hpp"

// Compact-open (Bebutov) metric on sampled paths, epsilon-almost-period
// scans, translations of paths, generators for the reference recurrence
// classes, and the metric on coefficient fields.

namespace sdelab {

/// d(a,b): the unique eps >= 0 with max_{|t|<=1/eps} rho(a(t),b(t)) = eps,
/// found by bisection (tolerance 1e-9) on the discrete grid with
/// piecewise-linear values between nodes. Throws TruncationError when the
/// fixed point lies below what the grid span can certify.
double bebutov_distance(const SampledPath& a, const SampledPath& b);

struct AlmostPeriodReport {
    double epsilon = 0.0;
    double tau_min = 0.0;
    double tau_max = 0.0;
    double scan_step = 0.0;
    /// sup over t in R is truncated to |t| <= core_half_width; every period
    /// below is "epsilon-almost period relative to this core" (evidence, not proof).
    double core_half_width = 0.0;
    std::vector<double> periods;
    /// Largest gap between consecutive detected periods, including the
    /// window edges; equals tau_max - tau_min when nothing was detected.
    double max_gap = 0.0;
};

/// Scan [tau_min, tau_max] in steps of scan_step for shifts tau with
/// sup_{|t|<=core} rho(path(t+tau), path(t)) < epsilon.
/// core_half_width <= 0 selects the largest core the grid supports.
AlmostPeriodReport epsilon_almost_periods(const SampledPath& path, double epsilon,
                                          double tau_min, double tau_max, double scan_step,
                                          double core_half_width = 0.0);

/// Same scan against an analytic evaluator; usable for scan windows far too
/// long to materialize as a SampledPath.
AlmostPeriodReport epsilon_almost_periods_fn(
    const std::function<void(double, std::span<double>)>& eval, std::size_t dim, double epsilon,
    double tau_min, double tau_max, double scan_step, double core_half_width,
    double core_sample_step);

/// phi^h with h = shift_steps * grid.h: values shifted on the overlapping
/// grid, length shrinks by |shift_steps|.
SampledPath translate(const SampledPath& path, long shift_steps);

struct ReferenceFunctionSpec {
    enum class Kind { constant, periodic, quasi_periodic, levitan_example, bochner_example };
    Kind kind = Kind::constant;
    double amplitude = 1.0;
    double period = 6.283185307179586;          // periodic kind
    std::vector<double> frequencies;            // quasi_periodic kind
    std::vector<double> torus_table;            // flattened resolution^k table of Phi
    std::size_t table_resolution = 0;           // samples per torus axis
};

/// Evaluate the reference function at one time.
double reference_value(const ReferenceFunctionSpec& spec, double t);

SampledPath make_reference(const ReferenceFunctionSpec& spec, const UniformGrid& grid);

/// Tabulate a continuous 2pi-periodic-per-axis function on a k-torus for the
/// quasi_periodic kind; fn receives the phase vector in [0, 2pi)^k.
std::vector<double> make_torus_table(const std::function<double(std::span<const double>)>& fn,
                                     std::size_t k, std::size_t resolution);

struct CoeffDistanceOptions {
    std::size_t t_samples_per_unit = 16;  // time resolution of the sup estimate
    std::size_t x_samples = 48;           // state samples per ball
    std::uint64_t seed = 0x5eed11;        // state sampling in dim > 1
};

/// Truncated series sum_{n<=N} 2^{-n} d_n/(1+d_n) with
/// d_n = sup_{|t|<=n, |x|<=ball_radii[n-1]} |F(t,x) - G(t,x)|. Result in [0,1).
double coefficient_distance(const CoefficientField& F, const CoefficientField& G,
                            const std::vector<double>& ball_radii,
                            const CoeffDistanceOptions& opts = {});

}  // namespace sdelab
