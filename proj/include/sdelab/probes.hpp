#pragma once

#include <vector>

#include "sdelab/fixedpoint.hpp"
#include "sdelab/green.hpp"
#include "sdelab/law.hpp"

// Comparability-in-distribution probes: simulate shifted inputs against a
// limit input and measure the uniform-over-window law distance between the
// resulting bounded solutions, together with the theoretical ceilings the
// moment bounds put on those distances.

namespace sdelab {

struct ProbeShiftResult {
    double shift = 0.0;
    double beta_sup = 0.0;          // sup over the window of the per-time beta
    double input_sup_diff = 0.0;    // measured sup of |shifted - limit| inputs
    double ceiling = 0.0;           // moment-bound ceiling on the L2 (hence beta) distance
    LawDistanceSeries series;
};

struct ComparabilityProbeReport {
    std::vector<ProbeShiftResult> shifts;
    /// sup-statistic between two independent runs of the limit system; the
    /// level below which "converged in distribution" cannot be resolved.
    double noise_floor = 0.0;
    double window_lo = 0.0, window_hi = 0.0;
    std::size_t n_paths = 0;
};

struct ProbeOptions {
    std::size_t n_paths = 128;
    std::size_t n_window_times = 25;
    std::uint64_t seed = 77;
    double burn_in = -1.0;  // < 0 selects default_burn_in(op)
    BlOptions bl{1e-6, 2000, 0x5ab5a};
};

/// Green ensemble of a linear system: one solution realization per replicate.
StochasticEnsemble green_ensemble(const SpectralOperator& op, const SampledPath& f,
                                  const SampledPath& g, std::uint64_t seed, std::size_t n_paths,
                                  std::int64_t step_offset = 0);

/// Linear probe: for each shift t_n, simulates the bounded solution driven by
/// (f^{t_n}, g^{t_n}) with fresh noise, against the limit (f_lim, g_lim).
/// f and g must be sampled on a grid wide enough to cover every shift of the
/// working window. Report grid = `grid`; the sup window is its span.
ComparabilityProbeReport linear_comparability_probe(const SpectralOperator& op,
                                                    const SampledPath& f, const SampledPath& g,
                                                    const std::vector<double>& shifts,
                                                    const SampledPath& f_lim,
                                                    const SampledPath& g_lim,
                                                    const UniformGrid& grid,
                                                    const ProbeOptions& opts = {});

/// Semilinear probe: solves the bounded solution of the shifted equation
/// (F^{t_n}, G^{t_n}) and of the limit equation per shift, then measures the
/// window sup of beta between the solution laws. Requires the comparability
/// condition L < nu/(2N sqrt(1+nu)).
ComparabilityProbeReport semilinear_comparability_probe(
    const SpectralOperator& op, const CoefficientField& F, const CoefficientField& G,
    const std::vector<double>& shifts, const CoefficientField& F_lim, const CoefficientField& G_lim,
    const UniformGrid& grid, const ProbeOptions& opts = {});

}  // namespace sdelab
