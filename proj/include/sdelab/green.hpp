#pragma once

#include <cstdint>
#include <vector>

#include "sdelab/core.hpp"
#include "sdelab/rng.hpp"

// Exact exponential integration of dx = (Ax + f(t))dt + g(t)dW for a
// diagonal exponentially stable generator: the Green's operator mapping
// bounded (f,g) to the unique bounded solution, and its moment bounds.

namespace sdelab {

/// Diagonal generator: mode k decays at rate mode_rates[k] > 0, and the
/// semigroup obeys |U(t)| <= stability_constant * exp(-stability_rate * t).
struct SpectralOperator {
    std::vector<double> mode_rates;
    double stability_constant = 1.0;  // N >= 1
    double stability_rate = 1.0;      // nu in (0, min mode rate]

    std::size_t dim() const { return mode_rates.size(); }
};

SpectralOperator make_scalar_operator(double nu, double stability_constant = 1.0);
SpectralOperator make_spectral_operator(std::vector<double> mode_rates, double stability_constant,
                                        double stability_rate);

/// One replicate of the driving scalar Brownian motion on a grid. Increments
/// are pure functions of (seed, replicate, step), so a path never has to be
/// stored to be reproduced.
struct NoisePath {
    UniformGrid grid;
    std::uint64_t seed = 0;
    std::uint32_t replicate = 0;
    /// Aligns step keys across grids that share a clock (e.g. a burn-in
    /// extension and its reporting window).
    std::int64_t step_offset = 0;

    double normal(std::size_t i) const {
        return rng::gaussian(seed, replicate, rng::kStreamNoise,
                             static_cast<std::uint64_t>(step_offset + static_cast<std::int64_t>(i)));
    }
    /// Brownian increment over [t_i, t_{i+1}]; variance grid.h.
    double increment(std::size_t i) const { return std::sqrt(grid.h) * normal(i); }
    std::vector<double> increments() const;
};

struct MomentSeries {
    UniformGrid grid;
    std::vector<double> second_moment;  // estimates of E|x(t)|^2
    std::vector<double> stderr_;        // from independent-replicate variance
};

struct GreenResult {
    SampledPath realization;  // the replicate addressed by the passed noise
    MomentSeries moments;     // over replicates 0..n_replicates-1 of noise.seed
    /// L2 bound on the tail discarded by truncating the two-sided integral:
    /// N e^{-nu burn_in} (sup|f|/nu + sup|g|/sqrt(2 nu)).
    double truncation_bound = 0.0;
};

/// Advance the unique bounded solution on the grid with zero initial state:
/// per mode, deterministic part integrates f against the step kernel by the
/// trapezoidal rule and the stochastic part is the exact
/// Ornstein-Uhlenbeck update with g frozen at the left endpoint. Outputs are
/// trustworthy (within truncation_bound) from one burn_in past the grid start.
GreenResult green_apply(const SpectralOperator& op, const SampledPath& f, const SampledPath& g,
                        const NoisePath& noise, double burn_in, std::size_t n_replicates = 64);

/// (N/nu) sqrt(2 f_sup2 + nu g_sup2): sup-norm bound of the Green operator.
double sup_norm_bound(const SpectralOperator& op, double f_sup2, double g_sup2);

/// Windowed second-moment bound for |t| <= L given moments over |t| <= l:
/// (N^2/nu^2)(2 f_win2 + nu g_win2) + (N^2/nu^2)(2 e^{-nu(l-L)} f_sup2
///  + nu e^{-2 nu(l-L)} g_sup2).
double windowed_moment_bound(const SpectralOperator& op, double f_win2, double g_win2,
                             double f_sup2, double g_sup2, double L, double l);

/// Burn-in making the initial-condition relic N e^{-nu B} <= 1e-8.
double default_burn_in(const SpectralOperator& op);

}  // namespace sdelab
