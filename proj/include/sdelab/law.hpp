#pragma once

#include <cstdint>
#include <vector>

#include "sdelab/core.hpp"
#include "sdelab/ensemble.hpp"

// Empirical probability laws and the bounded-Lipschitz metric
// beta(mu, nu) = sup{ |int f dmu - int f dnu| : Lip(f) + ||f||_inf <= 1 },
// computed exactly on finite supports, plus the per-time law-distance series
// used by the comparability probes.

namespace sdelab {

struct EmpiricalLaw {
    std::size_t dim = 1;
    std::vector<double> points;   // m x dim, row-major
    std::vector<double> weights;  // nonnegative, sum to 1

    std::size_t size() const { return weights.size(); }
    std::span<const double> point(std::size_t i) const { return {points.data() + i * dim, dim}; }
};

/// Uniform weights 1/m on the given samples.
EmpiricalLaw empirical_law(const std::vector<double>& samples, std::size_t dim);
EmpiricalLaw dirac_law(const std::vector<double>& point);
/// Law of the ensemble states at one time across paths.
EmpiricalLaw law_at_time(const StochasticEnsemble& ens, std::size_t k);

/// Exact-equality duplicate merge (weights added).
EmpiricalLaw merge_duplicates(const EmpiricalLaw& law);

struct BlOptions {
    /// Bracketing tolerance of the outer search over the norm split
    /// Lip <= 1-s, sup <= s.
    double split_tol = 1e-9;
    /// Joint support cap; each side is deterministically subsampled to
    /// size_cap/2 above it.
    std::size_t size_cap = 2000;
    std::uint64_t subsample_seed = 0x5ab5a;
};

/// The metric itself: reduces, for each split s, to an exact balanced
/// transportation problem with ground cost min((1-s) d(p,q), 2s) between the
/// positive and negative parts of mu - nu (solved by successive shortest
/// paths), and maximizes the concave value over s by grid bracketing plus
/// golden-section refinement. Result lies in [0, 2].
double bl_metric(const EmpiricalLaw& a, const EmpiricalLaw& b, const BlOptions& opts = {});

/// Inner transportation value for one fixed split; exposed for oracles.
double bl_metric_at_split(const EmpiricalLaw& a, const EmpiricalLaw& b, double s);

struct LawDistanceSeries {
    std::vector<double> times;
    std::vector<double> beta_values;
    double sup_value = 0.0;
};

/// Per-time beta between the two ensembles' empirical laws over the given
/// window; sup over the window reported. Times must lie inside both grids.
LawDistanceSeries uniform_law_distance(const StochasticEnsemble& ens_a,
                                       const StochasticEnsemble& ens_b,
                                       const std::vector<double>& window_times,
                                       const BlOptions& opts = {});

/// Expected beta between two independent m-sample draws of N(0, sigma^2 I):
/// the estimation noise floor against which "converges to 0 in distribution"
/// statements are tested. Averaged over n_rep seeded draws.
double gaussian_beta_floor(std::size_t m, std::size_t dim, double sigma, std::size_t n_rep,
                           std::uint64_t seed, const BlOptions& opts = {});

}  // namespace sdelab
