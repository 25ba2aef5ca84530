#pragma once

#include <cstdint>
#include <vector>

#include "sdelab/coefficients.hpp"
#include "sdelab/core.hpp"
#include "sdelab/ensemble.hpp"
#include "sdelab/green.hpp"

// The contraction construction of the unique bounded solution of
// dx = (Ax + F(t,x))dt + G(t,x)dW: admissibility constants, the invariant
// ball radius, and the iterated-operator solver on a frozen-noise replicate
// ensemble.

namespace sdelab {

struct ContractionReport {
    double theta2 = 0.0;   // N^2 L^2 (2+nu) / nu^2
    double theta_p = 0.0;  // the L^p contraction constant, p > 2
    double c_p = 0.0;      // [p(p-1)/2 (p/(p-1))^{p-2}]^{p/2}
    double p = 0.0;
    double r = 0.0;        // invariant ball radius (0 when inadmissible or A0 = 0)
    bool admissible_contraction = false;   // L < nu/(N sqrt(2+nu))
    bool admissible_comparability = false; // L < nu/(2N sqrt(1+nu))
    bool admissible_lp_limit = false;      // L < nu/(N sqrt(2(1+nu)))
    double threshold_contraction = 0.0;
    double threshold_comparability = 0.0;
    double threshold_lp_limit = 0.0;
};

/// All contraction/admissibility constants for (N, nu, L) and one p > 2.
ContractionReport contraction_constants(double N, double nu, double L, double p, double A0 = 0.0);

/// The p -> 2+ limit of theta_p: 2 N^2 L^2 / nu^2 + 2 N^2 L^2 / nu.
double theta_p_limit(double N, double nu, double L);

/// r = N A0 sqrt(2+nu) / (nu - N L sqrt(2+nu)); throws when the denominator
/// is not positive. Satisfies the self-map identity
/// (N sqrt(2+nu)/nu)(A0 + L r) = r.
double bounded_ball_radius(double N, double nu, double A0, double L);

struct SolveOptions {
    std::size_t n_replicates = 256;
    std::uint64_t seed = 1;
    double tol = -1.0;       // < 0 selects max(1e-6 * r, 1e-12)
    std::size_t max_iter = 100;
    double burn_in = -1.0;   // < 0 selects default_burn_in(op)
};

struct FixedPointTrace {
    std::vector<double> iterate_distances;  // sup_t L2 distance per iteration
    bool converged = false;
    double tol = 0.0;
    double radius = 0.0;
    double theta2 = 0.0;
    StochasticEnsemble ensemble;        // converged iterate on the reporting grid
    std::vector<double> sup_l2;         // per-time ||xi(t)||_2 estimate
    std::vector<double> sup_l2_stderr;
    bool ball_ok = false;               // sup_l2 <= radius + 3 stderr at every time
};

/// Iterate phi -> G(F(.,phi), G(.,phi)) pathwise from phi = 0 on a burn-in
/// extended grid, with the noise frozen per replicate across iterations;
/// stops when the max-over-grid replicate-averaged L2 distance between
/// successive iterates falls below tol. Requires the contraction condition.
FixedPointTrace solve_bounded_solution(const SpectralOperator& op, const CoefficientField& F,
                                       const CoefficientField& G, const UniformGrid& grid,
                                       const SolveOptions& opts = {});

}  // namespace sdelab
