#pragma once

#include <cmath>

// Every smallness condition used anywhere in the project, in one place, so
// validators and solvers cannot drift apart.

namespace sdelab::thresholds {

/// Contraction of the bounded-solution operator: L < nu/(N sqrt(2+nu)).
inline double contraction(double N, double nu) { return nu / (N * std::sqrt(2.0 + nu)); }

/// Uniform comparability of the bounded solution: L < nu/(2N sqrt(1+nu)).
inline double comparability(double N, double nu) { return nu / (2.0 * N * std::sqrt(1.0 + nu)); }

/// p->2 limit contraction: L < nu/(N sqrt(2(1+nu))).
inline double lp_limit(double N, double nu) { return nu / (N * std::sqrt(2.0 * (1.0 + nu))); }

/// Dissipativity (growth constant M): M < nu/(N sqrt(6(nu+1))).
inline double dissipativity(double N, double nu) { return nu / (N * std::sqrt(6.0 * (nu + 1.0))); }

/// Two-solution convergence: L < nu/(N sqrt(3(nu+1))).
inline double convergence(double N, double nu) { return nu / (N * std::sqrt(3.0 * (nu + 1.0))); }

}  // namespace sdelab::thresholds
