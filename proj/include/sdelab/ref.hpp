#pragma once

#include <vector>

#include "sdelab/coefficients.hpp"
#include "sdelab/core.hpp"
#include "sdelab/ensemble.hpp"
#include "sdelab/green.hpp"
#include "sdelab/law.hpp"
#include "sdelab/recurrence.hpp"

// Serial reference implementations. Deliberately naive: direct sums, dense
// scans, brute-force searches. They are the oracles the parallel kernels are
// tested against and the baselines the benchmark compares with.

namespace sdelab::ref {

/// Green solution by direct summation of the full quadrature at every output
/// time, O(n^2) per mode; mathematically identical regrouping of the kernel
/// recursion.
SampledPath green_direct(const SpectralOperator& op, const SampledPath& f, const SampledPath& g,
                         const NoisePath& noise);

/// Bebutov distance by dense scan of sup_L min(max_{|t|<=L} rho, 1/L).
double bebutov_scan(const SampledPath& a, const SampledPath& b, std::size_t l_samples = 4096);

/// Plain serial almost-period scan, identical decision rule to the parallel
/// kernel.
AlmostPeriodReport almost_period_scan_serial(const SampledPath& path, double epsilon,
                                             double tau_min, double tau_max, double scan_step,
                                             double core_half_width = 0.0);

/// Stationary-start Ornstein-Uhlenbeck second moment sigma^2(1-e^{-2nu t})/(2nu).
double ou_second_moment(double t, double nu, double sigma);

/// Serial twin of euler_maruyama_ensemble (same keyed draws, plain loop).
StochasticEnsemble ensemble_serial(const SpectralOperator& op, const CoefficientField& F,
                                   const CoefficientField& G, const InitialLaw& x0,
                                   const UniformGrid& grid, std::size_t n_paths,
                                   std::uint64_t seed, std::int64_t step_offset = 0);

/// Bounded-Lipschitz metric by brute force for joint supports of at most
/// four points: dense search over function values and the norm split.
double bl_metric_bruteforce(const EmpiricalLaw& a, const EmpiricalLaw& b,
                            std::size_t value_samples = 161, std::size_t split_samples = 81);

}  // namespace sdelab::ref
