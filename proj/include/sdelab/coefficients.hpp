#pragma once

#include <functional>
#include <string>

#include "sdelab/core.hpp"
#include "sdelab/green.hpp"

// Time-and-state-dependent drift/diffusion evaluators with their declared
// structural constants, the randomized audit of those constants, the two
// application presets, and the spectral-Galerkin reduction of the stochastic
// heat equation to a diagonal mode system.

namespace sdelab {

/// F(t, x) together with the declared constants it is required to satisfy:
/// |F(t,0)| <= A0, Lip_x(F) <= L, |F(t,x)| <= A0 + M|x|.
struct CoefficientField {
    std::size_t dim = 1;
    std::function<void(double, std::span<const double>, std::span<double>)> eval;
    double A0 = 0.0;
    double L = 0.0;
    double M = 0.0;

    void operator()(double t, std::span<const double> x, std::span<double> out) const {
        eval(t, x, out);
    }
    double scalar(double t, double x) const {
        double out;
        eval(t, {&x, 1}, {&out, 1});
        return out;
    }
};

CoefficientField make_scalar_field(std::function<double(double, double)> f, double A0, double L,
                                   double M);
/// F(t,x) = a(t) + m(t) * x componentwise; paths are interpolated, constants
/// are derived from the tables (A0 = max|a|, L = M = max|m|).
CoefficientField make_affine_field(SampledPath base, SampledPath slope);
CoefficientField zero_field(std::size_t dim);
/// F^tau(t,x) = F(t + tau, x).
CoefficientField shift_field(const CoefficientField& F, double tau);

struct AuditOptions {
    std::size_t t_samples = 192;
    std::size_t x_pairs = 192;
    double t_span = 60.0;       // times sampled over [-t_span, t_span]
    double radius = 4.0;        // states sampled in the ball of this radius
    std::uint64_t seed = 0xa0d17;
    double rel_tol = 1e-7;
};

struct AuditReport {
    double max_zero_norm = 0.0;     // vs A0
    double max_lip_ratio = 0.0;     // vs L
    double max_growth_excess = 0.0; // max over samples of |F(t,x)| - M|x|, vs A0
    bool pass = false;
    std::string detail;
};

AuditReport audit_field(const CoefficientField& F, const AuditOptions& opts = {});
/// Throws AuditError when the declared constants fail the sampled audit.
void require_audit(const CoefficientField& F, const char* name, const AuditOptions& opts = {});

// -- Application presets ----------------------------------------------------

/// Scalar drift (cos t + sin sqrt2 t)/(4 + cos sqrt3 t) * x/(x^2+1);
/// quasi-periodic factor with frequencies 1, sqrt2, sqrt3.
CoefficientField example1_drift();
/// Scalar diffusion x/2 * sin(1/(2 + cos t + cos sqrt2 t)).
CoefficientField example1_diffusion();
/// The purely time-dependent factors of the preset coefficients, for
/// recurrence scans: component 0 the drift factor, component 1 the
/// diffusion factor.
void example1_time_factors(double t, std::span<double> out2);

/// Pointwise heat-equation nonlinearities (sin t + cos sqrt3 t) sin(u)/3 and
/// u/(u^2+1) * cos(1/(2 + sin t + sin sqrt2 t)).
double example2_pointwise_drift(double t, double u);
double example2_pointwise_diffusion(double t, double u);
void example2_time_factors(double t, std::span<double> out2);

// -- Spectral Galerkin reduction --------------------------------------------

struct GalerkinReduction {
    SpectralOperator op;        // mode rates (k pi)^2, N = 1, nu = pi^2
    CoefficientField drift;     // Nemytskii nonlinearity in mode space
    CoefficientField diffusion;
    std::size_t n_modes = 0;
    std::size_t grid_points = 0;  // physical collocation resolution
};

/// Sine-basis reduction on [0,1] with Dirichlet conditions. Nonlinearities
/// are evaluated by inverse transform -> pointwise map -> forward transform;
/// the discrete transform is an exact isometry, so declared constants are the
/// pointwise ones. Requires 2*n_modes <= grid_points (aliasing guard).
GalerkinReduction galerkin_reduce(std::size_t n_modes, std::size_t physical_grid_points,
                                  std::function<double(double, double)> pointwise_drift,
                                  std::function<double(double, double)> pointwise_diffusion,
                                  double declared_A0, double declared_L, double declared_M);

/// Uniform-integrability evidence for condition-type (C3) checks: sup over
/// sampled (t, u with ||u|| <= radius) of the (2+alpha)-moment
/// (1/P) sum_j |f(t, u(x_j))|^{2+alpha} of the pointwise coefficient.
double galerkin_uniform_integrability(const GalerkinReduction& red,
                                      const std::function<double(double, double)>& pointwise,
                                      double alpha, double radius, std::size_t samples,
                                      std::uint64_t seed);

}  // namespace sdelab
