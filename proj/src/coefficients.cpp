#include "sdelab/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "sdelab/rng.hpp"

namespace sdelab {

CoefficientField make_scalar_field(std::function<double(double, double)> f, double A0, double L,
                                   double M) {
    CoefficientField field;
    field.dim = 1;
    field.A0 = A0;
    field.L = L;
    field.M = M;
    field.eval = [fn = std::move(f)](double t, std::span<const double> x, std::span<double> out) {
        out[0] = fn(t, x[0]);
    };
    return field;
}

CoefficientField make_affine_field(SampledPath base, SampledPath slope) {
    check_same_shape(base, slope, "make_affine_field");
    CoefficientField field;
    field.dim = base.dim;
    field.A0 = base.max_abs();
    field.L = slope.max_abs();
    field.M = field.L;
    field.eval = [b = std::move(base), s = std::move(slope)](double t, std::span<const double> x,
                                                             std::span<double> out) {
        std::size_t d = b.dim;
        // interpolate both tables at t, then apply componentwise
        for (std::size_t m = 0; m < d; ++m) out[m] = 0.0;
        double ss = (t - b.grid.t0) / b.grid.h;
        ss = std::clamp(ss, 0.0, static_cast<double>(b.grid.n - 1));
        std::size_t k = std::min(static_cast<std::size_t>(ss), b.grid.n - 2);
        double w = ss - static_cast<double>(k);
        for (std::size_t m = 0; m < d; ++m) {
            double a = (1.0 - w) * b.at(k, m) + w * b.at(k + 1, m);
            double sl = (1.0 - w) * s.at(k, m) + w * s.at(k + 1, m);
            out[m] = a + sl * x[m];
        }
    };
    return field;
}

CoefficientField zero_field(std::size_t dim) {
    CoefficientField field;
    field.dim = dim;
    field.eval = [](double, std::span<const double>, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
    };
    return field;
}

CoefficientField shift_field(const CoefficientField& F, double tau) {
    CoefficientField field = F;
    field.eval = [inner = F.eval, tau](double t, std::span<const double> x, std::span<double> out) {
        inner(t + tau, x, out);
    };
    return field;
}

AuditReport audit_field(const CoefficientField& F, const AuditOptions& opts) {
    AuditReport rep;
    std::vector<double> zero(F.dim, 0.0), fx(F.dim), fy(F.dim), x(F.dim), y(F.dim);

    auto norm = [](std::span<const double> v) {
        double s = 0.0;
        for (double c : v) s += c * c;
        return std::sqrt(s);
    };
    auto sample_state = [&](std::uint64_t idx, std::span<double> out) {
        for (std::size_t d = 0; d < F.dim; ++d)
            out[d] = opts.radius *
                     (2.0 * rng::uniform(opts.seed, static_cast<std::uint32_t>(d),
                                         rng::kStreamScratch, idx) -
                      1.0);
    };

    for (std::size_t i = 0; i < opts.t_samples; ++i) {
        double t = -opts.t_span +
                   2.0 * opts.t_span * (static_cast<double>(i) + 0.5) / double(opts.t_samples);
        F(t, zero, fx);
        rep.max_zero_norm = std::max(rep.max_zero_norm, norm(fx));
        for (std::size_t j = 0; j < opts.x_pairs; ++j) {
            std::uint64_t idx = (i * opts.x_pairs + j) * 2;
            sample_state(idx, x);
            sample_state(idx + 1, y);
            F(t, x, fx);
            F(t, y, fy);
            double dxy = 0.0, dF = 0.0;
            for (std::size_t d = 0; d < F.dim; ++d) {
                dxy += (x[d] - y[d]) * (x[d] - y[d]);
                dF += (fx[d] - fy[d]) * (fx[d] - fy[d]);
            }
            if (dxy > 1e-20)
                rep.max_lip_ratio = std::max(rep.max_lip_ratio, std::sqrt(dF / dxy));
            rep.max_growth_excess =
                std::max(rep.max_growth_excess, norm(fx) - F.M * norm(x));
        }
    }

    double slack = opts.rel_tol * (1.0 + F.A0 + F.L + F.M);
    bool ok_zero = rep.max_zero_norm <= F.A0 + slack;
    bool ok_lip = rep.max_lip_ratio <= F.L + slack;
    bool ok_growth = rep.max_growth_excess <= F.A0 + slack;
    rep.pass = ok_zero && ok_lip && ok_growth;
    if (!rep.pass) {
        std::ostringstream os;
        os << "audit failure:";
        if (!ok_zero) os << " |F(t,0)| max " << rep.max_zero_norm << " > A0 " << F.A0;
        if (!ok_lip) os << " Lip ratio max " << rep.max_lip_ratio << " > L " << F.L;
        if (!ok_growth)
            os << " growth excess max " << rep.max_growth_excess << " > A0 " << F.A0;
        rep.detail = os.str();
    }
    return rep;
}

void require_audit(const CoefficientField& F, const char* name, const AuditOptions& opts) {
    AuditReport rep = audit_field(F, opts);
    if (!rep.pass) throw AuditError(std::string(name) + ": " + rep.detail);
}

// -- Application presets ----------------------------------------------------

namespace {
constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kSqrt3 = 1.7320508075688772935;
}  // namespace

CoefficientField example1_drift() {
    return make_scalar_field(
        [](double t, double y) {
            double factor = (std::cos(t) + std::sin(kSqrt2 * t)) / (4.0 + std::cos(kSqrt3 * t));
            return factor * y / (y * y + 1.0);
        },
        0.0, 2.0 / 3.0, 2.0 / 3.0);
}

CoefficientField example1_diffusion() {
    return make_scalar_field(
        [](double t, double y) {
            return 0.5 * y * std::sin(1.0 / (2.0 + std::cos(t) + std::cos(kSqrt2 * t)));
        },
        0.0, 0.5, 0.5);
}

void example1_time_factors(double t, std::span<double> out2) {
    out2[0] = (std::cos(t) + std::sin(kSqrt2 * t)) / (4.0 + std::cos(kSqrt3 * t));
    out2[1] = std::sin(1.0 / (2.0 + std::cos(t) + std::cos(kSqrt2 * t)));
}

double example2_pointwise_drift(double t, double u) {
    return (std::sin(t) + std::cos(kSqrt3 * t)) * std::sin(u) / 3.0;
}

double example2_pointwise_diffusion(double t, double u) {
    return u / (u * u + 1.0) * std::cos(1.0 / (2.0 + std::sin(t) + std::sin(kSqrt2 * t)));
}

void example2_time_factors(double t, std::span<double> out2) {
    out2[0] = (std::sin(t) + std::cos(kSqrt3 * t)) / 3.0;
    out2[1] = std::cos(1.0 / (2.0 + std::sin(t) + std::sin(kSqrt2 * t)));
}

// -- Spectral Galerkin reduction --------------------------------------------

namespace {

// Shared collocation data: E maps modes to interior-point values, and
// (1/P) E^T maps values back; E^T E = P I holds exactly for the sine basis.
struct SineTransform {
    std::size_t modes;
    std::size_t points;             // P; interior nodes are j/P, j=1..P-1
    std::vector<double> E;          // (P-1) x modes, row-major

    void to_physical(std::span<const double> x, std::span<double> u) const {
        for (std::size_t j = 0; j + 1 < points; ++j) {
            double s = 0.0;
            const double* row = E.data() + j * modes;
            for (std::size_t m = 0; m < modes; ++m) s += row[m] * x[m];
            u[j] = s;
        }
    }
    void to_modes(std::span<const double> u, std::span<double> x) const {
        for (std::size_t m = 0; m < modes; ++m) x[m] = 0.0;
        for (std::size_t j = 0; j + 1 < points; ++j) {
            const double* row = E.data() + j * modes;
            for (std::size_t m = 0; m < modes; ++m) x[m] += row[m] * u[j];
        }
        double inv = 1.0 / static_cast<double>(points);
        for (std::size_t m = 0; m < modes; ++m) x[m] *= inv;
    }
};

CoefficientField nemytskii_field(std::shared_ptr<const SineTransform> tr,
                                 std::function<double(double, double)> pointwise, double A0,
                                 double L, double M) {
    CoefficientField field;
    field.dim = tr->modes;
    field.A0 = A0;
    field.L = L;
    field.M = M;
    field.eval = [tr, fn = std::move(pointwise)](double t, std::span<const double> x,
                                                 std::span<double> out) {
        thread_local std::vector<double> u;
        u.resize(tr->points - 1);
        tr->to_physical(x, u);
        for (double& v : u) v = fn(t, v);
        tr->to_modes(u, out);
    };
    return field;
}

}  // namespace

GalerkinReduction galerkin_reduce(std::size_t n_modes, std::size_t physical_grid_points,
                                  std::function<double(double, double)> pointwise_drift,
                                  std::function<double(double, double)> pointwise_diffusion,
                                  double declared_A0, double declared_L, double declared_M) {
    if (n_modes < 1) throw std::invalid_argument("galerkin_reduce: need at least one mode");
    if (2 * n_modes > physical_grid_points)
        throw std::invalid_argument(
            "galerkin_reduce: n_modes exceeds physical grid resolution (aliasing guard)");

    constexpr double pi = 3.14159265358979323846;
    auto tr = std::make_shared<SineTransform>();
    tr->modes = n_modes;
    tr->points = physical_grid_points;
    tr->E.resize((physical_grid_points - 1) * n_modes);
    for (std::size_t j = 0; j + 1 < physical_grid_points; ++j) {
        double xi = static_cast<double>(j + 1) / static_cast<double>(physical_grid_points);
        for (std::size_t m = 0; m < n_modes; ++m)
            tr->E[j * n_modes + m] = std::sqrt(2.0) * std::sin(double(m + 1) * pi * xi);
    }

    GalerkinReduction red;
    red.n_modes = n_modes;
    red.grid_points = physical_grid_points;
    std::vector<double> rates(n_modes);
    for (std::size_t m = 0; m < n_modes; ++m) rates[m] = double((m + 1) * (m + 1)) * pi * pi;
    red.op = make_spectral_operator(std::move(rates), 1.0, pi * pi);
    red.drift = nemytskii_field(tr, std::move(pointwise_drift), declared_A0, declared_L, declared_M);
    red.diffusion =
        nemytskii_field(tr, std::move(pointwise_diffusion), declared_A0, declared_L, declared_M);
    return red;
}

double galerkin_uniform_integrability(const GalerkinReduction& red,
                                      const std::function<double(double, double)>& pointwise,
                                      double alpha, double radius, std::size_t samples,
                                      std::uint64_t seed) {
    const std::size_t P = red.grid_points;
    const std::size_t K = red.n_modes;
    std::vector<double> x(K), u(P - 1);
    // rebuild the transform rows locally; cheap relative to the probe itself
    constexpr double pi = 3.14159265358979323846;
    auto basis = [&](std::size_t j, std::size_t m) {
        return std::sqrt(2.0) * std::sin(double(m + 1) * pi * double(j + 1) / double(P));
    };
    double sup = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        double t = 200.0 * (rng::uniform(seed, 0, rng::kStreamScratch, 2 * s) - 0.5);
        double nrm = 0.0;
        for (std::size_t m = 0; m < K; ++m) {
            x[m] = rng::gaussian(seed, static_cast<std::uint32_t>(m + 1), rng::kStreamScratch, s);
            nrm += x[m] * x[m];
        }
        nrm = std::sqrt(nrm);
        double scale = nrm > 0 ? radius * rng::uniform(seed, 1, rng::kStreamScratch, 2 * s + 1) / nrm
                               : 0.0;
        for (std::size_t m = 0; m < K; ++m) x[m] *= scale;
        double moment = 0.0;
        for (std::size_t j = 0; j + 1 < P; ++j) {
            double uj = 0.0;
            for (std::size_t m = 0; m < K; ++m) uj += basis(j, m) * x[m];
            moment += std::pow(std::abs(pointwise(t, uj)), 2.0 + alpha);
        }
        sup = std::max(sup, moment / double(P));
    }
    return sup;
}

}  // namespace sdelab
