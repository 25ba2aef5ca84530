#include "sdelab/fixedpoint.hpp"

#include <algorithm>
#include <cmath>

#include "sdelab/thresholds.hpp"

namespace sdelab {

ContractionReport contraction_constants(double N, double nu, double L, double p, double A0) {
    if (!(N >= 1.0) || !(nu > 0.0) || L < 0.0)
        throw std::invalid_argument("contraction_constants: need N >= 1, nu > 0, L >= 0");
    if (!(p > 2.0)) throw std::invalid_argument("contraction_constants: need p > 2");

    ContractionReport rep;
    rep.p = p;
    rep.theta2 = N * N * L * L * (2.0 + nu) / (nu * nu);
    rep.c_p = std::pow(p * (p - 1.0) / 2.0 * std::pow(p / (p - 1.0), p - 2.0), p / 2.0);
    rep.theta_p = std::pow(2.0, p - 1.0) * std::pow(N, p) * std::pow(L, p) *
                  (std::pow(2.0 * (p - 1.0) / (nu * p), p - 1.0) +
                   rep.c_p * std::pow((p - 2.0) / (nu * p), p / 2.0 - 1.0)) *
                  (2.0 / (nu * p));
    rep.threshold_contraction = thresholds::contraction(N, nu);
    rep.threshold_comparability = thresholds::comparability(N, nu);
    rep.threshold_lp_limit = thresholds::lp_limit(N, nu);
    rep.admissible_contraction = L < rep.threshold_contraction;
    rep.admissible_comparability = L < rep.threshold_comparability;
    rep.admissible_lp_limit = L < rep.threshold_lp_limit;
    rep.r = rep.admissible_contraction ? bounded_ball_radius(N, nu, A0, L) : 0.0;
    return rep;
}

double theta_p_limit(double N, double nu, double L) {
    return 2.0 * N * N * L * L / (nu * nu) + 2.0 * N * N * L * L / nu;
}

double bounded_ball_radius(double N, double nu, double A0, double L) {
    if (A0 < 0.0) throw std::invalid_argument("bounded_ball_radius: A0 must be nonnegative");
    double denom = nu - N * L * std::sqrt(2.0 + nu);
    if (!(denom > 0.0))
        throw std::invalid_argument(
            "bounded_ball_radius: L fails the contraction condition L < nu/(N sqrt(2+nu))");
    return N * A0 * std::sqrt(2.0 + nu) / denom;
}

FixedPointTrace solve_bounded_solution(const SpectralOperator& op, const CoefficientField& F,
                                       const CoefficientField& G, const UniformGrid& grid,
                                       const SolveOptions& opts) {
    if (F.dim != op.dim() || G.dim != op.dim())
        throw std::invalid_argument("solve_bounded_solution: dimension mismatch");
    double Lmax = std::max(F.L, G.L);
    double A0 = std::max(F.A0, G.A0);
    if (!(Lmax < thresholds::contraction(op.stability_constant, op.stability_rate)))
        throw std::invalid_argument(
            "solve_bounded_solution: Lipschitz constant fails L < nu/(N sqrt(2+nu))");

    FixedPointTrace trace;
    trace.radius = bounded_ball_radius(op.stability_constant, op.stability_rate, A0, Lmax);
    trace.theta2 = op.stability_constant * op.stability_constant * Lmax * Lmax *
                   (2.0 + op.stability_rate) / (op.stability_rate * op.stability_rate);
    trace.tol = opts.tol >= 0.0 ? opts.tol : std::max(1e-6 * trace.radius, 1e-12);

    const double burn_in = opts.burn_in >= 0.0 ? opts.burn_in : default_burn_in(op);
    const UniformGrid work = extend_backward(grid, burn_in);
    const std::size_t n = work.n;
    const std::size_t d = op.dim();
    const std::size_t R = opts.n_replicates;
    const std::size_t report_start = work.n - grid.n;
    // noise step keys are aligned to the reporting grid's t0
    const std::int64_t step_offset = -static_cast<std::int64_t>(report_start);

    std::vector<double> decay(d), w_left(d), w_right(d), sigma(d);
    for (std::size_t m = 0; m < d; ++m) {
        double lam = op.mode_rates[m];
        decay[m] = std::exp(-lam * work.h);
        w_left[m] = 0.5 * work.h * decay[m];
        w_right[m] = 0.5 * work.h;
        sigma[m] = std::sqrt((1.0 - decay[m] * decay[m]) / (2.0 * lam));
    }

    std::vector<double> prev(R * n * d, 0.0);
    std::vector<double> next(R * n * d, 0.0);
    auto cell = [&](std::vector<double>& buf, std::size_t r, std::size_t k) {
        return buf.data() + (r * n + k) * d;
    };

    const std::size_t batch = R <= 64 ? 1 : 32;
    const std::size_t n_batches = (R + batch - 1) / batch;

    bool converged = false;
    for (std::size_t iter = 0; iter < opts.max_iter && !converged; ++iter) {
        std::exception_ptr error;
#pragma omp parallel for schedule(static)
        for (long b = 0; b < static_cast<long>(n_batches); ++b) {
            try {
                std::vector<double> x(d), f_lo(d), f_hi(d), g_lo(d);
                std::size_t lo = static_cast<std::size_t>(b) * batch;
                std::size_t hi = std::min(lo + batch, R);
                for (std::size_t r = lo; r < hi; ++r) {
                    std::fill(x.begin(), x.end(), 0.0);
                    const double* ph = cell(prev, r, 0);
                    F(work.time(0), {ph, d}, f_lo);
                    double* out0 = cell(next, r, 0);
                    std::fill(out0, out0 + d, 0.0);
                    for (std::size_t k = 0; k + 1 < n; ++k) {
                        const double* pk = cell(prev, r, k);
                        const double* pk1 = cell(prev, r, k + 1);
                        G(work.time(k), {pk, d}, g_lo);
                        F(work.time(k + 1), {pk1, d}, f_hi);
                        double z = rng::gaussian(
                            opts.seed, static_cast<std::uint32_t>(r), rng::kStreamNoise,
                            static_cast<std::uint64_t>(step_offset +
                                                       static_cast<std::int64_t>(k)));
                        double* out = cell(next, r, k + 1);
                        for (std::size_t m = 0; m < d; ++m) {
                            x[m] = decay[m] * x[m] + w_left[m] * f_lo[m] + w_right[m] * f_hi[m] +
                                   sigma[m] * g_lo[m] * z;
                            out[m] = x[m];
                        }
                        std::swap(f_lo, f_hi);
                    }
                }
            } catch (...) {
#pragma omp critical
                if (!error) error = std::current_exception();
            }
        }
        if (error) std::rethrow_exception(error);

        // sup over the reporting window of the replicate-averaged L2 distance
        double dist = 0.0;
        {
            // replicate-averaged squared distance per time, serial merge
            std::vector<double> acc(grid.n, 0.0);
            for (std::size_t r = 0; r < R; ++r)
                for (std::size_t k = 0; k < grid.n; ++k) {
                    const double* a = cell(next, r, report_start + k);
                    const double* bb = cell(prev, r, report_start + k);
                    double s = 0.0;
                    for (std::size_t m = 0; m < d; ++m) s += (a[m] - bb[m]) * (a[m] - bb[m]);
                    acc[k] += s;
                }
            for (double a : acc) dist = std::max(dist, a / double(R));
            dist = std::sqrt(dist);
        }
        trace.iterate_distances.push_back(dist);
        std::swap(prev, next);
        if (dist <= trace.tol) converged = true;
    }
    trace.converged = converged;

    // package the converged iterate on the reporting grid
    trace.ensemble.grid = grid;
    trace.ensemble.dim = d;
    trace.ensemble.n_paths = R;
    trace.ensemble.seed = opts.seed;
    trace.ensemble.initial_law = "fixed-point(phi0=0)";
    trace.ensemble.states.resize(R * grid.n * d);
    for (std::size_t r = 0; r < R; ++r)
        for (std::size_t k = 0; k < grid.n; ++k)
            for (std::size_t m = 0; m < d; ++m)
                trace.ensemble.state(r, k, m) = cell(prev, r, report_start + k)[m];

    // per-time ||xi(t)||_2 with batch stderr, then the ball certificate
    {
        std::vector<double> sums(n_batches * grid.n, 0.0);
        std::vector<std::size_t> counts(n_batches, 0);
#pragma omp parallel for schedule(static)
        for (long b = 0; b < static_cast<long>(n_batches); ++b) {
            std::size_t lo = static_cast<std::size_t>(b) * batch;
            std::size_t hi = std::min(lo + batch, R);
            counts[b] = hi - lo;
            double* acc = sums.data() + static_cast<std::size_t>(b) * grid.n;
            for (std::size_t r = lo; r < hi; ++r)
                for (std::size_t k = 0; k < grid.n; ++k) {
                    const double* xr = cell(prev, r, report_start + k);
                    double s = 0.0;
                    for (std::size_t m = 0; m < d; ++m) s += xr[m] * xr[m];
                    acc[k] += s;
                }
        }
        trace.sup_l2.assign(grid.n, 0.0);
        trace.sup_l2_stderr.assign(grid.n, 0.0);
        std::size_t full = 0;
        for (std::size_t b = 0; b < n_batches; ++b)
            if (counts[b] == batch) ++full;
        trace.ball_ok = true;
        for (std::size_t k = 0; k < grid.n; ++k) {
            double total = 0.0;
            for (std::size_t b = 0; b < n_batches; ++b) total += sums[b * grid.n + k];
            double m2 = total / double(R);
            double se_m2 = 0.0;
            if (full >= 2) {
                double mean = 0.0;
                for (std::size_t b = 0; b < n_batches; ++b)
                    if (counts[b] == batch) mean += sums[b * grid.n + k] / double(batch);
                mean /= double(full);
                double var = 0.0;
                for (std::size_t b = 0; b < n_batches; ++b)
                    if (counts[b] == batch) {
                        double dlt = sums[b * grid.n + k] / double(batch) - mean;
                        var += dlt * dlt;
                    }
                se_m2 = std::sqrt(var / double(full - 1) / double(full));
            }
            double l2 = std::sqrt(m2);
            double se_l2 = l2 > 1e-12 ? se_m2 / (2.0 * l2) : std::sqrt(se_m2);
            trace.sup_l2[k] = l2;
            trace.sup_l2_stderr[k] = se_l2;
            if (l2 > trace.radius + 3.0 * se_l2 + 1e-12) trace.ball_ok = false;
        }
    }
    return trace;
}

}  // namespace sdelab
