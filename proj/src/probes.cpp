#include "sdelab/probes.hpp"

#include <algorithm>
#include <cmath>

#include "sdelab/thresholds.hpp"

namespace sdelab {

StochasticEnsemble green_ensemble(const SpectralOperator& op, const SampledPath& f,
                                  const SampledPath& g, std::uint64_t seed, std::size_t n_paths,
                                  std::int64_t step_offset) {
    check_same_shape(f, g, "green_ensemble");
    const std::size_t n = f.grid.n;
    const std::size_t d = f.dim;

    std::vector<double> decay(d), w_left(d), w_right(d), sigma(d);
    for (std::size_t m = 0; m < d; ++m) {
        double lam = op.mode_rates[m];
        decay[m] = std::exp(-lam * f.grid.h);
        w_left[m] = 0.5 * f.grid.h * decay[m];
        w_right[m] = 0.5 * f.grid.h;
        sigma[m] = std::sqrt((1.0 - decay[m] * decay[m]) / (2.0 * lam));
    }

    StochasticEnsemble ens;
    ens.grid = f.grid;
    ens.dim = d;
    ens.n_paths = n_paths;
    ens.seed = seed;
    ens.initial_law = "green(zero-init)";
    ens.states.assign(n_paths * n * d, 0.0);

#pragma omp parallel for schedule(static)
    for (long r = 0; r < static_cast<long>(n_paths); ++r) {
        std::vector<double> x(d, 0.0);
        for (std::size_t k = 0; k + 1 < n; ++k) {
            double z = rng::gaussian(seed, static_cast<std::uint32_t>(r), rng::kStreamNoise,
                                     static_cast<std::uint64_t>(step_offset +
                                                                 static_cast<std::int64_t>(k)));
            for (std::size_t m = 0; m < d; ++m) {
                x[m] = decay[m] * x[m] + w_left[m] * f.at(k, m) + w_right[m] * f.at(k + 1, m) +
                       sigma[m] * g.at(k, m) * z;
                ens.state(static_cast<std::size_t>(r), k + 1, m) = x[m];
            }
        }
    }
    return ens;
}

namespace {

std::vector<double> window_times(const UniformGrid& grid, std::size_t count) {
    std::vector<double> times(count);
    for (std::size_t i = 0; i < count; ++i)
        times[i] = grid.t0 + grid.span() * double(i) / double(count - 1);
    return times;
}

// resample a long path onto a working grid shifted by tau
SampledPath shifted_window(const SampledPath& long_path, const UniformGrid& work, double tau) {
    SampledPath out = make_path(work, long_path.dim);
    std::vector<double> buf(long_path.dim);
    for (std::size_t k = 0; k < work.n; ++k) {
        long_path.value_at(work.time(k) + tau, buf);
        for (std::size_t m = 0; m < long_path.dim; ++m) out.at(k, m) = buf[m];
    }
    return out;
}

double sup_row_diff(const SampledPath& a, const SampledPath& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.grid.n; ++k) m = std::max(m, row_distance(a, b, k));
    return m;
}

}  // namespace

ComparabilityProbeReport linear_comparability_probe(const SpectralOperator& op,
                                                    const SampledPath& f, const SampledPath& g,
                                                    const std::vector<double>& shifts,
                                                    const SampledPath& f_lim,
                                                    const SampledPath& g_lim,
                                                    const UniformGrid& grid,
                                                    const ProbeOptions& opts) {
    check_same_shape(f, g, "linear_comparability_probe");
    const double burn_in = opts.burn_in >= 0.0 ? opts.burn_in : default_burn_in(op);
    const UniformGrid work = extend_backward(grid, burn_in);

    ComparabilityProbeReport rep;
    rep.window_lo = grid.t0;
    rep.window_hi = grid.t_end();
    rep.n_paths = opts.n_paths;
    std::vector<double> times = window_times(grid, opts.n_window_times);

    SampledPath fl = shifted_window(f_lim, work, 0.0);
    SampledPath gl = shifted_window(g_lim, work, 0.0);
    StochasticEnsemble limit = green_ensemble(op, fl, gl, opts.seed, opts.n_paths);

    // estimation floor: an independent run of the same limit system
    StochasticEnsemble limit_b = green_ensemble(op, fl, gl, opts.seed + 0x9e37, opts.n_paths);
    rep.noise_floor = uniform_law_distance(limit, limit_b, times, opts.bl).sup_value;

    const double L_half = 0.5 * grid.span();
    const double l_half = L_half + burn_in;
    for (std::size_t i = 0; i < shifts.size(); ++i) {
        ProbeShiftResult res;
        res.shift = shifts[i];
        SampledPath fs = shifted_window(f, work, shifts[i]);
        SampledPath gs = shifted_window(g, work, shifts[i]);
        double df = sup_row_diff(fs, fl);
        double dg = sup_row_diff(gs, gl);
        res.input_sup_diff = std::max(df, dg);
        // L2 ceiling from the windowed moment bound; also a beta ceiling
        double f_sup2 = std::pow(2.0 * std::sqrt(f.max_sq_norm()), 2);
        double g_sup2 = std::pow(2.0 * std::sqrt(g.max_sq_norm()), 2);
        res.ceiling = std::min(
            2.0, std::sqrt(windowed_moment_bound(op, df * df, dg * dg, f_sup2, g_sup2, L_half,
                                                 l_half)));
        StochasticEnsemble shifted =
            green_ensemble(op, fs, gs, opts.seed + 1000 + i, opts.n_paths);
        res.series = uniform_law_distance(shifted, limit, times, opts.bl);
        res.beta_sup = res.series.sup_value;
        rep.shifts.push_back(std::move(res));
    }
    return rep;
}

ComparabilityProbeReport semilinear_comparability_probe(
    const SpectralOperator& op, const CoefficientField& F, const CoefficientField& G,
    const std::vector<double>& shifts, const CoefficientField& F_lim, const CoefficientField& G_lim,
    const UniformGrid& grid, const ProbeOptions& opts) {
    const double N = op.stability_constant, nu = op.stability_rate;
    const double Lc = std::max({F.L, G.L, F_lim.L, G_lim.L});
    if (!(Lc < thresholds::comparability(N, nu)))
        throw std::invalid_argument(
            "semilinear_comparability_probe: L fails nu/(2N sqrt(1+nu))");

    ComparabilityProbeReport rep;
    rep.window_lo = grid.t0;
    rep.window_hi = grid.t_end();
    rep.n_paths = opts.n_paths;
    std::vector<double> times = window_times(grid, opts.n_window_times);

    SolveOptions solve_opts;
    solve_opts.n_replicates = opts.n_paths;
    solve_opts.burn_in = opts.burn_in;
    solve_opts.seed = opts.seed;
    FixedPointTrace limit = solve_bounded_solution(op, F_lim, G_lim, grid, solve_opts);

    SolveOptions floor_opts = solve_opts;
    floor_opts.seed = opts.seed + 0x9e37;
    FixedPointTrace limit_b = solve_bounded_solution(op, F_lim, G_lim, grid, floor_opts);
    rep.noise_floor =
        uniform_law_distance(limit.ensemble, limit_b.ensemble, times, opts.bl).sup_value;

    const double burn_in = opts.burn_in >= 0.0 ? opts.burn_in : default_burn_in(op);
    const double A0 = std::max(F_lim.A0, G_lim.A0);
    const double r = limit.radius;
    const double k_rate = nu - 4.0 * N * N * Lc * Lc * (1.0 + 1.0 / nu);
    const double L_half = 0.5 * grid.span();
    const double l_half = L_half + burn_in;

    for (std::size_t i = 0; i < shifts.size(); ++i) {
        ProbeShiftResult res;
        res.shift = shifts[i];
        CoefficientField Fs = shift_field(F, shifts[i]);
        CoefficientField Gs = shift_field(G, shifts[i]);

        // a_{n,t}, b_{n,t}: coefficient discrepancies along the limit solution
        double max_a2 = 0.0, max_b2 = 0.0;
        {
            std::vector<double> va(op.dim()), vb(op.dim());
            const StochasticEnsemble& ens = limit.ensemble;
            std::size_t stride = std::max<std::size_t>(ens.n_paths / 16, 1);
            for (std::size_t rr = 0; rr < ens.n_paths; rr += stride)
                for (std::size_t kk = 0; kk < ens.grid.n; kk += 4) {
                    auto x = ens.state_row(rr, kk);
                    double t = ens.grid.time(kk);
                    Fs(t, x, va);
                    F_lim(t, x, vb);
                    double s = 0.0;
                    for (std::size_t m = 0; m < op.dim(); ++m)
                        s += (va[m] - vb[m]) * (va[m] - vb[m]);
                    max_a2 = std::max(max_a2, s);
                    Gs(t, x, va);
                    G_lim(t, x, vb);
                    s = 0.0;
                    for (std::size_t m = 0; m < op.dim(); ++m)
                        s += (va[m] - vb[m]) * (va[m] - vb[m]);
                    max_b2 = std::max(max_b2, s);
                }
        }
        res.input_sup_diff = std::sqrt(std::max(max_a2, max_b2));

        // ceiling from the comparison-kernel window estimate when the rate is
        // positive: 4N^2 [ e^{k(L-l)}/k * sup + (1-e^{-k(L+l)})/k * window ]
        if (k_rate > 0.0) {
            double sup_term = (1.0 / nu + 1.0) * 4.0 * (A0 + Lc * r) * (A0 + Lc * r);
            double win_term = max_a2 / nu + max_b2;
            double m2 = 4.0 * N * N *
                        (std::exp(k_rate * (L_half - l_half)) / k_rate * sup_term +
                         (1.0 - std::exp(-k_rate * (L_half + l_half))) / k_rate * win_term);
            res.ceiling = std::min(2.0, std::sqrt(m2));
        } else {
            res.ceiling = 2.0;
        }

        SolveOptions shift_opts = solve_opts;
        shift_opts.seed = opts.seed + 1000 + i;
        FixedPointTrace shifted = solve_bounded_solution(op, Fs, Gs, grid, shift_opts);
        res.series = uniform_law_distance(shifted.ensemble, limit.ensemble, times, opts.bl);
        res.beta_sup = res.series.sup_value;
        rep.shifts.push_back(std::move(res));
    }
    return rep;
}

}  // namespace sdelab
