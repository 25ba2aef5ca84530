#include "sdelab/green.hpp"

#include <algorithm>
#include <cmath>

namespace sdelab {

SpectralOperator make_scalar_operator(double nu, double stability_constant) {
    return make_spectral_operator({nu}, stability_constant, nu);
}

SpectralOperator make_spectral_operator(std::vector<double> mode_rates, double stability_constant,
                                        double stability_rate) {
    if (mode_rates.empty()) throw std::invalid_argument("operator needs at least one mode");
    double min_rate = *std::min_element(mode_rates.begin(), mode_rates.end());
    if (!(min_rate > 0.0)) throw std::invalid_argument("mode decay rates must be positive");
    if (!(stability_constant >= 1.0)) throw std::invalid_argument("stability constant must be >= 1");
    if (!(stability_rate > 0.0) || stability_rate > min_rate + 1e-12)
        throw std::invalid_argument("stability rate must satisfy 0 < nu <= min mode rate");
    return SpectralOperator{std::move(mode_rates), stability_constant, stability_rate};
}

std::vector<double> NoisePath::increments() const {
    std::vector<double> out(grid.n - 1);
    for (std::size_t i = 0; i + 1 < grid.n; ++i) out[i] = increment(i);
    return out;
}

double default_burn_in(const SpectralOperator& op) {
    return std::log(op.stability_constant * 1e8) / op.stability_rate;
}

namespace {

// Exact exponential one-step coefficients for one mode.
struct ModeStep {
    double decay;   // e^{-lambda h}
    double w_left;  // trapezoid weight on f(t_k), kernel applied
    double w_right; // trapezoid weight on f(t_{k+1})
    double sigma;   // stochastic std for unit g frozen on the step
};

ModeStep mode_step(double lambda, double h) {
    double decay = std::exp(-lambda * h);
    return {decay, 0.5 * h * decay, 0.5 * h,
            std::sqrt((1.0 - decay * decay) / (2.0 * lambda))};
}

}  // namespace

GreenResult green_apply(const SpectralOperator& op, const SampledPath& f, const SampledPath& g,
                        const NoisePath& noise, double burn_in, std::size_t n_replicates) {
    check_same_shape(f, g, "green_apply");
    if (!(f.grid == noise.grid))
        throw std::invalid_argument("green_apply: noise grid must match input grid");
    if (f.dim != op.dim())
        throw std::invalid_argument("green_apply: input dimension must match operator modes");
    if (burn_in < f.grid.h)
        throw std::invalid_argument("green_apply: burn_in shorter than one step");

    const std::size_t n = f.grid.n;
    const std::size_t dim = f.dim;
    const double h = f.grid.h;

    std::vector<ModeStep> steps(dim);
    for (std::size_t m = 0; m < dim; ++m) steps[m] = mode_step(op.mode_rates[m], h);

    auto run_replicate = [&](std::uint32_t replicate, double* sq_norm_out, SampledPath* path_out) {
        std::vector<double> x(dim, 0.0);
        if (sq_norm_out) sq_norm_out[0] = 0.0;
        if (path_out)
            for (std::size_t m = 0; m < dim; ++m) path_out->at(0, m) = 0.0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            double z = rng::gaussian(
                noise.seed, replicate, rng::kStreamNoise,
                static_cast<std::uint64_t>(noise.step_offset + static_cast<std::int64_t>(k)));
            double sq = 0.0;
            for (std::size_t m = 0; m < dim; ++m) {
                const ModeStep& s = steps[m];
                x[m] = s.decay * x[m] + s.w_left * f.at(k, m) + s.w_right * f.at(k + 1, m) +
                       s.sigma * g.at(k, m) * z;
                sq += x[m] * x[m];
                if (path_out) path_out->at(k + 1, m) = x[m];
            }
            if (sq_norm_out) sq_norm_out[k + 1] = sq;
        }
    };

    GreenResult res;
    res.realization = make_path(f.grid, dim);
    run_replicate(noise.replicate, nullptr, &res.realization);

    res.moments.grid = f.grid;
    res.moments.second_moment.assign(n, 0.0);
    res.moments.stderr_.assign(n, 0.0);
    if (n_replicates > 0) {
        // Batches of replicates are the parallel unit; per-batch sums are
        // merged serially in batch order so results do not depend on the
        // number of workers.
        const std::size_t batch = n_replicates <= 64 ? 1 : 32;
        const std::size_t n_batches = (n_replicates + batch - 1) / batch;
        std::vector<double> batch_sum(n_batches * n, 0.0);
        std::vector<std::size_t> batch_count(n_batches, 0);

#pragma omp parallel for schedule(static)
        for (long b = 0; b < static_cast<long>(n_batches); ++b) {
            std::vector<double> sq(n);
            double* acc = batch_sum.data() + static_cast<std::size_t>(b) * n;
            std::size_t lo = static_cast<std::size_t>(b) * batch;
            std::size_t hi = std::min(lo + batch, n_replicates);
            batch_count[b] = hi - lo;
            for (std::size_t r = lo; r < hi; ++r) {
                run_replicate(static_cast<std::uint32_t>(r), sq.data(), nullptr);
                for (std::size_t k = 0; k < n; ++k) acc[k] += sq[k];
            }
        }

        for (std::size_t k = 0; k < n; ++k) {
            double total = 0.0;
            for (std::size_t b = 0; b < n_batches; ++b) total += batch_sum[b * n + k];
            res.moments.second_moment[k] = total / static_cast<double>(n_replicates);
        }
        // stderr from the spread of full-batch means
        std::size_t full = 0;
        for (std::size_t b = 0; b < n_batches; ++b)
            if (batch_count[b] == batch) ++full;
        if (full >= 2) {
            for (std::size_t k = 0; k < n; ++k) {
                double mean = 0.0;
                for (std::size_t b = 0; b < n_batches; ++b)
                    if (batch_count[b] == batch) mean += batch_sum[b * n + k] / double(batch);
                mean /= double(full);
                double var = 0.0;
                for (std::size_t b = 0; b < n_batches; ++b)
                    if (batch_count[b] == batch) {
                        double d = batch_sum[b * n + k] / double(batch) - mean;
                        var += d * d;
                    }
                var /= double(full - 1);
                res.moments.stderr_[k] = std::sqrt(var / double(full));
            }
        }
    }

    double f_sup = std::sqrt(f.max_sq_norm());
    double g_sup = std::sqrt(g.max_sq_norm());
    res.truncation_bound =
        op.stability_constant * std::exp(-op.stability_rate * burn_in) *
        (f_sup / op.stability_rate + g_sup / std::sqrt(2.0 * op.stability_rate));
    return res;
}

double sup_norm_bound(const SpectralOperator& op, double f_sup2, double g_sup2) {
    if (f_sup2 < 0.0 || g_sup2 < 0.0)
        throw std::invalid_argument("sup_norm_bound: sup-norm squares must be nonnegative");
    return op.stability_constant / op.stability_rate *
           std::sqrt(2.0 * f_sup2 + op.stability_rate * g_sup2);
}

double windowed_moment_bound(const SpectralOperator& op, double f_win2, double g_win2,
                             double f_sup2, double g_sup2, double L, double l) {
    if (!(l > L) || !(L > 0.0))
        throw std::invalid_argument("windowed_moment_bound: need l > L > 0");
    if (f_win2 < 0.0 || g_win2 < 0.0 || f_sup2 < 0.0 || g_sup2 < 0.0)
        throw std::invalid_argument("windowed_moment_bound: moments must be nonnegative");
    const double N2 = op.stability_constant * op.stability_constant;
    const double nu = op.stability_rate;
    double core = N2 / (nu * nu) * (2.0 * f_win2 + nu * g_win2);
    double tail = N2 / (nu * nu) *
                  (2.0 * std::exp(-nu * (l - L)) * f_sup2 +
                   nu * std::exp(-2.0 * nu * (l - L)) * g_sup2);
    return core + tail;
}

}  // namespace sdelab
