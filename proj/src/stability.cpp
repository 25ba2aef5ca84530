#include "sdelab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sdelab/thresholds.hpp"

namespace sdelab {

void InitialLaw::sample(std::uint64_t seed, std::uint32_t path, std::span<double> out) const {
    for (std::size_t d = 0; d < out.size(); ++d) {
        double m = d < mean.size() ? mean[d] : 0.0;
        if (kind == Kind::fixed) {
            out[d] = m;
        } else {
            double s = d < std_dev.size() ? std_dev[d] : 1.0;
            out[d] = m + s * rng::gaussian(seed, path, rng::kStreamInitial, d);
        }
    }
}

std::string InitialLaw::describe() const {
    std::ostringstream os;
    os << (kind == Kind::fixed ? "fixed(" : "gaussian(");
    for (std::size_t d = 0; d < mean.size(); ++d) os << (d ? "," : "") << mean[d];
    if (kind == Kind::gaussian) {
        os << ";";
        for (std::size_t d = 0; d < std_dev.size(); ++d) os << (d ? "," : "") << std_dev[d];
    }
    os << ")";
    return os.str();
}

InitialLaw fixed_initial(std::vector<double> value) {
    InitialLaw law;
    law.kind = InitialLaw::Kind::fixed;
    law.mean = std::move(value);
    return law;
}

InitialLaw gaussian_initial(std::vector<double> mean, std::vector<double> std_dev) {
    InitialLaw law;
    law.kind = InitialLaw::Kind::gaussian;
    law.mean = std::move(mean);
    law.std_dev = std::move(std_dev);
    return law;
}

namespace {

struct StepKernels {
    std::vector<double> decay;  // e^{-lambda h}
    std::vector<double> phi1;   // (1 - e^{-lambda h}) / lambda
    std::vector<double> sigma;  // sqrt((1 - e^{-2 lambda h}) / (2 lambda))
};

StepKernels make_kernels(const SpectralOperator& op, double h) {
    StepKernels k;
    std::size_t d = op.dim();
    k.decay.resize(d);
    k.phi1.resize(d);
    k.sigma.resize(d);
    for (std::size_t m = 0; m < d; ++m) {
        double lam = op.mode_rates[m];
        k.decay[m] = std::exp(-lam * h);
        k.phi1[m] = (1.0 - k.decay[m]) / lam;
        k.sigma[m] = std::sqrt((1.0 - k.decay[m] * k.decay[m]) / (2.0 * lam));
    }
    return k;
}

void check_finite(double v, std::size_t path, std::size_t step) {
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "non-finite state at path " << path << ", step " << step;
        throw std::runtime_error(os.str());
    }
}

// Batch-of-32 statistics of a per-(path,time) functional, merged serially in
// batch order so results do not depend on worker count.
struct BatchStats {
    std::vector<double> mean;
    std::vector<double> stderr_;
};

template <typename SqAt>
BatchStats batched_stats(std::size_t n_paths, std::size_t n_times, SqAt&& sq_at) {
    const std::size_t batch = n_paths <= 64 ? 1 : 32;
    const std::size_t n_batches = (n_paths + batch - 1) / batch;
    std::vector<double> sums(n_batches * n_times, 0.0);
    std::vector<std::size_t> counts(n_batches, 0);
#pragma omp parallel for schedule(static)
    for (long b = 0; b < static_cast<long>(n_batches); ++b) {
        std::size_t lo = static_cast<std::size_t>(b) * batch;
        std::size_t hi = std::min(lo + batch, n_paths);
        counts[b] = hi - lo;
        double* acc = sums.data() + static_cast<std::size_t>(b) * n_times;
        for (std::size_t r = lo; r < hi; ++r)
            for (std::size_t k = 0; k < n_times; ++k) acc[k] += sq_at(r, k);
    }
    BatchStats st;
    st.mean.assign(n_times, 0.0);
    st.stderr_.assign(n_times, 0.0);
    for (std::size_t k = 0; k < n_times; ++k) {
        double total = 0.0;
        for (std::size_t b = 0; b < n_batches; ++b) total += sums[b * n_times + k];
        st.mean[k] = total / double(n_paths);
    }
    std::size_t full = 0;
    for (std::size_t b = 0; b < n_batches; ++b)
        if (counts[b] == batch) ++full;
    if (full >= 2) {
        for (std::size_t k = 0; k < n_times; ++k) {
            double mean = 0.0;
            for (std::size_t b = 0; b < n_batches; ++b)
                if (counts[b] == batch) mean += sums[b * n_times + k] / double(batch);
            mean /= double(full);
            double var = 0.0;
            for (std::size_t b = 0; b < n_batches; ++b)
                if (counts[b] == batch) {
                    double dlt = sums[b * n_times + k] / double(batch) - mean;
                    var += dlt * dlt;
                }
            st.stderr_[k] = std::sqrt(var / double(full - 1) / double(full));
        }
    }
    return st;
}

}  // namespace

StochasticEnsemble euler_maruyama_ensemble(const SpectralOperator& op, const CoefficientField& F,
                                           const CoefficientField& G, const InitialLaw& x0,
                                           const UniformGrid& grid, std::size_t n_paths,
                                           std::uint64_t seed, std::int64_t step_offset,
                                           std::uint64_t initial_component_offset) {
    if (F.dim != op.dim() || G.dim != op.dim())
        throw std::invalid_argument("euler_maruyama_ensemble: field/operator dimension mismatch");
    if (n_paths < 1) throw std::invalid_argument("euler_maruyama_ensemble: need at least one path");

    const std::size_t d = op.dim();
    const std::size_t n = grid.n;
    StepKernels ker = make_kernels(op, grid.h);

    StochasticEnsemble ens;
    ens.grid = grid;
    ens.dim = d;
    ens.n_paths = n_paths;
    ens.seed = seed;
    ens.initial_law = x0.describe();
    ens.states.assign(n_paths * n * d, 0.0);

    std::exception_ptr error;
#pragma omp parallel for schedule(static)
    for (long r = 0; r < static_cast<long>(n_paths); ++r) {
        try {
            std::vector<double> x(d), drift(d), diff(d);
            // component offset keeps two samplers under one seed independent
            for (std::size_t c = 0; c < d; ++c) {
                double m = c < x0.mean.size() ? x0.mean[c] : 0.0;
                if (x0.kind == InitialLaw::Kind::fixed) {
                    x[c] = m;
                } else {
                    double s = c < x0.std_dev.size() ? x0.std_dev[c] : 1.0;
                    x[c] = m + s * rng::gaussian(seed, static_cast<std::uint32_t>(r),
                                                 rng::kStreamInitial,
                                                 initial_component_offset + c);
                }
            }
            auto pr = static_cast<std::size_t>(r);
            for (std::size_t c = 0; c < d; ++c) ens.state(pr, 0, c) = x[c];
            for (std::size_t k = 0; k + 1 < n; ++k) {
                double t = grid.time(k);
                F(t, x, drift);
                G(t, x, diff);
                double z = rng::gaussian(seed, static_cast<std::uint32_t>(r), rng::kStreamNoise,
                                         static_cast<std::uint64_t>(
                                             step_offset + static_cast<std::int64_t>(k)));
                for (std::size_t c = 0; c < d; ++c) {
                    x[c] = ker.decay[c] * x[c] + ker.phi1[c] * drift[c] +
                           ker.sigma[c] * diff[c] * z;
                    check_finite(x[c], pr, k + 1);
                    ens.state(pr, k + 1, c) = x[c];
                }
            }
        } catch (...) {
            // exceptions may not cross the parallel region; surface the first
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    return ens;
}

BoundCheckReport dissipativity_check(const StochasticEnsemble& ens, double N, double nu, double A0,
                                     double M, double t0) {
    double threshold = thresholds::dissipativity(N, nu);
    if (!(M < threshold))
        throw std::invalid_argument("dissipativity_check: growth constant fails M < nu/(N sqrt(6(nu+1)))");

    const std::size_t n = ens.grid.n;
    BatchStats st = batched_stats(ens.n_paths, n, [&](std::size_t r, std::size_t k) {
        double s = 0.0;
        for (std::size_t c = 0; c < ens.dim; ++c) s += ens.state(r, k, c) * ens.state(r, k, c);
        return s;
    });

    BoundCheckReport rep;
    rep.times.resize(n);
    for (std::size_t k = 0; k < n; ++k) rep.times[k] = ens.grid.time(k);
    rep.measured = st.mean;
    rep.stderr_ = st.stderr_;

    const double N2 = N * N;
    const double denom = nu * nu - 6.0 * N2 * M * M * (nu + 1.0);
    const double asym = 6.0 * N2 * A0 * A0 * (nu + 1.0) / denom;
    const double rate = nu - 6.0 * N2 * M * M * (1.0 + 1.0 / nu);
    const double ex0 = st.mean[ens.grid.index_of(t0)];  // empirical E|x0|^2

    rep.asymptote = asym;
    rep.bound.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        double t = rep.times[k];
        rep.bound[k] = 3.0 * N2 * (ex0 - asym / 3.0) * std::exp(-rate * (t - t0)) + asym;
    }
    rep.violations = 0;
    for (std::size_t k = 0; k < n; ++k)
        if (rep.measured[k] > rep.bound[k] + 3.0 * rep.stderr_[k]) ++rep.violations;

    // time average over the last quarter of the window, with batch stderr
    std::size_t tail_lo = n - n / 4;
    double tail = 0.0, tail_se = 0.0;
    for (std::size_t k = tail_lo; k < n; ++k) {
        tail += rep.measured[k];
        tail_se += rep.stderr_[k];
    }
    rep.tail_average = tail / double(n - tail_lo);
    rep.tail_stderr = tail_se / double(n - tail_lo);

    rep.constants = {{"N", N},       {"nu", nu},   {"A0", A0},
                     {"M", M},       {"t0", t0},   {"threshold_M", threshold},
                     {"rate", rate}, {"E_x0_sq", ex0}, {"asymptote", asym}};
    return rep;
}

namespace {

BoundCheckReport difference_report(const StochasticEnsemble& a, const StochasticEnsemble& b,
                                   double N, double nu, double L, double t0) {
    const std::size_t n = a.grid.n;
    BatchStats st = batched_stats(a.n_paths, n, [&](std::size_t r, std::size_t k) {
        double s = 0.0;
        for (std::size_t c = 0; c < a.dim; ++c) {
            double dlt = a.state(r, k, c) - b.state(r, k, c);
            s += dlt * dlt;
        }
        return s;
    });

    BoundCheckReport rep;
    rep.times.resize(n);
    for (std::size_t k = 0; k < n; ++k) rep.times[k] = a.grid.time(k);
    rep.measured = st.mean;
    rep.stderr_ = st.stderr_;

    const double N2 = N * N;
    const double rate = nu - 3.0 * (1.0 + 1.0 / nu) * N2 * L * L;
    const double e0 = st.mean[a.grid.index_of(t0)];
    rep.bound.resize(n);
    for (std::size_t k = 0; k < n; ++k)
        rep.bound[k] = 3.0 * N2 * std::exp(-rate * (rep.times[k] - t0)) * e0;
    rep.violations = 0;
    for (std::size_t k = 0; k < n; ++k)
        if (rep.measured[k] > rep.bound[k] + 3.0 * rep.stderr_[k]) ++rep.violations;
    rep.constants = {{"N", N},     {"nu", nu},         {"L", L},
                     {"t0", t0},   {"rate", rate},     {"E_diff0_sq", e0},
                     {"threshold_L", thresholds::convergence(N, nu)}};
    return rep;
}

}  // namespace

BoundCheckReport convergence_check(const SpectralOperator& op, const CoefficientField& F,
                                   const CoefficientField& G, const InitialLaw& x1,
                                   const InitialLaw& x2, const UniformGrid& grid,
                                   std::size_t n_paths, std::uint64_t seed, double N, double nu,
                                   double L) {
    if (!(L < thresholds::convergence(N, nu)))
        throw std::invalid_argument("convergence_check: L fails nu/(N sqrt(3(nu+1)))");
    // shared increments, independent initial draws (component offset)
    StochasticEnsemble ea = euler_maruyama_ensemble(op, F, G, x1, grid, n_paths, seed, 0, 0);
    StochasticEnsemble eb =
        euler_maruyama_ensemble(op, F, G, x2, grid, n_paths, seed, 0, op.dim());
    return difference_report(ea, eb, N, nu, L, grid.t0);
}

BoundCheckReport convergence_to_bounded(const SpectralOperator& op, const CoefficientField& F,
                                        const CoefficientField& G, const InitialLaw& x0,
                                        const StochasticEnsemble& bounded, double N, double nu,
                                        double L) {
    if (!(L < thresholds::convergence(N, nu)))
        throw std::invalid_argument("convergence_to_bounded: L fails nu/(N sqrt(3(nu+1)))");
    StochasticEnsemble fwd = euler_maruyama_ensemble(op, F, G, x0, bounded.grid, bounded.n_paths,
                                                     bounded.seed, 0, 2 * op.dim());
    return difference_report(fwd, bounded, N, nu, L, bounded.grid.t0);
}

std::pair<SampledPath, double> comparison_kernel(double alpha, double nu, const SampledPath& f,
                                                 double L, double l) {
    if (!(nu > alpha) || alpha < 0.0)
        throw std::invalid_argument("comparison_kernel: need nu > alpha >= 0");
    if (!(l > L) || !(L > 0.0)) throw std::invalid_argument("comparison_kernel: need l > L > 0");
    if (f.dim != 1) throw std::invalid_argument("comparison_kernel: f must be scalar");
    for (double v : f.values)
        if (v < 0.0) throw std::invalid_argument("comparison_kernel: f must be nonnegative");
    if (f.grid.t0 > -l || f.grid.t_end() < l)
        throw std::invalid_argument("comparison_kernel: grid must cover [-l, l]");

    const double k = nu - alpha;
    const double h = f.grid.h;
    const double decay = std::exp(-k * h);
    SampledPath v = make_path(f.grid, 1);
    double x = 0.0;
    for (std::size_t i = 0; i + 1 < f.grid.n; ++i) {
        x = decay * x + 0.5 * h * (decay * f.at(i) + f.at(i + 1));
        v.at(i + 1) = x;
    }

    double sup_f = f.max_abs();
    double win_f = 0.0;
    for (std::size_t i = 0; i < f.grid.n; ++i)
        if (std::abs(f.grid.time(i)) <= l + 1e-12) win_f = std::max(win_f, f.at(i));
    double bound = std::exp(k * L) * std::exp(-k * l) / k * sup_f +
                   (1.0 - std::exp(-k * L) * std::exp(-k * l)) / k * win_f;
    return {std::move(v), bound};
}

}  // namespace sdelab
