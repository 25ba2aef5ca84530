#include "sdelab/recurrence.hpp"

#include <algorithm>
#include <cmath>

#include "sdelab/rng.hpp"

namespace sdelab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// max over |t| <= T of rho(a(t),b(t)), exact for piecewise-linear paths:
// the row norm is convex on each cell, so cell maxima sit at the nodes and
// at the clipped boundary points +-T.
double window_sup(const SampledPath& a, const SampledPath& b, const std::vector<double>& node_rho,
                  double T) {
    const UniformGrid& g = a.grid;
    double m = 0.0;
    double lo = std::max(-T, g.t0), hi = std::min(T, g.t_end());
    std::size_t k_lo = static_cast<std::size_t>(std::ceil((lo - g.t0) / g.h - 1e-12));
    std::size_t k_hi = static_cast<std::size_t>(std::floor((hi - g.t0) / g.h + 1e-12));
    for (std::size_t k = k_lo; k <= k_hi && k < g.n; ++k) m = std::max(m, node_rho[k]);
    // boundary points, interpolated
    std::vector<double> va(a.dim), vb(a.dim);
    for (double t : {lo, hi}) {
        a.value_at(t, va);
        b.value_at(t, vb);
        double s = 0.0;
        for (std::size_t d = 0; d < a.dim; ++d) s += (va[d] - vb[d]) * (va[d] - vb[d]);
        m = std::max(m, std::sqrt(s));
    }
    return m;
}

}  // namespace

double bebutov_distance(const SampledPath& a, const SampledPath& b) {
    check_same_shape(a, b, "bebutov_distance");
    const UniformGrid& g = a.grid;
    double L_max = std::min(-g.t0, g.t_end());
    if (!(L_max >= 1.0))
        throw std::invalid_argument("bebutov_distance: grid must span [-L,L] with L >= 1");
    if (a.values == b.values) return 0.0;

    std::vector<double> node_rho(g.n);
    for (std::size_t k = 0; k < g.n; ++k) node_rho[k] = row_distance(a, b, k);

    auto psi = [&](double eps) { return window_sup(a, b, node_rho, 1.0 / eps); };

    const double eps_min = 1.0 / L_max;
    if (psi(eps_min) < eps_min) {
        // Fixed point sits below what the grid can certify; report the bracket
        // sup_{L <= L_max} min(max rho, 1/L) <= d <= 1/L_max.
        double lower = 0.0;
        for (std::size_t k = 0; k < g.n; ++k) {
            double t = std::abs(g.time(k));
            double L = std::max(t, 1e-12);
            lower = std::max(lower, std::min(window_sup(a, b, node_rho, L), 1.0 / L));
        }
        throw TruncationError("bebutov_distance: grid too short to certify the fixed point",
                              lower, eps_min);
    }

    double lo = eps_min;
    double hi = std::max(*std::max_element(node_rho.begin(), node_rho.end()), eps_min);
    // psi(eps) - eps is strictly decreasing; bisect to 1e-9
    for (int it = 0; it < 200 && hi - lo > 1e-9; ++it) {
        double mid = 0.5 * (lo + hi);
        if (psi(mid) >= mid)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

struct ScanEval {
    std::function<void(double, std::span<double>)> eval;
    std::size_t dim;
};

AlmostPeriodReport scan_impl(const ScanEval& ev, double epsilon, double tau_min, double tau_max,
                             double scan_step, double core, double core_step) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (!(scan_step > 0.0)) throw std::invalid_argument("scan_step must be positive");
    if (!(tau_max >= tau_min)) throw std::invalid_argument("empty scan window");
    if (!(core > 0.0)) throw std::invalid_argument("empty comparison core");

    const long n_tau = static_cast<long>(std::floor((tau_max - tau_min) / scan_step + 1e-9)) + 1;
    const long n_core = static_cast<long>(std::floor(2.0 * core / core_step + 1e-9)) + 1;
    std::vector<char> hit(n_tau, 0);

#pragma omp parallel for schedule(static)
    for (long i = 0; i < n_tau; ++i) {
        thread_local std::vector<double> va, vb;
        va.resize(ev.dim);
        vb.resize(ev.dim);
        double tau = tau_min + double(i) * scan_step;
        bool ok = true;
        for (long j = 0; j < n_core && ok; ++j) {
            double t = -core + double(j) * core_step;
            ev.eval(t, va);
            ev.eval(t + tau, vb);
            double s = 0.0;
            for (std::size_t d = 0; d < ev.dim; ++d) s += (va[d] - vb[d]) * (va[d] - vb[d]);
            if (std::sqrt(s) >= epsilon) ok = false;
        }
        hit[i] = ok ? 1 : 0;
    }

    AlmostPeriodReport rep;
    rep.epsilon = epsilon;
    rep.tau_min = tau_min;
    rep.tau_max = tau_max;
    rep.scan_step = scan_step;
    rep.core_half_width = core;
    for (long i = 0; i < n_tau; ++i)
        if (hit[i]) rep.periods.push_back(tau_min + double(i) * scan_step);

    if (rep.periods.empty()) {
        rep.max_gap = tau_max - tau_min;
    } else {
        double gap = rep.periods.front() - tau_min;
        for (std::size_t i = 1; i < rep.periods.size(); ++i)
            gap = std::max(gap, rep.periods[i] - rep.periods[i - 1]);
        gap = std::max(gap, tau_max - rep.periods.back());
        rep.max_gap = gap;
    }
    return rep;
}

}  // namespace

AlmostPeriodReport epsilon_almost_periods(const SampledPath& path, double epsilon, double tau_min,
                                          double tau_max, double scan_step,
                                          double core_half_width) {
    const UniformGrid& g = path.grid;
    // need t and t+tau inside the grid for every scanned tau
    double hi_room = g.t_end() - std::max(tau_max, 0.0);
    double lo_room = -(g.t0 - std::min(tau_min, 0.0));
    double feasible = std::min(hi_room, lo_room);
    double core = core_half_width > 0.0 ? core_half_width : feasible;
    if (!(core > 0.0) || core > feasible + 1e-9)
        throw std::invalid_argument(
            "epsilon_almost_periods: comparison core empty or unsupported by the grid");

    ScanEval ev{[&path](double t, std::span<double> out) { path.value_at(t, out); }, path.dim};
    return scan_impl(ev, epsilon, tau_min, tau_max, scan_step, core, g.h);
}

AlmostPeriodReport epsilon_almost_periods_fn(
    const std::function<void(double, std::span<double>)>& eval, std::size_t dim, double epsilon,
    double tau_min, double tau_max, double scan_step, double core_half_width,
    double core_sample_step) {
    if (!(core_sample_step > 0.0)) throw std::invalid_argument("core_sample_step must be positive");
    ScanEval ev{eval, dim};
    return scan_impl(ev, epsilon, tau_min, tau_max, scan_step, core_half_width, core_sample_step);
}

SampledPath translate(const SampledPath& path, long shift_steps) {
    long n = static_cast<long>(path.grid.n);
    if (std::abs(shift_steps) >= n)
        throw std::invalid_argument("translate: shift exceeds path length");
    long length = n - std::abs(shift_steps);
    long src_begin = std::max(shift_steps, 0l);
    long dst_t0_steps = std::max(-shift_steps, 0l);

    SampledPath out = make_path(
        UniformGrid{path.grid.t0 + double(dst_t0_steps) * path.grid.h, path.grid.h,
                    static_cast<std::size_t>(length)},
        path.dim);
    for (long k = 0; k < length; ++k)
        for (std::size_t d = 0; d < path.dim; ++d)
            out.at(static_cast<std::size_t>(k), d) =
                path.at(static_cast<std::size_t>(k + src_begin), d);
    return out;
}

namespace {

double torus_interpolate(const ReferenceFunctionSpec& spec, double t) {
    const std::size_t k = spec.frequencies.size();
    const std::size_t res = spec.table_resolution;
    std::vector<std::size_t> i0(k);
    std::vector<double> w(k);
    for (std::size_t a = 0; a < k; ++a) {
        double phase = std::fmod(spec.frequencies[a] * t, kTwoPi);
        if (phase < 0.0) phase += kTwoPi;
        double u = phase / kTwoPi * double(res);
        std::size_t cell = static_cast<std::size_t>(u) % res;
        i0[a] = cell;
        w[a] = u - std::floor(u);
    }
    double acc = 0.0;
    for (std::size_t corner = 0; corner < (1u << k); ++corner) {
        double weight = 1.0;
        std::size_t idx = 0;
        for (std::size_t a = 0; a < k; ++a) {
            bool hi = (corner >> a) & 1u;
            weight *= hi ? w[a] : 1.0 - w[a];
            std::size_t ia = (i0[a] + (hi ? 1 : 0)) % res;  // periodic wrap
            idx = idx * res + ia;
        }
        acc += weight * spec.torus_table[idx];
    }
    return acc;
}

}  // namespace

double reference_value(const ReferenceFunctionSpec& spec, double t) {
    using Kind = ReferenceFunctionSpec::Kind;
    switch (spec.kind) {
        case Kind::constant:
            return spec.amplitude;
        case Kind::periodic:
            return spec.amplitude * std::sin(kTwoPi * t / spec.period);
        case Kind::quasi_periodic:
            return spec.amplitude * torus_interpolate(spec, t);
        case Kind::levitan_example:
            return spec.amplitude / (2.0 + std::cos(t) + std::cos(std::sqrt(2.0) * t));
        case Kind::bochner_example:
            return spec.amplitude *
                   std::sin(1.0 / (2.0 + std::cos(t) + std::cos(std::sqrt(2.0) * t)));
    }
    throw std::invalid_argument("reference_value: unknown kind");
}

SampledPath make_reference(const ReferenceFunctionSpec& spec, const UniformGrid& grid) {
    using Kind = ReferenceFunctionSpec::Kind;
    if (spec.kind == Kind::periodic && !(spec.period > 0.0))
        throw std::invalid_argument("make_reference: periodic kind needs period > 0");
    if (spec.kind == Kind::quasi_periodic) {
        if (spec.frequencies.empty())
            throw std::invalid_argument("make_reference: quasi-periodic kind needs frequencies");
        if (spec.table_resolution < 2)
            throw std::invalid_argument("make_reference: torus table resolution must be >= 2");
        std::size_t expect = 1;
        for (std::size_t a = 0; a < spec.frequencies.size(); ++a)
            expect *= spec.table_resolution;
        if (spec.torus_table.size() != expect)
            throw std::invalid_argument("make_reference: torus table size mismatch");
    }
    return sample_scalar(grid, [&spec](double t) { return reference_value(spec, t); });
}

std::vector<double> make_torus_table(const std::function<double(std::span<const double>)>& fn,
                                     std::size_t k, std::size_t resolution) {
    std::size_t total = 1;
    for (std::size_t a = 0; a < k; ++a) total *= resolution;
    std::vector<double> table(total);
    std::vector<double> phase(k);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx;
        for (std::size_t a = k; a-- > 0;) {
            phase[a] = kTwoPi * double(rem % resolution) / double(resolution);
            rem /= resolution;
        }
        // index order must match torus_interpolate: axis 0 is the slowest
        std::size_t check = 0;
        for (std::size_t a = 0; a < k; ++a)
            check = check * resolution +
                    static_cast<std::size_t>(std::round(phase[a] / kTwoPi * double(resolution))) %
                        resolution;
        table[check] = fn(phase);
    }
    return table;
}

double coefficient_distance(const CoefficientField& F, const CoefficientField& G,
                            const std::vector<double>& ball_radii,
                            const CoeffDistanceOptions& opts) {
    if (F.dim != G.dim)
        throw std::invalid_argument("coefficient_distance: field dimensions differ");
    if (ball_radii.empty()) throw std::invalid_argument("coefficient_distance: need ball radii");
    for (std::size_t i = 1; i < ball_radii.size(); ++i)
        if (!(ball_radii[i] >= ball_radii[i - 1]))
            throw std::invalid_argument("coefficient_distance: ball radii must be increasing");

    const std::size_t dim = F.dim;
    std::vector<double> x(dim), fx(dim), gx(dim);
    double total = 0.0;
    for (std::size_t nidx = 0; nidx < ball_radii.size(); ++nidx) {
        double n = double(nidx + 1);
        double R = ball_radii[nidx];
        std::size_t t_samples =
            static_cast<std::size_t>(2.0 * n * double(opts.t_samples_per_unit)) + 1;
        double d_n = 0.0;
        for (std::size_t it = 0; it < t_samples; ++it) {
            double t = -n + 2.0 * n * double(it) / double(t_samples - 1);
            for (std::size_t jx = 0; jx < opts.x_samples; ++jx) {
                if (dim == 1) {
                    x[0] = -R + 2.0 * R * double(jx) / double(std::max<std::size_t>(opts.x_samples - 1, 1));
                } else {
                    double nrm = 0.0;
                    for (std::size_t d = 0; d < dim; ++d) {
                        x[d] = rng::gaussian(opts.seed, static_cast<std::uint32_t>(d),
                                             rng::kStreamScratch, nidx * opts.x_samples + jx);
                        nrm += x[d] * x[d];
                    }
                    nrm = std::sqrt(nrm);
                    double u = rng::uniform(opts.seed, 0xffff, rng::kStreamScratch,
                                            nidx * opts.x_samples + jx);
                    double scale = nrm > 0.0 ? R * std::pow(u, 1.0 / double(dim)) / nrm : 0.0;
                    for (std::size_t d = 0; d < dim; ++d) x[d] *= scale;
                }
                F(t, x, fx);
                G(t, x, gx);
                double s = 0.0;
                for (std::size_t d = 0; d < dim; ++d) s += (fx[d] - gx[d]) * (fx[d] - gx[d]);
                d_n = std::max(d_n, std::sqrt(s));
            }
        }
        total += std::pow(0.5, n) * d_n / (1.0 + d_n);
    }
    return total;
}

}  // namespace sdelab
