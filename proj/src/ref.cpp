#include "sdelab/ref.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace sdelab::ref {

SampledPath green_direct(const SpectralOperator& op, const SampledPath& f, const SampledPath& g,
                         const NoisePath& noise) {
    check_same_shape(f, g, "ref::green_direct");
    const std::size_t n = f.grid.n;
    const std::size_t d = f.dim;
    const double h = f.grid.h;
    SampledPath out = make_path(f.grid, d);

    for (std::size_t m = 0; m < d; ++m) {
        double lam = op.mode_rates[m];
        double sig = std::sqrt((1.0 - std::exp(-2.0 * lam * h)) / (2.0 * lam));
        for (std::size_t k = 1; k < n; ++k) {
            // composite trapezoid of e^{-lam (t_k - tau)} f(tau) over [t_0, t_k]
            double det = 0.5 * h * (std::exp(-lam * double(k) * h) * f.at(0, m) + f.at(k, m));
            for (std::size_t j = 1; j < k; ++j)
                det += h * std::exp(-lam * double(k - j) * h) * f.at(j, m);
            double sto = 0.0;
            for (std::size_t j = 0; j < k; ++j)
                sto += std::exp(-lam * double(k - 1 - j) * h) * sig * g.at(j, m) *
                       noise.normal(j);
            out.at(k, m) = det + sto;
        }
    }
    return out;
}

double bebutov_scan(const SampledPath& a, const SampledPath& b, std::size_t l_samples) {
    check_same_shape(a, b, "ref::bebutov_scan");
    double L_max = std::min(-a.grid.t0, a.grid.t_end());
    std::vector<double> node_rho(a.grid.n);
    for (std::size_t k = 0; k < a.grid.n; ++k) node_rho[k] = row_distance(a, b, k);

    double best = 0.0;
    for (std::size_t i = 1; i <= l_samples; ++i) {
        double L = L_max * double(i) / double(l_samples);
        double sup = 0.0;
        for (std::size_t k = 0; k < a.grid.n; ++k)
            if (std::abs(a.grid.time(k)) <= L) sup = std::max(sup, node_rho[k]);
        best = std::max(best, std::min(sup, 1.0 / L));
    }
    return best;
}

AlmostPeriodReport almost_period_scan_serial(const SampledPath& path, double epsilon,
                                             double tau_min, double tau_max, double scan_step,
                                             double core_half_width) {
    const UniformGrid& g = path.grid;
    double hi_room = g.t_end() - std::max(tau_max, 0.0);
    double lo_room = -(g.t0 - std::min(tau_min, 0.0));
    double core = core_half_width > 0.0 ? core_half_width : std::min(hi_room, lo_room);
    if (!(core > 0.0)) throw std::invalid_argument("ref scan: empty comparison core");

    AlmostPeriodReport rep;
    rep.epsilon = epsilon;
    rep.tau_min = tau_min;
    rep.tau_max = tau_max;
    rep.scan_step = scan_step;
    rep.core_half_width = core;

    std::vector<double> va(path.dim), vb(path.dim);
    const long n_tau = static_cast<long>(std::floor((tau_max - tau_min) / scan_step + 1e-9)) + 1;
    const long n_core = static_cast<long>(std::floor(2.0 * core / g.h + 1e-9)) + 1;
    for (long i = 0; i < n_tau; ++i) {
        double tau = tau_min + double(i) * scan_step;
        bool ok = true;
        for (long j = 0; j < n_core && ok; ++j) {
            double t = -core + double(j) * g.h;
            path.value_at(t, va);
            path.value_at(t + tau, vb);
            double s = 0.0;
            for (std::size_t dd = 0; dd < path.dim; ++dd) s += (va[dd] - vb[dd]) * (va[dd] - vb[dd]);
            if (std::sqrt(s) >= epsilon) ok = false;
        }
        if (ok) rep.periods.push_back(tau);
    }
    if (rep.periods.empty()) {
        rep.max_gap = tau_max - tau_min;
    } else {
        double gap = rep.periods.front() - tau_min;
        for (std::size_t i = 1; i < rep.periods.size(); ++i)
            gap = std::max(gap, rep.periods[i] - rep.periods[i - 1]);
        rep.max_gap = std::max(gap, tau_max - rep.periods.back());
    }
    return rep;
}

double ou_second_moment(double t, double nu, double sigma) {
    return sigma * sigma * (1.0 - std::exp(-2.0 * nu * t)) / (2.0 * nu);
}

StochasticEnsemble ensemble_serial(const SpectralOperator& op, const CoefficientField& F,
                                   const CoefficientField& G, const InitialLaw& x0,
                                   const UniformGrid& grid, std::size_t n_paths,
                                   std::uint64_t seed, std::int64_t step_offset) {
    const std::size_t d = op.dim();
    StochasticEnsemble ens;
    ens.grid = grid;
    ens.dim = d;
    ens.n_paths = n_paths;
    ens.seed = seed;
    ens.initial_law = x0.describe();
    ens.states.assign(n_paths * grid.n * d, 0.0);

    std::vector<double> decay(d), phi1(d), sigma(d), x(d), drift(d), diff(d);
    for (std::size_t m = 0; m < d; ++m) {
        double lam = op.mode_rates[m];
        decay[m] = std::exp(-lam * grid.h);
        phi1[m] = (1.0 - decay[m]) / lam;
        sigma[m] = std::sqrt((1.0 - decay[m] * decay[m]) / (2.0 * lam));
    }
    for (std::size_t r = 0; r < n_paths; ++r) {
        x0.sample(seed, static_cast<std::uint32_t>(r), x);
        for (std::size_t c = 0; c < d; ++c) ens.state(r, 0, c) = x[c];
        for (std::size_t k = 0; k + 1 < grid.n; ++k) {
            F(grid.time(k), x, drift);
            G(grid.time(k), x, diff);
            double z = rng::gaussian(seed, static_cast<std::uint32_t>(r), rng::kStreamNoise,
                                     static_cast<std::uint64_t>(step_offset +
                                                                 static_cast<std::int64_t>(k)));
            for (std::size_t c = 0; c < d; ++c) {
                x[c] = decay[c] * x[c] + phi1[c] * drift[c] + sigma[c] * diff[c] * z;
                ens.state(r, k + 1, c) = x[c];
            }
        }
    }
    return ens;
}

double bl_metric_bruteforce(const EmpiricalLaw& a, const EmpiricalLaw& b,
                            std::size_t value_samples, std::size_t split_samples) {
    // signed weights on the merged joint support
    std::map<std::vector<double>, double> signed_w;
    std::vector<double> key(a.dim);
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto p = a.point(i);
        key.assign(p.begin(), p.end());
        signed_w[key] += a.weights[i];
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
        auto p = b.point(i);
        key.assign(p.begin(), p.end());
        signed_w[key] -= b.weights[i];
    }
    std::vector<std::vector<double>> pts;
    std::vector<double> c;
    for (const auto& [pt, w] : signed_w)
        if (std::abs(w) > 1e-15) {
            pts.push_back(pt);
            c.push_back(w);
        }
    const std::size_t m = pts.size();
    if (m == 0) return 0.0;
    if (m > 4) throw std::invalid_argument("bl_metric_bruteforce: support too large");

    std::vector<double> dist(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            double s = 0.0;
            for (std::size_t dd = 0; dd < a.dim; ++dd) {
                double diff = pts[i][dd] - pts[j][dd];
                s += diff * diff;
            }
            dist[i * m + j] = std::sqrt(s);
        }

    double best = 0.0;
    std::vector<std::size_t> idx(m, 0);
    for (std::size_t si = 0; si <= split_samples; ++si) {
        double s = double(si) / double(split_samples);
        double lip = 1.0 - s;
        // dense search over f values in [-s, s]^m
        std::fill(idx.begin(), idx.end(), 0);
        while (true) {
            double val = 0.0;
            bool feasible = true;
            for (std::size_t i = 0; i < m && feasible; ++i) {
                double fi = -s + 2.0 * s * double(idx[i]) / double(value_samples - 1);
                val += c[i] * fi;
                for (std::size_t j = 0; j < i; ++j) {
                    double fj = -s + 2.0 * s * double(idx[j]) / double(value_samples - 1);
                    if (std::abs(fi - fj) > lip * dist[i * m + j] + 1e-12) feasible = false;
                }
            }
            if (feasible) best = std::max(best, val);
            std::size_t pos = 0;
            while (pos < m && ++idx[pos] == value_samples) idx[pos++] = 0;
            if (pos == m) break;
        }
    }
    return best;
}

}  // namespace sdelab::ref
