#include "sdelab/law.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "sdelab/rng.hpp"

namespace sdelab {

EmpiricalLaw empirical_law(const std::vector<double>& samples, std::size_t dim) {
    if (dim == 0 || samples.empty() || samples.size() % dim != 0)
        throw std::invalid_argument("empirical_law: need a nonempty m x dim sample block");
    for (double v : samples)
        if (!std::isfinite(v)) throw std::invalid_argument("empirical_law: non-finite sample");
    EmpiricalLaw law;
    law.dim = dim;
    law.points = samples;
    law.weights.assign(samples.size() / dim, 1.0 / double(samples.size() / dim));
    return law;
}

EmpiricalLaw dirac_law(const std::vector<double>& point) {
    EmpiricalLaw law;
    law.dim = point.size();
    law.points = point;
    law.weights = {1.0};
    return law;
}

EmpiricalLaw law_at_time(const StochasticEnsemble& ens, std::size_t k) {
    EmpiricalLaw law;
    law.dim = ens.dim;
    law.points.resize(ens.n_paths * ens.dim);
    for (std::size_t r = 0; r < ens.n_paths; ++r)
        for (std::size_t d = 0; d < ens.dim; ++d)
            law.points[r * ens.dim + d] = ens.state(r, k, d);
    law.weights.assign(ens.n_paths, 1.0 / double(ens.n_paths));
    return law;
}

EmpiricalLaw merge_duplicates(const EmpiricalLaw& law) {
    std::map<std::vector<double>, double> acc;
    std::vector<double> key(law.dim);
    for (std::size_t i = 0; i < law.size(); ++i) {
        auto p = law.point(i);
        key.assign(p.begin(), p.end());
        acc[key] += law.weights[i];
    }
    EmpiricalLaw out;
    out.dim = law.dim;
    for (const auto& [pt, w] : acc) {
        out.points.insert(out.points.end(), pt.begin(), pt.end());
        out.weights.push_back(w);
    }
    return out;
}

namespace {

// Deterministic stratified subsample to k points with uniform weights:
// points sorted lexicographically, systematic pick at seeded offset.
EmpiricalLaw subsample(const EmpiricalLaw& law, std::size_t k, std::uint64_t seed) {
    std::vector<std::size_t> order(law.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        auto a = law.point(i), b = law.point(j);
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    });
    std::vector<double> cumulative(law.size());
    double run = 0.0;
    for (std::size_t i = 0; i < law.size(); ++i) {
        run += law.weights[order[i]];
        cumulative[i] = run;
    }
    double u0 = rng::uniform(seed, 0, rng::kStreamScratch, law.size());
    EmpiricalLaw out;
    out.dim = law.dim;
    out.weights.assign(k, 1.0 / double(k));
    std::size_t cursor = 0;
    for (std::size_t j = 0; j < k; ++j) {
        double target = (double(j) + u0) / double(k) * run;
        while (cursor + 1 < law.size() && cumulative[cursor] < target) ++cursor;
        auto p = law.point(order[cursor]);
        out.points.insert(out.points.end(), p.begin(), p.end());
    }
    return out;
}

struct TransportProblem {
    std::size_t dim = 1;
    std::vector<double> supply;      // positive part of mu - nu
    std::vector<double> demand;      // negative part
    std::vector<double> dist;        // nS x nT Euclidean distances
    std::size_t nS = 0, nT = 0;
    double total = 0.0;              // total mass to move
};

// Build the signed difference of two laws on the merged joint support.
TransportProblem build_problem(const EmpiricalLaw& a, const EmpiricalLaw& b) {
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
    std::vector<std::vector<double>> src_pts, snk_pts;
    TransportProblem pr;
    pr.dim = a.dim;
    for (const auto& [pt, w] : signed_w) {
        if (w > 1e-15) {
            src_pts.push_back(pt);
            pr.supply.push_back(w);
            pr.total += w;
        } else if (w < -1e-15) {
            snk_pts.push_back(pt);
            pr.demand.push_back(-w);
        }
    }
    pr.nS = pr.supply.size();
    pr.nT = pr.demand.size();
    pr.dist.resize(pr.nS * pr.nT);
    for (std::size_t i = 0; i < pr.nS; ++i)
        for (std::size_t j = 0; j < pr.nT; ++j) {
            double s = 0.0;
            for (std::size_t d = 0; d < pr.dim; ++d) {
                double diff = src_pts[i][d] - snk_pts[j][d];
                s += diff * diff;
            }
            pr.dist[i * pr.nT + j] = std::sqrt(s);
        }
    return pr;
}

// Balanced transportation by successive shortest paths with potentials.
// Exact up to floating rounding; ties broken by node index.
double transport_value(const TransportProblem& pr, double lip, double cap) {
    const std::size_t nS = pr.nS, nT = pr.nT, V = nS + nT;
    if (nS == 0 || nT == 0) return 0.0;
    auto cost = [&](std::size_t i, std::size_t j) {
        return std::min(lip * pr.dist[i * nT + j], cap);
    };

    std::vector<double> rem_s = pr.supply, rem_t = pr.demand;
    std::vector<double> flow(nS * nT, 0.0);
    std::vector<double> phi(V, 0.0);
    std::vector<double> d(V);
    std::vector<int> parent(V);
    std::vector<char> done(V);
    const double INF = std::numeric_limits<double>::infinity();

    const double active_tol = 1e-14 * std::max(1.0, pr.total);
    std::size_t guard = 16 * V + 64;

    auto any_active = [&](const std::vector<double>& rem) {
        for (double r : rem)
            if (r > active_tol) return true;
        return false;
    };

    while (any_active(rem_s) && any_active(rem_t)) {
        if (guard-- == 0)
            throw std::runtime_error("bl_metric: transportation did not converge (internal)");
        std::fill(d.begin(), d.end(), INF);
        std::fill(done.begin(), done.end(), 0);
        std::fill(parent.begin(), parent.end(), -1);
        // every active source sits at distance zero: relax them in one bulk
        // pass instead of popping each, so the scan loop only visits sinks
        // (and sources reached through backward arcs)
        for (std::size_t i = 0; i < nS; ++i) {
            if (rem_s[i] <= active_tol) continue;
            d[i] = 0.0;
            done[i] = 1;
            for (std::size_t j = 0; j < nT; ++j) {
                double rc = cost(i, j) + phi[i] - phi[nS + j];
                if (rc < 0.0) rc = 0.0;  // rounding guard
                if (rc < d[nS + j]) {
                    d[nS + j] = rc;
                    parent[nS + j] = static_cast<int>(i);
                }
            }
        }

        int target = -1;
        for (std::size_t pops = 0; pops < V; ++pops) {
            int u = -1;
            double best = INF;
            for (std::size_t v = 0; v < V; ++v)
                if (!done[v] && d[v] < best) {
                    best = d[v];
                    u = static_cast<int>(v);
                }
            if (u < 0) break;
            done[u] = 1;
            if (static_cast<std::size_t>(u) >= nS && rem_t[u - nS] > active_tol) {
                target = u;
                break;
            }
            if (static_cast<std::size_t>(u) < nS) {
                std::size_t i = static_cast<std::size_t>(u);
                for (std::size_t j = 0; j < nT; ++j) {
                    double rc = cost(i, j) + phi[i] - phi[nS + j];
                    if (rc < 0.0) rc = 0.0;
                    if (d[i] + rc < d[nS + j] - 1e-18) {
                        d[nS + j] = d[i] + rc;
                        parent[nS + j] = static_cast<int>(i);
                    }
                }
            } else {
                std::size_t j = static_cast<std::size_t>(u) - nS;
                for (std::size_t i = 0; i < nS; ++i)
                    if (flow[i * nT + j] > 1e-18) {
                        double rc = -cost(i, j) + phi[nS + j] - phi[i];
                        if (rc < 0.0) rc = 0.0;
                        if (d[nS + j] + rc < d[i] - 1e-18) {
                            d[i] = d[nS + j] + rc;
                            parent[i] = static_cast<int>(nS + j);
                        }
                    }
            }
        }
        if (target < 0)
            throw std::runtime_error("bl_metric: transportation became infeasible (internal)");

        double dt = d[target];
        for (std::size_t v = 0; v < V; ++v) phi[v] += std::min(d[v], dt);

        // bottleneck along the augmenting path (backward arcs return flow)
        double push = rem_t[target - nS];
        int v = target;
        while (parent[v] >= 0) {
            int p = parent[v];
            if (static_cast<std::size_t>(v) < nS)
                push = std::min(push, flow[static_cast<std::size_t>(v) * nT +
                                           (static_cast<std::size_t>(p) - nS)]);
            v = p;
        }
        push = std::min(push, rem_s[static_cast<std::size_t>(v)]);

        int u = target;
        while (parent[u] >= 0) {
            int p = parent[u];
            if (static_cast<std::size_t>(u) >= nS) {
                flow[static_cast<std::size_t>(p) * nT + (static_cast<std::size_t>(u) - nS)] += push;
            } else {
                double& fl = flow[static_cast<std::size_t>(u) * nT +
                                  (static_cast<std::size_t>(p) - nS)];
                fl -= push;
                if (fl < 1e-15) fl = 0.0;
            }
            u = p;
        }
        rem_s[static_cast<std::size_t>(u)] -= push;
        rem_t[static_cast<std::size_t>(target) - nS] -= push;
    }

    double value = 0.0;
    for (std::size_t i = 0; i < nS; ++i)
        for (std::size_t j = 0; j < nT; ++j)
            if (flow[i * nT + j] > 0.0) value += flow[i * nT + j] * cost(i, j);
    return value;
}

double inner_value(const TransportProblem& pr, double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return transport_value(pr, 1.0 - s, 2.0 * s);
}

}  // namespace

double bl_metric_at_split(const EmpiricalLaw& a, const EmpiricalLaw& b, double s) {
    if (a.dim != b.dim) throw std::invalid_argument("bl_metric: dimension mismatch");
    return inner_value(build_problem(a, b), s);
}

double bl_metric(const EmpiricalLaw& a, const EmpiricalLaw& b, const BlOptions& opts) {
    if (a.dim != b.dim) throw std::invalid_argument("bl_metric: dimension mismatch");
    const std::size_t half_cap = std::max<std::size_t>(opts.size_cap / 2, 8);
    const EmpiricalLaw& ua = a;
    const EmpiricalLaw& ub = b;
    EmpiricalLaw sa, sb;
    const EmpiricalLaw* pa = &ua;
    const EmpiricalLaw* pb = &ub;
    if (a.size() > half_cap) {
        sa = subsample(a, half_cap, opts.subsample_seed);
        pa = &sa;
    }
    if (b.size() > half_cap) {
        sb = subsample(b, half_cap, opts.subsample_seed + 1);
        pb = &sb;
    }

    TransportProblem pr = build_problem(*pa, *pb);
    if (pr.nS == 0 || pr.nT == 0) return 0.0;  // identical weighted supports

    // Concave in s; coarse grid to bracket, then golden-section refinement.
    const int grid_n = 9;
    double best_s = 0.5, best_v = -1.0;
    std::vector<double> vals(grid_n);
    for (int i = 0; i < grid_n; ++i) {
        double s = double(i) / double(grid_n - 1);
        vals[i] = inner_value(pr, s);
        if (vals[i] > best_v) {
            best_v = vals[i];
            best_s = s;
        }
    }
    int k = int(std::round(best_s * (grid_n - 1)));
    double lo = double(std::max(k - 1, 0)) / double(grid_n - 1);
    double hi = double(std::min(k + 1, grid_n - 1)) / double(grid_n - 1);

    const double inv_phi = 0.6180339887498948482;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = inner_value(pr, x1);
    double f2 = inner_value(pr, x2);
    while (hi - lo > opts.split_tol) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = inner_value(pr, x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = inner_value(pr, x1);
        }
        best_v = std::max(best_v, std::max(f1, f2));
    }
    return best_v;
}

LawDistanceSeries uniform_law_distance(const StochasticEnsemble& ens_a,
                                       const StochasticEnsemble& ens_b,
                                       const std::vector<double>& window_times,
                                       const BlOptions& opts) {
    if (ens_a.dim != ens_b.dim)
        throw std::invalid_argument("uniform_law_distance: dimension mismatch");
    for (double t : window_times)
        if (!ens_a.grid.contains(t) || !ens_b.grid.contains(t))
            throw std::invalid_argument("uniform_law_distance: time outside grids");

    LawDistanceSeries series;
    series.times = window_times;
    series.beta_values.assign(window_times.size(), 0.0);

    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < static_cast<long>(window_times.size()); ++i) {
        try {
            std::size_t ka = ens_a.grid.index_of(window_times[i]);
            std::size_t kb = ens_b.grid.index_of(window_times[i]);
            series.beta_values[i] =
                bl_metric(law_at_time(ens_a, ka), law_at_time(ens_b, kb), opts);
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    series.sup_value = 0.0;
    for (double v : series.beta_values) series.sup_value = std::max(series.sup_value, v);
    return series;
}

double gaussian_beta_floor(std::size_t m, std::size_t dim, double sigma, std::size_t n_rep,
                           std::uint64_t seed, const BlOptions& opts) {
    double acc = 0.0;
    for (std::size_t rep = 0; rep < n_rep; ++rep) {
        std::vector<double> xa(m * dim), xb(m * dim);
        for (std::size_t i = 0; i < m * dim; ++i) {
            xa[i] = sigma * rng::gaussian(seed, static_cast<std::uint32_t>(2 * rep),
                                          rng::kStreamScratch, i);
            xb[i] = sigma * rng::gaussian(seed, static_cast<std::uint32_t>(2 * rep + 1),
                                          rng::kStreamScratch, i);
        }
        acc += bl_metric(empirical_law(xa, dim), empirical_law(xb, dim), opts);
    }
    return acc / double(n_rep);
}

}  // namespace sdelab
