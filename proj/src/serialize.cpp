#include "sdelab/serialize.hpp"

#include <iomanip>

namespace sdelab {

json to_json(const UniformGrid& g) { return json{{"t0", g.t0}, {"h", g.h}, {"n", g.n}}; }

json to_json(const SampledPath& p) {
    json rows = json::array();
    for (std::size_t k = 0; k < p.grid.n; ++k) {
        json row = json::array();
        for (std::size_t d = 0; d < p.dim; ++d) row.push_back(p.at(k, d));
        rows.push_back(std::move(row));
    }
    return json{{"grid", to_json(p.grid)}, {"dim", p.dim}, {"values", std::move(rows)}};
}

SampledPath path_from_json(const json& j) {
    UniformGrid g = make_grid(j.at("grid").at("t0").get<double>(),
                              j.at("grid").at("h").get<double>(),
                              j.at("grid").at("n").get<std::size_t>());
    SampledPath p = make_path(g, j.at("dim").get<std::size_t>());
    const auto& rows = j.at("values");
    if (rows.size() != g.n) throw std::invalid_argument("path values row count mismatch");
    for (std::size_t k = 0; k < g.n; ++k)
        for (std::size_t d = 0; d < p.dim; ++d) p.at(k, d) = rows[k][d].get<double>();
    for (double v : p.values)
        if (!std::isfinite(v)) throw std::invalid_argument("path values must be finite");
    return p;
}

json to_json(const MomentSeries& m) {
    return json{{"grid", to_json(m.grid)},
                {"second_moment", m.second_moment},
                {"stderr", m.stderr_}};
}

json to_json(const AlmostPeriodReport& r) {
    return json{{"epsilon", r.epsilon},
                {"scan_window", {r.tau_min, r.tau_max}},
                {"scan_step", r.scan_step},
                {"core_half_width", r.core_half_width},
                {"periods", r.periods},
                {"max_gap", r.max_gap},
                {"classification", "evidence relative to core, not proof"}};
}

json to_json(const ContractionReport& r) {
    return json{{"theta2", r.theta2},
                {"theta_p", r.theta_p},
                {"c_p", r.c_p},
                {"p", r.p},
                {"r", r.r},
                {"admissible_contraction", r.admissible_contraction},
                {"admissible_comparability", r.admissible_comparability},
                {"admissible_lp_limit", r.admissible_lp_limit},
                {"threshold_contraction", r.threshold_contraction},
                {"threshold_comparability", r.threshold_comparability},
                {"threshold_lp_limit", r.threshold_lp_limit}};
}

json to_json(const FixedPointTrace& t) {
    return json{{"iterate_distances", t.iterate_distances},
                {"converged", t.converged},
                {"tol", t.tol},
                {"radius", t.radius},
                {"theta2", t.theta2},
                {"n_replicates", t.ensemble.n_paths},
                {"sup_l2", t.sup_l2},
                {"sup_l2_stderr", t.sup_l2_stderr},
                {"ball_ok", t.ball_ok}};
}

json to_json(const BoundCheckReport& r) {
    return json{{"times", r.times},        {"measured", r.measured},
                {"stderr", r.stderr_},     {"bound", r.bound},
                {"violations", r.violations}, {"constants", r.constants},
                {"tail_average", r.tail_average}, {"tail_stderr", r.tail_stderr},
                {"asymptote", r.asymptote}};
}

json to_json(const LawDistanceSeries& s) {
    return json{{"times", s.times}, {"beta", s.beta_values}, {"sup", s.sup_value}};
}

json to_json(const ComparabilityProbeReport& r) {
    json shifts = json::array();
    for (const auto& s : r.shifts)
        shifts.push_back(json{{"shift", s.shift},
                              {"beta_sup", s.beta_sup},
                              {"input_sup_diff", s.input_sup_diff},
                              {"ceiling", s.ceiling},
                              {"series", to_json(s.series)}});
    return json{{"shifts", std::move(shifts)},
                {"noise_floor", r.noise_floor},
                {"window", {r.window_lo, r.window_hi}},
                {"n_paths", r.n_paths}};
}

json to_json(const AuditReport& r) {
    return json{{"max_zero_norm", r.max_zero_norm},
                {"max_lip_ratio", r.max_lip_ratio},
                {"max_growth_excess", r.max_growth_excess},
                {"pass", r.pass},
                {"detail", r.detail}};
}

namespace {
void put(std::ostream& os, double v) { os << std::setprecision(17) << v; }
}  // namespace

void write_path_csv(std::ostream& os, const SampledPath& p) {
    os << "t";
    for (std::size_t d = 0; d < p.dim; ++d) os << ",v" << d + 1;
    os << "\n";
    for (std::size_t k = 0; k < p.grid.n; ++k) {
        put(os, p.grid.time(k));
        for (std::size_t d = 0; d < p.dim; ++d) {
            os << ",";
            put(os, p.at(k, d));
        }
        os << "\n";
    }
}

void write_ensemble_csv_wide(std::ostream& os, const StochasticEnsemble& e) {
    os << "t";
    for (std::size_t r = 0; r < e.n_paths; ++r)
        for (std::size_t d = 0; d < e.dim; ++d) {
            os << ",p" << r;
            if (e.dim > 1) os << "v" << d + 1;
        }
    os << "\n";
    for (std::size_t k = 0; k < e.grid.n; ++k) {
        put(os, e.grid.time(k));
        for (std::size_t r = 0; r < e.n_paths; ++r)
            for (std::size_t d = 0; d < e.dim; ++d) {
                os << ",";
                put(os, e.state(r, k, d));
            }
        os << "\n";
    }
}

void write_ensemble_csv_replicate(std::ostream& os, const StochasticEnsemble& e,
                                  std::size_t replicate) {
    os << "t";
    for (std::size_t d = 0; d < e.dim; ++d) os << ",v" << d + 1;
    os << "\n";
    for (std::size_t k = 0; k < e.grid.n; ++k) {
        put(os, e.grid.time(k));
        for (std::size_t d = 0; d < e.dim; ++d) {
            os << ",";
            put(os, e.state(replicate, k, d));
        }
        os << "\n";
    }
}

void write_bound_report_csv(std::ostream& os, const BoundCheckReport& r) {
    os << "t,measured,stderr,bound\n";
    for (std::size_t k = 0; k < r.times.size(); ++k) {
        put(os, r.times[k]);
        os << ",";
        put(os, r.measured[k]);
        os << ",";
        put(os, r.stderr_[k]);
        os << ",";
        put(os, r.bound[k]);
        os << "\n";
    }
}

void write_law_series_csv(std::ostream& os, const LawDistanceSeries& s) {
    os << "t,beta\n";
    for (std::size_t k = 0; k < s.times.size(); ++k) {
        put(os, s.times[k]);
        os << ",";
        put(os, s.beta_values[k]);
        os << "\n";
    }
}

}  // namespace sdelab
