#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sdelab/fixedpoint.hpp"
#include "sdelab/thresholds.hpp"

using namespace sdelab;

namespace {

// independent transcription of the L^p constants, kept deliberately literal
double cp_rederived(double p) {
    return std::pow(p * (p - 1.0) / 2.0 * std::pow(p / (p - 1.0), p - 2.0), p / 2.0);
}
double thetap_rederived(double N, double nu, double L, double p) {
    double bracket = std::pow(2.0 * (p - 1.0) / (nu * p), p - 1.0) +
                     cp_rederived(p) * std::pow((p - 2.0) / (nu * p), p / 2.0 - 1.0);
    return std::pow(2.0, p - 1.0) * std::pow(N * L, p) * bracket * 2.0 / (nu * p);
}

}  // namespace

TEST_CASE("contraction constants: frozen values") {
    ContractionReport rep = contraction_constants(1.0, 5.0, 2.0 / 3.0, 3.0, 1.0);
    CHECK(std::abs(rep.theta2 - 28.0 / 225.0) < 1e-12);
    CHECK(rep.c_p == doctest::Approx(std::pow(4.5, 1.5)).epsilon(1e-12));
    CHECK(rep.c_p == doctest::Approx(9.5459).epsilon(1e-4));
    CHECK(rep.theta_p == doctest::Approx(0.4007).epsilon(1e-3));
    CHECK(rep.theta_p == doctest::Approx(thetap_rederived(1.0, 5.0, 2.0 / 3.0, 3.0)).epsilon(1e-12));
    CHECK(rep.admissible_contraction);
    CHECK(rep.admissible_comparability);
    CHECK(rep.admissible_lp_limit);
    CHECK(rep.threshold_contraction == doctest::Approx(5.0 / std::sqrt(7.0)).epsilon(1e-12));
    CHECK(rep.threshold_comparability == doctest::Approx(5.0 / (2.0 * std::sqrt(6.0))).epsilon(1e-12));
    CHECK_THROWS_AS(contraction_constants(1.0, 5.0, 0.5, 2.0), std::invalid_argument);
}

TEST_CASE("theta_p approaches the p->2 limit formula") {
    double limit = theta_p_limit(1.0, 5.0, 2.0 / 3.0);
    CHECK(limit == doctest::Approx(48.0 / 225.0).epsilon(1e-12));
    ContractionReport near = contraction_constants(1.0, 5.0, 2.0 / 3.0, 2.0001);
    CHECK(std::abs(near.theta_p - limit) / limit < 1e-3);
    // continuity at a second parameter set
    double l2 = theta_p_limit(1.5, 3.0, 0.4);
    ContractionReport n2 = contraction_constants(1.5, 3.0, 0.4, 2.0001);
    CHECK(std::abs(n2.theta_p - l2) / l2 < 1e-3);
}

TEST_CASE("bounded ball radius and the self-map identity") {
    CHECK(bounded_ball_radius(1.0, 5.0, 0.0, 2.0 / 3.0) == 0.0);
    double r = bounded_ball_radius(1.0, 5.0, 1.0, 2.0 / 3.0);
    CHECK(r == doctest::Approx(std::sqrt(7.0) / (5.0 - 2.0 / 3.0 * std::sqrt(7.0))).epsilon(1e-12));
    CHECK(r == doctest::Approx(0.81756).epsilon(1e-4));
    // (N sqrt(2+nu)/nu)(A0 + L r) = r
    double lhs = std::sqrt(7.0) / 5.0 * (1.0 + 2.0 / 3.0 * r);
    CHECK(lhs == doctest::Approx(r).epsilon(1e-12));
    CHECK_THROWS_AS(bounded_ball_radius(1.0, 5.0, 1.0, 2.0), std::invalid_argument);
}

TEST_CASE("zero coefficients give the zero solution in one iteration") {
    SpectralOperator op = make_scalar_operator(5.0);
    UniformGrid g = make_grid(0.0, 1e-2, 201);
    SolveOptions opts;
    opts.n_replicates = 16;
    FixedPointTrace tr = solve_bounded_solution(op, zero_field(1), zero_field(1), g, opts);
    CHECK(tr.converged);
    CHECK(tr.iterate_distances.size() == 1);
    CHECK(tr.iterate_distances[0] == 0.0);
    CHECK(tr.ball_ok);
    for (double v : tr.ensemble.states) CHECK(v == 0.0);
}

TEST_CASE("constant drift fixed point is a/nu") {
    SpectralOperator op = make_scalar_operator(5.0);
    UniformGrid g = make_grid(0.0, 1e-3, 1001);
    auto F = make_scalar_field([](double, double) { return 2.0; }, 2.0, 0.0, 0.0);
    SolveOptions opts;
    opts.n_replicates = 8;
    FixedPointTrace tr = solve_bounded_solution(op, F, zero_field(1), g, opts);
    CHECK(tr.converged);
    CHECK(tr.ensemble.state(0, g.n - 1, 0) == doctest::Approx(0.4).epsilon(1e-5));
    CHECK(tr.ball_ok);
}

TEST_CASE("forced preset: contraction ratios and ball confinement") {
    SpectralOperator op = make_scalar_operator(5.0);
    UniformGrid g = make_grid(0.0, 2e-3, 1001);
    auto F = make_scalar_field(
        [](double t, double y) { return std::cos(t) + 2.0 / 3.0 * std::sin(1.4142135623731 * t) * y; },
        1.0, 2.0 / 3.0, 2.0 / 3.0);
    auto G = make_scalar_field(
        [](double t, double y) { return 0.5 * std::sin(t) + std::cos(t) / 3.0 * y; }, 0.5,
        1.0 / 3.0, 1.0 / 3.0);
    SolveOptions opts;
    opts.n_replicates = 128;
    opts.seed = 99;
    FixedPointTrace tr = solve_bounded_solution(op, F, G, g, opts);
    CHECK(tr.converged);
    CHECK(tr.iterate_distances.size() >= 3);
    CHECK(tr.radius == doctest::Approx(bounded_ball_radius(1, 5, 1.0, 2.0 / 3.0)).epsilon(1e-12));
    // squared-distance ratios sit under theta2 plus slack
    for (std::size_t i = 1; i + 1 < tr.iterate_distances.size(); ++i) {
        double num = tr.iterate_distances[i + 1], den = tr.iterate_distances[i];
        if (den > 100.0 * tr.tol) CHECK(num * num / (den * den) <= tr.theta2 + 0.05);
    }
    CHECK(tr.ball_ok);
    // residual: one more application moves the iterate by <= tol + noise
    CHECK(tr.iterate_distances.back() <= tr.tol);
}

TEST_CASE("inadmissible Lipschitz constants are refused") {
    SpectralOperator op = make_scalar_operator(5.0);
    UniformGrid g = make_grid(0.0, 1e-2, 101);
    auto F = make_scalar_field([](double, double y) { return 1.9 * y; }, 0.0, 1.9, 1.9);
    CHECK_THROWS_AS(solve_bounded_solution(op, F, zero_field(1), g, {}), std::invalid_argument);
}

TEST_CASE("galerkin reduction basics") {
    auto red = galerkin_reduce(8, 64, example2_pointwise_drift, example2_pointwise_diffusion, 0.0,
                               1.0, 1.0);
    CHECK(red.op.dim() == 8);
    CHECK(red.op.stability_rate == doctest::Approx(M_PI * M_PI).epsilon(1e-14));
    CHECK(red.op.mode_rates[2] == doctest::Approx(9.0 * M_PI * M_PI).epsilon(1e-14));

    // zero mode vector stays zero through the drift (sin 0 = 0 pointwise)
    std::vector<double> x(8, 0.0), out(8);
    red.drift(1.3, x, out);
    for (double v : out) CHECK(std::abs(v) < 1e-14);

    // single-mode linear map acts diagonally and exactly
    auto lin = galerkin_reduce(
        8, 64, [](double, double u) { return 2.5 * u; }, [](double, double u) { return 0.0 * u; },
        0.0, 2.5, 2.5);
    std::fill(x.begin(), x.end(), 0.0);
    x[0] = 1.0;  // u(xi) = sqrt2 sin(pi xi)
    lin.drift(0.0, x, out);
    CHECK(out[0] == doctest::Approx(2.5).epsilon(1e-12));
    for (std::size_t m = 1; m < 8; ++m) CHECK(std::abs(out[m]) < 1e-12);

    CHECK_THROWS_AS(galerkin_reduce(40, 64, example2_pointwise_drift, example2_pointwise_diffusion,
                                    0.0, 1.0, 1.0),
                    std::invalid_argument);
}

TEST_CASE("galerkin nemytskii map keeps the pointwise lipschitz constant") {
    auto red = galerkin_reduce(8, 64, example2_pointwise_drift, example2_pointwise_diffusion, 0.0,
                               1.0, 1.0);
    // measured Lipschitz ratio over random mode-vector pairs never exceeds
    // the pointwise bound 2/3 for the drift (isometry of the transform)
    double worst = 0.0;
    std::vector<double> x(8), y(8), fx(8), fy(8);
    for (std::uint64_t s = 0; s < 200; ++s) {
        for (std::size_t m = 0; m < 8; ++m) {
            x[m] = rng::gaussian(600 + s, 0, rng::kStreamScratch, m);
            y[m] = rng::gaussian(600 + s, 1, rng::kStreamScratch, m);
        }
        double t = 30.0 * (rng::uniform(600 + s, 2, rng::kStreamScratch, 0) - 0.5);
        red.drift(t, x, fx);
        red.drift(t, y, fy);
        double num = 0.0, den = 0.0;
        for (std::size_t m = 0; m < 8; ++m) {
            num += (fx[m] - fy[m]) * (fx[m] - fy[m]);
            den += (x[m] - y[m]) * (x[m] - y[m]);
        }
        worst = std::max(worst, std::sqrt(num / den));
    }
    CHECK(worst <= 2.0 / 3.0 + 1e-9);

    // audited against the declared constants of the example fields
    require_audit(red.drift, "galerkin drift");
    require_audit(red.diffusion, "galerkin diffusion");

    // uniform-integrability evidence for the (2+alpha) moment stays finite
    double ui = galerkin_uniform_integrability(red, example2_pointwise_drift, 1.0, 4.0, 64, 9);
    CHECK(ui < std::pow(2.0 / 3.0, 3.0) + 1e-9);  // |f| <= 2/3 pointwise
    CHECK(ui > 0.0);
}

TEST_CASE("declared-constant audits pass for the preset fields and fail for lies") {
    require_audit(example1_drift(), "example1 drift");
    require_audit(example1_diffusion(), "example1 diffusion");

    auto liar = make_scalar_field([](double, double y) { return 2.0 * y; }, 0.0, 0.5, 0.5);
    CHECK_THROWS_AS(require_audit(liar, "liar"), AuditError);
    auto zero_liar = make_scalar_field([](double t, double) { return std::cos(t); }, 0.1, 1.0, 1.0);
    CHECK_THROWS_AS(require_audit(zero_liar, "zero liar"), AuditError);
}
