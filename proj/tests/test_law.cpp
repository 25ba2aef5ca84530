#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sdelab/law.hpp"
#include "sdelab/probes.hpp"
#include "sdelab/ref.hpp"
#include "sdelab/rng.hpp"

using namespace sdelab;

namespace {

EmpiricalLaw random_law(std::uint64_t seed, std::size_t m, std::size_t dim, double spread) {
    std::vector<double> pts(m * dim);
    for (std::size_t i = 0; i < pts.size(); ++i)
        pts[i] = spread * rng::gaussian(seed, 0, rng::kStreamScratch, i);
    return empirical_law(pts, dim);
}

}  // namespace

TEST_CASE("point masses match 2d/(d+2)") {
    BlOptions opts;
    opts.split_tol = 1e-10;
    for (double d : {0.1, 1.0, 10.0, 100.0}) {
        double beta = bl_metric(dirac_law({0.0}), dirac_law({d}), opts);
        CHECK(beta == doctest::Approx(2.0 * d / (d + 2.0)).epsilon(1e-7));
        CHECK(std::abs(beta - 2.0 * d / (d + 2.0)) < 1e-6);
    }
    // the ceiling 2 from |f| <= 1
    CHECK(bl_metric(dirac_law({0.0}), dirac_law({1e6}), opts) ==
          doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("identity, duplicates and trivial laws") {
    EmpiricalLaw a = random_law(5, 20, 2, 1.0);
    CHECK(bl_metric(a, a) == 0.0);

    EmpiricalLaw single = dirac_law({1.5});
    EmpiricalLaw dup = empirical_law({1.5, 1.5}, 1);
    CHECK(bl_metric(single, dup) == 0.0);

    EmpiricalLaw merged = merge_duplicates(dup);
    CHECK(merged.size() == 1);
    CHECK(merged.weights[0] == doctest::Approx(1.0));

    CHECK_THROWS_AS(empirical_law({}, 1), std::invalid_argument);
    CHECK_THROWS_AS(bl_metric(random_law(1, 4, 1, 1.0), random_law(2, 4, 2, 1.0)),
                    std::invalid_argument);
}

TEST_CASE("transportation value agrees with the brute-force oracle on tiny supports") {
    for (std::uint64_t s = 0; s < 10; ++s) {
        std::size_t ma = 1 + s % 2, mb = 1 + (s / 3) % 2;
        if (ma + mb > 3) mb = 1;
        EmpiricalLaw a = random_law(400 + s, ma, 1, 2.0);
        EmpiricalLaw b = random_law(500 + s, mb, 1, 2.0);
        double exact = bl_metric(a, b, {1e-10, 2000, 1});
        double brute = ref::bl_metric_bruteforce(a, b, 161, 81);
        // brute force explores feasible points only, so it lower-bounds
        CHECK(brute <= exact + 1e-9);
        CHECK(exact - brute <= 0.05 * std::max(exact, 0.05));
    }
}

TEST_CASE("metric axioms on randomized triples") {
    BlOptions opts;
    opts.split_tol = 1e-10;
    for (std::uint64_t s = 0; s < 40; ++s) {
        std::size_t dim = 1 + s % 2;
        EmpiricalLaw a = random_law(3 * s + 1, 5 + s % 7, dim, 1.5);
        EmpiricalLaw b = random_law(3 * s + 2, 4 + s % 5, dim, 1.5);
        EmpiricalLaw c = random_law(3 * s + 3, 6 + s % 4, dim, 1.5);
        double ab = bl_metric(a, b, opts);
        double ba = bl_metric(b, a, opts);
        double ac = bl_metric(a, c, opts);
        double cb = bl_metric(c, b, opts);
        CHECK(std::abs(ab - ba) < 1e-10);
        CHECK(ab <= ac + cb + 1e-8);
        CHECK(ab >= 0.0);
        CHECK(ab <= 2.0);
    }
}

TEST_CASE("weak convergence: beta is linear in small displacements") {
    for (double delta : {1e-1, 1e-2, 1e-3}) {
        double beta = bl_metric(dirac_law({0.0}), dirac_law({delta}), {1e-12, 2000, 1});
        CHECK(beta == doctest::Approx(delta * 2.0 / (2.0 + delta)).epsilon(1e-6));
        CHECK(beta / delta == doctest::Approx(1.0).epsilon(0.06));
    }
}

TEST_CASE("gaussian samples against a quantile grid stay under the calibration ceiling") {
    // 1e4 samples; the size cap subsamples the empirical side deterministically
    const std::size_t m = 10000;
    std::vector<double> samples(m);
    for (std::size_t i = 0; i < m; ++i)
        samples[i] = rng::gaussian(9001, 0, rng::kStreamScratch, i);
    EmpiricalLaw emp = empirical_law(samples, 1);

    const std::size_t q = 256;  // midpoint-quantile reference grid
    std::vector<double> qs(q);
    for (std::size_t i = 0; i < q; ++i) {
        double p = (double(i) + 0.5) / double(q);
        // inverse normal CDF by bisection on erf
        double lo = -8.0, hi = 8.0;
        for (int it = 0; it < 80; ++it) {
            double mid = 0.5 * (lo + hi);
            if (0.5 * (1.0 + std::erf(mid / std::sqrt(2.0))) < p)
                lo = mid;
            else
                hi = mid;
        }
        qs[i] = 0.5 * (lo + hi);
    }
    EmpiricalLaw ref_law = empirical_law(qs, 1);

    BlOptions opts;
    opts.split_tol = 1e-3;
    opts.size_cap = 2000;
    double beta = bl_metric(emp, ref_law, opts);
    CHECK(beta <= 0.05);
    CHECK(beta > 0.0);
}

TEST_CASE("subsampling stability: halving m moves beta less than the floor") {
    BlOptions opts;
    opts.split_tol = 1e-4;
    EmpiricalLaw big = random_law(77, 384, 1, 1.0);
    EmpiricalLaw refq = random_law(78, 192, 1, 1.0);
    double full = bl_metric(big, refq, opts);
    BlOptions halved = opts;
    halved.size_cap = 384;  // forces the 384-point side down to 192
    double sub = bl_metric(big, refq, halved);
    double floor = gaussian_beta_floor(192, 1, 1.0, 3, 4242, opts);
    CHECK(std::abs(full - sub) < floor);
}

TEST_CASE("uniform law distance: identical ensembles give zeros, OU laws converge") {
    SpectralOperator op = make_scalar_operator(5.0);
    UniformGrid g = make_grid(0.0, 1e-3, 1501);
    SampledPath zero = constant_path(g, 0.0);
    SampledPath one = constant_path(g, 1.0);

    StochasticEnsemble a = green_ensemble(op, zero, one, 10, 128);
    StochasticEnsemble b = green_ensemble(op, zero, one, 10, 128);
    auto same = uniform_law_distance(a, b, {0.3, 0.8, 1.2});
    CHECK(same.sup_value == 0.0);

    // OU from zero vs near-stationary OU: per-time beta decreasing toward the
    // sampling floor as the transient dies (analytic variances
    // (1-e^{-2 nu t})/(2 nu) vs 1/(2 nu))
    StochasticEnsemble c = green_ensemble(op, zero, one, 11, 256);
    std::vector<double> early{0.02}, late{1.2};
    // a stationary-start twin: run much longer so t=0 is already stationary
    UniformGrid g2 = make_grid(-2.0, 1e-3, 3501);
    SampledPath zero2 = constant_path(g2, 0.0);
    SampledPath one2 = constant_path(g2, 1.0);
    StochasticEnsemble d = green_ensemble(op, zero2, one2, 12, 256);
    BlOptions opts;
    opts.split_tol = 1e-5;
    double beta_early = uniform_law_distance(c, d, early, opts).sup_value;
    double beta_late = uniform_law_distance(c, d, late, opts).sup_value;
    double floor = gaussian_beta_floor(256, 1, std::sqrt(0.1), 3, 7314, opts);
    CHECK(beta_early > 2.0 * floor);  // transient clearly resolved
    CHECK(beta_late < 2.0 * floor);   // converged to the noise floor

    CHECK_THROWS_AS(uniform_law_distance(a, b, {99.0}), std::invalid_argument);
}

TEST_CASE("split objective is concave and the bracketing search finds its max") {
    EmpiricalLaw a = random_law(901, 6, 1, 2.0);
    EmpiricalLaw b = random_law(902, 5, 1, 2.0);
    double best_grid = 0.0;
    for (int i = 0; i <= 200; ++i) {
        double s = double(i) / 200.0;
        double v = bl_metric_at_split(a, b, s);
        best_grid = std::max(best_grid, v);
        if (i > 1 && i < 199) {
            // midpoint concavity spot check
            double vm = bl_metric_at_split(a, b, s - 1.0 / 200.0);
            double vp = bl_metric_at_split(a, b, s + 1.0 / 200.0);
            CHECK(v >= 0.5 * (vm + vp) - 1e-9);
        }
    }
    double searched = bl_metric(a, b, {1e-10, 2000, 1});
    CHECK(searched >= best_grid - 1e-9);
    CHECK(searched <= best_grid + 1e-3);
}
