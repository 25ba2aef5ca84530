#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sdelab/green.hpp"
#include "sdelab/ref.hpp"
#include "sdelab/rng.hpp"

using namespace sdelab;

TEST_CASE("operator construction guards") {
    CHECK_THROWS_AS(make_spectral_operator({}, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_spectral_operator({1.0, -2.0}, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_spectral_operator({1.0}, 0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_spectral_operator({1.0, 4.0}, 1.0, 2.0), std::invalid_argument);
    SpectralOperator op = make_scalar_operator(5.0);
    CHECK(op.dim() == 1);
    CHECK(default_burn_in(op) == doctest::Approx(std::log(1e8) / 5.0));
}

TEST_CASE("constant drift settles at f/nu") {
    SpectralOperator op = make_scalar_operator(5.0);
    UniformGrid g = make_grid(0.0, 1e-3, 4001);
    SampledPath f = constant_path(g, 2.0);
    SampledPath zero = constant_path(g, 0.0);
    NoisePath noise{g, 11, 0, 0};
    GreenResult res = green_apply(op, f, zero, noise, default_burn_in(op), 0);
    // trapezoid-vs-kernel fixed point is (a/nu)(1 + O((nu h)^2))
    CHECK(res.realization.at(g.n - 1) == doctest::Approx(0.4).epsilon(1e-5));
}

TEST_CASE("stationary OU second moment is sigma^2/(2 nu)") {
    SpectralOperator op = make_scalar_operator(5.0);
    UniformGrid g = make_grid(0.0, 1e-3, 3001);
    SampledPath zero = constant_path(g, 0.0);
    SampledPath one = constant_path(g, 1.0);
    NoisePath noise{g, 42, 0, 0};
    GreenResult res = green_apply(op, zero, one, noise, default_burn_in(op), 2048);
    // average the tail of the moment series; analytic oracle 1/10
    double acc = 0.0, se = 0.0;
    std::size_t lo = 2 * g.n / 3;
    for (std::size_t k = lo; k < g.n; ++k) {
        acc += res.moments.second_moment[k];
        se += res.moments.stderr_[k];
    }
    acc /= double(g.n - lo);
    se /= double(g.n - lo);
    CHECK(std::abs(acc - 0.1) < 3.0 * se + 1e-4);
    // transient matches (1 - e^{-2 nu t})/(2 nu) pointwise
    for (std::size_t k = 50; k < 500; k += 90) {
        double t = g.time(k);
        CHECK(std::abs(res.moments.second_moment[k] - ref::ou_second_moment(t, 5.0, 1.0)) <
              4.0 * res.moments.stderr_[k] + 2e-4);
    }
}

TEST_CASE("cosine forcing reproduces the analytic convolution") {
    SpectralOperator op = make_scalar_operator(1.0);
    UniformGrid g = make_grid(0.0, 1e-3, 25001);
    SampledPath f = sample_scalar(g, [](double t) { return std::cos(t); });
    SampledPath zero = constant_path(g, 0.0);
    NoisePath noise{g, 1, 0, 0};
    GreenResult res = green_apply(op, f, zero, noise, default_burn_in(op), 0);
    // int e^{-(t-tau)} cos tau dtau = (cos t + sin t)/2 once memory has faded
    for (std::size_t k = 20000; k < g.n; k += 997) {
        double t = g.time(k);
        CHECK(res.realization.at(k) == doctest::Approx((std::cos(t) + std::sin(t)) / 2.0)
                                           .epsilon(5e-4));
    }
}

TEST_CASE("kernel recursion equals the direct-quadrature reference") {
    SpectralOperator op = make_spectral_operator({2.0, 7.0}, 1.0, 2.0);
    UniformGrid g = make_grid(0.0, 0.01, 501);
    SampledPath f = make_path(g, 2), gg = make_path(g, 2);
    for (std::size_t k = 0; k < g.n; ++k) {
        double t = g.time(k);
        f.at(k, 0) = std::sin(t);
        f.at(k, 1) = std::cos(2.0 * t);
        gg.at(k, 0) = 0.5 + 0.2 * std::sin(3.0 * t);
        gg.at(k, 1) = 1.0;
    }
    NoisePath noise{g, 77, 3, 0};
    GreenResult res = green_apply(op, f, gg, noise, 1.0, 0);
    SampledPath direct = ref::green_direct(op, f, gg, noise);
    double max_err = 0.0;
    for (std::size_t k = 0; k < g.n; ++k)
        max_err = std::max(max_err, row_distance(res.realization, direct, k));
    CHECK(max_err < 1e-10);
}

TEST_CASE("green is linear in the deterministic input") {
    SpectralOperator op = make_scalar_operator(3.0);
    UniformGrid g = make_grid(0.0, 0.01, 801);
    SampledPath f1 = sample_scalar(g, [](double t) { return std::sin(t); });
    SampledPath f2 = sample_scalar(g, [](double t) { return 0.3 * std::cos(2.0 * t); });
    SampledPath sum = sample_scalar(g, [](double t) { return std::sin(t) + 0.3 * std::cos(2.0 * t); });
    SampledPath zero = constant_path(g, 0.0);
    NoisePath noise{g, 5, 0, 0};
    auto a = green_apply(op, f1, zero, noise, 1.0, 0).realization;
    auto b = green_apply(op, f2, zero, noise, 1.0, 0).realization;
    auto c = green_apply(op, sum, zero, noise, 1.0, 0).realization;
    for (std::size_t k = 0; k < g.n; k += 37)
        CHECK(c.at(k) == doctest::Approx(a.at(k) + b.at(k)).epsilon(1e-12));
}

TEST_CASE("sup norm bound closed forms") {
    SpectralOperator op = make_scalar_operator(5.0);
    CHECK(sup_norm_bound(op, 0.0, 0.0) == 0.0);
    CHECK(sup_norm_bound(op, 4.0, 0.0) == doctest::Approx(std::sqrt(8.0) / 5.0).epsilon(1e-12));
    CHECK(sup_norm_bound(op, 0.0, 1.0) == doctest::Approx(std::sqrt(5.0) / 5.0).epsilon(1e-12));
    // the stationary value sqrt(1/10) must sit below the bound
    CHECK(sup_norm_bound(op, 0.0, 1.0) >= std::sqrt(0.1));
    CHECK_THROWS_AS(sup_norm_bound(op, -1.0, 0.0), std::invalid_argument);
}

TEST_CASE("windowed moment bound closed forms") {
    SpectralOperator op = make_scalar_operator(5.0);
    CHECK(windowed_moment_bound(op, 0, 0, 0, 0, 1.0, 10.0) == 0.0);
    double v = windowed_moment_bound(op, 4.0, 1.0, 4.0, 1.0, 1.0, 10.0);
    double expect = (8.0 + 5.0) / 25.0 +
                    (2.0 * std::exp(-45.0) * 4.0 + 5.0 * std::exp(-90.0)) / 25.0;
    CHECK(v == doctest::Approx(expect).epsilon(1e-12));
    CHECK(v == doctest::Approx(0.52).epsilon(1e-6));
    // l -> L+ pushes the tail term to (N^2/nu^2)(2 f_sup2 + nu g_sup2)
    double tail_only = windowed_moment_bound(op, 0.0, 0.0, 4.0, 1.0, 1.0, 1.0 + 1e-9);
    CHECK(tail_only == doctest::Approx((8.0 + 5.0) / 25.0).epsilon(1e-6));
    CHECK_THROWS_AS(windowed_moment_bound(op, 1, 1, 1, 1, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("measured sup norm respects the green bound on random bounded inputs") {
    SpectralOperator op = make_scalar_operator(5.0);
    UniformGrid g = make_grid(0.0, 2e-3, 2001);
    for (std::uint64_t s = 0; s < 8; ++s) {
        double af = 0.5 + 1.5 * rng::uniform(900 + s, 0, rng::kStreamScratch, 0);
        double ag = 0.5 + rng::uniform(900 + s, 0, rng::kStreamScratch, 1);
        double wf = 0.5 + 2.0 * rng::uniform(900 + s, 0, rng::kStreamScratch, 2);
        SampledPath f = sample_scalar(g, [&](double t) { return af * std::cos(wf * t); });
        SampledPath gg = sample_scalar(g, [&](double t) { return ag * std::sin(t + double(s)); });
        NoisePath noise{g, 1000 + s, 0, 0};
        GreenResult res = green_apply(op, f, gg, noise, default_burn_in(op), 256);
        double bound = sup_norm_bound(op, f.max_sq_norm(), gg.max_sq_norm());
        double worst = 0.0, worst_se = 0.0;
        for (std::size_t k = 0; k < g.n; ++k) {
            if (res.moments.second_moment[k] > worst) {
                worst = res.moments.second_moment[k];
                worst_se = res.moments.stderr_[k];
            }
        }
        CHECK(std::sqrt(worst) <= bound + 3.0 * worst_se);
    }
}

TEST_CASE("doubling the burn-in moves the output less than the reported bound") {
    SpectralOperator op = make_scalar_operator(2.0);
    double B = default_burn_in(op);
    double h = 1e-3;
    auto build = [&](double burn) {
        std::size_t steps = static_cast<std::size_t>(std::round(burn / h));
        UniformGrid g = make_grid(-double(steps) * h, h, steps + 2001);
        SampledPath f = sample_scalar(g, [](double t) { return std::cos(t); });
        SampledPath gg = sample_scalar(g, [](double t) { return 0.7 + 0.2 * std::sin(t); });
        NoisePath noise{g, 31, 0, -static_cast<std::int64_t>(steps)};
        return std::make_pair(green_apply(op, f, gg, noise, burn, 0), g);
    };
    auto [res1, g1] = build(B);
    auto [res2, g2] = build(2.0 * B);
    // shared clock keys make the overlap pathwise comparable
    double max_diff = 0.0;
    for (std::size_t k = 0; k < 2001; ++k) {
        double a = res1.realization.at(g1.n - 2001 + k);
        double b = res2.realization.at(g2.n - 2001 + k);
        max_diff = std::max(max_diff, std::abs(a - b));
    }
    CHECK(max_diff <= res1.truncation_bound + 1e-12);
    CHECK(res1.truncation_bound > 0.0);
}

TEST_CASE("moment series is stationary for constant coefficients") {
    SpectralOperator op = make_scalar_operator(5.0);
    UniformGrid g = make_grid(0.0, 1e-3, 2501);
    SampledPath f = constant_path(g, 1.0);
    SampledPath gg = constant_path(g, 0.8);
    NoisePath noise{g, 8, 0, 0};
    GreenResult res = green_apply(op, f, gg, noise, default_burn_in(op), 1024);
    std::size_t k1 = 1700, k2 = 2400;
    double m1 = res.moments.second_moment[k1], m2 = res.moments.second_moment[k2];
    double se = res.moments.stderr_[k1] + res.moments.stderr_[k2];
    CHECK(std::abs(m1 - m2) <= 3.0 * se + 1e-5);
}

TEST_CASE("grid and burn-in preconditions") {
    SpectralOperator op = make_scalar_operator(5.0);
    UniformGrid g = make_grid(0.0, 0.01, 101);
    SampledPath f = constant_path(g, 1.0);
    SampledPath gg = constant_path(g, 1.0);
    NoisePath noise{g, 1, 0, 0};
    CHECK_THROWS_AS(green_apply(op, f, gg, noise, 0.001, 0), std::invalid_argument);
    NoisePath wrong{make_grid(0.0, 0.02, 101), 1, 0, 0};
    CHECK_THROWS_AS(green_apply(op, f, gg, wrong, 1.0, 0), std::invalid_argument);
    SampledPath f2 = constant_path(make_grid(0.0, 0.01, 102), 1.0);
    CHECK_THROWS_AS(green_apply(op, f2, gg, noise, 1.0, 0), std::invalid_argument);
}
