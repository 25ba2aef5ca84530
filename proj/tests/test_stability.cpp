#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <omp.h>

#include "sdelab/fixedpoint.hpp"
#include "sdelab/ref.hpp"
#include "sdelab/stability.hpp"
#include "sdelab/thresholds.hpp"

using namespace sdelab;

TEST_CASE("pure semigroup decay is exact per mode") {
    SpectralOperator op = make_spectral_operator({2.0, 5.0}, 1.0, 2.0);
    UniformGrid g = make_grid(0.0, 0.01, 301);
    auto ens = euler_maruyama_ensemble(op, zero_field(2), zero_field(2),
                                       fixed_initial({1.5, -0.75}), g, 4, 3);
    for (std::size_t k = 0; k < g.n; k += 50) {
        double t = g.time(k);
        CHECK(ens.state(0, k, 0) == doctest::Approx(1.5 * std::exp(-2.0 * t)).epsilon(1e-12));
        CHECK(ens.state(2, k, 1) == doctest::Approx(-0.75 * std::exp(-5.0 * t)).epsilon(1e-12));
    }
}

TEST_CASE("OU variance matches the analytic transient") {
    SpectralOperator op = make_scalar_operator(5.0);
    UniformGrid g = make_grid(0.0, 1e-3, 2001);
    auto G1 = make_scalar_field([](double, double) { return 1.0; }, 1.0, 0.0, 0.0);
    auto ens = euler_maruyama_ensemble(op, zero_field(1), G1, fixed_initial({0.0}), g, 4096, 17);
    for (std::size_t k : {200u, 600u, 1500u, 2000u}) {
        double m2 = 0.0;
        for (std::size_t r = 0; r < ens.n_paths; ++r) m2 += ens.state(r, k) * ens.state(r, k);
        m2 /= double(ens.n_paths);
        double expect = ref::ou_second_moment(g.time(k), 5.0, 1.0);
        CHECK(m2 == doctest::Approx(expect).epsilon(0.12));
    }
}

TEST_CASE("ensembles are bit-identical across worker counts and vs the serial twin") {
    SpectralOperator op = make_scalar_operator(5.0);
    UniformGrid g = make_grid(0.0, 1e-3, 501);
    auto F = make_scalar_field([](double t, double y) { return std::cos(t) + 0.2 * y; }, 1.0, 0.2,
                               0.2);
    auto G = make_scalar_field([](double t, double y) { return 0.5 + 0.1 * y * std::sin(t); }, 0.5,
                               0.1, 0.1);
    InitialLaw x0 = gaussian_initial({0.0}, {1.0});

    omp_set_num_threads(1);
    auto e1 = euler_maruyama_ensemble(op, F, G, x0, g, 200, 7);
    omp_set_num_threads(8);
    auto e8 = euler_maruyama_ensemble(op, F, G, x0, g, 200, 7);
    omp_set_num_threads(omp_get_num_procs());
    CHECK(e1.states == e8.states);

    auto serial = ref::ensemble_serial(op, F, G, x0, g, 200, 7);
    CHECK(serial.states == e8.states);
}

TEST_CASE("halving h changes terminal second moments by O(h)") {
    SpectralOperator op = make_scalar_operator(5.0);
    auto F = example1_drift();
    auto G = example1_diffusion();
    InitialLaw x0 = gaussian_initial({1.0}, {0.5});
    auto terminal_m2 = [&](double h) {
        UniformGrid g = make_grid(0.0, h, static_cast<std::size_t>(std::round(1.0 / h)) + 1);
        auto ens = euler_maruyama_ensemble(op, F, G, x0, g, 8192, 23);
        double m2 = 0.0;
        for (std::size_t r = 0; r < ens.n_paths; ++r) {
            double v = ens.state(r, g.n - 1);
            m2 += v * v;
        }
        return m2 / double(ens.n_paths);
    };
    double c1 = terminal_m2(4e-3), c2 = terminal_m2(2e-3), c3 = terminal_m2(1e-3);
    // successive differences shrink roughly linearly in h
    double d12 = std::abs(c1 - c2), d23 = std::abs(c2 - c3);
    CHECK(d23 < d12 + 5e-4);
    CHECK(d12 < 0.02);
}

TEST_CASE("dissipativity bound holds with the frozen example constants") {
    double threshold = thresholds::dissipativity(1.0, 5.0);
    CHECK(threshold == doctest::Approx(5.0 / 6.0).epsilon(1e-12));

    SpectralOperator op = make_scalar_operator(5.0);
    UniformGrid g = make_grid(0.0, 1e-3, 3001);
    // A0 = 1, M = 0.2 forced preset
    auto F = make_scalar_field(
        [](double t, double y) { return std::cos(t) + 0.2 * y * std::sin(1.41421356 * t); }, 1.0,
        0.2, 0.2);
    auto G = make_scalar_field(
        [](double t, double y) { return std::sin(1.7320508 * t) + 0.2 * y * std::cos(t); }, 1.0,
        0.2, 0.2);
    auto ens = euler_maruyama_ensemble(op, F, G, gaussian_initial({0.0}, {1.0}), g, 512, 31);
    BoundCheckReport rep = dissipativity_check(ens, 1.0, 5.0, 1.0, 0.2, 0.0);
    CHECK(rep.violations == 0);
    CHECK(rep.asymptote == doctest::Approx(36.0 / 23.56).epsilon(1e-12));
    CHECK(rep.asymptote == doctest::Approx(1.5280).epsilon(1e-4));
    CHECK(rep.tail_average <= rep.asymptote + 3.0 * rep.tail_stderr);
    CHECK(rep.constants.at("rate") == doctest::Approx(5.0 - 6.0 * 0.04 * 1.2).epsilon(1e-12));

    CHECK_THROWS_AS(dissipativity_check(ens, 1.0, 5.0, 1.0, 0.9, 0.0), std::invalid_argument);
}

TEST_CASE("zero coefficients, zero start: bound and measurement both vanish") {
    SpectralOperator op = make_scalar_operator(5.0);
    UniformGrid g = make_grid(0.0, 1e-2, 101);
    auto ens =
        euler_maruyama_ensemble(op, zero_field(1), zero_field(1), fixed_initial({0.0}), g, 64, 1);
    BoundCheckReport rep = dissipativity_check(ens, 1.0, 5.0, 0.0, 0.0, 0.0);
    CHECK(rep.violations == 0);
    for (double b : rep.bound) CHECK(b == 0.0);
    for (double m : rep.measured) CHECK(m == 0.0);
    CHECK(rep.asymptote == 0.0);
}

TEST_CASE("coupled convergence on the example preset") {
    double threshold = thresholds::convergence(1.0, 5.0);
    CHECK(threshold == doctest::Approx(5.0 / std::sqrt(18.0)).epsilon(1e-12));
    CHECK(threshold == doctest::Approx(1.1785).epsilon(1e-4));

    SpectralOperator op = make_scalar_operator(5.0);
    UniformGrid g = make_grid(0.0, 1e-3, 2001);
    BoundCheckReport rep =
        convergence_check(op, example1_drift(), example1_diffusion(), gaussian_initial({0.0}, {1.0}),
                          gaussian_initial({1.0}, {0.5}), g, 512, 41, 1.0, 5.0, 2.0 / 3.0);
    CHECK(rep.violations == 0);
    CHECK(rep.constants.at("rate") == doctest::Approx(3.4).epsilon(1e-12));

    // identical initial data under coupling: both sides vanish
    BoundCheckReport same =
        convergence_check(op, example1_drift(), example1_diffusion(), fixed_initial({0.7}),
                          fixed_initial({0.7}), g, 32, 42, 1.0, 5.0, 2.0 / 3.0);
    for (double m : same.measured) CHECK(m == 0.0);
    CHECK(same.violations == 0);

    CHECK_THROWS_AS(convergence_check(op, example1_drift(), example1_diffusion(),
                                      fixed_initial({0.0}), fixed_initial({1.0}), g, 8, 1, 1.0, 5.0,
                                      1.5),
                    std::invalid_argument);
}

TEST_CASE("linear coupled decay sits strictly inside the bound rate") {
    // F = G = 0: difference decays exactly at e^{-2 nu t} per mode, bound
    // allows only e^{-nu ...}; also the prefactor 3 dominates at t0
    SpectralOperator op = make_scalar_operator(5.0);
    UniformGrid g = make_grid(0.0, 1e-3, 1001);
    BoundCheckReport rep =
        convergence_check(op, zero_field(1), zero_field(1), fixed_initial({1.0}),
                          fixed_initial({-1.0}), g, 16, 5, 1.0, 5.0, 0.0);
    CHECK(rep.violations == 0);
    double e0 = rep.measured[0];
    for (std::size_t k = 100; k < g.n; k += 200) {
        double t = rep.times[k];
        CHECK(rep.measured[k] == doctest::Approx(e0 * std::exp(-10.0 * t)).epsilon(1e-6));
        CHECK(rep.measured[k] <= rep.bound[k]);
    }
}

TEST_CASE("convergence toward the bounded solution (coupled with its noise)") {
    SpectralOperator op = make_scalar_operator(5.0);
    UniformGrid g = make_grid(0.0, 1e-3, 2001);
    SolveOptions sopts;
    sopts.n_replicates = 256;
    sopts.seed = 4242;
    FixedPointTrace tr =
        solve_bounded_solution(op, example1_drift(), example1_diffusion(), g, sopts);
    REQUIRE(tr.converged);
    BoundCheckReport rep =
        convergence_to_bounded(op, example1_drift(), example1_diffusion(),
                               gaussian_initial({1.0}, {1.0}), tr.ensemble, 1.0, 5.0, 2.0 / 3.0);
    CHECK(rep.violations == 0);
    // the forward solutions must actually approach the bounded one
    CHECK(rep.measured.back() < 0.05 * rep.measured.front());
}

TEST_CASE("comparison kernel: constants, frozen window bound, self-consistency") {
    UniformGrid g = make_grid(-4.0, 1e-3, 12001);  // spans [-4, 8]
    SampledPath zero = constant_path(g, 0.0);
    auto [v0, b0] = comparison_kernel(0.0, 5.0, zero, 1.0, 2.0);
    CHECK(b0 == 0.0);
    CHECK(v0.max_abs() == 0.0);

    SampledPath one = constant_path(g, 1.0);
    auto [vc, bc] = comparison_kernel(0.0, 5.0, one, 1.0, 2.0);
    CHECK(vc.at(g.n - 1) == doctest::Approx(0.2).epsilon(1e-5));  // c/nu

    auto [v, bound] = comparison_kernel(1.0, 5.0, one, 1.0, 2.0);
    double expect = std::exp(4.0) * std::exp(-8.0) / 4.0 +
                    (1.0 - std::exp(-4.0) * std::exp(-8.0)) / 4.0;
    CHECK(bound == doctest::Approx(expect).epsilon(1e-12));
    CHECK(std::abs(bound - 0.254577) < 1e-6);
    CHECK(v.at(g.n - 1) == doctest::Approx(0.25).epsilon(1e-5));
    CHECK(v.at(g.n - 1) <= bound);

    // resubstitution: integrating e^{-nu(t-tau)}(alpha v + f) reproduces v
    SampledPath rhs = make_path(g, 1);
    for (std::size_t k = 0; k < g.n; ++k) rhs.at(k) = 1.0 * v.at(k) + one.at(k);
    auto [w, wb] = comparison_kernel(0.0, 5.0, rhs, 1.0, 2.0);
    double max_err = 0.0;
    for (std::size_t k = g.n / 2; k < g.n; ++k)
        max_err = std::max(max_err, std::abs(w.at(k) - v.at(k)));
    CHECK(max_err < 1e-6);

    CHECK_THROWS_AS(comparison_kernel(5.0, 5.0, one, 1.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(comparison_kernel(0.0, 5.0, one, 2.0, 1.0), std::invalid_argument);
    SampledPath neg = constant_path(g, -1.0);
    CHECK_THROWS_AS(comparison_kernel(0.0, 5.0, neg, 1.0, 2.0), std::invalid_argument);
}

TEST_CASE("non-finite states are reported with their location") {
    SpectralOperator op = make_scalar_operator(1.0);
    UniformGrid g = make_grid(0.0, 0.1, 11);
    auto bad = make_scalar_field([](double, double y) { return 1e200 * y; }, 0.0, 1e200, 1e200);
    CHECK_THROWS_WITH_AS(
        euler_maruyama_ensemble(op, bad, zero_field(1), fixed_initial({1.0}), g, 2, 1),
        doctest::Contains("non-finite state"), std::runtime_error);
}
