#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>

#include "rwre/env.hpp"
#include "rwre/exact.hpp"

#include "oracles.hpp"

using namespace rwre;

TEST_CASE("box indexing round-trips") {
    exact::Box box = exact::Box::make(2, {{-3, 4}, {-2, 2}});
    for (std::int64_t i = 0; i < box.n_interior(); ++i) {
        Site s = box.site_of(i);
        REQUIRE(box.interior(s));
        REQUIRE(box.index_of(s) == i);
    }
    REQUIRE_FALSE(box.interior(make_site({-3, 0})));
    REQUIRE_FALSE(box.interior(make_site({0, 2})));
    REQUIRE(box.interior(make_site({3, 1})));
}

TEST_CASE("exit probability matches the ruin closed form site by site") {
    const double p = 0.6;
    Environment env(laws::homogeneous1d(p), 1);
    exact::Box box = exact::Box::make(1, {{-5, 7}});
    exact::HarmonicSolution sol =
        exact::exit_probability(env, box, [](const Site& s) { return s[0] >= 7; });
    for (std::int64_t z = -4; z <= 6; ++z) {
        double want = oracle::ruin_up(p, -5, z, 7);
        double got = sol.u[static_cast<std::size_t>(box.index_of(make_site({z})))];
        REQUIRE(std::fabs(got - want) < 1e-12);
    }
    REQUIRE(sol.report.residual_inf < 1e-12);
    REQUIRE(std::string(sol.report.method) == "banded_lu");
}

TEST_CASE("expected exit time of the symmetric walk is quadratic") {
    Environment env(laws::homogeneous1d(0.5), 1);
    const std::int64_t L = 12;
    exact::Box box = exact::Box::make(1, {{-L, L}});
    exact::HarmonicSolution sol = exact::expected_exit_time(env, box);
    double at0 = sol.u[static_cast<std::size_t>(box.index_of(make_site({0})))];
    REQUIRE(std::fabs(at0 - oracle::symmetric_exit_time(L)) < 1e-9);
    // And the general (z - a)(b - z) profile away from the center.
    double at5 = sol.u[static_cast<std::size_t>(box.index_of(make_site({5})))];
    REQUIRE(std::fabs(at5 - (5.0 + L) * (L - 5.0)) < 1e-9);
}

TEST_CASE("complementary exit targets sum to one in 2D") {
    Environment env(laws::dirichlet(2, {1.0, 1.2, 0.9, 1.1}), 23);
    exact::Box box = exact::Box::make(2, {{-4, 4}, {-4, 4}});
    auto right = exact::exit_probability(env, box, [](const Site& s) { return s[0] >= 4; });
    auto other = exact::exit_probability(env, box, [](const Site& s) { return s[0] < 4; });
    for (std::int64_t i = 0; i < box.n_interior(); ++i) {
        double a = right.u[static_cast<std::size_t>(i)];
        double b = other.u[static_cast<std::size_t>(i)];
        REQUIRE(a >= 0.0);
        REQUIRE(a <= 1.0);
        REQUIRE(std::fabs(a + b - 1.0) < 1e-10);
    }
}

TEST_CASE("harmonic solve refuses oversized systems") {
    Environment env(laws::dirichlet(2, {1.0, 1.0, 1.0, 1.0}), 1);
    exact::Box box = exact::Box::make(2, {{-1200, 1200}, {-1200, 1200}});
    REQUIRE_THROWS_AS(exact::expected_exit_time(env, box), ResourceError);
}

TEST_CASE("n-step probabilities reproduce the binomial law") {
    const double p = 0.6;
    Environment env(laws::homogeneous1d(p), 2);
    const std::int64_t n = 12;
    exact::StepField f = exact::nstep_probabilities(env, Site{}, n);
    for (std::int64_t k = -n; k <= n; ++k) {
        double got = f.box.interior(make_site({k}))
                         ? f.v[static_cast<std::size_t>(f.box.index_of(make_site({k})))]
                         : 0.0;
        REQUIRE(std::fabs(got - oracle::binomial_walk_pmf(p, n, k)) < 1e-13);
    }
    REQUIRE(std::fabs(exact::total_mass(f) - 1.0) < 1e-12);
}

TEST_CASE("mass is conserved in a random environment") {
    Environment env(laws::two_point(0.3, 0.9), 11);
    exact::StepField f = exact::nstep_probabilities(env, make_site({3}), 200);
    REQUIRE(std::fabs(exact::total_mass(f) - 1.0) < 1e-12);
}

TEST_CASE("log-domain and linear n-step fields agree") {
    Environment env(laws::two_point(0.25, 0.75), 13);
    const std::int64_t n = 40;
    exact::StepField lin = exact::nstep_probabilities(env, Site{}, n);
    exact::StepField lg = exact::nstep_log_probabilities(env, Site{}, n);
    for (std::int64_t i = 0; i < lin.box.n_interior(); ++i) {
        double a = lin.v[static_cast<std::size_t>(i)];
        double b = lg.v[static_cast<std::size_t>(i)];
        if (a == 0.0) {
            REQUIRE(b == exact::NEG_INF);
        } else {
            REQUIRE(std::fabs(std::exp(b) - a) < 1e-12 * std::max(1.0, a));
        }
    }
}

TEST_CASE("parity: odd sites carry no mass at even times") {
    Environment env(laws::homogeneous1d(0.7), 3);
    exact::StepField f = exact::nstep_probabilities(env, Site{}, 10);
    for (std::int64_t k = -9; k <= 9; k += 2)
        REQUIRE(f.v[static_cast<std::size_t>(f.box.index_of(make_site({k})))] == 0.0);
}

TEST_CASE("torus measure of a translation-invariant chain is uniform") {
    Environment env(laws::homogeneous(2, {0.3, 0.3, 0.2, 0.2}), 4);
    exact::TorusMeasure tm = exact::torus_invariant_measure(env, 2);
    REQUIRE(tm.n_states == 25);
    REQUIRE(tm.residual_inf < 1e-10);
    for (double v : tm.phi) REQUIRE(std::fabs(v - 1.0) < 1e-10);
    REQUIRE(std::fabs(tm.normalization - 25.0) < 1e-8);
}

TEST_CASE("torus measure of a random balanced chain is stationary") {
    Environment env(laws::balanced_dirichlet({1.1, 0.9}), 17);
    exact::TorusMeasure tm = exact::torus_invariant_measure(env, 3);
    REQUIRE(tm.residual_inf < 1e-10);
    REQUIRE(std::fabs(tm.normalization - static_cast<double>(tm.n_states)) < 1e-8);
    for (double v : tm.phi) REQUIRE(v > 0.0);
}

TEST_CASE("torus solver refuses oversized state spaces") {
    Environment env(laws::balanced_dirichlet({1.0, 1.0}), 1);
    REQUIRE_THROWS_AS(exact::torus_invariant_measure(env, 40), ResourceError);
}

TEST_CASE("compensated summation survives a hostile ordering") {
    // Ten increments each below half an ulp of 1.0: plain addition drops all
    // of them, the compensated sum keeps their total.
    double naive = 1.0;
    exact::detail::NeumaierSum acc;
    acc.add(1.0);
    for (int i = 0; i < 10; ++i) {
        naive += 1e-16;
        acc.add(1e-16);
    }
    REQUIRE(naive == 1.0);
    REQUIRE(acc.value() > 1.0);
    REQUIRE(std::fabs(acc.value() - (1.0 + 1e-15)) < 3e-16);
}
