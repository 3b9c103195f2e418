#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "rwre/env.hpp"
#include "rwre/exact.hpp"
#include "rwre/ldp.hpp"
#include "rwre/oned.hpp"

#include "oracles.hpp"

using namespace rwre;

namespace {

std::array<double, MAX_DIM> x1(double v) {
    std::array<double, MAX_DIM> x{};
    x[0] = v;
    return x;
}

}  // namespace

TEST_CASE("n-step distribution of the holding walk conserves mass") {
    Environment env(laws::homogeneous1d(0.6).with_holding(), 101);
    exact::StepField f = exact::nstep_probabilities(env, Site{}, 200);
    double mass = 0.0;
    for (double p : f.v) mass += p;
    REQUIRE(std::fabs(mass - 1.0) <= 1e-12);
}

TEST_CASE("empirical rate approaches the homogeneous closed form") {
    Environment env(laws::homogeneous1d(0.6).with_holding(), 1);
    for (double x : {0.0, 0.2, 0.4}) {
        ldp::RateEstimate r = ldp::empirical_rate(env, x1(x), 600);
        REQUIRE_FALSE(r.infinite);
        double want = oracle::legendre_rate_1d(0.6, 0.4, x);
        REQUIRE(std::fabs(r.I_hat - want) < 0.05);
    }
}

TEST_CASE("rate at the origin vanishes for the symmetric holding walk") {
    Environment env(laws::homogeneous1d(0.5).with_holding(), 2);
    ldp::RateEstimate r = ldp::empirical_rate(env, x1(0.0), 1000);
    REQUIRE(r.I_hat >= 0.0);
    REQUIRE(r.I_hat <= 0.01);
}

TEST_CASE("targets outside the reachable cone are flagged infinite") {
    Environment env(laws::homogeneous1d(0.6).with_holding(), 3);
    ldp::RateEstimate r = ldp::empirical_rate(env, x1(1.5), 40);
    REQUIRE(r.infinite);
    REQUIRE(std::isinf(r.I_hat));

    Environment plain(laws::homogeneous1d(0.6), 3);
    REQUIRE_THROWS_AS(ldp::empirical_rate(plain, x1(0.2), 40), DomainError);
}

TEST_CASE("chain lower bound holds on a fixed instance") {
    Environment env(laws::two_point(0.8, 0.4).with_holding(), 7);
    Site x;
    x.x[0] = 5;
    Site y;
    y.x[0] = -3;
    ldp::ChainCheck cc = ldp::superadditivity_check(env, 30, 20, x, y);
    REQUIRE(cc.holds);
    REQUIRE(cc.log_lhs >= cc.log_rhs - 1e-12);
}

TEST_CASE("chain lower bound survives randomized instances") {
    std::mt19937_64 gen(424242);
    int violations = 0;
    for (int trial = 0; trial < 200; ++trial) {
        int which = static_cast<int>(gen() % 3);
        EnvironmentLaw law = which == 0   ? laws::homogeneous1d(0.6)
                             : which == 1 ? laws::two_point(0.3, 0.9)
                                          : laws::two_point(0.7, 0.45);
        Environment env(law.with_holding(), gen());
        std::int64_t n = 5 + static_cast<std::int64_t>(gen() % 21);
        std::int64_t m = 5 + static_cast<std::int64_t>(gen() % 21);
        Site x;
        x.x[0] = static_cast<std::int64_t>(gen() % (2 * n + 1)) - n;
        Site y;
        y.x[0] = static_cast<std::int64_t>(gen() % (2 * m + 1)) - m;
        if (!ldp::superadditivity_check(env, n, m, x, y).holds) ++violations;
    }
    REQUIRE(violations == 0);
}

TEST_CASE("chain lower bound survives randomized planar instances") {
    std::mt19937_64 gen(777);
    int violations = 0;
    for (int trial = 0; trial < 40; ++trial) {
        EnvironmentLaw law = trial % 2 == 0
                                 ? laws::homogeneous(2, {0.3, 0.2, 0.25, 0.25})
                                 : laws::dirichlet(2, {1.0, 1.0, 2.0, 2.0});
        Environment env(law.with_holding(0.2), gen());
        std::int64_t n = 4 + static_cast<std::int64_t>(gen() % 7);
        std::int64_t m = 4 + static_cast<std::int64_t>(gen() % 7);
        Site x, y;
        for (int j = 0; j < 2; ++j) {
            x.x[static_cast<std::size_t>(j)] =
                static_cast<std::int64_t>(gen() % (n + 1)) - n / 2;
            y.x[static_cast<std::size_t>(j)] =
                static_cast<std::int64_t>(gen() % (m + 1)) - m / 2;
        }
        if (!ldp::superadditivity_check(env, n, m, x, y).holds) ++violations;
    }
    REQUIRE(violations == 0);
}

TEST_CASE("rate curve is convex and drifts toward its limit") {
    Environment env(laws::homogeneous1d(0.5).with_holding(), 5);
    std::vector<double> xs;
    for (int k = -3; k <= 3; ++k) xs.push_back(0.2 * k);
    ldp::RateCurve rc = ldp::rate_curve(env, {60, 120, 240}, xs);
    REQUIRE(rc.convexity_violations == 0);
    REQUIRE(rc.max_n_drift > 0.0);
    REQUIRE(rc.max_n_drift < 0.1);

    // The log(n)/n extrapolation beats the raw largest-n value where the
    // curve is steep.
    double want = oracle::legendre_rate_1d(0.5, 0.5, 0.4);
    std::size_t ix = 5;  // x = 0.4
    double raw_err = std::fabs(rc.I.back()[ix] - want);
    double ext_err = std::fabs(rc.extrapolated[ix] - want);
    REQUIRE(ext_err < raw_err);
    REQUIRE(ext_err < 0.02);

    REQUIRE_THROWS_AS(ldp::rate_curve(env, {100}, xs), DomainError);
}

TEST_CASE("reflection identity ties the two tails together") {
    EnvironmentLaw base = laws::two_point(0.8, 0.4);
    double mean_log_rho = oned::rho_summary(base).mean_log_rho;
    Environment env(base.with_holding(), 11);
    ldp::SymmetryReport rep = ldp::symmetry_check_1d(env, {0.1, 0.2, 0.3}, 600, mean_log_rho);
    REQUIRE(rep.rows.size() == 3);
    REQUIRE(rep.max_abs_discrepancy < 0.08);
    // The asymmetry is a real signal, not noise around zero.
    REQUIRE(rep.rows[2].lhs > 0.05);
    REQUIRE(rep.rows[2].rhs > 0.05);
}

TEST_CASE("odd-step field is a one-step mixture of even-step fields") {
    Environment env(laws::two_point(0.3, 0.9), 13);
    Site x;
    x.x[0] = 5;
    ldp::ParityCheck pc = ldp::even_odd_reconstruction(env, 15, x);
    REQUIRE(pc.residual <= 1e-12);
    REQUIRE(std::fabs(pc.mass_direct - 1.0) <= 1e-12);
    REQUIRE(std::fabs(pc.mass_reconstructed - 1.0) <= 1e-12);
    REQUIRE(pc.direct > 0.0);

    Environment held(laws::two_point(0.3, 0.9).with_holding(), 13);
    REQUIRE_THROWS_AS(ldp::even_odd_reconstruction(held, 15, x), DomainError);
}

TEST_CASE("holding-walk support is the full l1 ball") {
    Environment env(laws::two_point(0.8, 0.4).with_holding(), 17);
    REQUIRE(ldp::support_matches_gauge(env, 12));

    Environment planar(laws::dirichlet(2, {1.5, 1.5, 1.5, 1.5}).with_holding(0.25), 17);
    REQUIRE(ldp::support_matches_gauge(planar, 6));
}

TEST_CASE("gauge counts the fewest steps needed to reach a site") {
    Environment env(laws::homogeneous1d(0.6).with_holding(), 19);
    for (std::int64_t k : {1, 3, 7}) {
        Site s;
        s.x[0] = k;
        std::int64_t need = ldp::min_steps(s, 1);
        REQUIRE(need == k);
        exact::StepField at = exact::nstep_log_probabilities(env, Site{}, need);
        REQUIRE(at.at(s) > exact::NEG_INF);
        if (need > 1) {
            exact::StepField before = exact::nstep_log_probabilities(env, Site{}, need - 1);
            REQUIRE(before.at(s) == exact::NEG_INF);
        }
    }
    Site origin;
    REQUIRE(ldp::min_steps(origin, 1) == 1);
}

TEST_CASE("dp budget names the largest workable horizon") {
    Environment env(laws::dirichlet(2, {1.0, 1.0, 1.0, 1.0}).with_holding(0.25), 23);
    try {
        ldp::empirical_rate(env, x1(0.1), 100000);
        FAIL("expected a budget error");
    } catch (const ResourceError& e) {
        std::string msg = e.what();
        REQUIRE(msg.find("largest feasible n") != std::string::npos);
        REQUIRE(msg.find("d=2") != std::string::npos);
    }
}
