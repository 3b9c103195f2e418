#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "rwre/diagnostics.hpp"
#include "rwre/env.hpp"

#include "oracles.hpp"

using namespace rwre;

TEST_CASE("homogeneous law assigns the same kernel everywhere") {
    Environment env(laws::homogeneous1d(0.75), 5);
    TransitionKernel k0 = env.kernel_at(make_site({0}));
    TransitionKernel k9 = env.kernel_at(make_site({-913}));
    REQUIRE(k0[0] == 0.75);
    REQUIRE(k0[1] == 0.25);
    REQUIRE(k9[0] == k0[0]);
    REQUIRE(k9[1] == k0[1]);
}

TEST_CASE("kernel_at is a pure function of seed and site") {
    Environment env(laws::two_point(0.3, 0.9), 77);
    Site s = make_site({12});
    TransitionKernel a = env.kernel_at(s);
    TransitionKernel b = env.kernel_at(s);
    REQUIRE(a[0] == b[0]);

    Environment env2(laws::two_point(0.3, 0.9), 77);
    REQUIRE(env2.kernel_at(s)[0] == a[0]);

    Environment env3(laws::two_point(0.3, 0.9), 78);
    bool some_site_differs = false;
    for (int i = 0; i < 200; ++i) {
        Site t = make_site({i});
        if (env3.kernel_at(t)[0] != env.kernel_at(t)[0]) some_site_differs = true;
    }
    REQUIRE(some_site_differs);
}

TEST_CASE("two point law hits both atoms at the declared frequency") {
    Environment env(laws::two_point(0.3, 0.9, 0.25), 3);
    int hi = 0, lo = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        double p = env.kernel_at(make_site({i}))[0];
        REQUIRE((p == 0.3 || p == 0.9));
        (p == 0.3 ? lo : hi) += 1;
    }
    REQUIRE(std::fabs(lo / static_cast<double>(n) - 0.25) < 0.02);
    REQUIRE(std::fabs(hi / static_cast<double>(n) - 0.75) < 0.02);
}

TEST_CASE("dirichlet kernels are strictly positive rows on the simplex") {
    Environment env(laws::dirichlet(2, {0.8, 0.8, 1.2, 1.2}), 19);
    for (int i = 0; i < 500; ++i) {
        TransitionKernel k = env.kernel_at(make_site({i, -i}));
        double total = 0.0;
        for (int m = 0; m < 4; ++m) {
            REQUIRE(k[m] > 0.0);
            total += k[m];
        }
        REQUIRE(std::fabs(total - 1.0) < 1e-12);
    }
}

TEST_CASE("holding conversion rescales and inserts the hold entry") {
    EnvironmentLaw law = laws::homogeneous1d(0.6).with_holding(0.2);
    REQUIRE(law.jumps.include_hold);
    Environment env(law, 1);
    TransitionKernel k = env.kernel_at(make_site({4}));
    REQUIRE(std::fabs(k[0] - 0.6 * 0.8) < 1e-15);
    REQUIRE(std::fabs(k[1] - 0.4 * 0.8) < 1e-15);
    REQUIRE(std::fabs(k[2] - 0.2) < 1e-15);

    // Default holding probability is the ellipticity floor of the base law.
    EnvironmentLaw auto_hold = laws::homogeneous1d(0.6).with_holding();
    Environment env2(auto_hold, 1);
    REQUIRE(std::fabs(env2.kernel_at(Site{})[2] - 0.4) < 1e-15);
}

TEST_CASE("kappa reflects the smallest reachable kernel entry") {
    REQUIRE(std::fabs(laws::two_point(0.3, 0.9).kappa() - 0.1) < 1e-15);
    REQUIRE(std::fabs(laws::homogeneous1d(0.75).kappa() - 0.25) < 1e-15);
    REQUIRE(laws::dirichlet(2, {1.0, 1.0, 1.0, 1.0}).kappa() == 0.0);
}

TEST_CASE("balanced laws produce axis-symmetric kernels exactly") {
    Environment fixed(laws::balanced_fixed({0.3, 0.2}), 8);
    Environment random(laws::balanced_dirichlet({1.5, 0.7}), 8);
    for (int i = 0; i < 300; ++i) {
        Site s = make_site({i, 2 * i});
        TransitionKernel a = fixed.kernel_at(s);
        TransitionKernel b = random.kernel_at(s);
        REQUIRE(a[0] == a[1]);
        REQUIRE(a[2] == a[3]);
        REQUIRE(b[0] == b[1]);
        REQUIRE(b[2] == b[3]);
        REQUIRE(std::fabs(a[0] - 0.3) < 1e-15);
        REQUIRE(std::fabs(a[2] - 0.2) < 1e-15);
    }
}

TEST_CASE("kernel mixture draws only the listed kernels") {
    std::vector<double> ka = {0.325, 0.175, 0.25, 0.25};
    std::vector<double> kb = {0.275, 0.225, 0.25, 0.25};
    Environment env(laws::kernel_mixture(2, {ka, kb}, {0.5, 0.5}), 21);
    int seen_a = 0, seen_b = 0;
    for (int i = 0; i < 2000; ++i) {
        TransitionKernel k = env.kernel_at(make_site({i, -3 * i}));
        if (k[0] == 0.325) ++seen_a;
        else if (k[0] == 0.275) ++seen_b;
        else FAIL("kernel not in the mixture");
    }
    REQUIRE(seen_a > 800);
    REQUIRE(seen_b > 800);
}

TEST_CASE("invalid law parameters are rejected") {
    REQUIRE_THROWS_AS(laws::homogeneous1d(0.0), ConfigError);
    REQUIRE_THROWS_AS(laws::homogeneous1d(1.2), ConfigError);
    REQUIRE_THROWS_AS(laws::two_point(0.5, -0.1), ConfigError);
    REQUIRE_THROWS_AS(laws::homogeneous(2, {0.5, 0.5, 0.5, 0.5}), DomainError);
    REQUIRE_THROWS_AS(laws::dirichlet(2, {1.0, -1.0, 1.0, 1.0}), ConfigError);
    REQUIRE_THROWS_AS(laws::balanced_fixed({0.6, 0.2}), ConfigError);
    REQUIRE_THROWS_AS(laws::homogeneous1d(0.6).with_holding(1.5), DomainError);
}

TEST_CASE("ellipticity report recovers the two point floor") {
    diag::EllipticityReport rep =
        diag::ellipticity_report(laws::two_point(0.3, 0.9), 4000, 1.0, 5);
    REQUIRE(std::fabs(rep.kappa_hat - 0.1) < 1e-12);
    REQUIRE_FALSE(rep.divergent);
    // E[w^{-1}] for the right move: (1/0.3 + 1/0.9)/2 = 20/9; the left move
    // gives (1/0.7 + 1/0.1)/2 = 40/7, which is the supremum over moves.
    REQUIRE(std::fabs(rep.inverse_moment - 40.0 / 7.0) < 0.3);
}

TEST_CASE("dirichlet inverse moments match the closed form") {
    // alpha = (2, 2, 3, 3), total 10: E[w_1^{-1}] = Gamma(1)Gamma(10)/(Gamma(2)Gamma(9)) = 9.
    double expected = oracle::dirichlet_inverse_moment(2.0, 10.0, 1.0);
    REQUIRE(std::fabs(expected - 9.0) < 1e-12);
    diag::EllipticityReport rep =
        diag::ellipticity_report(laws::dirichlet(2, {2.0, 2.0, 3.0, 3.0}), 60000, 1.0, 6);
    // The supremum over moves is attained at the smallest alpha; both first
    // axis moves share alpha = 2.
    REQUIRE(std::fabs(rep.inverse_moment - expected) / expected < 0.1);
}

TEST_CASE("nestling classification separates the three shapes") {
    // Drift 0.5 to the right: origin outside the drift hull.
    diag::NestlingReport non = diag::nestling_class(laws::homogeneous1d(0.75), 500, 7);
    REQUIRE(non.cls == diag::Nestling::NonNestling);

    // Drifts -0.4 and +0.8 with equal weight: origin interior.
    diag::NestlingReport plain = diag::nestling_class(laws::two_point(0.3, 0.9), 500, 7);
    REQUIRE(plain.cls == diag::Nestling::PlainNestling);

    // Balanced law: the only drift is 0 itself.
    diag::NestlingReport marginal =
        diag::nestling_class(laws::balanced_fixed({0.3, 0.2}), 500, 7);
    REQUIRE(marginal.cls == diag::Nestling::MarginallyNestling);
    REQUIRE(marginal.degenerate_point);

    // 2D drifted law: hull is a segment away from the origin.
    std::vector<double> ka = {0.325, 0.175, 0.25, 0.25};
    std::vector<double> kb = {0.275, 0.225, 0.25, 0.25};
    diag::NestlingReport seg =
        diag::nestling_class(laws::kernel_mixture(2, {ka, kb}), 500, 7);
    REQUIRE(seg.cls == diag::Nestling::NonNestling);
    REQUIRE(seg.hull_distance > 0.04);
}

TEST_CASE("edge survival follows the alternating product") {
    Environment env(laws::trap(0.24), 31);
    diag::EdgeSurvival es = diag::edge_survival(env, 20);
    REQUIRE(es.survival[0] == 1.0);
    double r = es.w_forward * es.w_backward;
    REQUIRE(r > 0.0);
    REQUIRE(r < 1.0);
    for (int k = 1; k <= 20; ++k) {
        REQUIRE(es.survival[static_cast<std::size_t>(k)] <
                es.survival[static_cast<std::size_t>(k - 1)]);
        REQUIRE(std::fabs(es.survival[static_cast<std::size_t>(k)] -
                          oracle::trap_survival(es.w_forward, es.w_backward, k)) < 1e-12);
    }
}

TEST_CASE("trap moment diverges exactly when opposing entries can trap") {
    // Trap-law kernels put weight close to 1 on a chosen edge, so the
    // product of opposing entries approaches 1 and the moment blows up.
    diag::TrapReport bad = diag::trap_criterion(laws::trap(0.24), 4000, 9);
    bool any_divergent = false;
    for (bool b : bad.divergent) any_divergent |= b;
    REQUIRE(any_divergent);

    // A uniformly elliptic two-kernel law keeps the product bounded away
    // from 1, so every directional moment stabilizes.
    std::vector<double> ka = {0.325, 0.175, 0.25, 0.25};
    std::vector<double> kb = {0.275, 0.225, 0.25, 0.25};
    diag::TrapReport good = diag::trap_criterion(laws::kernel_mixture(2, {ka, kb}), 4000, 9);
    for (std::size_t m = 0; m < good.divergent.size(); ++m) {
        REQUIRE_FALSE(good.divergent[m]);
        REQUIRE(good.estimates[m] < 1.2);
    }
}

TEST_CASE("anisotropic product law fixes the axis marginals") {
    EnvironmentLaw law = laws::anisotropic_default();
    Environment env(law, 44);
    std::set<double> axis1_totals;
    for (int i = 0; i < 200; ++i) {
        TransitionKernel k = env.kernel_at(make_site({i, 5 - i}));
        double total = k[0] + k[1] + k[2] + k[3];
        REQUIRE(std::fabs(total - 1.0) < 1e-12);
        axis1_totals.insert(std::round((k[0] + k[1]) * 1e9) / 1e9);
    }
    // The first-axis mass takes only the values listed in the law.
    REQUIRE(axis1_totals.size() <= 2);
}
