#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "rwre/env.hpp"
#include "rwre/renewal.hpp"

#include "oracles.hpp"

using namespace rwre;

namespace {

renewal::Decomposition scan(const std::vector<std::int64_t>& levels, std::int64_t window) {
    renewal::RenewalScan s;
    for (std::int64_t v : levels) s.push(v);
    return s.finalize(window);
}

}  // namespace

TEST_CASE("scan confirms fresh maxima that are never undercut") {
    renewal::Decomposition dec = scan({0, 1, 2, 1, 2, 3}, 0);
    REQUIRE(dec.confirmed.size() == 2);
    REQUIRE(dec.confirmed[0].time == 1);
    REQUIRE(dec.confirmed[0].level == 1);
    REQUIRE(dec.confirmed[1].time == 5);
    REQUIRE(dec.confirmed[1].level == 3);
    REQUIRE(dec.attempts == 1);
    REQUIRE(dec.descent_time == walk::NEVER);

    // The level-2 visit at time 2 was undercut at time 3 and must not
    // reappear when the path ties it later.
    for (const renewal::Record& r : dec.confirmed) REQUIRE(r.level != 2);
}

TEST_CASE("scan demands a minimum observation window") {
    renewal::Decomposition dec = scan({0, 1, 2, 1, 2, 3}, 2);
    REQUIRE(dec.confirmed.size() == 1);
    REQUIRE(dec.confirmed[0].level == 1);
    REQUIRE(dec.censored_alive == 1);
    REQUIRE(dec.first_confirmed);
}

TEST_CASE("a failed episode starts a fresh anchor") {
    renewal::Decomposition dec = scan({0, 1, 0, 1, 2}, 0);
    REQUIRE(dec.confirmed.size() == 1);
    REQUIRE(dec.confirmed[0].time == 4);
    REQUIRE(dec.confirmed[0].level == 2);
    REQUIRE(dec.confirmed[0].anchor);
    REQUIRE(dec.attempts == 2);
}

TEST_CASE("descent below the start is recorded once") {
    renewal::Decomposition dec = scan({0, 1, -1, 2}, 0);
    REQUIRE(dec.descent_time == 2);
    REQUIRE(dec.confirmed.size() == 1);
    REQUIRE(dec.confirmed[0].level == 2);
    REQUIRE(dec.attempts == 2);
}

TEST_CASE("monotone paths confirm every step") {
    renewal::Decomposition dec = scan({0, 1, 2, 3, 4, 5}, 0);
    REQUIRE(dec.confirmed.size() == 5);
    REQUIRE(dec.attempts == 1);
    for (std::size_t i = 0; i < dec.confirmed.size(); ++i) {
        REQUIRE(dec.confirmed[i].level == static_cast<std::int64_t>(i) + 1);
        REQUIRE(dec.confirmed[i].anchor == (i == 0));
    }
}

TEST_CASE("ties after a record do not kill it") {
    renewal::Decomposition dec = scan({0, 1, 1, 1, 2}, 0);
    REQUIRE(dec.confirmed.size() == 2);
    REQUIRE(dec.confirmed[0].level == 1);
    REQUIRE(dec.confirmed[0].time == 1);
}

TEST_CASE("blocks are the gaps between consecutive confirmed records") {
    renewal::Decomposition dec = scan({0, 1, 2, 1, 2, 3, 4}, 0);
    // confirmed: (1,1), (5,3), (6,4)
    std::vector<renewal::Block> blocks = renewal::blocks_of(dec);
    REQUIRE(blocks.size() == 2);
    REQUIRE(blocks[0].dt == 4);
    REQUIRE(blocks[0].dx == 2);
    REQUIRE(blocks[1].dt == 1);
    REQUIRE(blocks[1].dx == 1);
}

TEST_CASE("velocity from identical blocks has zero error") {
    std::vector<renewal::Block> blocks = {{2, 1}, {2, 1}, {2, 1}};
    renewal::RenewalVelocity rv = renewal::velocity_from_blocks(blocks, 0.99, 1);
    REQUIRE(rv.speed.estimate == 0.5);
    REQUIRE(rv.speed.half_width() < 1e-15);
    REQUIRE(rv.n_blocks == 3);
}

TEST_CASE("velocity from mixed blocks matches the hand computation") {
    std::vector<renewal::Block> blocks = {{2, 1}, {4, 3}};
    renewal::RenewalVelocity rv = renewal::velocity_from_blocks(blocks, 0.95, 1);
    REQUIRE(std::fabs(rv.speed.estimate - 2.0 / 3.0) < 1e-15);
    REQUIRE(std::fabs(rv.mean_dt - 3.0) < 1e-15);
    REQUIRE(std::fabs(rv.mean_dx - 2.0) < 1e-15);
    // Var(dx - v dt) = 2/9, se = sqrt((2/9)/2)/3 = 1/9.
    double se = rv.speed.half_width() / stats::z_for_level(0.95);
    REQUIRE(std::fabs(se - 1.0 / 9.0) < 1e-12);
}

TEST_CASE("iid check accepts homogeneous blocks and flags alternation") {
    std::vector<renewal::Block> steady;
    for (int i = 0; i < 24; ++i) steady.push_back({3 + (i * 7 % 3), 1 + (i * 5 % 2)});
    renewal::IidCheck ok = renewal::check_iid(steady, 0.99);
    REQUIRE(ok.n_blocks == 24);

    std::vector<renewal::Block> alternating;
    for (int i = 0; i < 24; ++i) alternating.push_back({i % 2 ? 10 : 2, 1});
    renewal::IidCheck bad = renewal::check_iid(alternating, 0.99);
    REQUIRE(bad.acf_dt < -0.9);
    REQUIRE_FALSE(bad.consistent);

    REQUIRE_THROWS_AS(renewal::check_iid({{2, 1}, {3, 1}}, 0.99), DomainError);
}

TEST_CASE("no-descent probability brackets the closed form") {
    renewal::DescentProbability dp =
        renewal::descent_probability(laws::homogeneous1d(0.75), 50000, 4000, 40, 0.99, 11);
    double want = oracle::no_descent_probability(0.75);
    REQUIRE(dp.band_lo <= want);
    REQUIRE(want <= dp.band_hi);
    REQUIRE(dp.band_hi - dp.band_lo < 0.06);
    // Certification fires on nearly every surviving path, so censoring is rare.
    REQUIRE(dp.n_certified > 2000);
    REQUIRE(dp.censor_margin < 1e-6);
}

TEST_CASE("descent certification needs a strict rho ceiling") {
    // rho = 2 with positive probability: no geometric certificate exists, so
    // every surviving path stays censored.
    renewal::DescentProbability dp =
        renewal::descent_probability(laws::two_point(1.0 / 3.0, 0.8), 2000, 200, 40, 0.95, 3);
    REQUIRE(dp.n_certified == 0);
    REQUIRE(dp.band_lo <= dp.survive.lo);
}

TEST_CASE("mean first confirmed level is the reciprocal survival probability") {
    renewal::FirstRecordIdentity id =
        renewal::first_record_identity(laws::homogeneous1d(0.75), 6000, 2500, 1500, 0.99, 17);
    double truth = oracle::mean_first_record_given_no_descent(0.75);
    REQUIRE(id.jointly_consistent);
    REQUIRE(id.lhs.contains(truth));
    REQUIRE(id.n_conditioned > 800);
}

TEST_CASE("radius moment probe stabilizes in the ballistic regime") {
    renewal::RadiusMoment rm =
        renewal::radius_moment_probe(laws::homogeneous1d(0.75), 0.5, 20.0, 4000, 1500, 300, 23);
    REQUIRE_FALSE(rm.probe.divergent);
    REQUIRE(rm.estimate >= 1.0);
    REQUIRE_THROWS_AS(
        renewal::radius_moment_probe(laws::homogeneous1d(0.75), -0.5, 20.0, 100, 50, 10, 1),
        DomainError);
}

TEST_CASE("regeneration tail decays and censoring is counted") {
    renewal::TailProfile tp = renewal::tail_profile(laws::homogeneous1d(0.75),
                                                    {1, 4, 16, 64}, 4000, 1500, 600, 29);
    REQUIRE(tp.survival.size() == 4);
    for (std::size_t i = 1; i < tp.survival.size(); ++i)
        REQUIRE(tp.survival[i] <= tp.survival[i - 1]);
    REQUIRE(tp.survival[0] <= 1.0);
    REQUIRE(tp.survival[3] < 0.2);
}

TEST_CASE("pooled renewal velocity recovers the biased walk speed") {
    renewal::RenewalVelocity rv =
        renewal::renewal_velocity(laws::homogeneous1d(0.75), 6000, 60, 2500, 0, 0.99, 31);
    REQUIRE(rv.speed.contains(0.5));
    REQUIRE(rv.n_blocks > 500);
}
