#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "rwre/rng.hpp"
#include "rwre/stats.hpp"

using namespace rwre;

TEST_CASE("streams are reproducible and path-separated") {
    rng::Stream a = rng::make_stream(42, {rng::tag::WALK, 7});
    rng::Stream b = rng::make_stream(42, {rng::tag::WALK, 7});
    rng::Stream c = rng::make_stream(42, {rng::tag::WALK, 8});
    rng::Stream d = rng::make_stream(43, {rng::tag::WALK, 7});
    bool all_equal = true, any_cross_equal = false;
    for (int i = 0; i < 64; ++i) {
        std::uint64_t va = a.next_u64();
        if (va != b.next_u64()) all_equal = false;
        if (va == c.next_u64() || va == d.next_u64()) any_cross_equal = true;
    }
    REQUIRE(all_equal);
    REQUIRE_FALSE(any_cross_equal);
}

TEST_CASE("derive_key is order sensitive") {
    REQUIRE(rng::derive_key(1, {2, 3}) != rng::derive_key(1, {3, 2}));
    REQUIRE(rng::derive_key(1, {2}) != rng::derive_key(2, {1}));
}

TEST_CASE("u01 stays in the half-open unit interval") {
    rng::Stream s = rng::make_stream(9, {rng::tag::MISC});
    for (int i = 0; i < 10000; ++i) {
        double u = s.u01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("bernoulli and pick have the right frequencies") {
    rng::Stream s = rng::make_stream(11, {rng::tag::MISC});
    int hits = 0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) hits += s.bernoulli(0.3) ? 1 : 0;
    double f = static_cast<double>(hits) / n;
    REQUIRE(std::fabs(f - 0.3) < 0.01);

    std::vector<double> w = {0.5, 0.25, 0.25};
    std::vector<int> counts(3, 0);
    for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(s.pick(w, 3, 1.0))];
    REQUIRE(std::fabs(counts[0] / static_cast<double>(n) - 0.5) < 0.01);
    REQUIRE(std::fabs(counts[2] / static_cast<double>(n) - 0.25) < 0.01);
}

TEST_CASE("dirichlet draws live on the simplex") {
    rng::Stream s = rng::make_stream(13, {rng::tag::MISC});
    std::vector<double> alpha = {0.7, 1.3, 2.0, 0.5};
    for (int i = 0; i < 200; ++i) {
        std::vector<double> w(alpha.size());
        s.dirichlet(alpha, static_cast<int>(alpha.size()), w);
        double total = 0.0;
        for (double v : w) {
            REQUIRE(v > 0.0);
            total += v;
        }
        REQUIRE(std::fabs(total - 1.0) < 1e-12);
    }
}

TEST_CASE("normal draws have the declared first two moments") {
    rng::Stream s = rng::make_stream(15, {rng::tag::MISC});
    stats::Welford acc;
    for (int i = 0; i < 50000; ++i) acc.add(s.normal());
    REQUIRE(std::fabs(acc.mean) < 0.02);
    REQUIRE(std::fabs(acc.variance() - 1.0) < 0.03);
}

TEST_CASE("welford matches the two-pass computation") {
    std::vector<double> xs = {1.5, -2.0, 0.25, 7.0, 3.5, -1.0};
    stats::Welford acc;
    double sum = 0.0;
    for (double v : xs) {
        acc.add(v);
        sum += v;
    }
    double mean = sum / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double v : xs) ss += (v - mean) * (v - mean);
    double var = ss / static_cast<double>(xs.size() - 1);
    REQUIRE(std::fabs(acc.mean - mean) < 1e-14);
    REQUIRE(std::fabs(acc.variance() - var) < 1e-14);
}

TEST_CASE("the 99 percent quantile constant is pinned") {
    REQUIRE(std::fabs(stats::z_for_level(0.99) - 2.5758293035489004) < 1e-12);
    REQUIRE(std::fabs(stats::z_for_level(0.95) - 1.959963984540054) < 1e-12);
}

TEST_CASE("wilson interval basics") {
    stats::EstimateWithCI e = stats::wilson(80, 100, 0.95);
    REQUIRE(e.lo > 0.7);
    REQUIRE(e.hi < 0.9);
    REQUIRE(e.contains(e.estimate));

    stats::EstimateWithCI zero = stats::wilson(0, 50, 0.95);
    REQUIRE(zero.estimate == 0.0);
    REQUIRE(zero.lo == 0.0);
    REQUIRE(zero.hi > 0.0);
    REQUIRE(zero.hi < 0.2);

    stats::EstimateWithCI full = stats::wilson(50, 50, 0.95);
    REQUIRE(full.hi == 1.0);
    REQUIRE(full.lo > 0.8);

    // Interval shrinks with more data at the same fraction.
    REQUIRE(stats::wilson(800, 1000, 0.95).half_width() < e.half_width());
}

TEST_CASE("joint consistency of two interval estimates") {
    stats::EstimateWithCI a, b;
    a.estimate = 0.50;
    a.lo = 0.45;
    a.hi = 0.55;
    b.estimate = 0.53;
    b.lo = 0.49;
    b.hi = 0.57;
    REQUIRE(stats::jointly_consistent(a, b));
    b.estimate = 0.70;
    b.lo = 0.66;
    b.hi = 0.74;
    REQUIRE_FALSE(stats::jointly_consistent(a, b));
}

TEST_CASE("median handles odd, even, and unsorted input") {
    REQUIRE(stats::median({3.0, 1.0, 2.0}) == 2.0);
    REQUIRE(stats::median({4.0, 1.0, 3.0, 2.0}) == 2.5);
    REQUIRE(stats::median({5.0}) == 5.0);
}

TEST_CASE("line fit recovers an exact line") {
    std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
    std::vector<double> y;
    for (double v : x) y.push_back(2.5 * v - 1.0);
    stats::LineFit f = stats::fit_line(x, y);
    REQUIRE(std::fabs(f.slope - 2.5) < 1e-12);
    REQUIRE(std::fabs(f.intercept + 1.0) < 1e-12);
    REQUIRE(f.r2 > 1.0 - 1e-12);
}

TEST_CASE("stabilization probe accepts a constant sampler and flags a drifting one") {
    int calls = 0;
    auto constant = [&]() {
        ++calls;
        return 2.0;
    };
    stats::StabilizationReport ok = stats::probe_stabilization(constant, 100);
    REQUIRE_FALSE(ok.divergent);
    REQUIRE(ok.worst_ratio == 0.0);
    REQUIRE(calls > 100);

    // A sampler whose running mean keeps growing never stabilizes.
    double v = 1.0;
    auto growing = [&]() {
        v *= 1.01;
        return v;
    };
    stats::StabilizationReport bad = stats::probe_stabilization(growing, 100);
    REQUIRE(bad.divergent);
}

TEST_CASE("lag one autocorrelation sign") {
    std::vector<double> alternating;
    for (int i = 0; i < 100; ++i) alternating.push_back(i % 2 ? 1.0 : -1.0);
    REQUIRE(stats::autocorrelation(alternating, 1) < -0.9);

    std::vector<double> constant_run(100, 3.0);
    // Zero variance: defined as zero correlation rather than a division blowup.
    REQUIRE(stats::autocorrelation(constant_run, 1) == 0.0);
}
