#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rwre/env.hpp"
#include "rwre/errors.hpp"
#include "rwre/rng.hpp"
#include "rwre/stats.hpp"
#include "rwre/walk.hpp"

// =============================================================================
// oned.hpp
//
// One-dimensional theory: the ratio variable rho = w(x,-1)/w(x,+1), the
// transience trichotomy driven by E[log rho], ballisticity via E[rho] < 1,
// closed-form and empirical velocities, the stationary density of the
// environment seen from the particle, the root of E[rho^kappa] = 1, potential
// profiles, and the recurrent-regime (log n)^2 range diagnostic.
//
// Closed forms are exact for laws whose rho has finitely many atoms; the
// estimators work for any 1D law.
// =============================================================================

namespace rwre::oned {

// -----------------------------------------------------------------------------
// rho_summary: atoms and exact moments of rho
// -----------------------------------------------------------------------------

struct RhoSummary {
    std::vector<std::pair<double, double>> atoms;  // (rho value, weight), weights sum to 1
    double mean_rho = 0.0;
    double mean_log_rho = 0.0;
    double mean_inv_rho = 0.0;

    double moment(double s) const {
        double v = 0.0;
        for (const auto& [r, w] : atoms) v += w * std::pow(r, s);
        return v;
    }
};

inline RhoSummary rho_summary(const EnvironmentLaw& law) {
    if (law.jumps.d != 1) throw DomainError("rho_summary needs a one-dimensional law");
    if (law.hold_prob > 0.0)
        throw DomainError("rho_summary is defined for the walk without holding");
    RhoSummary out;
    if (const auto* h = std::get_if<Homogeneous>(&law.variant)) {
        out.atoms = {{h->kernel[1] / h->kernel[0], 1.0}};
    } else if (const auto* o = std::get_if<OneDimDiscrete>(&law.variant)) {
        double total = 0.0;
        for (const auto& a : o->atoms) total += a.weight;
        for (const auto& a : o->atoms)
            out.atoms.emplace_back((1.0 - a.p_right) / a.p_right, a.weight / total);
    } else {
        throw DomainError("rho_summary needs a law with finitely many kernel atoms");
    }
    for (const auto& [r, w] : out.atoms) {
        out.mean_rho += w * r;
        out.mean_log_rho += w * std::log(r);
        out.mean_inv_rho += w / r;
    }
    return out;
}

// -----------------------------------------------------------------------------
// classify: transience trichotomy and speed regime
// -----------------------------------------------------------------------------

enum class Regime { TransientRight, TransientLeft, Recurrent };

inline std::string to_string(Regime r) {
    switch (r) {
        case Regime::TransientRight: return "transient_right";
        case Regime::TransientLeft: return "transient_left";
        default: return "recurrent";
    }
}

struct Classification {
    Regime regime = Regime::Recurrent;
    double mean_log_rho = 0.0;
    bool ballistic = false;   // nonzero limiting speed
    double velocity = 0.0;    // closed-form speed (0 in the zero-speed regimes)
};

// Drift conditions: right variant holds iff E[rho] < 1, left iff E[1/rho] < 1.
struct DriftCondition {
    bool holds_right = false;
    bool holds_left = false;
    double mean_rho = 0.0;
    double mean_inv_rho = 0.0;
};

inline DriftCondition check_drift_condition(const EnvironmentLaw& law) {
    RhoSummary rs = rho_summary(law);
    DriftCondition out;
    out.mean_rho = rs.mean_rho;
    out.mean_inv_rho = rs.mean_inv_rho;
    out.holds_right = rs.mean_rho < 1.0;
    out.holds_left = rs.mean_inv_rho < 1.0;
    return out;
}

// Speed of the law: (1 - E[rho]) / (1 + E[rho]) when E[rho] < 1, the mirrored
// form when E[1/rho] < 1, and 0 otherwise.
inline double velocity_closed_form(const EnvironmentLaw& law) {
    RhoSummary rs = rho_summary(law);
    if (rs.mean_rho < 1.0) return (1.0 - rs.mean_rho) / (1.0 + rs.mean_rho);
    if (rs.mean_inv_rho < 1.0) return -(1.0 - rs.mean_inv_rho) / (1.0 + rs.mean_inv_rho);
    return 0.0;
}

inline Classification classify(const EnvironmentLaw& law) {
    RhoSummary rs = rho_summary(law);
    Classification out;
    out.mean_log_rho = rs.mean_log_rho;
    // The sign test needs a deadband: atoms like {0.3, 0.7} are meant to
    // balance exactly but their logs cancel only to roundoff.
    double scale = 0.0;
    for (const auto& [r, w] : rs.atoms) scale += w * std::fabs(std::log(r));
    double tol = 1e-12 * std::max(1.0, scale);
    if (rs.mean_log_rho < -tol)
        out.regime = Regime::TransientRight;
    else if (rs.mean_log_rho > tol)
        out.regime = Regime::TransientLeft;
    else
        out.regime = Regime::Recurrent;
    out.velocity = velocity_closed_form(law);
    out.ballistic = out.velocity != 0.0;
    return out;
}

// -----------------------------------------------------------------------------
// velocity_series_display: the series form of the speed under E[rho] < 1,
// evaluated as published. The terms telescope, so the partial sum equals
// 1 - E[rho]^(J+1) and the limit is 1 for every law in this family; the value
// disagrees with both the closed form and direct simulation and is reported
// for comparison only.
// -----------------------------------------------------------------------------

struct SeriesVelocity {
    double value = 0.0;   // partial sum through j = J
    double limit = 1.0;   // its J -> infinity limit
    std::string note;
};

inline SeriesVelocity velocity_series_display(const EnvironmentLaw& law, int J) {
    RhoSummary rs = rho_summary(law);
    if (!(rs.mean_rho < 1.0))
        throw DomainError("series display needs E[rho] < 1");
    SeriesVelocity out;
    out.value = 1.0 - std::pow(rs.mean_rho, J + 1);
    out.note =
        "series form telescopes to 1 for every admissible law; "
        "kept for side-by-side comparison with the ratio form and simulation";
    return out;
}

// -----------------------------------------------------------------------------
// velocity_empirical: X_n / n over independent environment/walk replicas
// -----------------------------------------------------------------------------

struct EmpiricalVelocity {
    stats::EstimateWithCI speed;
    stats::EstimateWithCI positive_fraction;  // P[X_n > 0], Wilson interval
    std::int64_t n_steps = 0;
};

inline EmpiricalVelocity velocity_empirical(const EnvironmentLaw& law, std::int64_t n_steps,
                                            std::int64_t n_reps, double level,
                                            std::uint64_t seed) {
    if (law.jumps.d != 1) throw DomainError("velocity_empirical needs d = 1");
    if (n_reps < 2) throw DomainError("velocity_empirical needs n_reps >= 2");
    stats::Welford acc;
    std::int64_t n_positive = 0;
    for (std::int64_t rep = 0; rep < n_reps; ++rep) {
        std::uint64_t env_seed =
            rng::derive_key(seed, {rng::tag::ENV_REPLICA, static_cast<std::uint64_t>(rep)});
        Environment env(law, env_seed);
        walk::Walker w(env, rng::make_stream(seed, {rng::tag::WALK, static_cast<std::uint64_t>(rep)}));
        for (std::int64_t t = 0; t < n_steps; ++t) w.step();
        std::int64_t x = w.pos()[0];
        acc.add(static_cast<double>(x) / static_cast<double>(n_steps));
        if (x > 0) ++n_positive;
    }
    EmpiricalVelocity out;
    out.speed = acc.ci(level);
    out.speed.seed = seed;
    out.positive_fraction = stats::wilson(n_positive, n_reps, level);
    out.positive_fraction.seed = seed;
    out.n_steps = n_steps;
    return out;
}

// -----------------------------------------------------------------------------
// Stationary density of the environment seen from the particle, under
// E[rho] < 1. The weight against the static law is
//   w(omega) = C (1 + rho_0) sum_{j>=0} prod_{k=1}^{j} rho_k,
// with C = (1 - E[rho]) / (1 + E[rho]); E[w] = 1.
// -----------------------------------------------------------------------------

// Truncated weight from the ratios (rho_0, rho_1, ..., rho_J).
inline double invariant_density_weight(const std::vector<double>& rho, double normalizer) {
    if (rho.empty()) throw DomainError("invariant_density_weight needs rho_0");
    double series = 1.0;
    double prod = 1.0;
    for (std::size_t k = 1; k < rho.size(); ++k) {
        prod *= rho[k];
        series += prod;
    }
    return normalizer * (1.0 + rho[0]) * series;
}

inline double invariant_density_normalizer(const EnvironmentLaw& law) {
    RhoSummary rs = rho_summary(law);
    if (!(rs.mean_rho < 1.0))
        throw DomainError("stationary density needs E[rho] < 1");
    return (1.0 - rs.mean_rho) / (1.0 + rs.mean_rho);
}

// check_invariance: paired estimate of E[w (Rf - f)] with the truncated
// weight, where R is the environment kernel and the default test function is
// f(omega) = omega(0, +1). The truncation of the series after J terms biases
// the mean by at most 2 ||f||_inf E[rho]^{J+1}.
struct InvarianceReport {
    double mean_difference = 0.0;  // paired mean of w * (Rf - f)
    double std_error = 0.0;
    double truncation_bound = 0.0;
    std::int64_t n_reps = 0;
    int J = 0;
    bool pass = false;  // |mean| <= 3 se + truncation bound
};

inline InvarianceReport check_invariance(const EnvironmentLaw& law, int J,
                                         std::int64_t n_reps, std::uint64_t seed) {
    if (law.jumps.d != 1) throw DomainError("check_invariance needs d = 1");
    if (J < 1 || n_reps < 2) throw DomainError("check_invariance needs J >= 1, n_reps >= 2");
    RhoSummary rs = rho_summary(law);
    double C = invariant_density_normalizer(law);

    rng::Stream s = rng::make_stream(seed, {rng::tag::MISC, 7});
    stats::Welford acc;
    // Sites -1 .. J+1 drive w (sites 0..J) and the shifted test functions.
    std::vector<double> p(static_cast<std::size_t>(J) + 3);
    std::vector<double> rho(static_cast<std::size_t>(J) + 1);
    for (std::int64_t rep = 0; rep < n_reps; ++rep) {
        for (auto& pi : p) {
            TransitionKernel k = law.sample(s);
            pi = k[0];
        }
        // p[i] is the right probability at site i-1.
        for (int k = 0; k <= J; ++k)
            rho[static_cast<std::size_t>(k)] =
                (1.0 - p[static_cast<std::size_t>(k + 1)]) / p[static_cast<std::size_t>(k + 1)];
        double w = invariant_density_weight(rho, C);
        double f = p[1];                                        // site 0
        double rf = p[1] * p[2] + (1.0 - p[1]) * p[0];          // shifted copies
        acc.add(w * (rf - f));
    }

    InvarianceReport out;
    out.mean_difference = acc.mean;
    out.std_error = acc.std_error();
    out.truncation_bound = 2.0 * std::pow(rs.mean_rho, J + 1);
    out.n_reps = n_reps;
    out.J = J;
    out.pass = std::fabs(out.mean_difference) <= 3.0 * out.std_error + out.truncation_bound;
    return out;
}

// -----------------------------------------------------------------------------
// kks_exponent: the positive root of E[rho^kappa] = 1
// -----------------------------------------------------------------------------

struct KksRoot {
    double kappa = 0.0;
    double residual = 0.0;  // |E[rho^kappa] - 1| at the root
    int iterations = 0;
};

inline KksRoot kks_exponent(const EnvironmentLaw& law) {
    RhoSummary rs = rho_summary(law);
    double scale = 0.0;
    for (const auto& [r, w] : rs.atoms) scale += w * std::fabs(std::log(r));
    if (!(rs.mean_log_rho < -1e-12 * std::max(1.0, scale)))
        throw DomainError("the root of E[rho^kappa] = 1 needs E[log rho] < 0");
    bool mass_above_one = false;
    for (const auto& [r, w] : rs.atoms)
        if (r > 1.0 && w > 0.0) mass_above_one = true;
    if (!mass_above_one)
        throw DomainError("no positive root: rho < 1 with probability 1");

    auto g = [&](double kappa) { return rs.moment(kappa) - 1.0; };
    // g(0) = 0 with negative slope and strict convexity: bracket the root by
    // doubling, then bisect.
    double hi = 1.0;
    int it = 0;
    while (g(hi) < 0.0) {
        hi *= 2.0;
        if (++it > 200) throw NumericalError("root bracket did not close");
    }
    // The root is strictly positive; walk the lower end down until g < 0.
    double lo = hi / 2.0;
    while (lo > 1e-300 && g(lo) > 0.0) lo /= 2.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (g(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
        ++it;
        if (hi - lo < 1e-15 * std::max(1.0, hi)) break;
    }
    KksRoot out;
    out.kappa = 0.5 * (lo + hi);
    out.residual = std::fabs(g(out.kappa));
    out.iterations = it;
    return out;
}

// -----------------------------------------------------------------------------
// sinai_diagnostic: in the recurrent regime the running range grows like
// (log n)^2. Reports the median over replicas of max_{m<=n} |X_m| at each
// horizon, the (log n)^2-scaled medians, and their max/min ratio.
// -----------------------------------------------------------------------------

struct SinaiDiagnostic {
    std::vector<std::int64_t> horizons;
    std::vector<double> median_range;
    std::vector<double> scaled;       // median / (log n)^2
    double ratio_max_min = 0.0;       // spread of the scaled medians
};

inline SinaiDiagnostic sinai_diagnostic(const EnvironmentLaw& law,
                                        std::vector<std::int64_t> horizons,
                                        std::int64_t n_reps, std::uint64_t seed) {
    if (law.jumps.d != 1) throw DomainError("sinai_diagnostic needs d = 1");
    if (horizons.empty() || n_reps < 1)
        throw DomainError("sinai_diagnostic needs horizons and n_reps >= 1");
    std::sort(horizons.begin(), horizons.end());
    std::int64_t n_max = horizons.back();

    std::vector<std::vector<double>> ranges(horizons.size());
    for (auto& r : ranges) r.reserve(static_cast<std::size_t>(n_reps));
    for (std::int64_t rep = 0; rep < n_reps; ++rep) {
        std::uint64_t env_seed =
            rng::derive_key(seed, {rng::tag::ENV_REPLICA, static_cast<std::uint64_t>(rep)});
        Environment env(law, env_seed);
        walk::Walker w(env, rng::make_stream(seed, {rng::tag::WALK, static_cast<std::uint64_t>(rep)}));
        walk::PathSummary ps = walk::run_fixed(w, n_max, horizons);
        for (std::size_t h = 0; h < horizons.size(); ++h)
            ranges[h].push_back(static_cast<double>(ps.max_abs_at_snap[h]));
    }

    SinaiDiagnostic out;
    out.horizons = horizons;
    for (std::size_t h = 0; h < horizons.size(); ++h) {
        double med = stats::median(ranges[h]);
        double logn = std::log(static_cast<double>(horizons[h]));
        out.median_range.push_back(med);
        out.scaled.push_back(med / (logn * logn));
    }
    auto [mn, mx] = std::minmax_element(out.scaled.begin(), out.scaled.end());
    out.ratio_max_min = *mn > 0.0 ? *mx / *mn : std::numeric_limits<double>::infinity();
    return out;
}

// -----------------------------------------------------------------------------
// potential_profile: V(x) = sum_{i=1..x} log rho_i for x > 0 (mirrored for
// x < 0), the associated increments Delta_j = -prod_{i=1..j} rho_i, and the
// residual of the harmonic identity p(y) Delta_y = q(y) Delta_{y-1} over the
// window.
// -----------------------------------------------------------------------------

struct PotentialProfile {
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    std::vector<double> V;            // V[i] at site lo + i
    std::vector<double> log_delta;    // log |Delta_j| on the same grid
    double harmonic_residual = 0.0;   // max relative residual of the identity
};

inline PotentialProfile potential_profile(const Environment& env, std::int64_t lo,
                                          std::int64_t hi) {
    if (env.d() != 1) throw DomainError("potential_profile needs d = 1");
    if (!(lo < 0 && hi > 0)) throw DomainError("potential window must straddle 0");
    if (hi - lo > 2'000'000) throw ResourceError("potential window too large");

    auto rho_at = [&](std::int64_t x) {
        TransitionKernel k = env.kernel_at(make_site({x}));
        return k[1] / k[0];
    };

    PotentialProfile out;
    out.lo = lo;
    out.hi = hi;
    std::size_t n = static_cast<std::size_t>(hi - lo + 1);
    out.V.assign(n, 0.0);
    out.log_delta.assign(n, 0.0);
    auto idx = [&](std::int64_t x) { return static_cast<std::size_t>(x - lo); };

    for (std::int64_t x = 1; x <= hi; ++x)
        out.V[idx(x)] = out.V[idx(x - 1)] + std::log(rho_at(x));
    for (std::int64_t x = -1; x >= lo; --x)
        out.V[idx(x)] = out.V[idx(x + 1)] - std::log(rho_at(x + 1));
    // log |Delta_j| = sum_{i=1..j} log rho_i = V(j); the sign is constant.
    out.log_delta = out.V;

    double worst = 0.0;
    for (std::int64_t y = lo + 1; y <= hi; ++y) {
        TransitionKernel k = env.kernel_at(make_site({y}));
        // p(y) Delta_y = q(y) Delta_{y-1} in log form, common sign dropped.
        double lhs = std::log(k[0]) + out.log_delta[idx(y)];
        double rhs = std::log(k[1]) + out.log_delta[idx(y - 1)];
        double scale = std::max({1.0, std::fabs(lhs), std::fabs(rhs)});
        worst = std::max(worst, std::fabs(lhs - rhs) / scale);
    }
    out.harmonic_residual = worst;
    return out;
}

}  // namespace rwre::oned
