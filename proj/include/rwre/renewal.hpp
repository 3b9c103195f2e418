#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "rwre/env.hpp"
#include "rwre/errors.hpp"
#include "rwre/rng.hpp"
#include "rwre/stats.hpp"
#include "rwre/walk.hpp"

// =============================================================================
// renewal.hpp
//
// Regeneration structure of a directionally transient walk along a lattice
// axis. A time t is a regeneration point when the level X_t is a strict
// maximum of the whole past and is never undercut afterwards; between
// consecutive regeneration points (from the second onward) the path blocks
// are i.i.d., which turns one long trajectory into independent samples.
//
// The scan is streaming: it keeps a stack of alive candidate records with
// strictly increasing levels, pops candidates the moment the path drops below
// them, and at the end confirms the survivors that have been observed for at
// least a caller-chosen window. Confirmation is a minimum-observation rule,
// not a proof; trailing candidates are reported as censored.
// =============================================================================

namespace rwre::renewal {

struct Record {
    std::int64_t time = 0;
    std::int64_t level = 0;
    bool anchor = false;  // created while no candidate was alive
};

struct Decomposition {
    std::vector<Record> confirmed;   // regeneration points in time order
    std::int64_t censored_alive = 0; // survivors with too little observation
    std::int64_t attempts = 0;       // anchor episodes up to the first confirmed point
    bool first_confirmed = false;
    std::int64_t descent_time = walk::NEVER;  // first drop below the start level
    std::int64_t t_end = 0;
};

// -----------------------------------------------------------------------------
// RenewalScan: feed levels X_0, X_1, ... in order, then finalize.
// -----------------------------------------------------------------------------

class RenewalScan {
  public:
    void push(std::int64_t level) {
        if (t_ == 0) {
            start_level_ = prev_max_ = level;
            ++t_;
            return;
        }
        if (descent_ == walk::NEVER && level < start_level_)
            descent_ = t_;
        // Kill candidates the path just undercut (ties survive).
        while (!stack_.empty() && level < stack_.back().level) stack_.pop_back();
        if (level > prev_max_) {
            Record r;
            r.time = t_;
            r.level = level;
            r.anchor = stack_.empty();
            if (r.anchor) ++anchors_;
            stack_.push_back(r);
            prev_max_ = level;
        }
        ++t_;
    }

    // window: a record counts as confirmed only when at least `window` steps
    // were observed after it.
    Decomposition finalize(std::int64_t window) const {
        Decomposition out;
        out.t_end = t_ - 1;
        out.descent_time = descent_;
        for (const Record& r : stack_) {
            if (out.t_end - r.time >= window)
                out.confirmed.push_back(r);
            else
                ++out.censored_alive;
        }
        if (!out.confirmed.empty()) {
            out.first_confirmed = true;
            // Every earlier anchor died before this one; the anchor count is
            // the number of fresh-start episodes spent reaching it.
            out.attempts = anchors_;
        }
        return out;
    }

  private:
    std::vector<Record> stack_;
    std::int64_t t_ = 0;
    std::int64_t start_level_ = 0;
    std::int64_t prev_max_ = 0;
    std::int64_t descent_ = walk::NEVER;
    std::int64_t anchors_ = 0;
};

// Convenience: run a fresh walk and scan it.
inline Decomposition decompose_path(const Environment& env, rng::Stream stream, Site start,
                                    std::int64_t n_steps, int axis, std::int64_t window) {
    walk::Walker w(env, stream, start);
    RenewalScan scan;
    scan.push(w.pos()[axis]);
    for (std::int64_t t = 0; t < n_steps; ++t) {
        w.step();
        scan.push(w.pos()[axis]);
    }
    return scan.finalize(window);
}

// -----------------------------------------------------------------------------
// Block statistics and the regeneration velocity estimator
// -----------------------------------------------------------------------------

struct Block {
    std::int64_t dt = 0;
    std::int64_t dx = 0;
};

// Inter-record blocks from the second record onward.
inline std::vector<Block> blocks_of(const Decomposition& dec) {
    std::vector<Block> out;
    for (std::size_t k = 1; k < dec.confirmed.size(); ++k)
        out.push_back({dec.confirmed[k].time - dec.confirmed[k - 1].time,
                       dec.confirmed[k].level - dec.confirmed[k - 1].level});
    return out;
}

struct RenewalVelocity {
    stats::EstimateWithCI speed;      // ratio estimator over pooled blocks
    std::int64_t n_blocks = 0;
    double mean_dt = 0.0;
    double mean_dx = 0.0;
    std::int64_t n_replicas = 0;
};

// Ratio-of-means estimator mean(dx)/mean(dt) with the linearized variance
// Var(dx - v dt) / (m * mean(dt)^2).
inline RenewalVelocity velocity_from_blocks(const std::vector<Block>& blocks, double level,
                                            std::uint64_t seed) {
    if (blocks.size() < 2) throw DomainError("velocity needs at least 2 blocks");
    double sdx = 0.0, sdt = 0.0;
    for (const Block& b : blocks) {
        sdx += static_cast<double>(b.dx);
        sdt += static_cast<double>(b.dt);
    }
    const double m = static_cast<double>(blocks.size());
    const double mdx = sdx / m, mdt = sdt / m;
    const double v = mdx / mdt;
    double ss = 0.0;
    for (const Block& b : blocks) {
        double r = static_cast<double>(b.dx) - v * static_cast<double>(b.dt);
        ss += r * r;
    }
    double se = std::sqrt(ss / (m - 1.0) / m) / mdt;
    double z = stats::z_for_level(level);

    RenewalVelocity out;
    out.speed = {v, v - z * se, v + z * se, level,
                 static_cast<std::int64_t>(blocks.size()), 0.0, seed};
    out.n_blocks = static_cast<std::int64_t>(blocks.size());
    out.mean_dt = mdt;
    out.mean_dx = mdx;
    return out;
}

inline RenewalVelocity renewal_velocity(const EnvironmentLaw& law, std::int64_t n_steps,
                                        std::int64_t n_reps, std::int64_t window, int axis,
                                        double level, std::uint64_t seed) {
    std::vector<Block> pooled;
    for (std::int64_t rep = 0; rep < n_reps; ++rep) {
        std::uint64_t env_seed =
            rng::derive_key(seed, {rng::tag::ENV_REPLICA, static_cast<std::uint64_t>(rep)});
        Environment env(law, env_seed);
        Decomposition dec =
            decompose_path(env, rng::make_stream(seed, {rng::tag::WALK, static_cast<std::uint64_t>(rep)}),
                           Site{}, n_steps, axis, window);
        auto blk = blocks_of(dec);
        pooled.insert(pooled.end(), blk.begin(), blk.end());
    }
    RenewalVelocity out = velocity_from_blocks(pooled, level, seed);
    out.n_replicas = n_reps;
    return out;
}

// -----------------------------------------------------------------------------
// check_iid: lag-1 autocorrelation of block durations and displacements,
// compared against the +-z/sqrt(m) null band.
// -----------------------------------------------------------------------------

struct IidCheck {
    double acf_dt = 0.0;
    double acf_dx = 0.0;
    double band = 0.0;  // +- threshold at the requested level
    std::int64_t n_blocks = 0;
    bool consistent = false;
};

inline IidCheck check_iid(const std::vector<Block>& blocks, double level) {
    if (blocks.size() < 8) throw DomainError("check_iid needs at least 8 blocks");
    std::vector<double> dts, dxs;
    dts.reserve(blocks.size());
    dxs.reserve(blocks.size());
    for (const Block& b : blocks) {
        dts.push_back(static_cast<double>(b.dt));
        dxs.push_back(static_cast<double>(b.dx));
    }
    IidCheck out;
    out.acf_dt = stats::autocorrelation(dts, 1);
    out.acf_dx = stats::autocorrelation(dxs, 1);
    out.band = stats::z_for_level(level) / std::sqrt(static_cast<double>(blocks.size()));
    out.n_blocks = static_cast<std::int64_t>(blocks.size());
    out.consistent = std::fabs(out.acf_dt) <= out.band && std::fabs(out.acf_dx) <= out.band;
    return out;
}

// -----------------------------------------------------------------------------
// descent_probability: P[the walk never drops below its start level].
//
// Paths that drop are definite; paths that survive the horizon may still drop
// later, so the point estimate carries a one-sided censoring margin. For laws
// with sup rho < 1 a path is certified once its level reaches
// `certify_level`, because descending one level from height a succeeds with
// probability at most rho_max in every environment, so the remaining descent
// probability is at most rho_max^(level+1).
// -----------------------------------------------------------------------------

struct DescentProbability {
    stats::EstimateWithCI survive;   // Wilson interval on the survivor fraction
    double band_lo = 0.0;            // survive.lo minus the censoring margin
    double band_hi = 0.0;
    double censor_margin = 0.0;      // mean residual over surviving paths
    std::int64_t n_certified = 0;
    std::int64_t n_censored = 0;     // survivors without certification
    double mean_steps = 0.0;
};

namespace detail {

inline double rho_max_of(const EnvironmentLaw& law) {
    if (const auto* h = std::get_if<Homogeneous>(&law.variant))
        return h->kernel[1] / h->kernel[0];
    if (const auto* o = std::get_if<OneDimDiscrete>(&law.variant)) {
        double r = 0.0;
        for (const auto& a : o->atoms) r = std::max(r, (1.0 - a.p_right) / a.p_right);
        return r;
    }
    return std::numeric_limits<double>::infinity();
}

}  // namespace detail

inline DescentProbability descent_probability(const EnvironmentLaw& law, std::int64_t horizon,
                                              std::int64_t n_reps, std::int64_t certify_level,
                                              double level, std::uint64_t seed) {
    if (law.jumps.d != 1) throw DomainError("descent_probability needs d = 1");
    if (n_reps < 2) throw DomainError("descent_probability needs n_reps >= 2");
    double rho_max = detail::rho_max_of(law);
    bool can_certify = certify_level > 0 && rho_max < 1.0;

    std::int64_t survivors = 0, certified = 0, censored = 0;
    double total_margin = 0.0;
    double total_steps = 0.0;
    for (std::int64_t rep = 0; rep < n_reps; ++rep) {
        std::uint64_t env_seed =
            rng::derive_key(seed, {rng::tag::ENV_REPLICA, static_cast<std::uint64_t>(rep)});
        Environment env(law, env_seed);
        walk::Walker w(env, rng::make_stream(seed, {rng::tag::WALK, static_cast<std::uint64_t>(rep)}));
        bool dropped = false, cert = false;
        std::int64_t t = 0;
        std::int64_t lv = 0;
        for (; t < horizon; ++t) {
            w.step();
            lv = w.pos()[0];
            if (lv < 0) {
                dropped = true;
                break;
            }
            if (can_certify && lv >= certify_level) {
                cert = true;
                break;
            }
        }
        total_steps += static_cast<double>(t + 1);
        if (dropped) continue;
        ++survivors;
        if (cert) {
            ++certified;
            total_margin += std::pow(rho_max, static_cast<double>(lv + 1));
        } else {
            ++censored;
            total_margin += rho_max < 1.0
                                ? std::pow(rho_max, static_cast<double>(lv + 1))
                                : 1.0;
        }
    }

    DescentProbability out;
    out.survive = stats::wilson(survivors, n_reps, level);
    out.survive.seed = seed;
    out.censor_margin = total_margin / static_cast<double>(n_reps);
    out.band_lo = std::max(0.0, out.survive.lo - out.censor_margin);
    out.band_hi = out.survive.hi;
    out.n_certified = certified;
    out.n_censored = censored;
    out.mean_steps = total_steps / static_cast<double>(n_reps);
    return out;
}

// -----------------------------------------------------------------------------
// first_record_identity: under no-descent conditioning the mean level of the
// first regeneration point equals the reciprocal of the no-descent
// probability when level increments never overshoot (nearest-neighbor along
// the axis). Both sides are estimated from the same replicas.
// -----------------------------------------------------------------------------

struct FirstRecordIdentity {
    stats::EstimateWithCI lhs;   // mean first-record level over non-descending paths
    stats::EstimateWithCI rhs;   // 1 / survivor fraction, linearized interval
    bool jointly_consistent = false;
    std::int64_t n_conditioned = 0;
};

inline FirstRecordIdentity first_record_identity(const EnvironmentLaw& law,
                                                 std::int64_t horizon, std::int64_t window,
                                                 std::int64_t n_reps, double level,
                                                 std::uint64_t seed) {
    if (law.jumps.d != 1) throw DomainError("first_record_identity needs d = 1");
    stats::Welford lhs_acc;
    std::int64_t survivors = 0;
    for (std::int64_t rep = 0; rep < n_reps; ++rep) {
        std::uint64_t env_seed =
            rng::derive_key(seed, {rng::tag::ENV_REPLICA, static_cast<std::uint64_t>(rep)});
        Environment env(law, env_seed);
        Decomposition dec =
            decompose_path(env, rng::make_stream(seed, {rng::tag::WALK, static_cast<std::uint64_t>(rep)}),
                           Site{}, horizon, 0, window);
        if (dec.descent_time != walk::NEVER) continue;
        ++survivors;
        if (dec.first_confirmed)
            lhs_acc.add(static_cast<double>(dec.confirmed.front().level));
    }
    if (lhs_acc.n < 2) throw DomainError("no confirmed records under conditioning");

    FirstRecordIdentity out;
    out.lhs = lhs_acc.ci(level);
    out.lhs.seed = seed;
    double p = static_cast<double>(survivors) / static_cast<double>(n_reps);
    stats::EstimateWithCI pw = stats::wilson(survivors, n_reps, level);
    out.rhs = {1.0 / p, 1.0 / pw.hi, 1.0 / pw.lo, level, n_reps, 0.0, seed};
    out.jointly_consistent = stats::jointly_consistent(out.lhs, out.rhs);
    out.n_conditioned = survivors;
    return out;
}

// -----------------------------------------------------------------------------
// radius_moment_probe: stabilization probe of
// E[exp{ max_{i <= tau_1} |X_i|_1^gamma / C }] over replicas.
// -----------------------------------------------------------------------------

struct RadiusMoment {
    stats::StabilizationReport probe;
    double estimate = 0.0;
    double gamma = 0.0;
    double C = 0.0;
    std::int64_t failed_paths = 0;  // no confirmed record within the horizon
};

inline RadiusMoment radius_moment_probe(const EnvironmentLaw& law, double gamma, double C,
                                        std::int64_t horizon, std::int64_t window,
                                        std::int64_t base_reps, std::uint64_t seed) {
    if (!(gamma > 0.0 && C > 0.0)) throw DomainError("radius probe needs gamma, C > 0");
    std::int64_t rep = 0, failed = 0;
    auto draw = [&]() {
        for (;;) {
            std::uint64_t env_seed =
                rng::derive_key(seed, {rng::tag::ENV_REPLICA, static_cast<std::uint64_t>(rep)});
            Environment env(law, env_seed);
            walk::Walker w(env, rng::make_stream(seed, {rng::tag::WALK, static_cast<std::uint64_t>(rep)}));
            ++rep;
            RenewalScan scan;
            scan.push(w.pos()[0]);
            std::int64_t max_l1 = 0;
            std::vector<std::int64_t> l1_at;  // |X|_1 running, indexed by time
            l1_at.push_back(0);
            for (std::int64_t t = 0; t < horizon; ++t) {
                w.step();
                scan.push(w.pos()[0]);
                max_l1 = std::max(max_l1, w.pos().l1(law.jumps.d));
                l1_at.push_back(max_l1);
            }
            Decomposition dec = scan.finalize(window);
            if (!dec.first_confirmed) {
                ++failed;
                continue;
            }
            std::int64_t tau1 = dec.confirmed.front().time;
            double r = static_cast<double>(l1_at[static_cast<std::size_t>(tau1)]);
            return std::exp(std::pow(r, gamma) / C);
        }
    };
    RadiusMoment out;
    out.probe = stats::probe_stabilization(draw, base_reps);
    out.estimate = out.probe.stage_means.back();
    out.gamma = gamma;
    out.C = C;
    out.failed_paths = failed;
    return out;
}

// -----------------------------------------------------------------------------
// tail_profile: empirical survival P[tau_1 > u] on a grid of thresholds.
// -----------------------------------------------------------------------------

struct TailProfile {
    std::vector<std::int64_t> thresholds;
    std::vector<double> survival;        // fraction of replicas with tau_1 > u
    std::int64_t n_unconfirmed = 0;      // counted as tau_1 > horizon
    std::int64_t n_reps = 0;
};

inline TailProfile tail_profile(const EnvironmentLaw& law, std::vector<std::int64_t> thresholds,
                                std::int64_t horizon, std::int64_t window, std::int64_t n_reps,
                                std::uint64_t seed) {
    std::sort(thresholds.begin(), thresholds.end());
    std::vector<std::int64_t> over(thresholds.size(), 0);
    std::int64_t unconfirmed = 0;
    for (std::int64_t rep = 0; rep < n_reps; ++rep) {
        std::uint64_t env_seed =
            rng::derive_key(seed, {rng::tag::ENV_REPLICA, static_cast<std::uint64_t>(rep)});
        Environment env(law, env_seed);
        Decomposition dec =
            decompose_path(env, rng::make_stream(seed, {rng::tag::WALK, static_cast<std::uint64_t>(rep)}),
                           Site{}, horizon, 0, window);
        std::int64_t tau1 = dec.first_confirmed ? dec.confirmed.front().time
                                                : horizon + 1;
        if (!dec.first_confirmed) ++unconfirmed;
        for (std::size_t i = 0; i < thresholds.size(); ++i)
            if (tau1 > thresholds[i]) ++over[i];
    }
    TailProfile out;
    out.thresholds = std::move(thresholds);
    for (std::size_t i = 0; i < out.thresholds.size(); ++i)
        out.survival.push_back(static_cast<double>(over[i]) / static_cast<double>(n_reps));
    out.n_unconfirmed = unconfirmed;
    out.n_reps = n_reps;
    return out;
}

}  // namespace rwre::renewal
