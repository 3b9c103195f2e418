#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "rwre/env.hpp"
#include "rwre/errors.hpp"
#include "rwre/lattice.hpp"
#include "rwre/rng.hpp"

// =============================================================================
// walk.hpp
//
// Quenched walk stepping and the stopping-time primitives everything else is
// built from: fixed-horizon runs with snapshots, two-sided exits along a
// direction, and first strict descents below the starting level.
//
// A Walker owns its noise stream but only borrows the environment, so many
// walkers can traverse one realized environment (quenched replicas) or each
// walker can get a fresh environment seed (annealed replicas).
// =============================================================================

namespace rwre::walk {

constexpr std::int64_t NEVER = std::numeric_limits<std::int64_t>::max();

// -----------------------------------------------------------------------------
// Walker
// -----------------------------------------------------------------------------

class Walker {
  public:
    Walker(const Environment& env, rng::Stream stream, Site start = Site{})
        : env_(&env), stream_(stream), pos_(start) {}

    const Site& pos() const { return pos_; }
    std::int64_t steps() const { return steps_; }

    // Advance one step; returns the move index taken.
    int step() {
        TransitionKernel k = env_->kernel_at(pos_);
        int m = k.sample_move(stream_);
        pos_ = env_->jumps().apply(pos_, m);
        ++steps_;
        return m;
    }

    const Environment& env() const { return *env_; }

  private:
    const Environment* env_;
    rng::Stream stream_;
    Site pos_;
    std::int64_t steps_ = 0;
};

// -----------------------------------------------------------------------------
// Fixed-horizon run with snapshots and running extremes along one axis
// -----------------------------------------------------------------------------

struct PathSummary {
    Site final_pos{};
    std::int64_t n_steps = 0;
    std::vector<Site> snapshots;                // positions at snapshot_times
    std::vector<std::int64_t> max_abs_at_snap;  // running max |x[axis]| at each
    std::int64_t max_level = 0;                 // running extremes of x[axis]
    std::int64_t min_level = 0;
};

// snapshot_times must be sorted ascending; a trailing time equal to n_steps is
// allowed. axis selects the coordinate tracked for extremes.
inline PathSummary run_fixed(Walker& w, std::int64_t n_steps,
                             const std::vector<std::int64_t>& snapshot_times = {},
                             int axis = 0) {
    PathSummary out;
    std::int64_t level0 = w.pos()[axis];
    std::int64_t max_abs = 0;
    std::size_t next_snap = 0;
    auto take_snap = [&](std::int64_t t) {
        while (next_snap < snapshot_times.size() && snapshot_times[next_snap] == t) {
            out.snapshots.push_back(w.pos());
            out.max_abs_at_snap.push_back(max_abs);
            ++next_snap;
        }
    };
    out.max_level = out.min_level = level0;
    take_snap(0);
    for (std::int64_t t = 1; t <= n_steps; ++t) {
        w.step();
        std::int64_t lv = w.pos()[axis];
        if (lv > out.max_level) out.max_level = lv;
        if (lv < out.min_level) out.min_level = lv;
        std::int64_t ab = lv >= 0 ? lv : -lv;
        if (ab > max_abs) max_abs = ab;
        take_snap(t);
    }
    out.final_pos = w.pos();
    out.n_steps = n_steps;
    return out;
}

// -----------------------------------------------------------------------------
// Two-sided exit along an axis
// -----------------------------------------------------------------------------

struct ExitResult {
    int side = 0;               // +1 front (level >= high), -1 back (level <= low), 0 timeout
    std::int64_t time = NEVER;  // steps taken at exit; NEVER on timeout
    Site where{};
    bool timed_out = false;
};

// First time x[axis] leaves the open band (low, high). Levels are evaluated
// after each step; the start must lie strictly inside the band.
inline ExitResult exit_band(Walker& w, int axis, std::int64_t low, std::int64_t high,
                            std::int64_t max_steps) {
    if (!(w.pos()[axis] > low && w.pos()[axis] < high))
        throw DomainError("exit_band start must be strictly inside the band");
    ExitResult out;
    for (std::int64_t t = 1; t <= max_steps; ++t) {
        w.step();
        std::int64_t lv = w.pos()[axis];
        if (lv >= high) {
            out.side = +1;
            out.time = t;
            out.where = w.pos();
            return out;
        }
        if (lv <= low) {
            out.side = -1;
            out.time = t;
            out.where = w.pos();
            return out;
        }
    }
    out.timed_out = true;
    out.where = w.pos();
    return out;
}

// -----------------------------------------------------------------------------
// First strict descent below the starting level
// -----------------------------------------------------------------------------

struct DescentResult {
    std::int64_t time = NEVER;  // first t >= 1 with x[axis] < start level
    bool censored = false;      // horizon hit without descending
    std::int64_t max_level_seen = 0;
    Site where{};
};

inline DescentResult first_descent(Walker& w, int axis, std::int64_t max_steps) {
    DescentResult out;
    std::int64_t level0 = w.pos()[axis];
    out.max_level_seen = level0;
    for (std::int64_t t = 1; t <= max_steps; ++t) {
        w.step();
        std::int64_t lv = w.pos()[axis];
        if (lv > out.max_level_seen) out.max_level_seen = lv;
        if (lv < level0) {
            out.time = t;
            out.where = w.pos();
            return out;
        }
    }
    out.censored = true;
    out.where = w.pos();
    return out;
}

// -----------------------------------------------------------------------------
// Cesaro averages of a scalar sequence: out[k] = mean(v[0..k]).
// -----------------------------------------------------------------------------

inline std::vector<double> cesaro_mean(const std::vector<double>& v) {
    std::vector<double> out(v.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        acc += v[i];
        out[i] = acc / static_cast<double>(i + 1);
    }
    return out;
}

}  // namespace rwre::walk
