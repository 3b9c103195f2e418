#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rwre/env.hpp"
#include "rwre/errors.hpp"
#include "rwre/rng.hpp"
#include "rwre/stats.hpp"

// =============================================================================
// diagnostics.hpp
//
// Law-level diagnostics: ellipticity constants and inverse moments, the
// per-move exponential moment condition, edge-trap expectations, and the
// nestling classification of the local-drift support.
//
// Possibly-infinite expectations are never "computed": they are probed with
// the doubling-budget stabilization test from stats.hpp and reported with a
// divergence flag.
// =============================================================================

namespace rwre::diag {

// -----------------------------------------------------------------------------
// ellipticity_report
// -----------------------------------------------------------------------------

struct EllipticityReport {
    double min_entry_estimate = 1.0;  // min over samples and moves
    double kappa_hat = 1.0;           // same value; the empirical floor
    double inverse_moment = 0.0;      // sup_e estimate of E[w(0,e)^{-alpha}]
    double alpha = 0.0;
    bool divergent = false;
    stats::StabilizationReport worst_probe;
};

inline EllipticityReport ellipticity_report(const EnvironmentLaw& law,
                                            std::int64_t n_samples, double alpha,
                                            std::uint64_t seed) {
    if (n_samples < 1) throw DomainError("ellipticity_report needs n_samples >= 1");
    EllipticityReport rep;
    rep.alpha = alpha;
    const int n_dir = 2 * law.jumps.d;

    {
        rng::Stream s = rng::make_stream(seed, {rng::tag::MISC, 0});
        for (std::int64_t i = 0; i < n_samples; ++i) {
            TransitionKernel k = law.sample(s);
            for (int m = 0; m < n_dir; ++m)
                rep.min_entry_estimate = std::min(rep.min_entry_estimate, k[m]);
        }
        rep.kappa_hat = rep.min_entry_estimate;
    }

    std::int64_t base = std::max<std::int64_t>(1, n_samples / 8);
    for (int m = 0; m < n_dir; ++m) {
        rng::Stream s = rng::make_stream(seed, {rng::tag::MISC, 1, static_cast<std::uint64_t>(m)});
        auto draw = [&]() {
            TransitionKernel k = law.sample(s);
            return std::pow(k[m], -alpha);
        };
        stats::StabilizationReport probe = stats::probe_stabilization(draw, base);
        double est = probe.stage_means.back();
        if (est > rep.inverse_moment) {
            rep.inverse_moment = est;
            rep.worst_probe = probe;
        }
        if (probe.divergent) rep.divergent = true;
    }
    return rep;
}

// -----------------------------------------------------------------------------
// check_E_beta: per-move exponents beta_e with combinatorial margin
//   2*sum_e beta_e - sup_{e'}(beta_{e'} + beta_{-e'}) > beta_target
// and finiteness of E[prod_e w(0,e)^{-beta_e}].
// -----------------------------------------------------------------------------

struct EBetaReport {
    double combinatorial_margin = 0.0;
    double moment_estimate = 0.0;
    bool moment_divergent = false;
    bool satisfied = false;
    stats::StabilizationReport probe;
};

inline EBetaReport check_E_beta(const EnvironmentLaw& law,
                                const std::vector<double>& betas, double beta_target,
                                std::int64_t n_samples, std::uint64_t seed) {
    const int n_dir = 2 * law.jumps.d;
    if (static_cast<int>(betas.size()) != n_dir)
        throw DomainError("check_E_beta needs one beta per direction");
    for (double b : betas)
        if (!(b > 0.0)) throw DomainError("check_E_beta needs positive betas");

    EBetaReport rep;
    double total = 0.0;
    for (double b : betas) total += b;
    double sup_pair = 0.0;
    for (int m = 0; m < n_dir; m += 2)
        sup_pair = std::max(sup_pair, betas[static_cast<std::size_t>(m)] +
                                          betas[static_cast<std::size_t>(m + 1)]);
    rep.combinatorial_margin = 2.0 * total - sup_pair - beta_target;

    rng::Stream s = rng::make_stream(seed, {rng::tag::MISC, 2});
    auto draw = [&]() {
        TransitionKernel k = law.sample(s);
        double log_v = 0.0;
        for (int m = 0; m < n_dir; ++m)
            log_v -= betas[static_cast<std::size_t>(m)] * std::log(k[m]);
        return std::exp(log_v);
    };
    rep.probe = stats::probe_stabilization(draw, std::max<std::int64_t>(1, n_samples / 8));
    rep.moment_estimate = rep.probe.stage_means.back();
    rep.moment_divergent = rep.probe.divergent;
    rep.satisfied = rep.combinatorial_margin > 0.0 && !rep.moment_divergent;
    return rep;
}

// -----------------------------------------------------------------------------
// trap_criterion: per-move estimate of E[1/(1 - w(0,e) w'(0,-e))] with w, w'
// independent kernel draws (the two endpoints of a trapping edge are distinct
// sites, hence independent under the i.i.d. law).
// -----------------------------------------------------------------------------

struct TrapReport {
    std::vector<double> estimates;      // per move
    std::vector<bool> divergent;        // per move
    std::vector<double> worst_ratios;   // per move, from the probe
};

inline TrapReport trap_criterion(const EnvironmentLaw& law, std::int64_t n_samples,
                                 std::uint64_t seed) {
    if (n_samples < 1) throw DomainError("trap_criterion needs n_samples >= 1");
    const int n_dir = 2 * law.jumps.d;
    TrapReport rep;
    std::int64_t base = std::max<std::int64_t>(1, n_samples / 8);
    for (int m = 0; m < n_dir; ++m) {
        int opp = law.jumps.opposite(m);
        rng::Stream s = rng::make_stream(seed, {rng::tag::MISC, 3, static_cast<std::uint64_t>(m)});
        auto draw = [&]() {
            TransitionKernel a = law.sample(s);
            TransitionKernel b = law.sample(s);
            double prod = a[m] * b[opp];
            return 1.0 / (1.0 - prod);
        };
        stats::StabilizationReport probe = stats::probe_stabilization(draw, base);
        rep.estimates.push_back(probe.stage_means.back());
        rep.divergent.push_back(probe.divergent);
        rep.worst_ratios.push_back(probe.worst_ratio);
    }
    return rep;
}

// -----------------------------------------------------------------------------
// edge_survival: quenched probability of staying on the edge {0, e_axis} for
// more than 2k steps. Without holding, the only surviving route alternates
// between the endpoints, so the mass evolves by a 2x2 transfer product; the
// curve is accumulated step by step rather than closed-form so it exercises
// the environment plumbing it is meant to test.
// -----------------------------------------------------------------------------

struct EdgeSurvival {
    double w_forward = 0.0;   // kernel entry at 0 toward the far endpoint
    double w_backward = 0.0;  // kernel entry at the far endpoint back toward 0
    std::vector<double> survival;  // survival[k] = P[stay > 2k], k = 0..k_max
};

inline EdgeSurvival edge_survival(const Environment& env, int k_max, int axis = 0) {
    const JumpSet& jumps = env.jumps();
    if (jumps.include_hold) throw DomainError("edge survival assumes a walk without holding");
    int fwd = 2 * axis;
    int bwd = jumps.opposite(fwd);
    EdgeSurvival out;
    out.w_forward = env.kernel_at(Site{})[fwd];
    out.w_backward = env.kernel_at(jumps.apply(Site{}, fwd))[bwd];
    double mass = 1.0;
    out.survival.push_back(mass);
    for (int k = 1; k <= k_max; ++k) {
        mass *= out.w_forward * out.w_backward;
        out.survival.push_back(mass);
    }
    return out;
}

// -----------------------------------------------------------------------------
// nestling_class: position of the origin relative to the convex hull of the
// sampled local drifts (d <= 2).
// -----------------------------------------------------------------------------

enum class Nestling { NonNestling, MarginallyNestling, PlainNestling };

struct NestlingReport {
    Nestling cls = Nestling::NonNestling;
    bool degenerate_point = false;  // all sampled drifts coincide
    double hull_distance = 0.0;     // unsigned distance of 0 to the hull boundary
};

namespace detail {

constexpr double HULL_TOL = 1e-9;

inline double cross(double ox, double oy, double ax, double ay, double bx, double by) {
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox);
}

// Andrew monotone chain; returns hull in counter-clockwise order.
inline std::vector<std::pair<double, double>> convex_hull(
    std::vector<std::pair<double, double>> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    std::size_t n = pts.size();
    if (n <= 2) return pts;
    std::vector<std::pair<double, double>> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2].first, hull[k - 2].second, hull[k - 1].first,
                               hull[k - 1].second, pts[i].first, pts[i].second) <= 0.0)
            --k;
        hull[k++] = pts[i];
    }
    std::size_t lower = k + 1;
    for (std::size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2].first, hull[k - 2].second, hull[k - 1].first,
                                   hull[k - 1].second, pts[i].first, pts[i].second) <= 0.0)
            --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

inline double point_segment_distance(double px, double py, double ax, double ay,
                                     double bx, double by) {
    double dx = bx - ax, dy = by - ay;
    double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    double qx = ax + t * dx - px, qy = ay + t * dy - py;
    return std::sqrt(qx * qx + qy * qy);
}

}  // namespace detail

inline NestlingReport nestling_class(const EnvironmentLaw& law, std::int64_t n_samples,
                                     std::uint64_t seed) {
    if (n_samples < 2) throw DomainError("nestling_class needs n_samples >= 2");
    if (law.jumps.d > 2) throw DomainError("nestling_class supports d <= 2");

    rng::Stream s = rng::make_stream(seed, {rng::tag::MISC, 4});
    NestlingReport rep;

    if (law.jumps.d == 1) {
        double lo = 1.0, hi = -1.0;
        for (std::int64_t i = 0; i < n_samples; ++i) {
            TransitionKernel k = law.sample(s);
            double dr = local_drift(k, law.jumps)[0];
            lo = std::min(lo, dr);
            hi = std::max(hi, dr);
        }
        rep.degenerate_point = (hi - lo) <= detail::HULL_TOL;
        double dist = std::min(std::fabs(lo), std::fabs(hi));
        rep.hull_distance = dist;
        if (lo > detail::HULL_TOL || hi < -detail::HULL_TOL)
            rep.cls = Nestling::NonNestling;
        else if (dist <= detail::HULL_TOL)
            rep.cls = Nestling::MarginallyNestling;
        else
            rep.cls = Nestling::PlainNestling;
        return rep;
    }

    std::vector<std::pair<double, double>> pts;
    pts.reserve(static_cast<std::size_t>(n_samples));
    for (std::int64_t i = 0; i < n_samples; ++i) {
        TransitionKernel k = law.sample(s);
        auto dr = local_drift(k, law.jumps);
        pts.emplace_back(dr[0], dr[1]);
    }

    auto hull = detail::convex_hull(pts);
    if (hull.size() == 1) {
        rep.degenerate_point = true;
        double dist = std::hypot(hull[0].first, hull[0].second);
        rep.hull_distance = dist;
        rep.cls = dist <= detail::HULL_TOL ? Nestling::MarginallyNestling
                                           : Nestling::NonNestling;
        return rep;
    }
    if (hull.size() == 2) {
        double dist = detail::point_segment_distance(0.0, 0.0, hull[0].first,
                                                     hull[0].second, hull[1].first,
                                                     hull[1].second);
        rep.hull_distance = dist;
        rep.cls = dist <= detail::HULL_TOL ? Nestling::MarginallyNestling
                                           : Nestling::NonNestling;
        return rep;
    }

    bool inside = true;
    double min_edge_dist = 1e300;
    std::size_t h = hull.size();
    for (std::size_t i = 0; i < h; ++i) {
        const auto& a = hull[i];
        const auto& b = hull[(i + 1) % h];
        if (detail::cross(a.first, a.second, b.first, b.second, 0.0, 0.0) < 0.0)
            inside = false;
        min_edge_dist = std::min(min_edge_dist,
                                 detail::point_segment_distance(0.0, 0.0, a.first,
                                                                a.second, b.first,
                                                                b.second));
    }
    rep.hull_distance = min_edge_dist;
    if (min_edge_dist <= detail::HULL_TOL)
        rep.cls = Nestling::MarginallyNestling;
    else
        rep.cls = inside ? Nestling::PlainNestling : Nestling::NonNestling;
    return rep;
}

inline std::string to_string(Nestling n) {
    switch (n) {
        case Nestling::NonNestling: return "non_nestling";
        case Nestling::MarginallyNestling: return "marginally_nestling";
        default: return "plain_nestling";
    }
}

}  // namespace rwre::diag
