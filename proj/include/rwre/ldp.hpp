#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rwre/env.hpp"
#include "rwre/errors.hpp"
#include "rwre/exact.hpp"
#include "rwre/lattice.hpp"

// =============================================================================
// ldp.hpp
//
// Empirical quenched large-deviation rate function for the holding-time walk:
// I_hat(x) = -(1/n) log p_h^(n)(0, [nx]) from exact log-domain dynamic
// programming in one frozen environment, plus the structural checks that come
// with it (chain superadditivity, midpoint convexity on a grid, the 1D
// reflection identity, parity reconstruction, and the gauge-norm sandwich).
//
// The estimate at finite n carries an O(log n / n) bias; rate tables keep
// the two largest n and a two-point extrapolation visible instead of
// presenting any single number as the limit.
// =============================================================================

namespace rwre::ldp {

constexpr double INF = std::numeric_limits<double>::infinity();

// -----------------------------------------------------------------------------
// Gauge of the unit l1 ball and the minimal step count
// -----------------------------------------------------------------------------

inline std::int64_t gauge_norm(const Site& s, int d) { return s.l1(d); }

// Minimal n with p_h^(n)(0, x) > 0 for the holding walk: |x|_1 steps straight
// there, except the origin needs one hold step.
inline std::int64_t min_steps(const Site& s, int d) {
    std::int64_t l1 = s.l1(d);
    return l1 == 0 ? 1 : l1;
}

// -----------------------------------------------------------------------------
// Work guard shared by the DP entry points
// -----------------------------------------------------------------------------

namespace detail {

inline void check_dp_budget(int d, std::int64_t n) {
    double width = 2.0 * static_cast<double>(n) + 3.0;
    double work = static_cast<double>(n) * std::pow(width, d) * (2.0 * d + 1.0);
    if (work <= 6.0e9) return;
    // Invert the work bound for an actionable message.
    std::int64_t feasible = n;
    while (feasible > 1) {
        double w = 2.0 * static_cast<double>(feasible) + 3.0;
        if (static_cast<double>(feasible) * std::pow(w, d) * (2.0 * d + 1.0) <= 6.0e9) break;
        feasible = feasible * 9 / 10;
    }
    throw ResourceError("n-step DP budget exceeded; largest feasible n for d=" +
                        std::to_string(d) + " is about " + std::to_string(feasible));
}

}  // namespace detail

// -----------------------------------------------------------------------------
// empirical_rate
// -----------------------------------------------------------------------------

struct RateEstimate {
    std::array<double, MAX_DIM> x{};
    Site target{};           // [nx], componentwise floor
    std::int64_t n = 0;
    double I_hat = 0.0;
    bool infinite = false;   // [nx] outside the n-step support
    std::uint64_t env_seed = 0;
};

inline Site floor_scaled(const std::array<double, MAX_DIM>& x, int d, std::int64_t n) {
    Site s;
    for (int j = 0; j < d; ++j)
        s.x[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(
            std::floor(static_cast<double>(n) * x[static_cast<std::size_t>(j)]));
    return s;
}

inline RateEstimate empirical_rate(const Environment& env,
                                   const std::array<double, MAX_DIM>& x, std::int64_t n) {
    if (!env.jumps().include_hold)
        throw DomainError("rate estimates are defined for the holding walk");
    RateEstimate out;
    out.x = x;
    out.n = n;
    out.env_seed = env.master_seed();
    out.target = floor_scaled(x, env.d(), n);
    if (out.target.l1(env.d()) > n) {
        out.infinite = true;
        out.I_hat = INF;
        return out;
    }
    detail::check_dp_budget(env.d(), n);
    exact::StepField f = exact::nstep_log_probabilities(env, Site{}, n);
    double lp = f.v[static_cast<std::size_t>(f.box.index_of(out.target))];
    if (lp == exact::NEG_INF) {
        out.infinite = true;
        out.I_hat = INF;
        return out;
    }
    out.I_hat = -lp / static_cast<double>(n);
    return out;
}

// -----------------------------------------------------------------------------
// superadditivity_check: log p^(n+m)(0, x+y) >= log p^(n)(0,x) +
// log p^(m)(x, x+y), with 1e-12 slack in the log domain.
// -----------------------------------------------------------------------------

struct ChainCheck {
    double log_lhs = 0.0;
    double log_rhs = 0.0;
    bool holds = false;
};

inline ChainCheck superadditivity_check(const Environment& env, std::int64_t n,
                                        std::int64_t m, const Site& x, const Site& y) {
    detail::check_dp_budget(env.d(), n + m);
    Site xy;
    for (int j = 0; j < env.d(); ++j) xy.x[static_cast<std::size_t>(j)] = x[j] + y[j];

    exact::StepField f_nm = exact::nstep_log_probabilities(env, Site{}, n + m);
    exact::StepField f_n = exact::nstep_log_probabilities(env, Site{}, n);
    exact::StepField f_m = exact::nstep_log_probabilities(env, x, m);

    ChainCheck out;
    out.log_lhs = f_nm.box.interior(xy)
                      ? f_nm.v[static_cast<std::size_t>(f_nm.box.index_of(xy))]
                      : exact::NEG_INF;
    double a = f_n.box.interior(x) ? f_n.v[static_cast<std::size_t>(f_n.box.index_of(x))]
                                   : exact::NEG_INF;
    double b = f_m.box.interior(xy) ? f_m.v[static_cast<std::size_t>(f_m.box.index_of(xy))]
                                    : exact::NEG_INF;
    out.log_rhs = (a == exact::NEG_INF || b == exact::NEG_INF) ? exact::NEG_INF : a + b;
    out.holds = out.log_rhs == exact::NEG_INF || out.log_lhs >= out.log_rhs - 1e-12;
    return out;
}

// -----------------------------------------------------------------------------
// rate_curve: I_hat over an x grid at several n in one DP sweep per n, with
// midpoint-convexity and n-drift diagnostics and a two-point bias
// extrapolation from the largest two n.
// -----------------------------------------------------------------------------

struct RateCurve {
    std::vector<std::int64_t> n_grid;            // ascending
    std::vector<double> x_grid;                  // first-axis coordinates
    std::vector<std::vector<double>> I;          // I[n_index][x_index]
    std::vector<std::vector<bool>> infinite;
    std::vector<double> extrapolated;            // per x, from the two largest n
    int convexity_violations = 0;
    double convexity_tolerance = 0.0;
    double max_n_drift = 0.0;  // max |I(n_k) - I(n_{k-1})| over the grid
};

inline RateCurve rate_curve(const Environment& env, std::vector<std::int64_t> n_grid,
                            std::vector<double> x_grid) {
    if (!env.jumps().include_hold)
        throw DomainError("rate estimates are defined for the holding walk");
    if (n_grid.size() < 2) throw DomainError("rate curve needs at least two n values");
    std::sort(n_grid.begin(), n_grid.end());
    std::sort(x_grid.begin(), x_grid.end());
    detail::check_dp_budget(env.d(), n_grid.back());

    RateCurve out;
    out.n_grid = n_grid;
    out.x_grid = x_grid;

    for (std::int64_t n : n_grid) {
        exact::StepField f = exact::nstep_log_probabilities(env, Site{}, n);
        std::vector<double> row;
        std::vector<bool> inf_row;
        for (double x : x_grid) {
            std::array<double, MAX_DIM> xv{};
            xv[0] = x;
            Site t = floor_scaled(xv, env.d(), n);
            double lp = t.l1(env.d()) <= n
                            ? f.v[static_cast<std::size_t>(f.box.index_of(t))]
                            : exact::NEG_INF;
            if (lp == exact::NEG_INF) {
                row.push_back(INF);
                inf_row.push_back(true);
            } else {
                row.push_back(-lp / static_cast<double>(n));
                inf_row.push_back(false);
            }
        }
        out.I.push_back(std::move(row));
        out.infinite.push_back(std::move(inf_row));
    }

    // Midpoint convexity on the largest-n row, tolerance twice the bias scale.
    const auto& top = out.I.back();
    std::int64_t n_top = n_grid.back();
    out.convexity_tolerance = 2.0 * std::log(static_cast<double>(n_top)) /
                              static_cast<double>(n_top);
    for (std::size_t i = 1; i + 1 < top.size(); ++i) {
        if (!std::isfinite(top[i - 1]) || !std::isfinite(top[i]) || !std::isfinite(top[i + 1]))
            continue;
        double gap_lo = x_grid[i] - x_grid[i - 1];
        double gap_hi = x_grid[i + 1] - x_grid[i];
        if (std::fabs(gap_lo - gap_hi) > 1e-12) continue;  // uneven spacing
        if (top[i - 1] + top[i + 1] < 2.0 * top[i] - out.convexity_tolerance)
            ++out.convexity_violations;
    }

    for (std::size_t k = 1; k < out.I.size(); ++k)
        for (std::size_t i = 0; i < x_grid.size(); ++i)
            if (std::isfinite(out.I[k][i]) && std::isfinite(out.I[k - 1][i]))
                out.max_n_drift =
                    std::max(out.max_n_drift, std::fabs(out.I[k][i] - out.I[k - 1][i]));

    // Two-point fit of I_n = I + b log(n)/n through the largest two n.
    std::size_t k2 = out.I.size() - 1, k1 = k2 - 1;
    double g1 = std::log(static_cast<double>(n_grid[k1])) / static_cast<double>(n_grid[k1]);
    double g2 = std::log(static_cast<double>(n_grid[k2])) / static_cast<double>(n_grid[k2]);
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        if (!std::isfinite(out.I[k1][i]) || !std::isfinite(out.I[k2][i])) {
            out.extrapolated.push_back(INF);
            continue;
        }
        double b = (out.I[k1][i] - out.I[k2][i]) / (g1 - g2);
        out.extrapolated.push_back(out.I[k2][i] - b * g2);
    }
    return out;
}

// -----------------------------------------------------------------------------
// symmetry_check_1d: I(-x) - I(x) against -x E[log rho]
// -----------------------------------------------------------------------------

struct SymmetryRow {
    double x = 0.0;
    double lhs = 0.0;  // I_hat(-x) - I_hat(x)
    double rhs = 0.0;  // -x E[log rho]
};

struct SymmetryReport {
    std::vector<SymmetryRow> rows;
    double max_abs_discrepancy = 0.0;
};

inline SymmetryReport symmetry_check_1d(const Environment& env,
                                        const std::vector<double>& x_grid, std::int64_t n,
                                        double mean_log_rho) {
    if (env.d() != 1) throw DomainError("reflection identity needs d = 1");
    if (!env.jumps().include_hold)
        throw DomainError("rate estimates are defined for the holding walk");
    detail::check_dp_budget(1, n);
    exact::StepField f = exact::nstep_log_probabilities(env, Site{}, n);
    auto rate_at = [&](double x) {
        Site t = make_site({static_cast<std::int64_t>(std::floor(x * static_cast<double>(n)))});
        if (t.l1(1) > n) return INF;
        double lp = f.v[static_cast<std::size_t>(f.box.index_of(t))];
        return lp == exact::NEG_INF ? INF : -lp / static_cast<double>(n);
    };
    SymmetryReport out;
    for (double x : x_grid) {
        SymmetryRow row;
        row.x = x;
        row.lhs = rate_at(-x) - rate_at(x);
        row.rhs = -x * mean_log_rho;
        out.rows.push_back(row);
        if (std::isfinite(row.lhs))
            out.max_abs_discrepancy =
                std::max(out.max_abs_discrepancy, std::fabs(row.lhs - row.rhs));
    }
    return out;
}

// -----------------------------------------------------------------------------
// even_odd_reconstruction: p^(2n+1)(0, x) vs sum_e w(0,e) p^(2n)(e, x) in
// linear domain; exact to roundoff.
// -----------------------------------------------------------------------------

struct ParityCheck {
    double direct = 0.0;
    double reconstructed = 0.0;
    double residual = 0.0;
    double mass_direct = 0.0;         // total mass of the (2n+1)-step field
    double mass_reconstructed = 0.0;  // mixture of the one-step-shifted fields
};

inline ParityCheck even_odd_reconstruction(const Environment& env, std::int64_t n,
                                           const Site& x) {
    if (env.jumps().include_hold)
        throw DomainError("parity reconstruction applies to the walk without holding");
    detail::check_dp_budget(env.d(), 2 * n + 1);
    const JumpSet& jumps = env.jumps();
    TransitionKernel k0 = env.kernel_at(Site{});

    exact::StepField direct = exact::nstep_probabilities(env, Site{}, 2 * n + 1);
    ParityCheck out;
    out.direct = direct.box.interior(x)
                     ? direct.v[static_cast<std::size_t>(direct.box.index_of(x))]
                     : 0.0;
    out.mass_direct = exact::total_mass(direct);

    exact::detail::NeumaierSum val, mass;
    for (int m = 0; m < jumps.n_moves(); ++m) {
        if (k0[m] == 0.0) continue;
        Site e = jumps.apply(Site{}, m);
        exact::StepField shifted = exact::nstep_probabilities(env, e, 2 * n);
        double p = shifted.box.interior(x)
                       ? shifted.v[static_cast<std::size_t>(shifted.box.index_of(x))]
                       : 0.0;
        val.add(k0[m] * p);
        mass.add(k0[m] * exact::total_mass(shifted));
    }
    out.reconstructed = val.value();
    out.mass_reconstructed = mass.value();
    out.residual = std::fabs(out.direct - out.reconstructed);
    return out;
}

// -----------------------------------------------------------------------------
// support_matches_gauge: the holding walk reaches y in n steps iff
// |y|_1 <= n (and n >= 1 for y = 0 trivially). Scans a DP field.
// -----------------------------------------------------------------------------

inline bool support_matches_gauge(const Environment& env, std::int64_t n) {
    if (!env.jumps().include_hold)
        throw DomainError("support scan is for the holding walk");
    detail::check_dp_budget(env.d(), n);
    exact::StepField f = exact::nstep_log_probabilities(env, Site{}, n);
    for (std::int64_t i = 0; i < f.box.n_interior(); ++i) {
        Site s = f.box.site_of(i);
        bool reachable = f.v[static_cast<std::size_t>(i)] != exact::NEG_INF;
        bool in_ball = s.l1(env.d()) <= n;
        if (reachable != in_ball) return false;
    }
    return true;
}

}  // namespace rwre::ldp
