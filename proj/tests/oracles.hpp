#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

// =============================================================================
// oracles.hpp
//
// Closed-form reference values for the test suite. Everything here is derived
// from textbook formulas with pencil and paper and implemented directly from
// those formulas; nothing includes or calls the library under test.
// =============================================================================

namespace oracle {

// Birth-death chain on {a,...,b} with constant up-probability p, started at z:
// probability of hitting b before a. rho = q/p.
inline double ruin_up(double p, std::int64_t a, std::int64_t z, std::int64_t b) {
    if (!(a <= z && z <= b) || a == b) throw std::invalid_argument("ruin_up bounds");
    double q = 1.0 - p;
    if (p == q) return static_cast<double>(z - a) / static_cast<double>(b - a);
    double rho = q / p;
    return std::expm1(static_cast<double>(z - a) * std::log(rho)) /
           std::expm1(static_cast<double>(b - a) * std::log(rho));
}

inline double ruin_down(double p, std::int64_t a, std::int64_t z, std::int64_t b) {
    return 1.0 - ruin_up(p, a, z, b);
}

// Back-exit probability of the symmetric-length slab (-L, L), started at 0.
inline double slab_back_biased(double p, std::int64_t L) {
    double rho = (1.0 - p) / p;
    double rL = std::pow(rho, static_cast<double>(L));
    return (rL - rL * rL) / (1.0 - rL * rL);
}

// Symmetric walk, slab (-bL, L): back exit is distance-proportional.
inline double slab_back_symmetric(double b) { return 1.0 / (1.0 + b); }

// Mean exit time of the symmetric simple walk from 0 out of (-L, L).
inline double symmetric_exit_time(std::int64_t L) {
    return static_cast<double>(L) * static_cast<double>(L);
}

// Ballistic speed of the 1D i.i.d. walk when E[rho] < 1.
inline double solomon_velocity(double mean_rho) {
    return (1.0 - mean_rho) / (1.0 + mean_rho);
}

// Two-point law with right-probabilities {0.8, 0.4} picked with equal weight:
// E[rho] = (0.25 + 1.5)/2 = 0.875, speed = 0.125/1.875 = 1/15.
constexpr double SOLOMON_SPEED_08_04 = 1.0 / 15.0;

// Sub-ballistic exponent for rho in {2, 1/4} with equal weight: the root of
// (z^3 - 2z^2 + 1) = 0 with z = 2^kappa is the golden ratio, so
// kappa = log(phi)/log(2).
constexpr double KKS_EXPONENT_2_QUARTER = 0.6942419136306174;

// Right-biased simple walk, p > 1/2: probability of never stepping below the
// start is 1 - q/p, and the mean first-record level given no descent is its
// reciprocal.
inline double no_descent_probability(double p) { return 1.0 - (1.0 - p) / p; }
inline double mean_first_record_given_no_descent(double p) {
    return 1.0 / no_descent_probability(p);
}

// Cramer rate function of the homogeneous 1D holding walk: per-step moment
// generating function M(t) = (1-h)(p e^t + q e^{-t}) + h, and
// I(x) = sup_t (t x - log M(t)), solved by bisection on the stationarity
// condition M'(t)/M(t) = x (strictly increasing in t).
inline double legendre_rate_1d(double p, double h, double x) {
    double q = 1.0 - p;
    if (x >= 1.0) return -std::log((1.0 - h) * p);
    if (x <= -1.0) return -std::log((1.0 - h) * q);
    auto drift = [&](double t) {
        double ep = std::exp(t), em = std::exp(-t);
        double M = (1.0 - h) * (p * ep + q * em) + h;
        double Mp = (1.0 - h) * (p * ep - q * em);
        return Mp / M;
    };
    double lo = -60.0, hi = 60.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (drift(mid) < x ? lo : hi) = mid;
    }
    double t = 0.5 * (lo + hi);
    double M = (1.0 - h) * (p * std::exp(t) + q * std::exp(-t)) + h;
    return t * x - std::log(M);
}

// Quenched survival of the two-site edge trap: staying on {0, e} for more
// than 2k steps has probability (w1 w2)^k, and the geometric tail sums to
// (1 - r^{k+1})/(1 - r) with r = w1 w2.
inline double trap_survival(double w1, double w2, int k) {
    return std::pow(w1 * w2, k);
}
inline double trap_partial_sum(double w1, double w2, int k) {
    double r = w1 * w2;
    return (1.0 - std::pow(r, k + 1)) / (1.0 - r);
}

// Inverse moment of a Dirichlet marginal: for weight w_i ~ Beta(a_i, a0-a_i),
// E[w_i^{-s}] = Gamma(a_i - s) Gamma(a0) / (Gamma(a_i) Gamma(a0 - s)), s < a_i.
inline double dirichlet_inverse_moment(double a_i, double a0, double s) {
    if (s >= a_i) throw std::invalid_argument("inverse moment diverges");
    return std::exp(std::lgamma(a_i - s) + std::lgamma(a0) - std::lgamma(a_i) -
                    std::lgamma(a0 - s));
}

// Per-axis variance of one step of a balanced walk with axis weight w_j on
// each of +e_j and -e_j: E[(step_j)^2] = 2 w_j.
inline double balanced_axis_variance(double w_j) { return 2.0 * w_j; }

// Back-exit probability of the symmetric walk from 0 out of (-L, 10L].
constexpr double SYMMETRIC_WIDE_BAND_BACK = 10.0 / 11.0;

// Binomial n-step distribution of the homogeneous walk: P[X_n = k] with
// k = 2j - n, independent recomputation for small n by log-binomials.
inline double binomial_walk_pmf(double p, std::int64_t n, std::int64_t k) {
    if ((n + k) % 2 != 0 || k > n || k < -n) return 0.0;
    std::int64_t up = (n + k) / 2;
    double lb = std::lgamma(static_cast<double>(n) + 1.0) -
                std::lgamma(static_cast<double>(up) + 1.0) -
                std::lgamma(static_cast<double>(n - up) + 1.0);
    return std::exp(lb + static_cast<double>(up) * std::log(p) +
                    static_cast<double>(n - up) * std::log(1.0 - p));
}

}  // namespace oracle
