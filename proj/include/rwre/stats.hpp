#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

// =============================================================================
// stats.hpp
//
// Monte Carlo result types and the small statistics toolbox used everywhere:
// Welford accumulation, Wilson score intervals for proportions, normal-theory
// intervals for means, medians, least-squares lines, and the doubling-budget
// stabilization probe used to flag divergent (infinite) moments.
// =============================================================================

namespace rwre::stats {

// Two-sided normal quantiles for the confidence levels used in reports.
inline double z_for_level(double level) {
    if (level >= 0.989) return 2.5758293035489004;  // 99%
    if (level >= 0.949) return 1.9599639845400545;  // 95%
    return 1.6448536269514722;                      // 90%
}

// -----------------------------------------------------------------------------
// EstimateWithCI: the universal Monte Carlo result.
// -----------------------------------------------------------------------------

struct EstimateWithCI {
    double estimate = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double level = 0.95;
    std::int64_t replicas = 0;
    double censored_fraction = 0.0;
    std::uint64_t seed = 0;

    bool contains(double v) const { return lo <= v && v <= hi; }
    double half_width() const { return 0.5 * (hi - lo); }
};

// Joint consistency of two independent estimates: |a-b| within the combined
// interval half-widths (used for cross-estimator agreement matrices).
inline bool jointly_consistent(const EstimateWithCI& a, const EstimateWithCI& b) {
    double se = std::sqrt(a.half_width() * a.half_width() +
                          b.half_width() * b.half_width());
    return std::fabs(a.estimate - b.estimate) <= se;
}

// -----------------------------------------------------------------------------
// Welford accumulator
// -----------------------------------------------------------------------------

struct Welford {
    std::int64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double stddev() const { return std::sqrt(variance()); }
    double std_error() const {
        return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
    }

    EstimateWithCI ci(double level = 0.95) const {
        double z = z_for_level(level);
        EstimateWithCI e;
        e.estimate = mean;
        e.lo = mean - z * std_error();
        e.hi = mean + z * std_error();
        e.level = level;
        e.replicas = n;
        return e;
    }
};

// -----------------------------------------------------------------------------
// Wilson score interval for proportions
// -----------------------------------------------------------------------------

inline EstimateWithCI wilson(std::int64_t successes, std::int64_t n,
                             double level = 0.95) {
    EstimateWithCI e;
    e.level = level;
    e.replicas = n;
    if (n <= 0) return e;
    double z = z_for_level(level);
    double p = static_cast<double>(successes) / static_cast<double>(n);
    double z2 = z * z;
    double denom = 1.0 + z2 / static_cast<double>(n);
    double center = (p + z2 / (2.0 * static_cast<double>(n))) / denom;
    double spread = z *
                    std::sqrt(p * (1.0 - p) / static_cast<double>(n) +
                              z2 / (4.0 * static_cast<double>(n) * static_cast<double>(n))) /
                    denom;
    e.estimate = p;
    e.lo = std::max(0.0, center - spread);
    e.hi = std::min(1.0, center + spread);
    return e;
}

// -----------------------------------------------------------------------------
// Order statistics
// -----------------------------------------------------------------------------

inline double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of empty sample");
    std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid) - 1,
                     v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (v[mid - 1] + hi);
}

// -----------------------------------------------------------------------------
// Least squares line y = a + b x with standard error of the slope
// -----------------------------------------------------------------------------

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double slope_se = 0.0;
    double r2 = 0.0;
    int n = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line needs >= 2 paired points");
    int n = static_cast<int>(x.size());
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < n; ++i) {
        mx += x[static_cast<std::size_t>(i)];
        my += y[static_cast<std::size_t>(i)];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int i = 0; i < n; ++i) {
        double dx = x[static_cast<std::size_t>(i)] - mx;
        double dy = y[static_cast<std::size_t>(i)] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0.0) throw std::invalid_argument("fit_line: degenerate x values");
    LineFit f;
    f.n = n;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0.0;
    for (int i = 0; i < n; ++i) {
        double r = y[static_cast<std::size_t>(i)] - f.intercept -
                   f.slope * x[static_cast<std::size_t>(i)];
        ss_res += r * r;
    }
    f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    f.slope_se = n > 2 ? std::sqrt(ss_res / (n - 2) / sxx) : 0.0;
    return f;
}

// -----------------------------------------------------------------------------
// Stabilization probe for possibly-infinite moments
//
// A running mean is recorded at sample budgets B, 2B, 4B, 8B; the estimate is
// declared divergent when any doubling moves it by more than max_ratio
// (relatively) across the three doublings. Numerically this is the only
// observable distinction between finite and infinite expectations.
// -----------------------------------------------------------------------------

struct StabilizationReport {
    std::vector<double> stage_means;  // running mean after each doubling stage
    bool divergent = false;
    double worst_ratio = 0.0;
};

template <class Sampler>
StabilizationReport probe_stabilization(Sampler&& draw, std::int64_t base_budget,
                                        int doublings = 3, double max_ratio = 0.10) {
    StabilizationReport rep;
    Welford acc;
    std::int64_t stage_end = base_budget;
    for (int s = 0; s <= doublings; ++s) {
        while (acc.n < stage_end) acc.add(draw());
        rep.stage_means.push_back(acc.mean);
        stage_end *= 2;
    }
    for (std::size_t i = 1; i < rep.stage_means.size(); ++i) {
        double prev = rep.stage_means[i - 1];
        double cur = rep.stage_means[i];
        double denom = std::max(std::fabs(prev), 1e-300);
        double ratio = std::fabs(cur - prev) / denom;
        rep.worst_ratio = std::max(rep.worst_ratio, ratio);
        if (ratio > max_ratio) rep.divergent = true;
    }
    return rep;
}

// -----------------------------------------------------------------------------
// Autocorrelation at a fixed lag (for block-independence diagnostics)
// -----------------------------------------------------------------------------

inline double autocorrelation(const std::vector<double>& v, int lag) {
    int n = static_cast<int>(v.size());
    if (lag <= 0 || lag >= n) throw std::invalid_argument("bad autocorrelation lag");
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
        double d = v[static_cast<std::size_t>(i)] - mean;
        den += d * d;
        if (i + lag < n) num += d * (v[static_cast<std::size_t>(i + lag)] - mean);
    }
    return den > 0.0 ? num / den : 0.0;
}

}  // namespace rwre::stats
