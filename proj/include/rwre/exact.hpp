#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "rwre/env.hpp"
#include "rwre/errors.hpp"
#include "rwre/lattice.hpp"

// =============================================================================
// exact.hpp
//
// Exact quenched computations on finite domains: harmonic solves for exit
// probabilities and expected exit times, n-step transition fields in linear
// and log domain, and invariant measures of periodized environments.
//
// Exit systems (I - P)u = b have an M-matrix left-hand side (weakly
// diagonally dominant, strictly at rows adjacent to the boundary), so banded
// Gaussian elimination without pivoting is stable; with row-major ordering
// the bandwidth is the lateral slice size, which keeps the 1D case exactly
// tridiagonal. Quantities near 0 or 1 are solved on the side where they are
// small: callers pick the boundary set whose probability they need, never
// compute 1 - u.
// =============================================================================

namespace rwre::exact {

constexpr double NEG_INF = -std::numeric_limits<double>::infinity();

// -----------------------------------------------------------------------------
// Box: axis-aligned domain. Interior sites satisfy lo[j] < x_j < hi[j] for
// every axis; boundary sites are non-interior sites reachable in one step.
// -----------------------------------------------------------------------------

struct Box {
    int d = 1;
    std::array<std::int64_t, MAX_DIM> lo{};
    std::array<std::int64_t, MAX_DIM> hi{};

    static Box make(int dim, std::initializer_list<std::pair<std::int64_t, std::int64_t>> ranges) {
        Box b;
        b.d = dim;
        int j = 0;
        for (auto [l, h] : ranges) {
            b.lo[static_cast<std::size_t>(j)] = l;
            b.hi[static_cast<std::size_t>(j)] = h;
            ++j;
        }
        if (j != dim) throw DomainError("box needs one range per axis");
        for (int k = 0; k < dim; ++k)
            if (b.width(k) < 1) throw DomainError("box has empty interior");
        return b;
    }

    std::int64_t width(int j) const {
        return hi[static_cast<std::size_t>(j)] - lo[static_cast<std::size_t>(j)] - 1;
    }

    std::int64_t n_interior() const {
        std::int64_t n = 1;
        for (int j = 0; j < d; ++j) n *= width(j);
        return n;
    }

    bool interior(const Site& s) const {
        for (int j = 0; j < d; ++j)
            if (!(s[j] > lo[static_cast<std::size_t>(j)] && s[j] < hi[static_cast<std::size_t>(j)]))
                return false;
        return true;
    }

    // Row-major index with axis 0 slowest; interior sites only.
    std::int64_t index_of(const Site& s) const {
        std::int64_t idx = 0;
        for (int j = 0; j < d; ++j)
            idx = idx * width(j) + (s[j] - lo[static_cast<std::size_t>(j)] - 1);
        return idx;
    }

    Site site_of(std::int64_t idx) const {
        Site s;
        for (int j = d - 1; j >= 0; --j) {
            std::int64_t w = width(j);
            s.x[static_cast<std::size_t>(j)] = lo[static_cast<std::size_t>(j)] + 1 + idx % w;
            idx /= w;
        }
        return s;
    }

    // Largest move offset under the row-major ordering: the bandwidth of the
    // exit system.
    std::int64_t bandwidth() const {
        std::int64_t b = 1;
        for (int j = 1; j < d; ++j) b *= width(j);
        return b;
    }
};

struct SolveReport {
    std::int64_t unknowns = 0;
    double residual_inf = 0.0;
    const char* method = "";
};

namespace detail {

// Compensated accumulation for long sums of same-sign terms.
struct NeumaierSum {
    double s = 0.0;
    double c = 0.0;
    void add(double v) {
        double t = s + v;
        c += std::fabs(s) >= std::fabs(v) ? (s - t) + v : (v - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

// Banded LU without pivoting, in-place. band[i] holds columns i-b .. i+b of
// row i. Valid for M-matrices; the diagonal stays positive throughout.
class BandedSystem {
  public:
    BandedSystem(std::int64_t n, std::int64_t b)
        : n_(n), b_(b), band_(static_cast<std::size_t>(n * (2 * b + 1)), 0.0) {}

    double& at(std::int64_t i, std::int64_t j) {
        return band_[static_cast<std::size_t>(i * (2 * b_ + 1) + (j - i + b_))];
    }
    double at(std::int64_t i, std::int64_t j) const {
        return band_[static_cast<std::size_t>(i * (2 * b_ + 1) + (j - i + b_))];
    }

    void factor() {
        for (std::int64_t k = 0; k < n_; ++k) {
            double piv = at(k, k);
            if (!(piv > 0.0))
                throw NumericalError("banded elimination lost positivity of the pivot");
            std::int64_t imax = std::min(n_ - 1, k + b_);
            std::int64_t jmax = std::min(n_ - 1, k + b_);
            for (std::int64_t i = k + 1; i <= imax; ++i) {
                double f = at(i, k) / piv;
                if (f == 0.0) continue;
                at(i, k) = f;  // store the multiplier in place of the zero
                for (std::int64_t j = k + 1; j <= jmax; ++j) at(i, j) -= f * at(k, j);
            }
        }
        factored_ = true;
    }

    void solve(std::vector<double>& x) const {
        if (!factored_) throw NumericalError("solve before factor");
        for (std::int64_t k = 0; k < n_; ++k) {
            std::int64_t imax = std::min(n_ - 1, k + b_);
            for (std::int64_t i = k + 1; i <= imax; ++i)
                x[static_cast<std::size_t>(i)] -= at(i, k) * x[static_cast<std::size_t>(k)];
        }
        for (std::int64_t i = n_ - 1; i >= 0; --i) {
            double v = x[static_cast<std::size_t>(i)];
            std::int64_t jmax = std::min(n_ - 1, i + b_);
            for (std::int64_t j = i + 1; j <= jmax; ++j)
                v -= at(i, j) * x[static_cast<std::size_t>(j)];
            x[static_cast<std::size_t>(i)] = v / at(i, i);
        }
    }

  private:
    std::int64_t n_;
    std::int64_t b_;
    std::vector<double> band_;
    bool factored_ = false;
};

}  // namespace detail

// -----------------------------------------------------------------------------
// harmonic_solve: u(x) = sum_m w(x,m) u(x + e_m) + c for interior x, with
// u = g on the boundary. c = 0 gives exit probabilities (g the indicator of
// the target set), c = 1 with g = 0 gives expected exit times.
// -----------------------------------------------------------------------------

struct HarmonicSolution {
    std::vector<double> u;  // indexed by Box::index_of
    SolveReport report;
};

inline HarmonicSolution harmonic_solve(const Environment& env, const Box& box,
                                       const std::function<double(const Site&)>& boundary_value,
                                       double rhs_constant = 0.0) {
    if (env.d() != box.d) throw DomainError("box dimension must match the environment");
    const JumpSet& jumps = env.jumps();
    const std::int64_t n = box.n_interior();
    const std::int64_t bw = box.bandwidth();
    if (n > 2'000'000) throw ResourceError("exit system too large");

    detail::BandedSystem sys(n, bw);
    std::vector<double> rhs(static_cast<std::size_t>(n), rhs_constant);
    std::vector<TransitionKernel> kernels(static_cast<std::size_t>(n));

    for (std::int64_t i = 0; i < n; ++i) {
        Site x = box.site_of(i);
        TransitionKernel k = env.kernel_at(x);
        kernels[static_cast<std::size_t>(i)] = k;
        sys.at(i, i) = 1.0;
        for (int m = 0; m < jumps.n_moves(); ++m) {
            if (k[m] == 0.0) continue;
            Site y = jumps.apply(x, m);
            if (box.interior(y)) {
                sys.at(i, box.index_of(y)) -= k[m];
            } else {
                double g = boundary_value(y);
                if (g != 0.0) rhs[static_cast<std::size_t>(i)] += k[m] * g;
            }
        }
    }

    HarmonicSolution out;
    out.u = rhs;  // keep rhs for the residual check below
    sys.factor();
    sys.solve(out.u);

    // Residual of the original system at the solution.
    double res = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        Site x = box.site_of(i);
        const TransitionKernel& k = kernels[static_cast<std::size_t>(i)];
        detail::NeumaierSum acc;
        for (int m = 0; m < jumps.n_moves(); ++m) {
            if (k[m] == 0.0) continue;
            Site y = jumps.apply(x, m);
            double uy = box.interior(y) ? out.u[static_cast<std::size_t>(box.index_of(y))]
                                        : boundary_value(y);
            acc.add(k[m] * uy);
        }
        res = std::max(res, std::fabs(out.u[static_cast<std::size_t>(i)] -
                                      (acc.value() + rhs_constant)));
    }

    out.report.unknowns = n;
    out.report.residual_inf = res;
    out.report.method = "banded_lu";
    return out;
}

// -----------------------------------------------------------------------------
// Exit probability and expected exit time wrappers
// -----------------------------------------------------------------------------

// Probability, from each interior site, of exiting through {target}. Boundary
// membership is evaluated on the first site outside the box.
inline HarmonicSolution exit_probability(const Environment& env, const Box& box,
                                         const std::function<bool(const Site&)>& target) {
    return harmonic_solve(env, box, [&](const Site& s) { return target(s) ? 1.0 : 0.0; }, 0.0);
}

inline HarmonicSolution expected_exit_time(const Environment& env, const Box& box) {
    return harmonic_solve(env, box, [](const Site&) { return 0.0; }, 1.0);
}

// -----------------------------------------------------------------------------
// n-step transition fields. The support box after n steps from `start` is
// clipped to |x_j - start_j| <= n.
// -----------------------------------------------------------------------------

struct StepField {
    Box box;                // field box: interior holds the support
    std::vector<double> v;  // probability (linear) or log-probability (log)
    std::int64_t n_steps = 0;

    double at(const Site& s) const {
        if (!box.interior(s)) return NEG_INF;  // callers in log domain
        return v[static_cast<std::size_t>(box.index_of(s))];
    }
};

namespace detail {

inline Box support_box(const Site& start, int d, std::int64_t n) {
    Box b;
    b.d = d;
    for (int j = 0; j < d; ++j) {
        b.lo[static_cast<std::size_t>(j)] = start[j] - n - 1;
        b.hi[static_cast<std::size_t>(j)] = start[j] + n + 1;
    }
    return b;
}

}  // namespace detail

// Linear-domain DP; exact up to roundoff, usable while probabilities stay
// above the double underflow threshold.
inline StepField nstep_probabilities(const Environment& env, const Site& start,
                                     std::int64_t n) {
    const JumpSet& jumps = env.jumps();
    Box box = detail::support_box(start, env.d(), n);
    if (box.n_interior() > 8'000'000) throw ResourceError("n-step support too large");
    const std::int64_t sz = box.n_interior();

    std::vector<double> cur(static_cast<std::size_t>(sz), 0.0);
    std::vector<double> nxt(static_cast<std::size_t>(sz), 0.0);
    cur[static_cast<std::size_t>(box.index_of(start))] = 1.0;

    for (std::int64_t t = 0; t < n; ++t) {
        std::fill(nxt.begin(), nxt.end(), 0.0);
        for (std::int64_t i = 0; i < sz; ++i) {
            double p = cur[static_cast<std::size_t>(i)];
            if (p == 0.0) continue;
            Site x = box.site_of(i);
            TransitionKernel k = env.kernel_at(x);
            for (int m = 0; m < jumps.n_moves(); ++m) {
                if (k[m] == 0.0) continue;
                Site y = jumps.apply(x, m);
                nxt[static_cast<std::size_t>(box.index_of(y))] += p * k[m];
            }
        }
        cur.swap(nxt);
    }

    StepField out;
    out.box = box;
    out.v = std::move(cur);
    out.n_steps = n;
    return out;
}

inline double total_mass(const StepField& f) {
    detail::NeumaierSum acc;
    for (double p : f.v) acc.add(p);
    return acc.value();
}

// Log-domain DP with log-sum-exp combination; probabilities may be far below
// the double underflow threshold.
inline StepField nstep_log_probabilities(const Environment& env, const Site& start,
                                         std::int64_t n) {
    const JumpSet& jumps = env.jumps();
    Box box = detail::support_box(start, env.d(), n);
    if (box.n_interior() > 8'000'000) throw ResourceError("n-step support too large");
    const std::int64_t sz = box.n_interior();
    const int nm = jumps.n_moves();

    std::vector<double> cur(static_cast<std::size_t>(sz), NEG_INF);
    std::vector<double> nxt(static_cast<std::size_t>(sz), NEG_INF);
    cur[static_cast<std::size_t>(box.index_of(start))] = 0.0;

    // Push log-weights move by move, then combine per site.
    std::vector<double> terms(static_cast<std::size_t>(nm));
    for (std::int64_t t = 0; t < n; ++t) {
        std::fill(nxt.begin(), nxt.end(), NEG_INF);
        for (std::int64_t i = 0; i < sz; ++i) {
            double lp = cur[static_cast<std::size_t>(i)];
            if (lp == NEG_INF) continue;
            Site x = box.site_of(i);
            TransitionKernel k = env.kernel_at(x);
            for (int m = 0; m < nm; ++m) {
                if (k[m] == 0.0) continue;
                Site y = jumps.apply(x, m);
                double cand = lp + std::log(k[m]);
                double& slot = nxt[static_cast<std::size_t>(box.index_of(y))];
                if (slot == NEG_INF) {
                    slot = cand;
                } else if (cand > slot) {
                    slot = cand + std::log1p(std::exp(slot - cand));
                } else {
                    slot = slot + std::log1p(std::exp(cand - slot));
                }
            }
        }
        cur.swap(nxt);
    }

    StepField out;
    out.box = box;
    out.v = std::move(cur);
    out.n_steps = n;
    return out;
}

// -----------------------------------------------------------------------------
// Dense LU with partial pivoting, for the torus stationarity system where
// band structure is destroyed by wraparound.
// -----------------------------------------------------------------------------

namespace detail {

inline void dense_lu_solve(std::vector<double>& a, std::int64_t n, std::vector<double>& b) {
    std::vector<std::int64_t> piv(static_cast<std::size_t>(n));
    auto A = [&](std::int64_t i, std::int64_t j) -> double& {
        return a[static_cast<std::size_t>(i * n + j)];
    };
    for (std::int64_t k = 0; k < n; ++k) {
        std::int64_t p = k;
        for (std::int64_t i = k + 1; i < n; ++i)
            if (std::fabs(A(i, k)) > std::fabs(A(p, k))) p = i;
        piv[static_cast<std::size_t>(k)] = p;
        if (p != k)
            for (std::int64_t j = 0; j < n; ++j) std::swap(A(k, j), A(p, j));
        if (A(k, k) == 0.0) throw NumericalError("singular dense system");
        for (std::int64_t i = k + 1; i < n; ++i) {
            double f = A(i, k) / A(k, k);
            A(i, k) = f;
            if (f == 0.0) continue;
            for (std::int64_t j = k + 1; j < n; ++j) A(i, j) -= f * A(k, j);
        }
    }
    for (std::int64_t k = 0; k < n; ++k) {
        std::int64_t p = piv[static_cast<std::size_t>(k)];
        if (p != k) std::swap(b[static_cast<std::size_t>(k)], b[static_cast<std::size_t>(p)]);
        for (std::int64_t i = k + 1; i < n; ++i)
            b[static_cast<std::size_t>(i)] -= A(i, k) * b[static_cast<std::size_t>(k)];
    }
    for (std::int64_t i = n - 1; i >= 0; --i) {
        double v = b[static_cast<std::size_t>(i)];
        for (std::int64_t j = i + 1; j < n; ++j) v -= A(i, j) * b[static_cast<std::size_t>(j)];
        b[static_cast<std::size_t>(i)] = v / A(i, i);
    }
}

}  // namespace detail

// -----------------------------------------------------------------------------
// Invariant measure of the environment periodized on the torus of side
// (2N+1), normalized to total mass (2N+1)^d. A side this size is odd, so the
// periodized chain is aperiodic as well as irreducible and the measure is
// unique.
// -----------------------------------------------------------------------------

struct TorusMeasure {
    int N = 0;
    std::int64_t side = 0;
    std::int64_t n_states = 0;
    std::vector<double> phi;      // indexed by torus row-major index
    double residual_inf = 0.0;    // || phi P - phi ||_inf after normalization
    double normalization = 0.0;   // sum phi (target: n_states)

    std::int64_t index_of(const Site& s) const {
        std::int64_t idx = 0;
        for (int j = 0; j < dims; ++j) {
            std::int64_t c = ((s[j] % side) + side) % side;
            idx = idx * side + c;
        }
        return idx;
    }
    int dims = 1;
};

inline TorusMeasure torus_invariant_measure(const Environment& env, int N) {
    if (N < 1) throw DomainError("torus needs N >= 1");
    const int d = env.d();
    const JumpSet& jumps = env.jumps();
    const std::int64_t side = 2 * static_cast<std::int64_t>(N) + 1;
    std::int64_t n = 1;
    for (int j = 0; j < d; ++j) n *= side;
    if (n > 4000) throw ResourceError("torus state space too large for a dense solve");

    TorusMeasure out;
    out.N = N;
    out.side = side;
    out.n_states = n;
    out.dims = d;

    // Enumerate torus sites with representative coordinates in [-N, N].
    std::vector<Site> sites(static_cast<std::size_t>(n));
    {
        std::vector<std::int64_t> c(static_cast<std::size_t>(d), -N);
        for (std::int64_t i = 0; i < n; ++i) {
            Site s;
            for (int j = 0; j < d; ++j) s.x[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j)];
            sites[static_cast<std::size_t>(i)] = s;
            for (int j = d - 1; j >= 0; --j) {
                if (++c[static_cast<std::size_t>(j)] <= N) break;
                c[static_cast<std::size_t>(j)] = -N;
            }
        }
    }

    // Rows of A = (P^T - I) with the first row replaced by the normalization
    // sum phi = n.
    std::vector<double> a(static_cast<std::size_t>(n * n), 0.0);
    std::vector<double> b(static_cast<std::size_t>(n), 0.0);
    auto wrap_index = [&](Site s) {
        std::int64_t idx = 0;
        for (int j = 0; j < d; ++j) {
            std::int64_t c = ((s[j] % side) + side) % side;
            idx = idx * side + c;
        }
        return idx;
    };
    for (std::int64_t i = 0; i < n; ++i) {
        const Site& x = sites[static_cast<std::size_t>(i)];
        TransitionKernel k = env.kernel_at(x);
        std::int64_t xi = wrap_index(x);
        for (int m = 0; m < jumps.n_moves(); ++m) {
            if (k[m] == 0.0) continue;
            std::int64_t yi = wrap_index(jumps.apply(x, m));
            if (yi != 0) a[static_cast<std::size_t>(yi * n + xi)] += k[m];
        }
        if (xi != 0) a[static_cast<std::size_t>(xi * n + xi)] -= 1.0;
    }
    for (std::int64_t j = 0; j < n; ++j) a[static_cast<std::size_t>(j)] = 1.0;
    b[0] = static_cast<double>(n);

    detail::dense_lu_solve(a, n, b);
    out.phi = std::move(b);

    // Residual and normalization against the original chain.
    std::vector<double> image(static_cast<std::size_t>(n), 0.0);
    detail::NeumaierSum total;
    for (std::int64_t i = 0; i < n; ++i) {
        const Site& x = sites[static_cast<std::size_t>(i)];
        TransitionKernel k = env.kernel_at(x);
        double w = out.phi[static_cast<std::size_t>(wrap_index(x))];
        total.add(w);
        for (int m = 0; m < jumps.n_moves(); ++m) {
            if (k[m] == 0.0) continue;
            image[static_cast<std::size_t>(wrap_index(jumps.apply(x, m)))] += w * k[m];
        }
    }
    for (std::int64_t i = 0; i < n; ++i)
        out.residual_inf = std::max(out.residual_inf,
                                    std::fabs(image[static_cast<std::size_t>(i)] -
                                              out.phi[static_cast<std::size_t>(i)]));
    out.normalization = total.value();
    return out;
}

}  // namespace rwre::exact
