#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

// =============================================================================
// rng.hpp
//
// Counter-based random streams with keyed derivation.
//
// Every stream is a (key, counter) pair pushed through a 64-bit finalizer, so
// output i is a pure function of (key, i). Keys are derived by hash-chaining
// words (master seed, experiment id, replica index, site coordinates, ...),
// which gives:
//   - O(1) memory for "infinite" random fields (query any site directly),
//   - order-independence: the value at a key never depends on what else
//     was sampled,
//   - replica safety: disjoint derivation paths never share state.
//
// Distribution helpers (uniform, normal, gamma, Dirichlet) are implemented
// here rather than via <random> because bit-identical reruns across runs and
// call sites are part of the output contract, and libstdc++ distributions
// do not pin their algorithms.
// =============================================================================

namespace rwre::rng {

// -----------------------------------------------------------------------------
// 64-bit mixing (splitmix64 finalizer)
// -----------------------------------------------------------------------------

constexpr std::uint64_t GOLDEN_GAMMA = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Hash-chain one word into a running key.
constexpr std::uint64_t chain(std::uint64_t key, std::uint64_t word) {
    return mix64((key + GOLDEN_GAMMA) ^ mix64(word + GOLDEN_GAMMA));
}

// Fold a derivation path into a stream key.
inline std::uint64_t derive_key(std::uint64_t master,
                                std::initializer_list<std::uint64_t> path) {
    std::uint64_t k = mix64(master + GOLDEN_GAMMA);
    for (std::uint64_t w : path) k = chain(k, w);
    return k;
}

// -----------------------------------------------------------------------------
// Stream
// -----------------------------------------------------------------------------

struct Stream {
    std::uint64_t key = 0;
    std::uint64_t ctr = 0;

    std::uint64_t next_u64() { return mix64(key + (++ctr) * GOLDEN_GAMMA); }

    // Uniform on [0,1), 53-bit mantissa.
    double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0,1): safe under log().
    double u01_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return u01() < p; }

    // Index into a discrete distribution given by non-normalized weights.
    template <class Vec>
    int pick(const Vec& w, int n, double total) {
        double u = u01() * total;
        double acc = 0.0;
        for (int i = 0; i < n - 1; ++i) {
            acc += w[i];
            if (u < acc) return i;
        }
        return n - 1;
    }

    // Standard normal via Box-Muller (no cached spare: streams stay stateless
    // beyond the counter).
    double normal() {
        double u = u01_open();
        double v = u01_open();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586477 * v);
    }

    // Gamma(alpha, 1) by Marsaglia-Tsang squeeze; alpha < 1 via the boost
    // Gamma(alpha+1) * U^{1/alpha}.
    double gamma(double alpha) {
        if (alpha < 1.0) {
            double u = u01_open();
            return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
        }
        const double d = alpha - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = u01_open();
            double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
            if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    // Dirichlet(alpha) onto out[0..n), via normalized gammas.
    template <class VecA, class VecO>
    void dirichlet(const VecA& alpha, int n, VecO& out) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            out[i] = gamma(alpha[i]);
            s += out[i];
        }
        for (int i = 0; i < n; ++i) out[i] /= s;
    }
};

inline Stream make_stream(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path) {
    return Stream{derive_key(master, path), 0};
}

// Fixed domain-separation tags for top-level derivation paths.
namespace tag {
constexpr std::uint64_t SITE = 0x51;
constexpr std::uint64_t WALK = 0x57;
constexpr std::uint64_t ENV_REPLICA = 0x45;
constexpr std::uint64_t MISC = 0x4D;
}  // namespace tag

}  // namespace rwre::rng
