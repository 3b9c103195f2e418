#pragma once

#include <array>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <vector>

#include "rwre/errors.hpp"
#include "rwre/rng.hpp"

// =============================================================================
// lattice.hpp
//
// Lattice sites and jump sets. Sites carry a fixed-capacity coordinate array
// (dimension is a property of the jump set / environment, not the site), so
// hot loops never touch the heap.
//
// Move ordering convention, used by every kernel in the project:
//   index 2j   -> +e_{j+1}
//   index 2j+1 -> -e_{j+1}
//   index 2d   -> hold (only when the jump set includes it)
// =============================================================================

namespace rwre {

constexpr int MAX_DIM = 4;
constexpr int MAX_MOVES = 2 * MAX_DIM + 1;

struct Site {
    std::array<std::int64_t, MAX_DIM> x{};

    std::int64_t& operator[](int i) { return x[static_cast<std::size_t>(i)]; }
    std::int64_t operator[](int i) const { return x[static_cast<std::size_t>(i)]; }

    bool operator==(const Site& o) const { return x == o.x; }

    std::int64_t l1(int d) const {
        std::int64_t s = 0;
        for (int i = 0; i < d; ++i) s += std::llabs(x[static_cast<std::size_t>(i)]);
        return s;
    }
};

inline Site make_site(std::initializer_list<std::int64_t> coords) {
    Site s;
    int i = 0;
    for (std::int64_t c : coords) s[i++] = c;
    return s;
}

struct SiteHash {
    std::size_t operator()(const Site& s) const {
        std::uint64_t k = 0x8C5FB1A9D0E74321ULL;
        for (int i = 0; i < MAX_DIM; ++i)
            k = rng::chain(k, static_cast<std::uint64_t>(s[i]));
        return static_cast<std::size_t>(k);
    }
};

// -----------------------------------------------------------------------------
// JumpSet: the 2d unit moves, optionally with the hold move appended.
// -----------------------------------------------------------------------------

struct JumpSet {
    int d = 1;
    bool include_hold = false;

    JumpSet() = default;
    JumpSet(int dim, bool hold) : d(dim), include_hold(hold) {
        if (dim < 1 || dim > MAX_DIM) throw DomainError("JumpSet: dimension out of range");
    }

    int n_moves() const { return 2 * d + (include_hold ? 1 : 0); }
    int hold_index() const { return include_hold ? 2 * d : -1; }
    bool is_hold(int m) const { return m == 2 * d; }

    int axis(int m) const { return m / 2; }         // valid for non-hold moves
    int sign(int m) const { return (m % 2) ? -1 : 1; }

    Site apply(const Site& s, int m) const {
        Site t = s;
        if (!is_hold(m)) t[axis(m)] += sign(m);
        return t;
    }

    // Move delta as a site-vector (hold -> zero vector).
    Site delta(int m) const {
        Site t{};
        if (!is_hold(m)) t[axis(m)] = sign(m);
        return t;
    }

    // Index of the move opposite to m (hold maps to itself).
    int opposite(int m) const { return is_hold(m) ? m : (m ^ 1); }
};

// Dot product of a site with an integer direction vector.
inline std::int64_t dot(const Site& s, const std::vector<std::int64_t>& l) {
    std::int64_t acc = 0;
    for (std::size_t i = 0; i < l.size(); ++i)
        acc += s[static_cast<int>(i)] * l[i];
    return acc;
}

// Dot product with a real direction.
inline double dotd(const Site& s, const std::vector<double>& l) {
    double acc = 0.0;
    for (std::size_t i = 0; i < l.size(); ++i)
        acc += static_cast<double>(s[static_cast<int>(i)]) * l[i];
    return acc;
}

}  // namespace rwre
