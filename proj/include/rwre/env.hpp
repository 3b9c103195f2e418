#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rwre/errors.hpp"
#include "rwre/lattice.hpp"
#include "rwre/rng.hpp"

// =============================================================================
// env.hpp
//
// Transition kernels, environment laws, and reproducible infinite
// environments.
//
// An EnvironmentLaw is a distribution over per-site kernels; an Environment
// binds a law to a master seed and realizes kernel_at(site) as a pure
// function of (seed, site), so the infinite i.i.d. field is never
// materialized and any site can be queried in any order by any caller with
// bit-identical results.
// =============================================================================

namespace rwre {

// -----------------------------------------------------------------------------
// TransitionKernel
// -----------------------------------------------------------------------------

struct TransitionKernel {
    std::array<double, MAX_MOVES> p{};
    int n = 0;

    double operator[](int m) const { return p[static_cast<std::size_t>(m)]; }
    double& operator[](int m) { return p[static_cast<std::size_t>(m)]; }

    double sum() const {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += p[static_cast<std::size_t>(i)];
        return s;
    }

    double min_entry() const {
        double m = 1.0;
        for (int i = 0; i < n; ++i) m = std::min(m, p[static_cast<std::size_t>(i)]);
        return m;
    }

    // Simplex invariants; optionally the uniform-ellipticity floor on the
    // non-hold entries.
    void validate(const JumpSet& jumps, std::optional<double> kappa = {}) const {
        if (n != jumps.n_moves())
            throw DomainError("kernel/jump-set size mismatch");
        for (int i = 0; i < n; ++i)
            if (p[static_cast<std::size_t>(i)] < 0.0)
                throw DomainError("kernel entry < 0");
        if (std::fabs(sum() - 1.0) > 1e-12)
            throw DomainError("kernel does not sum to 1 within 1e-12");
        if (kappa) {
            for (int i = 0; i < 2 * jumps.d; ++i)
                if (p[static_cast<std::size_t>(i)] < *kappa - 1e-15)
                    throw DomainError("kernel violates declared ellipticity floor");
        }
    }

    // Sample a move index using cumulative inversion.
    int sample_move(rng::Stream& stream) const {
        double u = stream.u01();
        double acc = 0.0;
        for (int i = 0; i < n - 1; ++i) {
            acc += p[static_cast<std::size_t>(i)];
            if (u < acc) return i;
        }
        return n - 1;
    }
};

inline TransitionKernel kernel_from(std::initializer_list<double> probs) {
    TransitionKernel k;
    for (double v : probs) k[k.n++] = v;
    return k;
}

// Local drift of one kernel: sum_e w(0,e) e.
inline std::array<double, MAX_DIM> local_drift(const TransitionKernel& k,
                                               const JumpSet& jumps) {
    std::array<double, MAX_DIM> drift{};
    for (int m = 0; m < 2 * jumps.d; ++m)
        drift[static_cast<std::size_t>(jumps.axis(m))] +=
            jumps.sign(m) * k[m];
    return drift;
}

// -----------------------------------------------------------------------------
// Law variants
// -----------------------------------------------------------------------------

// Every site carries the same kernel.
struct Homogeneous {
    TransitionKernel kernel;
};

// 1D: site kernel is (p_right, 1-p_right), p_right drawn from finite atoms.
struct OneDimDiscrete {
    struct Atom {
        double p_right;
        double weight;
    };
    std::vector<Atom> atoms;
};

// Kernel is Dirichlet(alpha) over the move set.
struct DirichletIID {
    std::vector<double> alpha;
};

// Balanced kernels: w(x,e) = w(x,-e). Per-axis weights w_1..w_d with
// 2*sum w_j = 1, either fixed or Dirichlet-distributed over axes.
struct BalancedIID {
    std::vector<double> fixed_w;  // size d when fixed; empty when random
    std::vector<double> alpha;    // size d when random
};

// Finite mixture of explicit kernels: each site draws one whole kernel from
// the weighted set.
struct KernelMixture {
    struct Atom {
        TransitionKernel kernel;
        double weight;
    };
    std::vector<Atom> atoms;
};

// Two-dimensional edge-trap law: each site tosses a fair coin between an
// up-dominant kernel (2phi, phi, 1-4phi, phi) and its down-dominant mirror,
// with phi = c*V^2, V uniform on (0,1). E[phi^{-1/2}] is infinite while
// lower inverse moments stay finite.
struct TrapLaw {
    double c = 0.24;  // phi range (0, c), c < 1/4
};

// Two-dimensional product law: vertical mass fixed at 1/4 each way, and the
// horizontal pair (right, left) with right + left = 1/2 drawn from finite
// atoms, constant along e_2. The default atoms give E[left/right] = 1 with
// E[log(left/right)] < 0: directionally transient along e_1 with zero speed.
struct AnisotropicProduct {
    struct Atom {
        double right;
        double weight;
    };
    std::vector<Atom> atoms;
};

using LawVariant = std::variant<Homogeneous, OneDimDiscrete, KernelMixture,
                                DirichletIID, BalancedIID, TrapLaw, AnisotropicProduct>;

// -----------------------------------------------------------------------------
// EnvironmentLaw
// -----------------------------------------------------------------------------

class EnvironmentLaw {
  public:
    JumpSet jumps;
    LawVariant variant;
    std::optional<double> declared_kappa;

    // Holding-time conversion state: when hold_prob h > 0 the sampled kernel
    // is mixed as (1-h)*kernel + h*hold and the jump set includes the hold
    // move.
    double hold_prob = 0.0;

    EnvironmentLaw(JumpSet j, LawVariant v) : jumps(j), variant(std::move(v)) {
        check_params();
    }

    TransitionKernel sample(rng::Stream& stream) const {
        TransitionKernel k = sample_base(stream);
        if (hold_prob > 0.0) {
            for (int i = 0; i < 2 * jumps.d; ++i) k[i] *= (1.0 - hold_prob);
            k[jumps.hold_index()] = hold_prob;
            k.n = jumps.n_moves();
        }
        return k;
    }

    // Exact uniform-ellipticity constant where the law determines one;
    // declared_kappa otherwise. Laws without a positive floor report 0.
    double kappa() const {
        double base = base_kappa();
        double k = declared_kappa ? std::min(*declared_kappa, base) : base;
        if (hold_prob > 0.0) k = std::min(k * (1.0 - hold_prob), hold_prob);
        return k;
    }

    bool is_balanced() const { return std::holds_alternative<BalancedIID>(variant); }
    bool is_deterministic() const { return std::holds_alternative<Homogeneous>(variant); }

    // True when kernel_at must ignore some coordinates (fields constant along
    // those axes).
    bool constant_along(int axis) const {
        return std::holds_alternative<AnisotropicProduct>(variant) && axis == 1;
    }

    EnvironmentLaw with_holding(std::optional<double> h = {}) const {
        EnvironmentLaw out = *this;
        double hp = h ? *h : kappa();
        if (hp <= 0.0 || hp >= 1.0)
            throw DomainError("holding conversion needs hold probability in (0,1)");
        out.hold_prob = hp;
        out.jumps.include_hold = true;
        return out;
    }

  private:
    void check_params() const {
        if (const auto* d = std::get_if<DirichletIID>(&variant)) {
            if (static_cast<int>(d->alpha.size()) != jumps.n_moves())
                throw ConfigError("dirichlet alpha length must match the move count");
            for (double a : d->alpha)
                if (!(a > 0.0)) throw ConfigError("dirichlet alpha entries must be > 0");
        } else if (const auto* o = std::get_if<OneDimDiscrete>(&variant)) {
            if (jumps.d != 1) throw ConfigError("one-dimensional law with d != 1");
            if (o->atoms.empty()) throw ConfigError("discrete law needs atoms");
            for (const auto& a : o->atoms)
                if (!(a.p_right > 0.0 && a.p_right < 1.0 && a.weight > 0.0))
                    throw ConfigError("discrete atoms need p in (0,1), weight > 0");
        } else if (const auto* b = std::get_if<BalancedIID>(&variant)) {
            if (!b->fixed_w.empty()) {
                if (static_cast<int>(b->fixed_w.size()) != jumps.d)
                    throw ConfigError("balanced weights length must equal d");
                double s = 0.0;
                for (double w : b->fixed_w) {
                    if (!(w > 0.0)) throw ConfigError("balanced weights must be > 0");
                    s += w;
                }
                if (std::fabs(2.0 * s - 1.0) > 1e-12)
                    throw ConfigError("balanced weights must satisfy 2*sum(w) = 1");
            } else {
                if (static_cast<int>(b->alpha.size()) != jumps.d)
                    throw ConfigError("balanced alpha length must equal d");
                for (double a : b->alpha)
                    if (!(a > 0.0)) throw ConfigError("balanced alpha entries must be > 0");
            }
        } else if (const auto* m = std::get_if<KernelMixture>(&variant)) {
            if (m->atoms.empty()) throw ConfigError("kernel mixture needs atoms");
            for (const auto& a : m->atoms) {
                if (!(a.weight > 0.0)) throw ConfigError("kernel mixture weights must be > 0");
                a.kernel.validate(jumps);
            }
        } else if (const auto* t = std::get_if<TrapLaw>(&variant)) {
            if (jumps.d != 2) throw ConfigError("trap law is two-dimensional");
            if (!(t->c > 0.0 && t->c < 0.25))
                throw ConfigError("trap law needs c in (0, 1/4)");
        } else if (const auto* ap = std::get_if<AnisotropicProduct>(&variant)) {
            if (jumps.d != 2) throw ConfigError("anisotropic product law is two-dimensional");
            if (ap->atoms.empty()) throw ConfigError("anisotropic law needs atoms");
            for (const auto& a : ap->atoms)
                if (!(a.right > 0.0 && a.right < 0.5 && a.weight > 0.0))
                    throw ConfigError("anisotropic atoms need right in (0, 1/2)");
        }
        if (jumps.include_hold && hold_prob <= 0.0)
            throw ConfigError("hold move declared without hold probability");
    }

    double base_kappa() const {
        struct Visitor {
            const JumpSet& jumps;
            double operator()(const Homogeneous& h) const {
                double m = 1.0;
                for (int i = 0; i < 2 * jumps.d; ++i) m = std::min(m, h.kernel[i]);
                return m;
            }
            double operator()(const OneDimDiscrete& o) const {
                double m = 1.0;
                for (const auto& a : o.atoms)
                    m = std::min({m, a.p_right, 1.0 - a.p_right});
                return m;
            }
            double operator()(const KernelMixture& m) const {
                double mn = 1.0;
                for (const auto& a : m.atoms)
                    for (int i = 0; i < 2 * jumps.d; ++i) mn = std::min(mn, a.kernel[i]);
                return mn;
            }
            double operator()(const DirichletIID&) const { return 0.0; }
            double operator()(const BalancedIID& b) const {
                if (b.fixed_w.empty()) return 0.0;
                double m = 1.0;
                for (double w : b.fixed_w) m = std::min(m, w);
                return m;
            }
            double operator()(const TrapLaw&) const { return 0.0; }
            double operator()(const AnisotropicProduct& ap) const {
                double m = 0.25;
                for (const auto& a : ap.atoms)
                    m = std::min({m, a.right, 0.5 - a.right});
                return m;
            }
        };
        return std::visit(Visitor{jumps}, variant);
    }

    TransitionKernel sample_base(rng::Stream& stream) const {
        struct Visitor {
            const JumpSet& jumps;
            rng::Stream& stream;
            TransitionKernel operator()(const Homogeneous& h) const { return h.kernel; }
            TransitionKernel operator()(const OneDimDiscrete& o) const {
                double total = 0.0;
                for (const auto& a : o.atoms) total += a.weight;
                double u = stream.u01() * total;
                double acc = 0.0;
                const OneDimDiscrete::Atom* chosen = &o.atoms.back();
                for (const auto& a : o.atoms) {
                    acc += a.weight;
                    if (u < acc) {
                        chosen = &a;
                        break;
                    }
                }
                TransitionKernel k;
                k.n = 2;
                k[0] = chosen->p_right;
                k[1] = 1.0 - chosen->p_right;
                return k;
            }
            TransitionKernel operator()(const KernelMixture& m) const {
                double total = 0.0;
                for (const auto& a : m.atoms) total += a.weight;
                double u = stream.u01() * total;
                double acc = 0.0;
                for (const auto& a : m.atoms) {
                    acc += a.weight;
                    if (u < acc) return a.kernel;
                }
                return m.atoms.back().kernel;
            }
            TransitionKernel operator()(const DirichletIID& d) const {
                TransitionKernel k;
                k.n = static_cast<int>(d.alpha.size());
                stream.dirichlet(d.alpha, k.n, k.p);
                return k;
            }
            TransitionKernel operator()(const BalancedIID& b) const {
                TransitionKernel k;
                k.n = 2 * jumps.d;
                if (!b.fixed_w.empty()) {
                    for (int j = 0; j < jumps.d; ++j) {
                        k[2 * j] = b.fixed_w[static_cast<std::size_t>(j)];
                        k[2 * j + 1] = b.fixed_w[static_cast<std::size_t>(j)];
                    }
                    return k;
                }
                std::array<double, MAX_DIM> w{};
                stream.dirichlet(b.alpha, jumps.d, w);
                for (int j = 0; j < jumps.d; ++j) {
                    k[2 * j] = 0.5 * w[static_cast<std::size_t>(j)];
                    k[2 * j + 1] = 0.5 * w[static_cast<std::size_t>(j)];
                }
                return k;
            }
            TransitionKernel operator()(const TrapLaw& t) const {
                double v = stream.u01_open();
                double phi = t.c * v * v;
                bool up_dominant = stream.bernoulli(0.5);
                TransitionKernel k;
                k.n = 4;
                k[0] = 2.0 * phi;  // +e_1
                k[1] = phi;        // -e_1
                k[2] = up_dominant ? 1.0 - 4.0 * phi : phi;  // +e_2
                k[3] = up_dominant ? phi : 1.0 - 4.0 * phi;  // -e_2
                return k;
            }
            TransitionKernel operator()(const AnisotropicProduct& ap) const {
                double total = 0.0;
                for (const auto& a : ap.atoms) total += a.weight;
                double u = stream.u01() * total;
                double acc = 0.0;
                const AnisotropicProduct::Atom* chosen = &ap.atoms.back();
                for (const auto& a : ap.atoms) {
                    acc += a.weight;
                    if (u < acc) {
                        chosen = &a;
                        break;
                    }
                }
                TransitionKernel k;
                k.n = 4;
                k[0] = chosen->right;        // +e_1
                k[1] = 0.5 - chosen->right;  // -e_1
                k[2] = 0.25;                 // +e_2
                k[3] = 0.25;                 // -e_2
                return k;
            }
        };
        return std::visit(Visitor{jumps, stream}, variant);
    }
};

// Free-function form of EnvironmentLaw::sample for call sites that take the
// law by const reference.
inline TransitionKernel sample_kernel(const EnvironmentLaw& law, rng::Stream& stream) {
    return law.sample(stream);
}

// -----------------------------------------------------------------------------
// Factory helpers for the shipped laws
// -----------------------------------------------------------------------------

namespace laws {

inline EnvironmentLaw homogeneous1d(double p_right) {
    if (!(p_right > 0.0 && p_right < 1.0))
        throw ConfigError("homogeneous1d needs p in (0,1)");
    Homogeneous h;
    h.kernel = kernel_from({p_right, 1.0 - p_right});
    return EnvironmentLaw(JumpSet(1, false), h);
}

inline EnvironmentLaw homogeneous(int d, const std::vector<double>& probs) {
    Homogeneous h;
    for (double p : probs) h.kernel[h.kernel.n++] = p;
    EnvironmentLaw law(JumpSet(d, false), h);
    h.kernel.validate(law.jumps);
    return law;
}

// Equal-weight two-point 1D law on {p1, p2}.
inline EnvironmentLaw two_point(double p1, double p2, double w1 = 0.5) {
    OneDimDiscrete o;
    o.atoms = {{p1, w1}, {p2, 1.0 - w1}};
    return EnvironmentLaw(JumpSet(1, false), o);
}

inline EnvironmentLaw one_dim_discrete(std::vector<OneDimDiscrete::Atom> atoms) {
    return EnvironmentLaw(JumpSet(1, false), OneDimDiscrete{std::move(atoms)});
}

inline EnvironmentLaw dirichlet(int d, std::vector<double> alpha) {
    return EnvironmentLaw(JumpSet(d, false), DirichletIID{std::move(alpha)});
}

// Equal-weight mixture of explicit kernels, one entry list per atom.
inline EnvironmentLaw kernel_mixture(int d,
                                     std::vector<std::vector<double>> kernels,
                                     std::vector<double> weights = {}) {
    KernelMixture m;
    for (std::size_t i = 0; i < kernels.size(); ++i) {
        TransitionKernel k;
        for (double v : kernels[i]) k[k.n++] = v;
        double w = weights.empty() ? 1.0 : weights[i];
        m.atoms.push_back({k, w});
    }
    return EnvironmentLaw(JumpSet(d, false), m);
}

inline EnvironmentLaw balanced_fixed(std::vector<double> w) {
    int d = static_cast<int>(w.size());
    return EnvironmentLaw(JumpSet(d, false), BalancedIID{std::move(w), {}});
}

inline EnvironmentLaw balanced_dirichlet(std::vector<double> alpha) {
    int d = static_cast<int>(alpha.size());
    return EnvironmentLaw(JumpSet(d, false), BalancedIID{{}, std::move(alpha)});
}

inline EnvironmentLaw trap(double c = 0.24) {
    return EnvironmentLaw(JumpSet(2, false), TrapLaw{c});
}

// Default anisotropic marginal: (right, left) = (1/3, 1/6) with weight 2/3
// and (1/6, 1/3) with weight 1/3, so rho = left/right has E[rho] = 1 and
// E[log rho] = -ln(2)/3 < 0.
inline EnvironmentLaw anisotropic_default() {
    AnisotropicProduct ap;
    ap.atoms = {{1.0 / 3.0, 2.0 / 3.0}, {1.0 / 6.0, 1.0 / 3.0}};
    return EnvironmentLaw(JumpSet(2, false), ap);
}

}  // namespace laws

// -----------------------------------------------------------------------------
// Environment: law + master seed -> deterministic site field
// -----------------------------------------------------------------------------

class Environment {
  public:
    Environment(EnvironmentLaw law, std::uint64_t master_seed)
        : law_(std::move(law)),
          seed_(master_seed),
          site_base_(rng::derive_key(master_seed, {rng::tag::SITE})) {}

    const EnvironmentLaw& law() const { return law_; }
    std::uint64_t master_seed() const { return seed_; }
    const JumpSet& jumps() const { return law_.jumps; }
    int d() const { return law_.jumps.d; }

    TransitionKernel kernel_at(const Site& site) const {
        std::uint64_t k = site_base_;
        for (int i = 0; i < law_.jumps.d; ++i) {
            std::int64_t c = law_.constant_along(i) ? 0 : site[i];
            k = rng::chain(k, static_cast<std::uint64_t>(c));
        }
        rng::Stream stream{k, 0};
        return law_.sample(stream);
    }

  private:
    EnvironmentLaw law_;
    std::uint64_t seed_;
    std::uint64_t site_base_;
};

}  // namespace rwre
