#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rwre/config.hpp"
#include "rwre/io.hpp"
#include "rwre/rwre.hpp"

// =============================================================================
// harness.hpp
//
// The experiment runner behind the CLI: one named experiment per config, each
// producing a CSV table with fixed headers plus a JSON summary
// {experiment, seed, params, estimates, runtime}. The runtime field counts
// deterministic work units (steps walked, matrix cells touched) so reruns of
// a config are byte-identical; wall-clock time is the caller's business.
//
// Every experiment declares an estimated work count up front and refuses to
// start above the budget cap unless forced.
// =============================================================================

namespace rwre::harness {

using Json = nlohmann::ordered_json;

struct RunOutputs {
    std::string csv_path;
    std::string json_path;
    std::uint64_t work_units = 0;
};

struct Overrides {
    std::optional<std::uint64_t> seed;
    bool force = false;
};

namespace detail {

constexpr double DEFAULT_BUDGET_CAP = 2.0e10;

struct Ctx {
    explicit Ctx(cfg::Config& config) : c(config) {}

    cfg::Config& c;
    std::uint64_t seed = 1;
    bool force = false;
    double budget_cap = DEFAULT_BUDGET_CAP;

    std::vector<std::string> headers;
    std::vector<std::vector<std::string>> rows;
    Json estimates = Json::object();
    double work = 0.0;

    void head(std::initializer_list<std::string> h) { headers = h; }
    void row(std::initializer_list<std::string> cells) { rows.emplace_back(cells); }

    void guard(double estimated_work, const std::string& what) {
        if (estimated_work > budget_cap && !force)
            throw ResourceError("estimated work for " + what + " (" +
                                io::fmt(estimated_work) + " units) exceeds the budget cap " +
                                io::fmt(budget_cap) + "; raise budget_cap or pass force");
        work += estimated_work;
    }
};

inline EnvironmentLaw law_from_config(cfg::Config& c) {
    std::string name = c.get_string("law");
    EnvironmentLaw law = [&]() -> EnvironmentLaw {
        if (name == "homogeneous1d") return laws::homogeneous1d(c.get_double("p"));
        if (name == "homogeneous") {
            std::vector<double> k = c.get_double_list("kernel");
            return laws::homogeneous(static_cast<int>(k.size()) / 2, k);
        }
        if (name == "two_point")
            return laws::two_point(c.get_double("p1"), c.get_double("p2"),
                                   c.get_double("w1", 0.5));
        if (name == "one_dim_discrete") {
            std::vector<double> ps = c.get_double_list("p_atoms");
            std::vector<double> ws = c.get_double_list("w_atoms");
            if (ps.size() != ws.size())
                throw ConfigError("p_atoms and w_atoms must have equal length");
            std::vector<OneDimDiscrete::Atom> atoms;
            for (std::size_t i = 0; i < ps.size(); ++i) atoms.push_back({ps[i], ws[i]});
            return laws::one_dim_discrete(std::move(atoms));
        }
        if (name == "dirichlet") {
            std::vector<double> a = c.get_double_list("alpha");
            return laws::dirichlet(static_cast<int>(a.size()) / 2, std::move(a));
        }
        if (name == "kernel_mixture") {
            std::vector<double> ka = c.get_double_list("kernel_a");
            std::vector<double> kb = c.get_double_list("kernel_b");
            std::vector<double> w = c.get_double_list("mix_weights", {0.5, 0.5});
            return laws::kernel_mixture(static_cast<int>(ka.size()) / 2, {ka, kb}, w);
        }
        if (name == "balanced_fixed") return laws::balanced_fixed(c.get_double_list("weights"));
        if (name == "balanced_dirichlet")
            return laws::balanced_dirichlet(c.get_double_list("alpha"));
        if (name == "trap") return laws::trap(c.get_double("trap_c", 0.24));
        if (name == "anisotropic") return laws::anisotropic_default();
        throw ConfigError("unknown law '" + name + "'");
    }();
    if (c.has("hold"))
        law = law.with_holding(c.get_double("hold"));
    else if (c.get_bool("hold_auto", false))
        law = law.with_holding();
    return law;
}

inline Json json_ci(const stats::EstimateWithCI& e) {
    Json j = Json::object();
    j["estimate"] = e.estimate;
    j["lo"] = e.lo;
    j["hi"] = e.hi;
    j["level"] = e.level;
    j["replicas"] = e.replicas;
    j["censored_fraction"] = e.censored_fraction;
    return j;
}

inline Json json_band(const ball::BandEstimate& b) {
    Json j = Json::object();
    j["definite"] = json_ci(b.definite);
    j["band_lo"] = b.band_lo;
    j["band_hi"] = b.band_hi;
    j["n_censored"] = b.n_censored;
    j["inconclusive"] = b.inconclusive;
    return j;
}

// ---------------------------------------------------------------------------
// Experiment bodies
// ---------------------------------------------------------------------------

inline void run_env_report(Ctx& x) {
    EnvironmentLaw law = law_from_config(x.c);
    std::int64_t samples = x.c.get_int("samples", 4000);
    double alpha = x.c.get_double("alpha_moment", 1.0);
    x.guard(static_cast<double>(samples) * (2.0 * law.jumps.d + 2.0), "env-report");

    diag::EllipticityReport ell = diag::ellipticity_report(law, samples, alpha, x.seed);
    diag::NestlingReport nest = diag::nestling_class(law, samples, x.seed);
    diag::TrapReport trap = diag::trap_criterion(law, samples, x.seed);

    double trap_worst = 0.0;
    bool trap_divergent = false;
    for (std::size_t m = 0; m < trap.estimates.size(); ++m) {
        trap_worst = std::max(trap_worst, trap.estimates[m]);
        if (trap.divergent[m]) trap_divergent = true;
    }

    x.head({"metric", "value"});
    x.row({"kappa_hat", io::fmt(ell.kappa_hat)});
    x.row({"declared_kappa", io::fmt(law.kappa())});
    x.row({"inverse_moment", io::fmt(ell.inverse_moment)});
    x.row({"inverse_moment_divergent", io::fmt(ell.divergent)});
    x.row({"nestling", diag::to_string(nest.cls)});
    x.row({"hull_distance", io::fmt(nest.hull_distance)});
    x.row({"trap_moment_worst", io::fmt(trap_worst)});
    x.row({"trap_moment_divergent", io::fmt(trap_divergent)});

    x.estimates["ellipticity"] = {{"kappa_hat", ell.kappa_hat},
                                  {"min_entry", ell.min_entry_estimate},
                                  {"inverse_moment", ell.inverse_moment},
                                  {"alpha", ell.alpha},
                                  {"divergent", ell.divergent}};
    x.estimates["nestling"] = {{"class", diag::to_string(nest.cls)},
                               {"degenerate_point", nest.degenerate_point},
                               {"hull_distance", nest.hull_distance}};
    x.estimates["trap_moment"] = {{"worst", trap_worst}, {"divergent", trap_divergent}};

    if (x.c.has("betas")) {
        std::vector<double> betas = x.c.get_double_list("betas");
        double target = x.c.get_double("beta_target", 1.0);
        diag::EBetaReport eb = diag::check_E_beta(law, betas, target, samples, x.seed);
        x.row({"e_beta_margin", io::fmt(eb.combinatorial_margin)});
        x.row({"e_beta_satisfied", io::fmt(eb.satisfied)});
        x.estimates["e_beta"] = {{"margin", eb.combinatorial_margin},
                                 {"moment", eb.moment_estimate},
                                 {"moment_divergent", eb.moment_divergent},
                                 {"satisfied", eb.satisfied}};
    }
}

inline void run_classify1d(Ctx& x) {
    EnvironmentLaw law = law_from_config(x.c);
    oned::Classification cls = oned::classify(law);
    oned::DriftCondition drift = oned::check_drift_condition(law);
    oned::RhoSummary rs = oned::rho_summary(law);
    x.guard(1.0, "classify1d");

    x.head({"metric", "value"});
    x.row({"regime", oned::to_string(cls.regime)});
    x.row({"mean_log_rho", io::fmt(rs.mean_log_rho)});
    x.row({"mean_rho", io::fmt(rs.mean_rho)});
    x.row({"mean_inv_rho", io::fmt(rs.mean_inv_rho)});
    x.row({"ballistic", io::fmt(cls.ballistic)});
    x.row({"velocity", io::fmt(cls.velocity)});
    x.row({"drift_condition_right", io::fmt(drift.holds_right)});
    x.row({"drift_condition_left", io::fmt(drift.holds_left)});

    x.estimates["regime"] = oned::to_string(cls.regime);
    x.estimates["mean_log_rho"] = rs.mean_log_rho;
    x.estimates["ballistic"] = cls.ballistic;
    x.estimates["velocity"] = cls.velocity;
    x.estimates["drift_condition_right"] = drift.holds_right;
    x.estimates["drift_condition_left"] = drift.holds_left;

    bool mass_above = false;
    for (const auto& [r, w] : rs.atoms)
        if (r > 1.0 && w > 0.0) mass_above = true;
    if (rs.mean_log_rho < 0.0 && mass_above) {
        oned::KksRoot root = oned::kks_exponent(law);
        x.row({"kks_exponent", io::fmt(root.kappa)});
        x.estimates["kks_exponent"] = root.kappa;
    }
}

inline void run_velocity1d(Ctx& x) {
    EnvironmentLaw law = law_from_config(x.c);
    std::int64_t n_steps = x.c.get_int("n_steps", 100000);
    std::int64_t replicas = x.c.get_int("replicas", 500);
    double level = x.c.get_double("level", 0.99);
    int J = static_cast<int>(x.c.get_int("series_terms", 60));
    x.guard(static_cast<double>(n_steps) * static_cast<double>(replicas), "velocity1d");

    oned::EmpiricalVelocity emp = oned::velocity_empirical(law, n_steps, replicas, level, x.seed);
    x.head({"estimator", "value", "lo", "hi"});
    x.row({"empirical", io::fmt(emp.speed.estimate), io::fmt(emp.speed.lo),
           io::fmt(emp.speed.hi)});
    x.row({"positive_fraction", io::fmt(emp.positive_fraction.estimate),
           io::fmt(emp.positive_fraction.lo), io::fmt(emp.positive_fraction.hi)});
    x.estimates["empirical"] = json_ci(emp.speed);
    x.estimates["positive_fraction"] = json_ci(emp.positive_fraction);

    oned::DriftCondition drift = oned::check_drift_condition(law);
    if (drift.holds_right || drift.holds_left) {
        double v = oned::velocity_closed_form(law);
        x.row({"closed_form", io::fmt(v), io::fmt(v), io::fmt(v)});
        x.estimates["closed_form"] = v;
    }
    if (drift.holds_right) {
        oned::SeriesVelocity sv = oned::velocity_series_display(law, J);
        x.row({"series_partial", io::fmt(sv.value), io::fmt(sv.value), io::fmt(sv.value)});
        x.estimates["series_partial"] = sv.value;
        x.estimates["series_limit"] = sv.limit;
        x.estimates["series_note"] = sv.note;
    }
}

inline void run_invariant_density(Ctx& x) {
    EnvironmentLaw law = law_from_config(x.c);
    int J = static_cast<int>(x.c.get_int("truncation", 60));
    std::int64_t replicas = x.c.get_int("replicas", 200000);
    x.guard(static_cast<double>(replicas) * (J + 3.0), "invariant-density");

    oned::InvarianceReport inv = oned::check_invariance(law, J, replicas, x.seed);
    double normalizer = oned::invariant_density_normalizer(law);

    x.head({"metric", "value"});
    x.row({"mean_difference", io::fmt(inv.mean_difference)});
    x.row({"std_error", io::fmt(inv.std_error)});
    x.row({"truncation_bound", io::fmt(inv.truncation_bound)});
    x.row({"pass", io::fmt(inv.pass)});
    x.row({"normalizer", io::fmt(normalizer)});

    x.estimates["mean_difference"] = inv.mean_difference;
    x.estimates["std_error"] = inv.std_error;
    x.estimates["truncation_bound"] = inv.truncation_bound;
    x.estimates["pass"] = inv.pass;
    x.estimates["normalizer"] = normalizer;
}

inline void run_kks(Ctx& x) {
    EnvironmentLaw law = law_from_config(x.c);
    x.guard(1.0, "kks");
    oned::KksRoot root = oned::kks_exponent(law);
    x.head({"metric", "value"});
    x.row({"kappa", io::fmt(root.kappa)});
    x.row({"residual", io::fmt(root.residual)});
    x.row({"iterations", io::fmt(root.iterations)});
    x.estimates["kappa"] = root.kappa;
    x.estimates["residual"] = root.residual;
}

inline void run_sinai(Ctx& x) {
    EnvironmentLaw law = law_from_config(x.c);
    std::vector<std::int64_t> horizons =
        x.c.get_int_list("horizons", {1000, 10000, 100000, 1000000});
    std::int64_t replicas = x.c.get_int("replicas", 500);
    std::int64_t n_max = *std::max_element(horizons.begin(), horizons.end());
    x.guard(static_cast<double>(n_max) * static_cast<double>(replicas), "sinai");

    oned::SinaiDiagnostic sd = oned::sinai_diagnostic(law, horizons, replicas, x.seed);
    x.head({"n", "median_range", "scaled"});
    for (std::size_t i = 0; i < sd.horizons.size(); ++i)
        x.row({io::fmt(sd.horizons[i]), io::fmt(sd.median_range[i]), io::fmt(sd.scaled[i])});
    x.estimates["ratio_max_min"] = sd.ratio_max_min;
}

inline void run_potential(Ctx& x) {
    EnvironmentLaw law = law_from_config(x.c);
    std::int64_t lo = x.c.get_int("lo", -200);
    std::int64_t hi = x.c.get_int("hi", 200);
    x.guard(static_cast<double>(hi - lo + 1), "potential");

    Environment env(law, x.seed);
    oned::PotentialProfile prof = oned::potential_profile(env, lo, hi);
    x.head({"site", "potential", "log_delta"});
    for (std::size_t i = 0; i < prof.V.size(); ++i)
        x.row({io::fmt(lo + static_cast<std::int64_t>(i)), io::fmt(prof.V[i]),
               io::fmt(prof.log_delta[i])});
    x.estimates["harmonic_residual"] = prof.harmonic_residual;
}

inline void run_renewal(Ctx& x) {
    EnvironmentLaw law = law_from_config(x.c);
    std::int64_t n_steps = x.c.get_int("n_steps", 200000);
    std::int64_t replicas = x.c.get_int("replicas", 200);
    std::int64_t window = x.c.get_int("window", n_steps / 4);
    double level = x.c.get_double("level", 0.99);
    int axis = static_cast<int>(x.c.get_int("axis", 0));
    x.guard(static_cast<double>(n_steps) * static_cast<double>(replicas), "renewal");

    std::vector<renewal::Block> pooled;
    std::int64_t confirmed_total = 0, attempts_total = 0;
    for (std::int64_t rep = 0; rep < replicas; ++rep) {
        std::uint64_t env_seed =
            rng::derive_key(x.seed, {rng::tag::ENV_REPLICA, static_cast<std::uint64_t>(rep)});
        Environment env(law, env_seed);
        renewal::Decomposition dec = renewal::decompose_path(
            env, rng::make_stream(x.seed, {rng::tag::WALK, static_cast<std::uint64_t>(rep)}),
            Site{}, n_steps, axis, window);
        confirmed_total += static_cast<std::int64_t>(dec.confirmed.size());
        attempts_total += dec.attempts;
        auto blk = renewal::blocks_of(dec);
        pooled.insert(pooled.end(), blk.begin(), blk.end());
    }
    renewal::RenewalVelocity rv = renewal::velocity_from_blocks(pooled, level, x.seed);
    renewal::IidCheck iid = renewal::check_iid(pooled, level);

    x.head({"metric", "value"});
    x.row({"velocity", io::fmt(rv.speed.estimate)});
    x.row({"velocity_lo", io::fmt(rv.speed.lo)});
    x.row({"velocity_hi", io::fmt(rv.speed.hi)});
    x.row({"n_blocks", io::fmt(rv.n_blocks)});
    x.row({"mean_block_duration", io::fmt(rv.mean_dt)});
    x.row({"mean_block_displacement", io::fmt(rv.mean_dx)});
    x.row({"confirmed_total", io::fmt(confirmed_total)});
    x.row({"attempts_total", io::fmt(attempts_total)});
    x.row({"acf_lag1_duration", io::fmt(iid.acf_dt)});
    x.row({"acf_lag1_displacement", io::fmt(iid.acf_dx)});
    x.row({"iid_consistent", io::fmt(iid.consistent)});

    x.estimates["velocity"] = json_ci(rv.speed);
    x.estimates["n_blocks"] = rv.n_blocks;
    x.estimates["confirmed_total"] = confirmed_total;
    x.estimates["attempts_total"] = attempts_total;
    x.estimates["iid_consistent"] = iid.consistent;
}

inline void run_lln(Ctx& x) {
    EnvironmentLaw law = law_from_config(x.c);
    std::int64_t n_steps = x.c.get_int("n_steps", 100000);
    std::int64_t replicas = x.c.get_int("replicas", 300);
    std::int64_t window = x.c.get_int("window", n_steps / 4);
    double level = x.c.get_double("level", 0.99);
    int axis = static_cast<int>(x.c.get_int("axis", 0));
    x.guard(3.0 * static_cast<double>(n_steps) * static_cast<double>(replicas), "lln");

    x.head({"estimator", "value", "lo", "hi"});
    Json agreement = Json::object();

    oned::EmpiricalVelocity direct{};
    bool have_direct = law.jumps.d == 1;
    if (have_direct) {
        direct = oned::velocity_empirical(law, n_steps, replicas, level, x.seed);
        x.row({"direct", io::fmt(direct.speed.estimate), io::fmt(direct.speed.lo),
               io::fmt(direct.speed.hi)});
        x.estimates["direct"] = json_ci(direct.speed);
    }

    renewal::RenewalVelocity rv{};
    bool have_renewal = false;
    try {
        rv = renewal::renewal_velocity(law, n_steps, replicas, window, axis, level,
                                       rng::chain(x.seed, 1));
        have_renewal = true;
    } catch (const DomainError&) {
        // too few confirmed blocks: leave the row out rather than fake it
    }
    if (have_renewal) {
        x.row({"renewal", io::fmt(rv.speed.estimate), io::fmt(rv.speed.lo),
               io::fmt(rv.speed.hi)});
        x.estimates["renewal"] = json_ci(rv.speed);
    }

    ball::TransienceReport tp = ball::transience_probe(law, axis, n_steps, window,
                                                       std::min<std::int64_t>(replicas, 200),
                                                       level, rng::chain(x.seed, 2));
    x.row({"escape_fraction", io::fmt(tp.escape.definite.estimate),
           io::fmt(tp.escape.band_lo), io::fmt(tp.escape.band_hi)});
    x.estimates["escape"] = json_band(tp.escape);

    if (have_direct && law.jumps.d == 1) {
        oned::DriftCondition drift = oned::check_drift_condition(law);
        if (drift.holds_right || drift.holds_left) {
            double v = oned::velocity_closed_form(law);
            x.row({"closed_form", io::fmt(v), io::fmt(v), io::fmt(v)});
            x.estimates["closed_form"] = v;
            agreement["direct_vs_closed_form"] = direct.speed.contains(v);
            if (have_renewal) agreement["renewal_vs_closed_form"] = rv.speed.contains(v);
        }
    }
    if (have_direct && have_renewal)
        agreement["direct_vs_renewal"] = stats::jointly_consistent(direct.speed, rv.speed);
    x.estimates["agreement"] = agreement;
}

inline void run_slab(Ctx& x) {
    EnvironmentLaw law = law_from_config(x.c);
    double L = x.c.get_double("L", 10.0);
    double b = x.c.get_double("b", 1.0);
    std::string method = x.c.get_string("method", "walk");
    double level = x.c.get_double("level", 0.99);
    std::vector<double> dir(static_cast<std::size_t>(law.jumps.d), 0.0);
    dir[0] = 1.0;
    ball::SlabSpec spec{x.c.get_double_list("direction", dir), b, L};

    x.head({"method", "L", "b", "back_probability", "lo", "hi"});
    if (method == "walk") {
        std::int64_t replicas = x.c.get_int("replicas", 4000);
        std::int64_t horizon = x.c.get_int("horizon", static_cast<std::int64_t>(200.0 * L * L));
        x.guard(static_cast<double>(replicas) * static_cast<double>(horizon), "slab");
        ball::BandEstimate est = ball::slab_exit_walk_mc(law, spec, replicas, horizon, level, x.seed);
        x.row({"walk", io::fmt(L), io::fmt(b), io::fmt(est.definite.estimate),
               io::fmt(est.band_lo), io::fmt(est.band_hi)});
        x.estimates["back_exit"] = json_band(est);
    } else if (method == "exact") {
        std::int64_t env_budget = x.c.get_int("env_budget", 200);
        x.guard(static_cast<double>(env_budget) * 64.0 * L * L * L, "slab");
        ball::ExactSlabResult est = ball::slab_exit_exact(law, spec, env_budget, level, x.seed);
        x.row({"exact", io::fmt(L), io::fmt(b), io::fmt(est.estimate.estimate),
               io::fmt(est.estimate.lo), io::fmt(est.estimate.hi)});
        x.estimates["back_exit"] = json_ci(est.estimate);
        x.estimates["lateral_half_width"] = est.lateral_half_width;
        x.estimates["lateral_sensitivity"] = est.lateral_sensitivity;
    } else {
        throw ConfigError("method must be walk or exact");
    }
}

inline void run_t_gamma_fit(Ctx& x) {
    EnvironmentLaw law = law_from_config(x.c);
    std::vector<std::int64_t> Ls = x.c.get_int_list("L_grid", {5, 10, 20, 40});
    double b = x.c.get_double("b", 1.0);
    std::string method = x.c.get_string("method", "exact");
    double level = x.c.get_double("level", 0.99);
    std::int64_t replicas = x.c.get_int("replicas", 4000);
    std::int64_t env_budget = x.c.get_int("env_budget", 100);

    std::vector<double> Lvals, ps;
    x.head({"L", "back_probability"});
    for (std::size_t i = 0; i < Ls.size(); ++i) {
        double L = static_cast<double>(Ls[i]);
        std::vector<double> dir(static_cast<std::size_t>(law.jumps.d), 0.0);
        dir[0] = 1.0;
        ball::SlabSpec spec{dir, b, L};
        double p;
        if (method == "walk") {
            std::int64_t horizon = static_cast<std::int64_t>(200.0 * L * L);
            x.guard(static_cast<double>(replicas) * static_cast<double>(horizon), "t-gamma-fit");
            p = ball::slab_exit_walk_mc(law, spec, replicas, horizon, level,
                                        rng::chain(x.seed, i))
                    .definite.estimate;
        } else {
            x.guard(static_cast<double>(env_budget) * 64.0 * L * L * L, "t-gamma-fit");
            p = ball::slab_exit_exact(law, spec, env_budget, level, rng::chain(x.seed, i))
                    .estimate.estimate;
        }
        Lvals.push_back(L);
        ps.push_back(p);
        x.row({io::fmt(L), io::fmt(p)});
    }
    ball::GammaFit fit = ball::fit_T_gamma(Lvals, ps);
    x.estimates["gamma_hat"] = fit.gamma_hat;
    x.estimates["se"] = fit.se;
    x.estimates["r2"] = fit.r2;
    x.estimates["n_excluded"] = fit.excluded_L.size();
}

inline void run_p_condition(Ctx& x) {
    EnvironmentLaw law = law_from_config(x.c);
    std::int64_t N0 = x.c.get_int("N0", 30);
    std::vector<std::int64_t> Ms = x.c.get_int_list("M_grid", {1});
    std::int64_t env_budget = x.c.get_int("env_budget", 20);
    std::int64_t lateral_scale = x.c.get_int("lateral_scale", 8);

    x.head({"M", "threshold", "sup_nonfront", "holds"});
    Json per_m = Json::array();
    for (std::size_t i = 0; i < Ms.size(); ++i) {
        double lat = static_cast<double>(50 * lateral_scale + 1);
        double box = 1.5 * static_cast<double>(N0) * lat;
        x.guard(static_cast<double>(env_budget) * box * lat * lat, "p-condition");
        ball::PBoxReport rep = ball::check_P_M(law, N0, static_cast<int>(Ms[i]), env_budget,
                                               lateral_scale, x.seed);
        x.row({io::fmt(rep.M), io::fmt(rep.threshold), io::fmt(rep.sup_nonfront),
               io::fmt(rep.holds)});
        Json j = Json::object();
        j["M"] = rep.M;
        j["threshold"] = rep.threshold;
        j["sup_nonfront"] = rep.sup_nonfront;
        j["holds"] = rep.holds;
        j["c3"] = std::isfinite(rep.c3) ? Json(rep.c3) : Json("overflow");
        j["n_starts"] = rep.n_starts;
        j["provenance"] = rep.provenance;
        per_m.push_back(j);
    }
    x.estimates["reports"] = per_m;
}

inline void run_effective_criterion(Ctx& x) {
    EnvironmentLaw law = law_from_config(x.c);
    std::int64_t L = x.c.get_int("L", 18);
    std::int64_t L_tilde = x.c.get_int("L_tilde", 2 * L);
    std::vector<double> a_grid =
        x.c.get_double_list("a_grid", {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0});
    std::int64_t env_budget = x.c.get_int("env_budget", 200);
    double c2 = x.c.get_double("c2", 1.0);
    double lat = 2.0 * static_cast<double>(L_tilde) + 1.0;
    double box = 2.0 * static_cast<double>(L) * lat;
    x.guard(static_cast<double>(env_budget) * box * lat * lat, "effective-criterion");

    ball::ECReport rep = ball::effective_criterion(law, L, L_tilde, a_grid, env_budget, c2, x.seed);
    x.head({"a", "moment", "moment_se", "criterion_value"});
    for (std::size_t i = 0; i < rep.a_grid.size(); ++i)
        x.row({io::fmt(rep.a_grid[i]), io::fmt(rep.moment[i]), io::fmt(rep.moment_se[i]),
               io::fmt(rep.value[i])});
    x.estimates["prefactor"] = rep.prefactor;
    x.estimates["best_a"] = rep.best_a;
    x.estimates["best_value"] = rep.best_value;
    x.estimates["holds"] = rep.holds;
    x.estimates["provenance"] = rep.provenance;
}

inline void run_decomposition(Ctx& x) {
    EnvironmentLaw law = law_from_config(x.c);
    std::int64_t L = x.c.get_int("L", 16);
    std::int64_t L_tilde = x.c.get_int("L_tilde", 2 * L);
    std::int64_t env_budget = x.c.get_int("env_budget", 300);
    double lat = 2.0 * static_cast<double>(L_tilde) + 1.0;
    double box = 2.0 * static_cast<double>(L) * lat;
    x.guard(static_cast<double>(env_budget) * box * lat * lat, "decomposition");

    ball::DecompositionReport rep = ball::decomposition_diagnostic(law, L, L_tilde, env_budget, x.seed);
    x.head({"slice", "beta", "threshold", "mass"});
    x.row({"0", "", "", io::fmt(rep.E[0])});
    for (std::size_t j = 1; j < rep.E.size(); ++j)
        x.row({io::fmt(static_cast<std::int64_t>(j)), io::fmt(rep.beta[j - 1]),
               io::fmt(rep.thresholds[j - 1]), io::fmt(rep.E[j])});
    x.estimates["gamma_L"] = rep.gamma_L;
    x.estimates["a"] = rep.a;
    x.estimates["c4"] = rep.c4;
    x.estimates["n_slices"] = rep.n;
    x.estimates["sum_E"] = rep.sum_E;
    x.estimates["mean_rho_a"] = rep.mean_rho_a;
    x.estimates["floor_violations"] = rep.floor_violations;
}

inline void run_atypical_exit(Ctx& x) {
    EnvironmentLaw law = law_from_config(x.c);
    std::int64_t L = x.c.get_int("L", 4);
    double beta = x.c.get_double("beta", 0.5);
    std::int64_t L_tilde = x.c.get_int("L_tilde", 2 * L);
    std::int64_t env_budget = x.c.get_int("env_budget", 500);
    double level = x.c.get_double("level", 0.99);
    double lat = law.jumps.d > 1 ? 2.0 * static_cast<double>(L_tilde) + 1.0 : 1.0;
    double box = 2.0 * static_cast<double>(L) * lat;
    x.guard(static_cast<double>(env_budget) * box * lat * lat, "atypical-exit");

    ball::AtypicalReport rep = ball::atypical_quenched_exit(law, L, beta, L_tilde, env_budget,
                                                            level, x.seed);
    x.head({"metric", "value"});
    x.row({"threshold", io::fmt(rep.threshold)});
    x.row({"estimate", io::fmt(rep.prob.estimate)});
    x.row({"lo", io::fmt(rep.prob.lo)});
    x.row({"hi", io::fmt(rep.prob.hi)});
    x.row({"reference_bound", io::fmt(rep.bound)});
    x.row({"quenched_floor", io::fmt(rep.quenched_floor)});
    x.row({"impossible", io::fmt(rep.impossible)});

    x.estimates["threshold"] = rep.threshold;
    x.estimates["probability"] = json_ci(rep.prob);
    x.estimates["log_bound"] = rep.log_bound;
    x.estimates["bound"] = rep.bound;
    x.estimates["epsilon"] = rep.epsilon;
    x.estimates["quenched_floor"] = rep.quenched_floor;
    x.estimates["impossible"] = rep.impossible;
}

inline void run_dl_exit(Ctx& x) {
    EnvironmentLaw law = law_from_config(x.c);
    std::int64_t L = x.c.get_int("L", 24);
    std::int64_t replicas = x.c.get_int("replicas", 400);
    std::int64_t horizon = x.c.get_int("horizon", 60 * L * L);
    double level = x.c.get_double("level", 0.99);
    x.guard(static_cast<double>(replicas) * static_cast<double>(horizon), "dl-exit");

    ball::DLReport rep = ball::dl_exit_estimate(law, L, replicas, horizon, level, x.seed);
    x.head({"metric", "value"});
    x.row({"non_front_probability", io::fmt(rep.non_front.definite.estimate)});
    x.row({"band_lo", io::fmt(rep.non_front.band_lo)});
    x.row({"band_hi", io::fmt(rep.non_front.band_hi)});
    x.row({"reference_scale", io::fmt(rep.reference)});
    x.row({"lateral_bound", io::fmt(rep.lateral_bound)});
    x.estimates["non_front"] = json_band(rep.non_front);
    x.estimates["reference_scale"] = rep.reference;
    x.estimates["lateral_bound"] = rep.lateral_bound;
    x.estimates["horizon"] = rep.horizon;
}

inline void run_rate_function(Ctx& x) {
    EnvironmentLaw base = law_from_config(x.c);
    EnvironmentLaw law = base.jumps.include_hold ? base : base.with_holding();
    std::vector<std::int64_t> n_grid = x.c.get_int_list("n_grid", {100, 200, 400});
    std::vector<double> x_grid = x.c.get_double_list(
        "x_grid", {-0.6, -0.5, -0.4, -0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
    std::int64_t n_max = *std::max_element(n_grid.begin(), n_grid.end());
    double width = 2.0 * static_cast<double>(n_max) + 3.0;
    x.guard(static_cast<double>(n_max) * std::pow(width, law.jumps.d) *
                (2.0 * law.jumps.d + 1.0),
            "rate-function");

    Environment env(law, x.seed);
    ldp::RateCurve curve = ldp::rate_curve(env, n_grid, x_grid);

    x.head({"n", "x", "rate", "infinite"});
    for (std::size_t k = 0; k < curve.n_grid.size(); ++k)
        for (std::size_t i = 0; i < curve.x_grid.size(); ++i)
            x.row({io::fmt(curve.n_grid[k]), io::fmt(curve.x_grid[i]),
                   io::fmt(curve.I[k][i]), io::fmt(static_cast<bool>(curve.infinite[k][i]))});

    Json extrap = Json::array();
    for (std::size_t i = 0; i < curve.x_grid.size(); ++i) {
        Json j = Json::object();
        j["x"] = curve.x_grid[i];
        j["rate"] = std::isfinite(curve.extrapolated[i]) ? Json(curve.extrapolated[i]) : Json();
        extrap.push_back(j);
    }
    x.estimates["extrapolated"] = extrap;
    x.estimates["convexity_violations"] = curve.convexity_violations;
    x.estimates["convexity_tolerance"] = curve.convexity_tolerance;
    x.estimates["max_n_drift"] = curve.max_n_drift;

    std::int64_t n_cons = std::min<std::int64_t>(x.c.get_int("conservation_n", 200), n_max);
    exact::StepField lin = exact::nstep_probabilities(env, Site{}, n_cons);
    x.estimates["conservation_residual"] = std::fabs(exact::total_mass(lin) - 1.0);
    x.estimates["conservation_n"] = n_cons;

    if (law.jumps.d == 1 && x.c.get_bool("symmetry_check", false)) {
        oned::RhoSummary rs = oned::rho_summary(base);
        std::vector<double> pos;
        for (double v : x_grid)
            if (v > 0.0) pos.push_back(v);
        ldp::SymmetryReport sym = ldp::symmetry_check_1d(env, pos, n_max, rs.mean_log_rho);
        x.estimates["symmetry_max_discrepancy"] = sym.max_abs_discrepancy;
    }

    if (x.c.has("spread_seeds")) {
        std::vector<std::int64_t> seeds = x.c.get_int_list("spread_seeds");
        double probe_x = x.c.get_double("spread_x", 0.2);
        std::array<double, MAX_DIM> xv{};
        xv[0] = probe_x;
        double lo = ldp::INF, hi = -ldp::INF;
        for (std::int64_t s : seeds) {
            Environment e2(law, static_cast<std::uint64_t>(s));
            ldp::RateEstimate r = ldp::empirical_rate(e2, xv, n_max);
            lo = std::min(lo, r.I_hat);
            hi = std::max(hi, r.I_hat);
            x.work += static_cast<double>(n_max) * width * (2.0 * law.jumps.d + 1.0);
        }
        x.estimates["cross_seed_spread"] = hi - lo;
    }
}

inline void run_balanced_clt(Ctx& x) {
    EnvironmentLaw law = law_from_config(x.c);
    std::int64_t n_steps = x.c.get_int("n_steps", 10000);
    std::int64_t replicas = x.c.get_int("replicas", 1000);
    std::int64_t kernel_samples = x.c.get_int("kernel_samples", 200);
    double level = x.c.get_double("level", 0.99);
    const int d = law.jumps.d;
    x.guard(static_cast<double>(n_steps) * static_cast<double>(replicas), "balanced-clt");

    // Drift must vanish kernel by kernel, not just on average.
    double max_drift = 0.0;
    rng::Stream ks = rng::make_stream(x.seed, {rng::tag::MISC, 7});
    for (std::int64_t i = 0; i < kernel_samples; ++i) {
        TransitionKernel k = law.sample(ks);
        for (int j = 0; j < d; ++j)
            max_drift = std::max(max_drift, std::fabs(k[2 * j] - k[2 * j + 1]));
    }
    if (max_drift > 0.0) throw DomainError("law is not balanced: kernel drift " + io::fmt(max_drift));

    std::vector<stats::Welford> diag_acc(static_cast<std::size_t>(d));
    std::vector<stats::Welford> cross_acc(static_cast<std::size_t>(d * d));
    for (std::int64_t rep = 0; rep < replicas; ++rep) {
        std::uint64_t env_seed =
            rng::derive_key(x.seed, {rng::tag::ENV_REPLICA, static_cast<std::uint64_t>(rep)});
        Environment env(law, env_seed);
        walk::Walker w(env, rng::make_stream(x.seed, {rng::tag::WALK, static_cast<std::uint64_t>(rep)}));
        for (std::int64_t t = 0; t < n_steps; ++t) w.step();
        for (int a = 0; a < d; ++a) {
            double xa = static_cast<double>(w.pos()[a]) / std::sqrt(static_cast<double>(n_steps));
            diag_acc[static_cast<std::size_t>(a)].add(xa * xa);
            for (int b2 = a + 1; b2 < d; ++b2) {
                double xb = static_cast<double>(w.pos()[b2]) /
                            std::sqrt(static_cast<double>(n_steps));
                cross_acc[static_cast<std::size_t>(a * d + b2)].add(xa * xb);
            }
        }
    }

    x.head({"metric", "value"});
    x.row({"max_kernel_drift", io::fmt(max_drift)});
    Json cov = Json::object();
    for (int a = 0; a < d; ++a) {
        stats::EstimateWithCI e = diag_acc[static_cast<std::size_t>(a)].ci(level);
        std::string name = "var_axis" + std::to_string(a + 1);
        x.row({name, io::fmt(e.estimate)});
        cov[name] = json_ci(e);
    }
    for (int a = 0; a < d; ++a)
        for (int b2 = a + 1; b2 < d; ++b2) {
            stats::Welford& acc = cross_acc[static_cast<std::size_t>(a * d + b2)];
            double z = acc.std_error() > 0.0 ? acc.mean / acc.std_error() : 0.0;
            std::string name =
                "cov_axis" + std::to_string(a + 1) + std::to_string(b2 + 1);
            x.row({name, io::fmt(acc.mean)});
            x.row({name + "_zscore", io::fmt(z)});
            cov[name] = acc.mean;
            cov[name + "_zscore"] = z;
        }
    x.estimates["max_kernel_drift"] = max_drift;
    x.estimates["covariance"] = cov;

    if (x.c.has("torus_N")) {
        std::vector<std::int64_t> Ns = x.c.get_int_list("torus_N");
        Json torus = Json::array();
        for (std::int64_t N : Ns) {
            double states = std::pow(2.0 * static_cast<double>(N) + 1.0, d);
            x.guard(states * states * states, "balanced-clt torus");
            Environment env(law, rng::chain(x.seed, static_cast<std::uint64_t>(N)));
            exact::TorusMeasure tm = exact::torus_invariant_measure(env, static_cast<int>(N));
            x.row({"torus_residual_N" + std::to_string(N), io::fmt(tm.residual_inf)});
            Json j = Json::object();
            j["N"] = tm.N;
            j["residual_inf"] = tm.residual_inf;
            j["normalization_error"] =
                std::fabs(tm.normalization - static_cast<double>(tm.n_states));
            torus.push_back(j);
        }
        x.estimates["torus"] = torus;
    }
}

inline void run_trap(Ctx& x) {
    EnvironmentLaw law = law_from_config(x.c);
    int k_max = static_cast<int>(x.c.get_int("k_max", 20));
    std::int64_t env_samples = x.c.get_int("env_samples", 20);
    x.guard(static_cast<double>(env_samples) * (k_max + 1.0), "trap");

    double max_err = 0.0, max_sum_err = 0.0;
    x.head({"env", "k", "survival", "closed_form", "abs_error"});
    for (std::int64_t i = 0; i < env_samples; ++i) {
        Environment env(law, rng::derive_key(x.seed, {rng::tag::ENV_REPLICA,
                                                      static_cast<std::uint64_t>(i)}));
        diag::EdgeSurvival es = diag::edge_survival(env, k_max);
        double r = es.w_forward * es.w_backward;
        double partial = 0.0;
        for (int k = 0; k <= k_max; ++k) {
            double closed = std::pow(r, k);
            double err = std::fabs(es.survival[static_cast<std::size_t>(k)] - closed);
            max_err = std::max(max_err, err);
            partial += es.survival[static_cast<std::size_t>(k)];
            double sum_closed = (1.0 - std::pow(r, k + 1)) / (1.0 - r);
            max_sum_err = std::max(max_sum_err, std::fabs(partial - sum_closed));
            x.row({io::fmt(i), io::fmt(static_cast<std::int64_t>(k)),
                   io::fmt(es.survival[static_cast<std::size_t>(k)]), io::fmt(closed),
                   io::fmt(err)});
        }
    }
    x.estimates["max_abs_error"] = max_err;
    x.estimates["max_partial_sum_error"] = max_sum_err;
    x.estimates["geometric_limit_form"] = "1/(1-w1*w2)";
}

using Runner = void (*)(Ctx&);

inline const std::map<std::string, Runner>& runners() {
    static const std::map<std::string, Runner> table = {
        {"env-report", run_env_report},
        {"classify1d", run_classify1d},
        {"velocity1d", run_velocity1d},
        {"invariant-density", run_invariant_density},
        {"kks", run_kks},
        {"sinai", run_sinai},
        {"potential", run_potential},
        {"renewal", run_renewal},
        {"lln", run_lln},
        {"slab", run_slab},
        {"t-gamma-fit", run_t_gamma_fit},
        {"p-condition", run_p_condition},
        {"effective-criterion", run_effective_criterion},
        {"decomposition", run_decomposition},
        {"atypical-exit", run_atypical_exit},
        {"dl-exit", run_dl_exit},
        {"rate-function", run_rate_function},
        {"balanced-clt", run_balanced_clt},
        {"trap", run_trap},
    };
    return table;
}

}  // namespace detail

inline std::vector<std::string> experiment_names() {
    std::vector<std::string> out;
    for (const auto& [name, fn] : detail::runners()) out.push_back(name);
    return out;
}

inline RunOutputs run(const std::string& experiment, cfg::Config& c,
                      const std::string& out_dir, const Overrides& ov = {}) {
    auto it = detail::runners().find(experiment);
    if (it == detail::runners().end())
        throw ConfigError("unknown experiment '" + experiment + "'");
    if (c.has("experiment")) {
        std::string declared = c.get_string("experiment");
        if (declared != experiment)
            throw ConfigError("config declares experiment '" + declared +
                              "' but '" + experiment + "' was requested");
    }

    detail::Ctx x(c);
    x.seed = ov.seed ? *ov.seed : static_cast<std::uint64_t>(c.get_int("seed", 1));
    x.force = ov.force || c.get_bool("force", false);
    x.budget_cap = c.get_double("budget_cap", detail::DEFAULT_BUDGET_CAP);

    it->second(x);
    c.reject_unknown();

    io::ensure_dir(out_dir);
    RunOutputs out;
    out.csv_path = out_dir + "/" + experiment + ".csv";
    out.json_path = out_dir + "/" + experiment + ".json";
    out.work_units = static_cast<std::uint64_t>(x.work);

    io::Csv csv(out.csv_path, x.headers);
    for (const auto& r : x.rows) csv.row(r);

    Json summary = Json::object();
    summary["experiment"] = experiment;
    summary["seed"] = x.seed;
    Json params = Json::object();
    for (const auto& [k, v] : c.items()) params[k] = v;
    summary["params"] = params;
    summary["estimates"] = x.estimates;
    summary["runtime"] = out.work_units;
    io::write_file(out.json_path, summary.dump(2) + "\n");
    return out;
}

}  // namespace rwre::harness
