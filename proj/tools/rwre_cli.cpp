// Command-line front end: one subcommand per experiment, configs as flat
// key=value files, deterministic outputs under --out. Exit codes: 0 success,
// 2 config/domain error, 3 resource guard, 4 numerical failure.

#include <chrono>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rwre/harness.hpp"

namespace {

struct SubArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::int64_t> seed;
    bool force = false;
};

const char* describe(const std::string& name) {
    if (name == "env-report") return "ellipticity, nestling class, and trap moments of a law";
    if (name == "classify1d") return "1D transience/recurrence and speed regime";
    if (name == "velocity1d") return "empirical speed against the closed form";
    if (name == "invariant-density") return "stationarity defect of the tilted density";
    if (name == "kks") return "sub-ballistic scaling exponent";
    if (name == "sinai") return "(log n)^2 range scaling in the recurrent regime";
    if (name == "potential") return "quenched potential profile and harmonic residual";
    if (name == "renewal") return "record-based path decomposition and block velocity";
    if (name == "lln") return "cross-check of all speed estimators on one law";
    if (name == "slab") return "back-exit probability of a directional slab";
    if (name == "t-gamma-fit") return "stretched-exponential decay fit over slab widths";
    if (name == "p-condition") return "polynomial box-exit condition on a finite box";
    if (name == "effective-criterion") return "finite-box moment criterion with grid search";
    if (name == "decomposition") return "layered partition of the box odds-ratio moment";
    if (name == "atypical-exit") return "probability of an atypically small front-exit chance";
    if (name == "dl-exit") return "wide-domain escape estimate at the reference scale";
    if (name == "rate-function") return "empirical decay rates of n-step probabilities";
    if (name == "balanced-clt") return "drift/covariance checks for balanced laws";
    if (name == "trap") return "edge-trap survival identity across sampled environments";
    return "";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for walks in random environments"};
    app.require_subcommand(1);

    std::map<std::string, SubArgs> args;
    for (const std::string& name : rwre::harness::experiment_names()) {
        SubArgs& a = args[name];
        CLI::App* sub = app.add_subcommand(name, describe(name));
        sub->add_option("--config", a.config_path, "experiment config file")->required();
        sub->add_option("--seed", a.seed, "override the config seed");
        sub->add_option("--out", a.out_dir, "output directory (default: out)");
        sub->add_flag("--force", a.force, "override the work budget guard");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string name = app.get_subcommands().front()->get_name();
    const SubArgs& a = args[name];

    try {
        auto t0 = std::chrono::steady_clock::now();
        rwre::cfg::Config config = rwre::cfg::Config::from_file(a.config_path);
        rwre::harness::Overrides ov;
        if (a.seed) ov.seed = static_cast<std::uint64_t>(*a.seed);
        ov.force = a.force;
        rwre::harness::RunOutputs out = rwre::harness::run(name, config, a.out_dir, ov);
        auto t1 = std::chrono::steady_clock::now();
        std::cout << "wrote " << out.csv_path << "\n";
        std::cout << "wrote " << out.json_path << "\n";
        std::cerr << "wall-clock "
                  << std::chrono::duration<double>(t1 - t0).count() << " s, "
                  << out.work_units << " work units\n";
        return 0;
    } catch (const rwre::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const rwre::DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 2;
    } catch (const rwre::ResourceError& e) {
        std::cerr << "resource guard: " << e.what() << "\n";
        return 3;
    } catch (const rwre::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    }
}
