#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "rwre/config.hpp"
#include "rwre/harness.hpp"

using namespace rwre;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string message_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("config parser is strict about shape") {
    std::string dup = "a = 1\nb = 2\na = 3\n";
    std::string msg = message_of([&] { cfg::Config::from_string(dup, "dup.cfg"); });
    REQUIRE(msg.find("dup.cfg:3") != std::string::npos);
    REQUIRE(msg.find("duplicate key 'a'") != std::string::npos);
    REQUIRE(msg.find("line 1") != std::string::npos);

    msg = message_of([&] { cfg::Config::from_string("just words\n", "bad.cfg"); });
    REQUIRE(msg.find("bad.cfg:1") != std::string::npos);
    REQUIRE(msg.find("expected key = value") != std::string::npos);

    msg = message_of([&] { cfg::Config::from_string(" = 5\n", "bad.cfg"); });
    REQUIRE(msg.find("empty key") != std::string::npos);

    cfg::Config ok = cfg::Config::from_string("# comment\n\nn = 12\n", "ok.cfg");
    REQUIRE(ok.get_int("n") == 12);
}

TEST_CASE("typed getters validate whole tokens") {
    cfg::Config c = cfg::Config::from_string(
        "n = 12x\nr = 0.5.7\nflag = maybe\nlist = 1, 2, oops\n", "types.cfg");
    REQUIRE_THROWS_AS(c.get_int("n"), ConfigError);
    REQUIRE_THROWS_AS(c.get_double("r"), ConfigError);
    REQUIRE_THROWS_AS(c.get_bool("flag"), ConfigError);
    REQUIRE_THROWS_AS(c.get_double_list("list"), ConfigError);
    REQUIRE(c.get_int("missing", 7) == 7);
    REQUIRE_THROWS_AS(c.get_string("missing"), ConfigError);
}

TEST_CASE("a misspelled key is rejected with its line number") {
    cfg::Config c = cfg::Config::from_string(
        "law = two_point\np1 = 0.3\np2 = 0.9\nvelcoity = 0.5\n", "typo.cfg");
    std::string msg = message_of([&] { harness::run("classify1d", c, "/tmp/harness_typo"); });
    REQUIRE(msg.find("unknown key 'velcoity'") != std::string::npos);
    REQUIRE(msg.find("typo.cfg:4") != std::string::npos);
}

TEST_CASE("classification run reports the transient regime") {
    cfg::Config c = cfg::Config::from_string(
        "law = two_point\np1 = 0.3\np2 = 0.9\nseed = 5\n", "cls.cfg");
    harness::RunOutputs out = harness::run("classify1d", c, "/tmp/harness_cls");
    nlohmann::json j = nlohmann::json::parse(slurp(out.json_path));
    REQUIRE(j["experiment"] == "classify1d");
    REQUIRE(j["seed"] == 5);
    REQUIRE(j["estimates"]["regime"] == "transient_right");
    REQUIRE(j["params"]["p1"] == "0.3");
    REQUIRE(j["runtime"].is_number());

    std::string csv = slurp(out.csv_path);
    REQUIRE(csv.rfind("metric,value\n", 0) == 0);
    REQUIRE(csv.find("regime,transient_right") != std::string::npos);
}

TEST_CASE("reruns with the same config are byte-identical") {
    auto once = [](const std::string& dir) {
        cfg::Config c = cfg::Config::from_string(
            "law = two_point\np1 = 0.8\np2 = 0.4\nn_steps = 4000\nreplicas = 40\n",
            "rerun.cfg");
        return harness::run("velocity1d", c, dir);
    };
    harness::RunOutputs a = once("/tmp/harness_rerun_a");
    harness::RunOutputs b = once("/tmp/harness_rerun_b");
    REQUIRE(slurp(a.csv_path) == slurp(b.csv_path));
    REQUIRE(slurp(a.json_path) == slurp(b.json_path));
    REQUIRE(a.work_units == b.work_units);
}

TEST_CASE("the seed override reroutes every random draw") {
    auto once = [](std::uint64_t seed, const std::string& dir) {
        cfg::Config c = cfg::Config::from_string(
            "law = two_point\np1 = 0.8\np2 = 0.4\nn_steps = 4000\nreplicas = 40\n",
            "seed.cfg");
        harness::Overrides ov;
        ov.seed = seed;
        return harness::run("velocity1d", c, dir, ov);
    };
    harness::RunOutputs a = once(1, "/tmp/harness_seed_a");
    harness::RunOutputs b = once(2, "/tmp/harness_seed_b");
    REQUIRE(slurp(a.csv_path) != slurp(b.csv_path));
    nlohmann::json ja = nlohmann::json::parse(slurp(a.json_path));
    nlohmann::json jb = nlohmann::json::parse(slurp(b.json_path));
    REQUIRE(ja["seed"] == 1);
    REQUIRE(jb["seed"] == 2);
    REQUIRE(ja["estimates"]["empirical"]["estimate"] !=
            jb["estimates"]["empirical"]["estimate"]);
}

TEST_CASE("the budget guard blocks runaway work unless forced") {
    std::string text =
        "law = homogeneous1d\np = 0.75\nn_steps = 2000\nreplicas = 100\nbudget_cap = 10\n";
    cfg::Config c = cfg::Config::from_string(text, "budget.cfg");
    std::string msg = message_of([&] { harness::run("velocity1d", c, "/tmp/harness_budget"); });
    REQUIRE(msg.find("budget cap") != std::string::npos);
    REQUIRE(msg.find("velocity1d") != std::string::npos);

    cfg::Config forced = cfg::Config::from_string(text + "force = true\n", "budget.cfg");
    harness::RunOutputs out = harness::run("velocity1d", forced, "/tmp/harness_budget");
    REQUIRE(out.work_units >= 200000);

    cfg::Config ov_cfg = cfg::Config::from_string(text, "budget.cfg");
    harness::Overrides ov;
    ov.force = true;
    REQUIRE_NOTHROW(harness::run("velocity1d", ov_cfg, "/tmp/harness_budget", ov));
}

TEST_CASE("experiment names are validated against the config") {
    cfg::Config c = cfg::Config::from_string("experiment = kks\nlaw = two_point\n", "mm.cfg");
    std::string msg = message_of([&] { harness::run("classify1d", c, "/tmp/harness_mm"); });
    REQUIRE(msg.find("declares experiment 'kks'") != std::string::npos);

    cfg::Config c2 = cfg::Config::from_string("law = two_point\n", "mm.cfg");
    REQUIRE_THROWS_AS(harness::run("no_such_thing", c2, "/tmp/harness_mm"), ConfigError);

    REQUIRE(harness::experiment_names().size() == 19);
}

TEST_CASE("every law name in the registry round-trips through a run") {
    const char* configs[] = {
        "law = homogeneous1d\np = 0.7\n",
        "law = two_point\np1 = 0.3\np2 = 0.9\nw1 = 0.25\n",
        "law = one_dim_discrete\np_atoms = 0.3, 0.6, 0.8\nw_atoms = 0.25, 0.5, 0.25\n",
        "law = trap\ntrap_c = 0.2\n",
    };
    for (const char* text : configs) {
        cfg::Config c = cfg::Config::from_string(text, "law.cfg");
        REQUIRE_NOTHROW(harness::run("env-report", c, "/tmp/harness_laws"));
    }

    cfg::Config bad = cfg::Config::from_string("law = nonsense\n", "law.cfg");
    REQUIRE_THROWS_AS(harness::run("env-report", bad, "/tmp/harness_laws"), ConfigError);
}
