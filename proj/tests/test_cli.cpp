#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "langsim/commands.hpp"

using namespace langsim;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

RunConfig config_from_json(const json& j, const std::string& sub, const std::string& out, int threads) {
    RunConfig cfg;
    cfg.raw = j;
    cfg.subcommand = sub;
    cfg.seed = j.value("seed", 1);
    cfg.threads = threads;
    cfg.out_dir = out;
    return cfg;
}

struct TempDir {
    std::string path;
    explicit TempDir(const std::string& name) : path("/tmp/langsim_test_" + name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("simulate: zero-noise quadratic follows the closed-form descent iterate") {
    TempDir tmp("sim_gd");
    json j = {{"seed", 5},
              {"problem", {{"builtin", "quadratic_2d"}, {"noise_scale", 0.0}}},
              {"process",
               {{"kind", "em_gaussian"}, {"delta", 0.1}, {"steps", 10}, {"n_traj", 3}, {"x0", {1.0, -2.0}}}}};
    RunConfig cfg = config_from_json(j, "simulate", tmp.path, 1);
    CHECK(cmd_simulate(cfg) == kExitOk);

    std::string csv = slurp(tmp.path + "/endpoints.csv");
    // replay the descent recursion with the same operation order as the kernel
    double e0 = 1.0, e1 = -2.0;
    for (int k = 0; k < 10; ++k) {
        e0 += -0.1 * e0;
        e1 += -0.1 * e1;
    }
    char line[256];
    std::snprintf(line, sizeof(line), "0,10,%.17g,%.17g", e0, e1);
    CHECK(csv.find(line) != std::string::npos);
    CHECK(csv.rfind("traj_id,step,x_0,x_1", 0) == 0);
}

TEST_CASE("simulate: missing problem key names the key and maps to exit 2") {
    TempDir tmp("sim_missing");
    json j = {{"process", {{"kind", "em_gaussian"}}}};
    RunConfig cfg = config_from_json(j, "simulate", tmp.path, 1);
    try {
        cmd_simulate(cfg);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("problem") != std::string::npos);
    }
}

TEST_CASE("simulate: identical config replays byte-identical output at any worker count") {
    json j = {{"seed", 9},
              {"problem", {{"builtin", "sine_2d"}}},
              {"process",
               {{"kind", "em_gaussian"}, {"delta", 0.02}, {"steps", 50}, {"n_traj", 40}}}};
    TempDir t1("det_a"), t2("det_b"), t3("det_c");
    CHECK(cmd_simulate(config_from_json(j, "simulate", t1.path, 1)) == kExitOk);
    CHECK(cmd_simulate(config_from_json(j, "simulate", t2.path, 1)) == kExitOk);
    CHECK(cmd_simulate(config_from_json(j, "simulate", t3.path, 2)) == kExitOk);
    std::string a = slurp(t1.path + "/endpoints.csv");
    CHECK(a == slurp(t2.path + "/endpoints.csv"));
    CHECK(a == slurp(t3.path + "/endpoints.csv"));
}

TEST_CASE("manifests record seed, config hash and process kind") {
    TempDir tmp("manifest");
    json j = {{"seed", 123},
              {"problem", {{"builtin", "rademacher_1d"}}},
              {"process", {{"kind", "discrete_xi"}, {"delta", 0.05}, {"steps", 5}, {"n_traj", 4}}}};
    RunConfig cfg = config_from_json(j, "simulate", tmp.path, 1);
    CHECK(cmd_simulate(cfg) == kExitOk);
    json m = json::parse(slurp(tmp.path + "/manifest.json"));
    CHECK(m["seed"].get<uint64_t>() == 123);
    CHECK(m["process_kind"].get<std::string>() == "discrete_xi");
    CHECK(m["config_hash"].get<uint64_t>() == config_hash(cfg.raw));
}

TEST_CASE("config round-trips through serialization") {
    json j = {{"seed", 7},
              {"problem", {{"builtin", "sine_2d"}}},
              {"process", {{"kind", "em_gaussian"}, {"delta", 0.015625}, {"steps", 12}}}};
    json back = json::parse(j.dump());
    CHECK(back == j);
    CHECK(config_hash(back) == config_hash(j));
}

TEST_CASE("clt-check subcommand verifies the gaussian approximation bound") {
    TempDir tmp("clt");
    json j = {{"seed", 21}, {"clt", {{"ns", {64, 256}}, {"aggregates", 4000}}}};
    RunConfig cfg = config_from_json(j, "clt-check", tmp.path, 2);
    CHECK(cmd_clt_check(cfg) == kExitOk);
    json rep = json::parse(slurp(tmp.path + "/clt_check.json"));
    CHECK(rep["pass"].get<bool>());
}

TEST_CASE("selftest subcommand emits the lemma grid and passes") {
    TempDir tmp("selftest");
    json j = {{"seed", 1}, {"selftest", {{"grid_n", 120}}}};
    RunConfig cfg = config_from_json(j, "selftest", tmp.path, 1);
    CHECK(cmd_selftest(cfg) == kExitOk);
    std::string csv = slurp(tmp.path + "/selftest.csv");
    CHECK(csv.rfind("lemma_id,check_id,worst_violation,status", 0) == 0);
    CHECK(csv.find("FAIL") == std::string::npos);
    CHECK(csv.find("q,contraction_inequality") != std::string::npos);
}

TEST_CASE("rate sweep on the 1d ou problem fits a slope near one") {
    TempDir tmp("ou_sweep");
    json j = {{"seed", 3},
              {"problem", {{"builtin", "quadratic_1d"}}},
              {"rate_sweep",
               {{"deltas", {0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625, 0.001953125}},
                {"total_time", 1.0},
                {"n_pairs", 500},
                {"refine", 64},
                {"blocks", 5},
                {"x0", {1.0}}}}};
    RunConfig cfg = config_from_json(j, "rate-sweep", tmp.path, 2);
    CHECK(cmd_rate_sweep(cfg) == kExitOk);
    json rep = json::parse(slurp(tmp.path + "/rate_sweep.json"));
    double slope = rep["slope"].get<double>();
    CHECK(slope >= 0.4);
    CHECK(slope <= 1.2);
}

TEST_CASE("load_config applies overrides and the output env var") {
    setenv("LANGSIM_OUT", "/tmp/langsim_env_out", 1);
    RunConfig cfg = load_config("", "simulate", 42, 3, std::nullopt);
    CHECK(cfg.seed == 42);
    CHECK(cfg.threads == 3);
    CHECK(cfg.out_dir == "/tmp/langsim_env_out");
    unsetenv("LANGSIM_OUT");
    RunConfig cfg2 = load_config("", "simulate", std::nullopt, std::nullopt, std::string("somewhere"));
    CHECK(cfg2.out_dir == "somewhere");
    CHECK(cfg2.seed == 1);
}
