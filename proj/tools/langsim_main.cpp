#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "langsim/commands.hpp"
#include "langsim/fokker1d.hpp"
#include "langsim/linalg.hpp"
#include "langsim/lyapunov.hpp"
#include "langsim/metrics.hpp"
#include "langsim/simulate.hpp"

namespace {

int dispatch(const std::string& sub, const langsim::RunConfig& cfg) {
    using namespace langsim;
    if (sub == "simulate") return cmd_simulate(cfg);
    if (sub == "rate-sweep") return cmd_rate_sweep(cfg);
    if (sub == "couple") return cmd_couple(cfg);
    if (sub == "invariant1d") return cmd_invariant1d(cfg);
    if (sub == "sgd-match") return cmd_sgd_match(cfg);
    if (sub == "clt-check") return cmd_clt_check(cfg);
    if (sub == "selftest") return cmd_selftest(cfg);
    std::fprintf(stderr, "unknown subcommand: %s\n", sub.c_str());
    return langsim::kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and verification toolkit for Langevin-like processes "
                 "with state-dependent noise"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out_dir;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--seed", seed, "master seed override");
    app.add_option("--threads", threads, "worker count (never changes numerical results)");
    app.add_option("--out", out_dir, "output directory (or set LANGSIM_OUT)");

    for (const char* name : {"simulate", "rate-sweep", "couple", "invariant1d", "sgd-match",
                             "clt-check", "selftest"})
        app.add_subcommand(name)->fallthrough();

    CLI11_PARSE(app, argc, argv);
    std::string sub = app.get_subcommands().front()->get_name();

    try {
        langsim::RunConfig cfg = langsim::load_config(config_path, sub, seed, threads, out_dir);
        return dispatch(sub, cfg);
    } catch (const langsim::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return langsim::kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return langsim::kExitNumeric;
    }
}
