#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "langsim/problems.hpp"
#include "langsim/lyapunov.hpp"

namespace langsim {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// exit codes shared by every subcommand
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct RunConfig {
    nlohmann::json raw;  // subcommand config after defaults and overrides
    std::string subcommand;
    uint64_t seed = 1;
    int threads = 1;
    std::string out_dir = "out";
};

RunConfig load_config(const std::string& config_path, const std::string& subcommand,
                      std::optional<uint64_t> seed_override, std::optional<int> threads_override,
                      std::optional<std::string> out_override);

uint64_t config_hash(const nlohmann::json& j);

struct BuiltProblem {
    ProblemSpec spec;
    std::optional<FiniteSumObjective> objective;
};

// Builds a problem from its config block: {"builtin": name} or
// {"finite_sum": {family, n, dim, seed, barrier{m,R}, delta, b}}.
BuiltProblem make_problem(const nlohmann::json& problem_cfg);

int cmd_simulate(const RunConfig& cfg);
int cmd_rate_sweep(const RunConfig& cfg);
int cmd_couple(const RunConfig& cfg);
int cmd_invariant1d(const RunConfig& cfg);
int cmd_sgd_match(const RunConfig& cfg);
int cmd_clt_check(const RunConfig& cfg);
int cmd_selftest(const RunConfig& cfg);

// One row of the lemma property grid.
struct LemmaCheckRow {
    std::string lemma_id;
    std::string check_id;
    double worst_violation = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

// Runs every lemma-derived property check for one parameter set.
std::vector<LemmaCheckRow> run_lemma_grid(const RegularityParams& params, double epsilon, int grid_n,
                                          uint64_t seed);

// Counts local minima of a sampled function whose topographic prominence is at
// least min_prominence.
int count_prominent_minima(const Vec& grid, const Vec& values, double min_prominence);

}  // namespace langsim
