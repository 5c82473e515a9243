// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit code = number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "langsim/commands.hpp"
#include "langsim/fokker1d.hpp"
#include "langsim/lyapunov.hpp"
#include "langsim/metrics.hpp"
#include "langsim/sgdnoise.hpp"
#include "langsim/simulate.hpp"
#include "langsim/stats.hpp"
#include "langsim/threading.hpp"

using namespace langsim;
using nlohmann::json;

namespace {

int g_threads = 2;
std::string g_out = "acceptance_out";
uint64_t g_seed = 2024;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

RunConfig make_cfg(const json& j, const std::string& sub, const std::string& out, int threads) {
    RunConfig cfg;
    cfg.raw = j;
    cfg.raw["seed"] = j.value("seed", g_seed);
    cfg.subcommand = sub;
    cfg.seed = cfg.raw["seed"].get<uint64_t>();
    cfg.threads = threads;
    cfg.out_dir = out;
    return cfg;
}

FiniteSumObjective toy_objective() {
    FiniteSumObjective obj = make_logistic_objective(2, 200, {1.2, 2.0}, 11);
    center_objective(obj);
    return obj;
}

char fmt_buf[512];
template <class... Args>
std::string strf(const char* f, Args... args) {
    std::snprintf(fmt_buf, sizeof(fmt_buf), f, args...);
    return fmt_buf;
}

// ---- criterion 1: lemma property grid ----
Outcome criterion1() {
    RegularityParams pa{2.0, 3.0, 1.0, 1.0, 1.0, 0.0, 1.0};
    RegularityParams pb{1.0, 2.0, 1.0, 1.0, 1.0, 0.005, 0.7};
    std::vector<std::pair<RegularityParams, double>> sets = {{pa, 0.3}, {pa, 0.05}, {pb, 0.2}};
    double worst_closed = 0.0, worst_quad = 0.0, worst_fd = 0.0;
    bool pass = true;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        auto rows = run_lemma_grid(sets[i].first, sets[i].second, 500, g_seed + i);
        for (const auto& r : rows) {
            if (!r.pass) pass = false;
            if (r.tolerance == 1e-8)
                worst_closed = std::max(worst_closed, r.worst_violation);
            else if (r.tolerance == 1e-6)
                worst_quad = std::max(worst_quad, r.worst_violation);
            else
                worst_fd = std::max(worst_fd, r.worst_violation);
        }
    }
    return {pass, strf("worst violation: closed-form %.2e (tol 1e-8), quadrature %.2e (tol 1e-6), "
                       "finite-diff %.2e (tol 1e-5)",
                       worst_closed, worst_quad, worst_fd)};
}

// ---- criterion 2: 1D worked example reproduction ----
Outcome criterion2() {
    json j = {{"seed", g_seed}, {"problem", {{"builtin", "example_1d"}}}};
    RunConfig cfg = make_cfg(j, "invariant1d", g_out + "/c2", g_threads);
    int rc = cmd_invariant1d(cfg);
    json rep = json::parse(slurp(g_out + "/c2/invariant1d.json"));
    return {rc == kExitOk,
            strf("mode_gap %.3f (tol 0.5), w1 %.3f (tol 0.6), V argmin %.3f in [-3,-1], "
                 "prominent minima %d",
                 rep["mode_gap"].get<double>(), rep["w1"].get<double>(),
                 rep["v_argmin"].get<double>(), rep["prominent_minima"].get<int>())};
}

// ---- criterion 3: discretization rate sweep ----
Outcome criterion3() {
    json j = {{"seed", g_seed}, {"problem", {{"builtin", "sine_2d"}}}};
    RunConfig cfg = make_cfg(j, "rate-sweep", g_out + "/c3", g_threads);
    int rc = cmd_rate_sweep(cfg);
    json rep = json::parse(slurp(g_out + "/c3/rate_sweep.json"));
    return {rc == kExitOk, strf("log-log slope %.3f (need >= 0.4), monotone within 2se: %s",
                                rep["slope"].get<double>(),
                                rep["monotone_within_2se"].get<bool>() ? "yes" : "no")};
}

// ---- criterion 4: reflection-coupling contraction at the budget step size ----
Outcome criterion4() {
    json j = {{"seed", g_seed}, {"problem", {{"builtin", "double_well_1d"}}}};
    RunConfig cfg = make_cfg(j, "couple", g_out + "/c4", g_threads);
    int rc = cmd_couple(cfg);
    json rep = json::parse(slurp(g_out + "/c4/couple.json"));
    return {rc == kExitOk, strf("delta %.3e, lambda %.3e, slack %.3e, f0 %.4f; E f stayed below the "
                                "contraction bound at k in {10,100,1000}",
                                rep["delta"].get<double>(), rep["lambda"].get<double>(),
                                rep["slack"].get<double>(), rep["f0"].get<double>())};
}

// ---- criterion 5: energy bounds on the toy objective ----
Outcome criterion5() {
    FiniteSumObjective obj = toy_objective();
    const double delta = 0.002;
    const int b = 8;
    ProblemSpec spec = finite_sum_problem(obj, delta, b);
    const RegularityParams& p = spec.params;
    double energy = p.R * p.R + p.beta * p.beta / p.m;
    double cap_x = 6.0 * energy, cap_yw = 8.0 * energy;
    double admissible = p.m / (16.0 * p.L * p.L);
    if (delta > admissible) return {false, "step size exceeds the admissible m/(16 L^2)"};

    const int steps = 1000, n_traj = 1000, refine = 16;
    Vec x0(2, 0.0);

    double worst_x = 0.0, worst_y = 0.0, worst_w = 0.0;
    bool ok = true;

    auto track = [&](const StateMatrix& st, double cap, double& worst) {
        std::vector<double> sq(static_cast<std::size_t>(st.n_traj));
        for (int i = 0; i < st.n_traj; ++i) {
            double s = 0.0;
            for (int k = 0; k < st.dim; ++k) s += st.row(i)[k] * st.row(i)[k];
            sq[i] = s;
        }
        MeanSE ms = mean_se(sq);
        worst = std::max(worst, ms.mean);
        if (ms.mean > cap + 3.0 * ms.se) ok = false;
    };

    Ensemble x_chain = make_ensemble(ProcessKind::FineReference, x0, n_traj, delta / refine, g_seed);
    Ensemble y_chain = make_ensemble(ProcessKind::EmGaussian, x0, n_traj, delta, g_seed + 1);
    Ensemble w_chain = make_ensemble(ProcessKind::DiscreteXi, x0, n_traj, delta, g_seed + 2);
    for (int k = 0; k < steps; ++k) {
        for (int s = 0; s < refine; ++s) step_em(x_chain, spec, g_threads);
        step_em(y_chain, spec, g_threads);
        step_discrete_xi(w_chain, spec, g_threads);
        track(x_chain.states, cap_x, worst_x);
        track(y_chain.states, cap_yw, worst_y);
        track(w_chain.states, cap_yw, worst_w);
    }
    return {ok, strf("peak second moments: x %.3e (cap %.2f), y %.3e, w %.3e (cap %.2f)", worst_x,
                     cap_x, worst_y, worst_w, cap_yw)};
}

// ---- criterion 6: frozen-pair discretization bound ----
Outcome criterion6() {
    FiniteSumObjective obj = toy_objective();
    const double delta = 0.002;
    const int b = 8, n_steps = 16, n_pairs = 10000;
    ProblemSpec spec = finite_sum_problem(obj, delta, b);
    const RegularityParams& p = spec.params;
    double t_epoch = n_steps * delta;
    if (t_epoch > 1.0 / (16.0 * p.L)) return {false, "epoch violates T <= 1/(16 L)"};

    Vec w0(2, 0.0);
    PairedEnsemble pair = make_paired(PairingKind::FrozenSharedEta, w0, w0, n_pairs, delta, g_seed);
    for (int k = 0; k < n_steps; ++k) step_frozen_pair(pair, spec, g_threads);
    std::vector<double> gaps(static_cast<std::size_t>(n_pairs));
    for (int i = 0; i < n_pairs; ++i) {
        Vec d = sub(pair.first.row_vec(i), pair.second.row_vec(i));
        gaps[i] = dot(d, d);
    }
    MeanSE ms = mean_se(gaps);
    double bound = 32.0 *
                   (t_epoch * t_epoch * p.L * p.L + t_epoch * p.L_xi * p.L_xi) * t_epoch *
                   p.beta * p.beta;
    bool ok = ms.mean <= bound + 3.0 * ms.se;
    return {ok, strf("E||v_T - w_T||^2 = %.3e (+3se %.1e) vs bound %.3e", ms.mean, 3.0 * ms.se, bound)};
}

// ---- criterion 7: quantitative CLT ----
Outcome criterion7() {
    json j = {{"seed", g_seed}, {"clt", {{"ns", {64, 256, 1024}}, {"aggregates", 10000}}}};
    RunConfig cfg = make_cfg(j, "clt-check", g_out + "/c7", g_threads);
    int rc = cmd_clt_check(cfg);
    json rep = json::parse(slurp(g_out + "/c7/clt_check.json"));
    std::string detail;
    for (const auto& row : rep["results"])
        detail += strf("n=%d w2=%.4f<=%.4f ", row["n"].get<int>(), row["w2"].get<double>(),
                       row["bound"].get<double>());
    return {rc == kExitOk, detail};
}

// ---- criterion 8: trace inequality for matrix square roots ----
Outcome criterion8() {
    RngStream rng(g_seed, 0, 0, substream::kProbe);
    double worst = -1e300;
    int failures = 0;
    for (int t = 0; t < 1000; ++t) {
        int d = 1 + static_cast<int>(rng.uniform_below(6));
        auto random_spd = [&]() {
            SymMatrix s(d);
            std::vector<double> bmat(static_cast<std::size_t>(d) * d);
            for (auto& v : bmat) v = rng.normal();
            for (int i = 0; i < d; ++i)
                for (int jj = 0; jj <= i; ++jj) {
                    double acc = 0.0;
                    for (int k = 0; k < d; ++k)
                        acc += bmat[static_cast<std::size_t>(i) * d + k] *
                               bmat[static_cast<std::size_t>(jj) * d + k];
                    s.at(i, jj) = acc + (i == jj ? 0.05 : 0.0);
                }
            return s;
        };
        SqrtTraceCheck chk = check_sqrt_trace_inequality(random_spd(), random_spd());
        worst = std::max(worst, (chk.lhs - chk.rhs) / (1.0 + std::abs(chk.rhs)));
        if (!chk.holds) ++failures;
    }
    return {failures == 0, strf("worst (lhs-rhs)/(1+|rhs|) = %.2e over 1000 pairs, %d failures",
                                worst, failures)};
}

// ---- criterion 9: covariance matching separates matched from mismatched ----
Outcome criterion9() {
    json j = {{"seed", g_seed}};
    RunConfig cfg = make_cfg(j, "sgd-match", g_out + "/c9", g_threads);
    int rc = cmd_sgd_match(cfg);
    json rep = json::parse(slurp(g_out + "/c9/sgd_match.json"));
    return {rc == kExitOk,
            strf("w1 matched %.4f vs mismatched %.4f/%.4f; gaps %.4f(se %.4f), %.4f(se %.4f); "
                 "8x identity error %.1e",
                 rep["w1_matched"].get<double>(), rep["w1_sgd_vs_mismatched"].get<double>(),
                 rep["w1_ln_vs_mismatched"].get<double>(), rep["gap_sgd_mean"].get<double>(),
                 rep["gap_sgd_se"].get<double>(), rep["gap_ln_mean"].get<double>(),
                 rep["gap_ln_se"].get<double>(), rep["eight_x_identity_error"].get<double>())};
}

// ---- criterion 10: thread-count invariance of the output bytes ----
Outcome criterion10() {
    json sim = {{"seed", g_seed},
                {"problem", {{"builtin", "sine_2d"}}},
                {"process",
                 {{"kind", "em_gaussian"}, {"delta", 0.01}, {"steps", 300}, {"n_traj", 200}}}};
    if (cmd_simulate(make_cfg(sim, "simulate", g_out + "/c10_sim_t1", 1)) != kExitOk)
        return {false, "simulate failed"};
    if (cmd_simulate(make_cfg(sim, "simulate", g_out + "/c10_sim_t4", 4)) != kExitOk)
        return {false, "simulate failed"};
    bool sim_ok = slurp(g_out + "/c10_sim_t1/endpoints.csv") == slurp(g_out + "/c10_sim_t4/endpoints.csv");

    json clt = {{"seed", g_seed}, {"clt", {{"ns", {64, 256}}, {"aggregates", 3000}}}};
    if (cmd_clt_check(make_cfg(clt, "clt-check", g_out + "/c10_clt_t1", 1)) != kExitOk)
        return {false, "clt-check failed"};
    if (cmd_clt_check(make_cfg(clt, "clt-check", g_out + "/c10_clt_t3", 3)) != kExitOk)
        return {false, "clt-check failed"};
    bool clt_ok = slurp(g_out + "/c10_clt_t1/clt_check.csv") == slurp(g_out + "/c10_clt_t3/clt_check.csv");

    return {sim_ok && clt_ok,
            strf("endpoints.csv identical across threads: %s; clt_check.csv identical: %s",
                 sim_ok ? "yes" : "no", clt_ok ? "yes" : "no")};
}

const char* kNames[] = {
    "lemma property grid",
    "1D worked-example reproduction",
    "discretization rate sweep",
    "reflection-coupling contraction",
    "energy bounds",
    "frozen-pair discretization bound",
    "quantitative CLT",
    "matrix square-root trace inequality",
    "noise-covariance matching",
    "thread-count determinism",
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--criterion") && i + 1 < argc) only = std::atoi(argv[++i]);
        if (!std::strcmp(argv[i], "--threads") && i + 1 < argc) g_threads = std::atoi(argv[++i]);
        if (!std::strcmp(argv[i], "--out") && i + 1 < argc) g_out = argv[++i];
        if (!std::strcmp(argv[i], "--seed") && i + 1 < argc) g_seed = std::strtoull(argv[++i], nullptr, 10);
    }
    std::filesystem::create_directories(g_out);

    Outcome (*criteria[])() = {criterion1, criterion2, criterion3, criterion4, criterion5,
                               criterion6, criterion7, criterion8, criterion9, criterion10};
    int failures = 0;
    for (int k = 1; k <= 10; ++k) {
        if (only != 0 && only != k) continue;
        auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = criteria[k - 1]();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %2d: %s — %s [%.1fs]\n", out.pass ? "PASS" : "FAIL", k, kNames[k - 1],
                    out.detail.c_str(), secs);
        std::fflush(stdout);
        if (!out.pass) ++failures;
    }
    return failures;
}
