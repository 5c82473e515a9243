#pragma once

#include <stdexcept>
#include <string>

#include "langsim/linalg.hpp"
#include "langsim/metrics.hpp"
#include "langsim/problems.hpp"
#include "langsim/rng.hpp"

namespace langsim {

struct Unmatchable : std::runtime_error {
    explicit Unmatchable(const std::string& what) : std::runtime_error(what) {}
};

struct SGDConfig {
    double delta = 0.0;
    int b = 1;
    double covariance_scalar() const { return delta / b; }
};

// SGD plus an injected difference of two independent minibatch gradient
// estimates; matches a target noise covariance with different higher moments.
struct LargeNoiseConfig {
    double s = 0.0;
    double sigma = 0.0;
    int b1 = 1;
    int b2 = 1;
    double covariance_scalar() const { return s / b1 + 2.0 * sigma * sigma / b2; }
};

// w' = w - (delta/b) * sum_{i in eta} grad U_i(w), batch with replacement.
Vec sgd_step(const Vec& w, const FiniteSumObjective& obj, const SGDConfig& cfg, RngStream& rng);

// One large-noise step. The definition form and the equivalent zeta form of
// the update are both evaluated and cross-checked to 1e-12 before returning.
Vec large_noise_sgd_step(const Vec& w, const FiniteSumObjective& obj, const LargeNoiseConfig& cfg,
                         RngStream& rng);

// Sample covariance of zeta over single-element minibatches.
SymMatrix estimate_H(const Vec& w, const FiniteSumObjective& obj, int n_draws, RngStream& rng);

// Exact H(w) by enumerating all n single-element minibatches.
SymMatrix exact_H(const Vec& w, const FiniteSumObjective& obj);

// sigma such that (s, sigma, b1, b2)-large-noise SGD matches the covariance
// scalar delta/b of the target.
double match_noise(const SGDConfig& target, double s, int b1, int b2);

struct AlgorithmConfig {
    bool large_noise = false;
    SGDConfig sgd;
    LargeNoiseConfig ln;
};

struct TrainingResult {
    Vec loss_trace;
    StateMatrix tail;  // last 10% of iterates
};

TrainingResult run_training(const FiniteSumObjective& obj, const AlgorithmConfig& cfg, int steps,
                            uint64_t seed);

}  // namespace langsim
