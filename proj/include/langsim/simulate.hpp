#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "langsim/lyapunov.hpp"
#include "langsim/problems.hpp"
#include "langsim/rng.hpp"
#include "langsim/vec.hpp"

namespace langsim {

struct NoiseBoundViolated : std::runtime_error {
    explicit NoiseBoundViolated(const std::string& what) : std::runtime_error(what) {}
};
struct NonFinite : std::runtime_error {
    explicit NonFinite(const std::string& what) : std::runtime_error(what) {}
};

enum class ProcessKind { EmGaussian, DiscreteXi, FineReference, FrozenV };
enum class PairingKind { Synchronous, Reflection, FrozenSharedEta };

const char* to_string(ProcessKind k);

// A seeded batch of trajectories. The noise consumed by trajectory i at step
// k is a pure function of (seed, i, k), so any sub-range replays bit-for-bit
// and results are independent of how work is spread over threads.
struct Ensemble {
    ProcessKind kind = ProcessKind::EmGaussian;
    StateMatrix states;
    long step_index = 0;
    double delta = 0.0;
    uint64_t seed = 0;
};

Ensemble make_ensemble(ProcessKind kind, const Vec& x0, int n_traj, double delta, uint64_t seed);

// One Euler step of the Gaussian chain: y <- y - delta*grad U(y) + sqrt(delta)*M(y)*theta.
void step_em(Ensemble& ens, const ProblemSpec& spec, int threads = 1);

// One step of the discrete non-Gaussian chain: w <- w - delta*grad U(w) + sqrt(delta)*xi(w, eta).
// Every draw is checked against the claimed bound beta.
void step_discrete_xi(Ensemble& ens, const ProblemSpec& spec, int threads = 1);

// Fine-grid surrogate for the continuous SDE: n_steps outer steps, each split
// into `refine` Euler substeps of length delta/refine. refine = 1 reproduces
// step_em bit-for-bit.
Ensemble simulate_reference(const Vec& x0, int n_traj, const ProblemSpec& spec, double delta,
                            int n_steps, int refine, uint64_t seed, int threads = 1);

// Two chains advanced under shared randomness.
struct PairedEnsemble {
    PairingKind kind = PairingKind::Synchronous;
    StateMatrix first;   // x, or the frozen-coefficient chain v
    StateMatrix second;  // y, or the fresh-coefficient chain w
    StateMatrix anchor;  // epoch-start states (frozen pairing)
    long step_index = 0;
    double delta = 0.0;
    uint64_t seed = 0;
};

PairedEnsemble make_paired(PairingKind kind, const Vec& x0, const Vec& y0, int n_pairs, double delta,
                           uint64_t seed);

// One outer step of the reflection coupling, discretized with `inner`
// substeps. x refreshes its coefficients every substep; y keeps the
// coefficients frozen at the block start; the shared Gaussian driver dV is
// reflected across gamma = (x-y)/||x-y|| while ||x-y|| lies in [2*eps, R_q).
void step_reflection_coupled(PairedEnsemble& pair, const ProblemSpec& spec, const LyapunovFn& lyap,
                             int inner, int threads = 1);

// One step of the frozen/fresh pair sharing the same eta realization:
// v uses grad U(w0) and xi(w0, eta_k); w uses grad U(w) and xi(w, eta_k).
void step_frozen_pair(PairedEnsemble& pair, const ProblemSpec& spec, int threads = 1);

// S_n = (1/sqrt(n)) sum_i xi(x, eta_i): a CLT aggregate approximating M(x)*theta.
Vec clt_aggregate_noise(const Vec& x, const ProblemSpec& spec, int n_samples, RngStream& rng);

// Coarse EM chain and a refine-times-finer reference driven by the same
// Brownian increments (the coarse step consumes the normalized sum of the
// fine substep draws). Returns the endpoints of both chains.
struct SyncEndpoints {
    StateMatrix coarse;
    StateMatrix fine;
};
SyncEndpoints simulate_synchronous_pair(const Vec& x0, int n_traj, const ProblemSpec& spec,
                                        double delta, int n_steps, int refine, uint64_t seed,
                                        int threads = 1);

bool all_finite(const StateMatrix& m);

}  // namespace langsim
