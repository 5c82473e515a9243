#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "langsim/linalg.hpp"
#include "langsim/rng.hpp"
#include "langsim/vec.hpp"

namespace langsim {

struct ConstraintViolation : std::runtime_error {
    explicit ConstraintViolation(const std::string& what) : std::runtime_error(what) {}
};

// Constants claimed for a problem. All are claims to be audited empirically,
// not quantities we derive symbolically.
struct RegularityParams {
    double m = 0.0;     // strong convexity outside the ball
    double L = 0.0;     // global gradient Lipschitz constant
    double L_R = 0.0;   // inside-ball Lipschitz constant
    double R = 0.0;     // ball radius
    double beta = 0.0;  // a.s. noise bound
    double L_xi = 0.0;  // noise Lipschitz constant
    double c_m = 0.0;   // diffusion floor: 2*c_m*I <= M(x)

    void validate() const;
};

// A potential + diffusion + noise triple. Oracles are const-callable and hold
// no mutable state; noise sampling takes the caller's RNG stream.
struct ProblemSpec {
    int dim = 0;
    std::string name;
    std::function<Vec(const Vec&)> grad_U;
    std::function<double(const Vec&)> value_U;  // optional, null for gradient-only problems
    std::function<SymMatrix(const Vec&)> diffusion_M;
    std::function<Vec(const Vec&, RngStream&)> noise_xi;
    // Optional fused oracle writing grad U and M in one pass; simulation
    // kernels prefer it when both are needed at the same point.
    std::function<void(const Vec&, Vec&, SymMatrix&)> drift_diffusion;
    RegularityParams params;
};

// The one-dimensional worked example: a shallow well at -2, a deep well at 8,
// and a diffusion field that grows to the right. The middle branch of U is
// the downward parabola that joins both outer branches continuously with a
// continuous gradient. M takes the outer
// branches at x=-2 and x=8 and is clamped below at m_floor so D = M^2 stays
// away from zero.
ProblemSpec builtin_1d_example(double m_floor = 0.05);

// 1D double well with globally Lipschitz gradient: U'(x) = x - 0.2*tanh(10x),
// constant unit diffusion. Wells near +-0.199.
ProblemSpec builtin_double_well_1d();

// 2D quadratic potential with a smoothly varying, well-conditioned diffusion
// field; used for discretization-rate experiments.
ProblemSpec builtin_sine_2d();

ProblemSpec builtin_quadratic(int dim);  // U = ||x||^2/2, M = I

// 1D quadratic potential with Rademacher noise xi in {-1, +1}; the tightest
// bounded-noise instance for CLT experiments (beta = 1, M = I).
ProblemSpec builtin_rademacher_1d();

struct Component {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> grad;
};

struct Barrier {
    double m = 0.0;  // V(w) = m * (||w|| - R/2)_+^2
    double R = 0.0;
};

// Finite-sum objective U(w) = (1/n) sum_i [U_i'(w) + V(w)] evaluated in a
// shifted frame so that grad U(0) = 0.
struct FiniteSumObjective {
    int dim = 0;
    std::vector<Component> components;
    Barrier barrier;
    double comp_grad_bound = 0.0;  // sup_i sup_w ||grad U_i'||
    double comp_lip_bound = 0.0;   // Lipschitz bound on component gradients (the L_R claim)
    Vec shift;                     // oracles evaluate components at w + shift
    // Optional single-pass kernel: mean component gradient and exact H at a
    // pre-shifted point, avoiding per-component dispatch.
    std::function<void(const Vec& w_shifted, Vec& mean_grad, SymMatrix& h)> fused_mean_and_h;

    int n() const { return static_cast<int>(components.size()); }

    double value(const Vec& w) const;
    Vec grad(const Vec& w) const;                 // mean component grad + barrier grad
    Vec component_grad(int i, const Vec& w) const;  // grad U_i'(w+shift) only (barrier excluded)
    Vec barrier_grad(const Vec& w) const;
    double barrier_value(const Vec& w) const;

    // zeta(w, eta) = grad U(w) - (1/|eta|) sum_{i in eta} grad U_i(w); the
    // barrier is common to every component and cancels.
    Vec zeta(const Vec& w, const std::vector<int>& batch) const;
    std::vector<int> sample_batch(int b, RngStream& rng) const;  // with replacement
};

// Runs gradient descent on the full objective and stores the minimizer as the
// evaluation shift, so grad U(0) = 0 afterwards.
void center_objective(FiniteSumObjective& obj, int max_iters = 20000, double step = 0.05);

// Synthetic component families for config-driven problems.
FiniteSumObjective make_linear_objective(int dim, int n, Barrier barrier, uint64_t seed);
FiniteSumObjective make_logistic_objective(int dim, int n, Barrier barrier, uint64_t seed);
FiniteSumObjective make_quartic_objective(int dim, int n, Barrier barrier, uint64_t seed);

// Casts one-step minibatch SGD, xi = sqrt(delta)*zeta with |eta| = b, as a
// ProblemSpec instance. diffusion_M enumerates H(w) exactly.
// Requires barrier.m >= 4 * comp_lip_bound.
ProblemSpec finite_sum_problem(const FiniteSumObjective& obj, double delta, int b);

struct AuditCheck {
    std::string id;
    double worst = 0.0;      // worst observed value of the audited quantity
    double threshold = 0.0;  // claimed constant it is compared against
    bool pass = false;
};

struct AuditReport {
    std::vector<AuditCheck> checks;
    bool grad0_warning = false;
    double grad0_norm = 0.0;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

// Statistical audit of the claimed constants on random probe pairs inside a
// ball. Failures are report entries, never exceptions.
AuditReport audit_assumptions(const ProblemSpec& spec, int probes, double radius, uint64_t rng_seed);

}  // namespace langsim
