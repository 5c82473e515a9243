#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "langsim/linalg.hpp"
#include "langsim/problems.hpp"
#include "langsim/vec.hpp"

namespace langsim {

struct QuadratureNotConverged : std::runtime_error {
    explicit QuadratureNotConverged(const std::string& what) : std::runtime_error(what) {}
};
struct TargetTooLoose : std::runtime_error {
    explicit TargetTooLoose(const std::string& what) : std::runtime_error(what) {}
};

// Constants derived from the regularity claims: the smoothness parameter of
// the diffusion remainder, the Lyapunov shape parameters, and the contraction
// rate.
struct DerivedConstants {
    double L_N = 0.0;
    double alpha_q = 0.0;
    double R_q = 0.0;
    double lambda = 0.0;
    RegularityParams inputs;
};

DerivedConstants derive_constants(const RegularityParams& params);

// Step-size and iteration budget for a target W1 accuracy.
struct Budget {
    double eps_hat = 0.0;
    double epsilon = 0.0;    // internal smoothing parameter
    double delta_max = 0.0;  // largest admissible step size
    double n_min = 0.0;      // iterations needed at delta_max
    double t_epoch = 0.0;    // epoch length (non-Gaussian budget only, else 0)
};

// Budget for the Gaussian Euler chain against the SDE.
Budget gaussian_budget(double eps_hat, const DerivedConstants& dc, const RegularityParams& params);

// Budget for the discrete bounded-noise chain; also sets the epoch length.
Budget nongaussian_budget(double eps_hat, const DerivedConstants& dc, const RegularityParams& params,
                          int dim);

// Checks (1/c) log(x) <= x. Holds whenever x > 3*max{(1/c)log(1/c), 0}.
bool xlogx_bound_holds(double c, double x);

// The composite Lyapunov function f = q(g(z)) and its full stack of
// auxiliaries. Immutable after construction; the quadrature tables for the
// Psi and nu integrals are built eagerly on a 4097-node grid over [0, 4*R_q]
// by adaptive Simpson (relative tolerance 1e-8), with short fixed-rule tail
// integrals for off-node queries. Piecewise functions evaluate branch joints
// by the left branch.
class LyapunovFn {
   public:
    LyapunovFn(const DerivedConstants& dc, double epsilon);

    double epsilon() const { return eps_; }
    const DerivedConstants& constants() const { return dc_; }

    // smoothed absolute value h and derivatives (negative r rejected)
    double h(double r) const;
    double h1(double r) const;
    double h2(double r) const;
    double h3(double r) const;

    // concavifying ramp tau and derivatives, cutoff mu and derivative
    double tau(double r) const;
    double tau1(double r) const;
    double tau2(double r) const;
    double mu(double r) const;
    double mu1(double r) const;

    // scalar potential stack
    double psi(double r) const;
    double Psi(double r) const;
    double nu(double r) const;
    double q(double r) const;
    double q1(double r) const;
    double q2(double r) const;

    // smoothed norm g = h(||z||)
    double g(const Vec& z) const;
    Vec grad_g(const Vec& z) const;
    SymMatrix hess_g(const Vec& z) const;

    // f = q(g(z))
    double f(const Vec& z) const;
    Vec grad_f(const Vec& z) const;
    SymMatrix hess_f(const Vec& z) const;

   private:
    double psi_prefix(double r) const;   // integral of psi over [0, min(r, 4R)]
    double imu_prefix(double r) const;   // integral of mu*Psi/psi over [0, min(r, 4R)]
    double q_prefix(double r) const;     // integral of psi*nu over [0, min(r, 4R)]
    double imu_integrand(double s) const;

    DerivedConstants dc_;
    double eps_ = 0.0;
    double four_r_ = 0.0;  // 4*R_q
    double step_ = 0.0;    // grid spacing
    std::vector<double> psi_nodes_;  // prefix integrals of psi at nodes
    std::vector<double> imu_nodes_;  // prefix integrals of mu*Psi/psi at nodes
    std::vector<double> q_nodes_;    // prefix integrals of psi*nu at nodes
    double imu_total_ = 0.0;
};

}  // namespace langsim
