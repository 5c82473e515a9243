#include "langsim/lyapunov.hpp"

#include <algorithm>
#include <cmath>

namespace langsim {

DerivedConstants derive_constants(const RegularityParams& p) {
    p.validate();
    DerivedConstants dc;
    dc.inputs = p;
    dc.L_N = 4.0 * p.beta * p.L_xi / p.c_m;
    dc.alpha_q = (p.L_R + dc.L_N * dc.L_N) / (2.0 * p.c_m * p.c_m);
    dc.R_q = std::max(p.R, 16.0 * p.beta * p.beta * dc.L_N / (p.m * p.c_m));
    double ar2 = dc.alpha_q * dc.R_q * dc.R_q;
    dc.lambda = std::min(0.5 * p.m, 2.0 * p.c_m * p.c_m / (32.0 * dc.R_q * dc.R_q)) * std::exp(-7.0 / 3.0 * ar2);
    return dc;
}

bool xlogx_bound_holds(double c, double x) {
    if (!(c > 0.0)) throw ConstraintViolation("xlogx_bound_holds: c must be > 0");
    return std::log(x) / c <= x;
}

namespace {

double admissible_eps_hat(const DerivedConstants& dc, const RegularityParams& p) {
    double lpl = p.L + dc.L_N * dc.L_N;
    return (16.0 * lpl / dc.lambda) * std::exp(7.0 * dc.alpha_q * dc.R_q / 3.0) * dc.R_q /
           (dc.alpha_q * dc.R_q * dc.R_q + 1.0);
}

double internal_epsilon(double eps_hat, const DerivedConstants& dc, const RegularityParams& p) {
    double lpl = p.L + dc.L_N * dc.L_N;
    double ar2 = dc.alpha_q * dc.R_q * dc.R_q;
    return dc.lambda / (16.0 * lpl) * std::exp(-7.0 * ar2 / 3.0) * eps_hat;
}

double iteration_count(double delta, double eps_hat, const DerivedConstants& dc, const RegularityParams& p) {
    double energy = p.R * p.R + p.beta * p.beta / p.m;
    double lg = std::log(energy / eps_hat);
    if (lg < 0.0) lg = 0.0;
    return std::ceil(3.0 * dc.alpha_q * dc.R_q * dc.R_q / delta * lg);
}

// Adaptive Simpson with absolute tolerance; raises after max_depth splits.
template <class F>
double simpson_panel(F&& f, double a, double fa, double b, double fb, double m, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adaptive_simpson_rec(F&& f, double a, double fa, double b, double fb, double m, double fm,
                            double whole, double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson_panel(f, a, fa, m, fm, lm, flm);
    double right = simpson_panel(f, m, fm, b, fb, rm, frm);
    double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol || (b - a) < 1e-14 * std::max(1.0, std::abs(a)))
        return left + right + delta / 15.0;
    if (depth <= 0) throw QuadratureNotConverged("adaptive Simpson hit max refinement depth");
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 28) {
    if (b <= a) return 0.0;
    double m = 0.5 * (a + b);
    double fa = f(a), fb = f(b), fm = f(m);
    double whole = simpson_panel(f, a, fa, b, fb, m, fm);
    return adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

// Fixed two-panel Simpson for tail integrals over less than one grid cell.
template <class F>
double short_simpson(F&& f, double a, double b) {
    if (b <= a) return 0.0;
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    return (b - a) / 12.0 * (f(a) + 4.0 * f(lm) + 2.0 * f(m) + 4.0 * f(rm) + f(b));
}

constexpr int kGridIntervals = 4096;
constexpr double kRelTol = 1e-8;

}  // namespace

Budget gaussian_budget(double eps_hat, const DerivedConstants& dc, const RegularityParams& p) {
    if (!(eps_hat > 0.0)) throw ConstraintViolation("gaussian_budget: eps_hat must be > 0");
    if (eps_hat > admissible_eps_hat(dc, p))
        throw TargetTooLoose("gaussian_budget: eps_hat above the admissible target accuracy bound");
    Budget b;
    b.eps_hat = eps_hat;
    b.epsilon = internal_epsilon(eps_hat, dc, p);
    double lpl2 = p.L * p.L + std::pow(dc.L_N, 4);
    double ar2 = dc.alpha_q * dc.R_q * dc.R_q;
    double energy = p.R * p.R + p.beta * p.beta / p.m;
    double d1 = dc.lambda * dc.lambda * eps_hat * eps_hat /
                (512.0 * p.beta * p.beta * lpl2 * std::exp(14.0 * ar2 / 3.0));
    double d2 = 2.0 * dc.lambda * eps_hat / (lpl2 * std::exp(7.0 * ar2 / 3.0) * std::sqrt(energy));
    b.delta_max = std::min(d1, d2);
    if (!(b.delta_max > 0.0))
        throw ConstraintViolation("gaussian_budget: step-size budget degenerated to zero");
    b.n_min = iteration_count(b.delta_max, eps_hat, dc, p);
    return b;
}

Budget nongaussian_budget(double eps_hat, const DerivedConstants& dc, const RegularityParams& p, int dim) {
    if (!(eps_hat > 0.0)) throw ConstraintViolation("nongaussian_budget: eps_hat must be > 0");
    if (eps_hat > admissible_eps_hat(dc, p))
        throw TargetTooLoose("nongaussian_budget: eps_hat above the admissible target accuracy bound");
    Budget b;
    b.eps_hat = eps_hat;
    b.epsilon = internal_epsilon(eps_hat, dc, p);
    double eps = b.epsilon;
    double energy = p.R * p.R + p.beta * p.beta / p.m;
    double beta2 = p.beta * p.beta;
    b.t_epoch = std::min({1.0 / (16.0 * p.L), beta2 / (8.0 * p.L * p.L * energy),
                          eps / (32.0 * std::sqrt(p.L) * p.beta), eps * eps / (128.0 * beta2),
                          std::pow(eps, 4) * dc.L_N * dc.L_N / (16384.0 * beta2 * p.c_m * p.c_m)});
    double a1 = 36.0 * dim * beta2 / (eps * eps * p.L);
    double a2 = 16384.0 * dim * beta2 * beta2 / (std::pow(eps, 4) * p.L * p.L);
    if (a1 <= 1.0 || a2 <= 1.0)
        throw ConstraintViolation("nongaussian_budget: log terms outside the theorem's regime");
    double d1 = b.t_epoch / (a1 * std::log(a1));
    double d2 = b.t_epoch / (a2 * std::log(a2));
    b.delta_max = std::min(d1, d2);
    if (!(b.delta_max > 0.0))
        throw ConstraintViolation("nongaussian_budget: step-size budget degenerated to zero");
    b.n_min = iteration_count(b.delta_max, eps_hat, dc, p);
    return b;
}

LyapunovFn::LyapunovFn(const DerivedConstants& dc, double epsilon) : dc_(dc), eps_(epsilon) {
    double eps_max = dc_.R_q / (dc_.alpha_q * dc_.R_q * dc_.R_q + 1.0);
    if (!(epsilon > 0.0) || epsilon > eps_max)
        throw ConstraintViolation("LyapunovFn: epsilon must lie in (0, R_q/(alpha_q R_q^2 + 1)]");
    four_r_ = 4.0 * dc_.R_q;
    step_ = four_r_ / kGridIntervals;

    psi_nodes_.assign(kGridIntervals + 1, 0.0);
    auto psi_fn = [this](double s) { return psi(s); };
    for (int k = 0; k < kGridIntervals; ++k) {
        double a = k * step_, b = a + step_;
        psi_nodes_[k + 1] = psi_nodes_[k] + adaptive_simpson(psi_fn, a, b, kRelTol * step_);
    }

    imu_nodes_.assign(kGridIntervals + 1, 0.0);
    auto imu_fn = [this](double s) { return imu_integrand(s); };
    // integrand scale: Psi/psi <= r * exp(alpha tau) bounded by the end value
    double scale = std::max(1.0, four_r_ * std::exp(dc_.alpha_q * 7.0 * dc_.R_q * dc_.R_q / 3.0));
    for (int k = 0; k < kGridIntervals; ++k) {
        double a = k * step_, b = a + step_;
        imu_nodes_[k + 1] = imu_nodes_[k] + adaptive_simpson(imu_fn, a, b, kRelTol * step_ * scale);
    }
    imu_total_ = imu_nodes_.back();
    if (!(imu_total_ > 0.0)) throw QuadratureNotConverged("LyapunovFn: nu normalization integral is zero");

    q_nodes_.assign(kGridIntervals + 1, 0.0);
    auto qint = [this](double s) { return psi(s) * nu(s); };
    for (int k = 0; k < kGridIntervals; ++k) {
        double a = k * step_, b = a + step_;
        q_nodes_[k + 1] = q_nodes_[k] + adaptive_simpson(qint, a, b, kRelTol * step_);
    }
}

double LyapunovFn::h(double r) const {
    if (r < 0.0) throw ConstraintViolation("h: negative argument");
    double e = eps_;
    // the cubic-ramp pieces stop at h = e while the identity branch starts at
    // 2e; the identity branch owns that joint so h(2e) = 2e
    if (r < e) return r * r * r / (6.0 * e * e);
    if (r < 2.0 * e) {
        double u = r - e;
        return e / 6.0 + 0.5 * u + u * u / (2.0 * e) - u * u * u / (6.0 * e * e);
    }
    return r;
}

double LyapunovFn::h1(double r) const {
    if (r < 0.0) throw ConstraintViolation("h1: negative argument");
    double e = eps_;
    if (r < e) return r * r / (2.0 * e * e);
    if (r < 2.0 * e) {
        double u = r - e;
        return 0.5 + u / e - u * u / (2.0 * e * e);
    }
    return 1.0;
}

double LyapunovFn::h2(double r) const {
    if (r < 0.0) throw ConstraintViolation("h2: negative argument");
    double e = eps_;
    if (r < e) return r / (e * e);
    if (r < 2.0 * e) return 1.0 / e - (r - e) / (e * e);
    return 0.0;
}

double LyapunovFn::h3(double r) const {
    if (r < 0.0) throw ConstraintViolation("h3: negative argument");
    double e = eps_;
    if (r < e) return 1.0 / (e * e);
    if (r < 2.0 * e) return -1.0 / (e * e);
    return 0.0;
}

double LyapunovFn::tau(double r) const {
    if (r < 0.0) throw ConstraintViolation("tau: negative argument");
    double R = dc_.R_q;
    if (r <= R) return 0.5 * r * r;
    if (r <= 2.0 * R) {
        double u = r - R;
        return 0.5 * R * R + R * u + 0.5 * u * u - u * u * u / (3.0 * R);
    }
    if (r <= 4.0 * R) {
        double u = r - 2.0 * R;
        return 5.0 * R * R / 3.0 + R * u - 0.5 * u * u + u * u * u / (12.0 * R);
    }
    return 7.0 * R * R / 3.0;
}

double LyapunovFn::tau1(double r) const {
    if (r < 0.0) throw ConstraintViolation("tau1: negative argument");
    double R = dc_.R_q;
    if (r <= R) return r;
    if (r <= 2.0 * R) {
        double u = r - R;
        return R + u - u * u / R;
    }
    if (r <= 4.0 * R) {
        double u = r - 2.0 * R;
        return R - u + u * u / (4.0 * R);
    }
    return 0.0;
}

double LyapunovFn::tau2(double r) const {
    if (r < 0.0) throw ConstraintViolation("tau2: negative argument");
    double R = dc_.R_q;
    if (r <= R) return 1.0;
    if (r <= 2.0 * R) return 1.0 - 2.0 * (r - R) / R;
    if (r <= 4.0 * R) return -1.0 + (r - 2.0 * R) / (2.0 * R);
    return 0.0;
}

double LyapunovFn::mu(double r) const {
    if (r < 0.0) throw ConstraintViolation("mu: negative argument");
    double R = dc_.R_q;
    if (r <= R) return 1.0;
    if (r <= 4.0 * R) return 0.5 + 0.5 * std::cos(M_PI * (r - R) / (3.0 * R));
    return 0.0;
}

double LyapunovFn::mu1(double r) const {
    if (r < 0.0) throw ConstraintViolation("mu1: negative argument");
    double R = dc_.R_q;
    if (r <= R || r >= 4.0 * R) return 0.0;
    return -M_PI / (6.0 * R) * std::sin(M_PI * (r - R) / (3.0 * R));
}

double LyapunovFn::psi(double r) const { return std::exp(-dc_.alpha_q * tau(r)); }

double LyapunovFn::psi_prefix(double r) const {
    int k = std::min(static_cast<int>(r / step_), kGridIntervals);
    double base = k * step_;
    return psi_nodes_[k] + short_simpson([this](double s) { return psi(s); }, base, std::min(r, four_r_));
}

double LyapunovFn::Psi(double r) const {
    if (r < 0.0) throw ConstraintViolation("Psi: negative argument");
    if (r <= four_r_) return psi_prefix(r);
    return psi_nodes_.back() + psi(four_r_) * (r - four_r_);
}

double LyapunovFn::imu_integrand(double s) const { return mu(s) * psi_prefix(s) / psi(s); }

double LyapunovFn::imu_prefix(double r) const {
    if (r >= four_r_) return imu_total_;
    int k = std::min(static_cast<int>(r / step_), kGridIntervals);
    double base = k * step_;
    return imu_nodes_[k] + short_simpson([this](double s) { return imu_integrand(s); }, base, r);
}

double LyapunovFn::nu(double r) const {
    if (r < 0.0) throw ConstraintViolation("nu: negative argument");
    return 1.0 - 0.5 * imu_prefix(r) / imu_total_;
}

double LyapunovFn::q_prefix(double r) const {
    int k = std::min(static_cast<int>(r / step_), kGridIntervals);
    double base = k * step_;
    return q_nodes_[k] + short_simpson([this](double s) { return psi(s) * nu(s); }, base, std::min(r, four_r_));
}

double LyapunovFn::q(double r) const {
    if (r < 0.0) throw ConstraintViolation("q: negative argument");
    if (r <= four_r_) return q_prefix(r);
    // beyond 4R both psi and nu are constant (nu = 1/2)
    return q_nodes_.back() + 0.5 * psi(four_r_) * (r - four_r_);
}

double LyapunovFn::q1(double r) const {
    if (r < 0.0) throw ConstraintViolation("q1: negative argument");
    return psi(r) * nu(r);
}

double LyapunovFn::q2(double r) const {
    if (r < 0.0) throw ConstraintViolation("q2: negative argument");
    // q'' = psi'*nu + psi*nu' with psi' = -alpha*tau'*psi and
    // psi*nu' = -mu*Psi/(2*I_total)
    return -dc_.alpha_q * tau1(r) * q1(r) - 0.5 * mu(r) * Psi(r) / imu_total_;
}

double LyapunovFn::g(const Vec& z) const { return h(norm2(z)); }

Vec LyapunovFn::grad_g(const Vec& z) const {
    double r = norm2(z);
    Vec out(z.size(), 0.0);
    if (r == 0.0) return out;
    double c = h1(r) / r;
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = c * z[i];
    return out;
}

SymMatrix LyapunovFn::hess_g(const Vec& z) const {
    const int d = static_cast<int>(z.size());
    double r = norm2(z);
    SymMatrix m(d);
    if (r == 0.0) return m;  // h''(0) = 0 and h'(r)/r -> 0
    double radial = h2(r);
    double tangential = h1(r) / r;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j <= i; ++j) {
            double proj = z[i] * z[j] / (r * r);
            m.at(i, j) = radial * proj + tangential * ((i == j ? 1.0 : 0.0) - proj);
        }
    return m;
}

double LyapunovFn::f(const Vec& z) const { return q(g(z)); }

Vec LyapunovFn::grad_f(const Vec& z) const {
    double s = q1(g(z));
    Vec gg = grad_g(z);
    for (auto& v : gg) v *= s;
    return gg;
}

SymMatrix LyapunovFn::hess_f(const Vec& z) const {
    const int d = static_cast<int>(z.size());
    double gz = g(z);
    double a = q2(gz);
    double b = q1(gz);
    Vec gg = grad_g(z);
    SymMatrix m = hess_g(z);
    SymMatrix out(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j <= i; ++j) out.at(i, j) = a * gg[i] * gg[j] + b * m.at(i, j);
    return out;
}

}  // namespace langsim
