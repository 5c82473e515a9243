#include <algorithm>
#include <cmath>
#include <functional>

#include "langsim/commands.hpp"
#include "langsim/lyapunov.hpp"
#include "langsim/rng.hpp"

namespace langsim {

namespace {

constexpr double kTolClosed = 1e-8;  // closed-form bounds
constexpr double kTolQuad = 1e-6;    // quadrature-dependent bounds
constexpr double kTolFd = 1e-5;      // finite-difference agreement

struct GridAccum {
    std::vector<LemmaCheckRow>& rows;

    void add(const std::string& lemma, const std::string& check, double worst, double tol) {
        rows.push_back({lemma, check, worst, tol, worst <= tol});
    }
};

// violation of lo <= v <= hi, relative to the bound scale
double range_violation(double v, double lo, double hi) {
    double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
    double viol = std::max(lo - v, v - hi);
    return std::max(0.0, viol / scale);
}

double central_fd(const std::function<double(double)>& fn, double r, double step) {
    return (fn(r + step) - fn(r - step)) / (2.0 * step);
}

bool near_any(double r, std::initializer_list<double> joints, double band) {
    for (double j : joints)
        if (std::abs(r - j) < band) return true;
    return false;
}

double rel_err(double got, double want, double floor_scale) {
    return std::abs(got - want) / std::max(std::abs(want), floor_scale);
}

}  // namespace

std::vector<LemmaCheckRow> run_lemma_grid(const RegularityParams& params, double epsilon, int grid_n,
                                          uint64_t seed) {
    std::vector<LemmaCheckRow> rows;
    GridAccum acc{rows};

    DerivedConstants dc = derive_constants(params);
    LyapunovFn ly(dc, epsilon);
    const double R = dc.R_q;
    const double eps = epsilon;
    const double decay = std::exp(-7.0 * dc.alpha_q * R * R / 3.0);

    // ---- Lemma grid over r in [0, 5R] ----
    double worst_h_lo = 0, worst_h_hi = 0, worst_h1 = 0, worst_h2 = 0, worst_h3 = 0;
    double worst_tau1 = 0, worst_tau2 = 0, worst_mu = 0, worst_mu1 = 0;
    double worst_psi_mono = 0, worst_nu_range = 0, worst_nu_mono = 0;
    double worst_q_lo = 0, worst_q_hi = 0, worst_q1 = 0, worst_q2_sign = 0, worst_q2_mag = 0;
    double worst_contraction = 0;
    double prev_psi_int = -1.0, prev_nu = 2.0;
    for (int k = 0; k <= grid_n; ++k) {
        double r = 5.0 * R * k / grid_n;
        // h-family probes scale with epsilon instead
        double rh = 3.0 * eps * k / grid_n;
        worst_h_lo = std::max(worst_h_lo, range_violation(ly.h(rh), rh - 2.0 * eps, rh));
        worst_h_hi = worst_h_lo;
        worst_h1 = std::max(worst_h1, range_violation(ly.h1(rh), 0.0, 1.0));
        worst_h2 = std::max(worst_h2, range_violation(ly.h2(rh) * eps, 0.0, 1.0));
        worst_h3 = std::max(worst_h3, range_violation(ly.h3(rh) * eps * eps, -1.0, 1.0));

        worst_tau1 = std::max(worst_tau1, range_violation(ly.tau1(r), 0.0, 1.25 * R));
        worst_tau2 = std::max(worst_tau2, range_violation(ly.tau2(r), -1.0, 1.0));
        worst_mu = std::max(worst_mu, range_violation(ly.mu(r), 0.0, 1.0));
        worst_mu1 = std::max(worst_mu1, range_violation(ly.mu1(r) * R, -M_PI / 6.0, 0.0));

        double psi_int = ly.Psi(r);
        if (psi_int < prev_psi_int) worst_psi_mono = std::max(worst_psi_mono, prev_psi_int - psi_int);
        prev_psi_int = psi_int;
        double nu = ly.nu(r);
        worst_nu_range = std::max(worst_nu_range, range_violation(nu, 0.5, 1.0));
        if (nu > prev_nu) worst_nu_mono = std::max(worst_nu_mono, nu - prev_nu);
        prev_nu = nu;

        double q = ly.q(r), q1 = ly.q1(r), q2 = ly.q2(r);
        worst_q_lo = std::max(worst_q_lo, (0.5 * decay * r - q) / std::max(1.0, r));
        worst_q_hi = std::max(worst_q_hi, (q - r) / std::max(1.0, r));
        worst_q1 = std::max(worst_q1, range_violation(q1, 0.5 * decay, 1.0));
        worst_q2_sign = std::max(worst_q2_sign, q2);
        double q2_cap = 1.25 * dc.alpha_q * R + 4.0 / R;
        worst_q2_mag = std::max(worst_q2_mag, (std::abs(q2) - q2_cap) / q2_cap);

        if (r <= R) {
            double lhs = q2 + dc.alpha_q * q1 * r;
            double rhs = -decay / (32.0 * R * R) * q;
            worst_contraction = std::max(worst_contraction, lhs - rhs);
        }
    }
    acc.add("h", "h_sandwich", std::max(worst_h_lo, worst_h_hi), kTolClosed);
    acc.add("h", "h1_range", worst_h1, kTolClosed);
    acc.add("h", "h2_range", worst_h2, kTolClosed);
    acc.add("h", "h3_range", worst_h3, kTolClosed);
    acc.add("tau", "tau1_range", worst_tau1, kTolClosed);
    acc.add("tau", "tau1_peak", rel_err(ly.tau1(1.5 * R), 1.25 * R, 1.0), kTolClosed);
    acc.add("tau", "tau2_range", worst_tau2, kTolClosed);
    acc.add("tau", "tau_plateau", rel_err(ly.tau(4.5 * R), 7.0 * R * R / 3.0, 1.0), kTolClosed);
    acc.add("mu", "mu_range", worst_mu, kTolClosed);
    acc.add("mu", "mu1_range", worst_mu1, kTolClosed);
    acc.add("psi_nu", "Psi_nondecreasing", worst_psi_mono, kTolQuad);
    acc.add("psi_nu", "nu_range", worst_nu_range, kTolQuad);
    acc.add("psi_nu", "nu_nonincreasing", worst_nu_mono, kTolQuad);
    acc.add("q", "q_sandwich", std::max(worst_q_lo, worst_q_hi), kTolQuad);
    acc.add("q", "q1_range", worst_q1, kTolQuad);
    acc.add("q", "q2_nonpositive", worst_q2_sign, kTolQuad);
    acc.add("q", "q2_magnitude", worst_q2_mag, kTolQuad);
    acc.add("q", "contraction_inequality", worst_contraction, kTolClosed);

    // ---- finite-difference agreement, away from branch joints ----
    double fd_h1 = 0, fd_h2 = 0, fd_tau1 = 0, fd_tau2 = 0, fd_mu1 = 0, fd_q1 = 0, fd_q2 = 0;
    const double step_h = 1e-4 * eps;
    const double step_r = 1e-4 * R;
    for (int k = 1; k < grid_n; ++k) {
        double rh = 3.0 * eps * k / grid_n;
        if (!near_any(rh, {eps, 2.0 * eps}, 4.0 * step_h) && rh > 4.0 * step_h) {
            fd_h1 = std::max(fd_h1, rel_err(central_fd([&](double r) { return ly.h(r); }, rh, step_h),
                                            ly.h1(rh), 1e-3));
            fd_h2 = std::max(fd_h2, rel_err(central_fd([&](double r) { return ly.h1(r); }, rh, step_h),
                                            ly.h2(rh), 1e-3 / eps));
        }
        double r = 5.0 * R * k / grid_n;
        if (!near_any(r, {R, 2.0 * R, 4.0 * R}, 4.0 * step_r) && r > 4.0 * step_r) {
            fd_tau1 = std::max(fd_tau1, rel_err(central_fd([&](double x) { return ly.tau(x); }, r, step_r),
                                                ly.tau1(r), 1e-3 * R));
            fd_tau2 = std::max(fd_tau2, rel_err(central_fd([&](double x) { return ly.tau1(x); }, r, step_r),
                                                ly.tau2(r), 1e-3));
            fd_mu1 = std::max(fd_mu1, rel_err(central_fd([&](double x) { return ly.mu(x); }, r, step_r),
                                              ly.mu1(r), 1e-3 / R));
            fd_q1 = std::max(fd_q1, rel_err(central_fd([&](double x) { return ly.q(x); }, r, step_r),
                                            ly.q1(r), 1e-3));
            fd_q2 = std::max(fd_q2, rel_err(central_fd([&](double x) { return ly.q1(x); }, r, step_r),
                                            ly.q2(r), 1e-3 / R));
        }
    }
    acc.add("h", "h1_fd", fd_h1, kTolFd);
    acc.add("h", "h2_fd", fd_h2, kTolFd);
    acc.add("tau", "tau1_fd", fd_tau1, kTolFd);
    acc.add("tau", "tau2_fd", fd_tau2, kTolFd);
    acc.add("mu", "mu1_fd", fd_mu1, kTolFd);
    acc.add("q", "q1_fd", fd_q1, kTolFd);
    acc.add("q", "q2_fd", fd_q2, kTolFd);

    // q''' is exposed only through differences of q''; check its magnitude cap
    {
        double q3_cap = 5.0 * dc.alpha_q + 2.0 * dc.alpha_q * (dc.alpha_q * R * R + 1.0) +
                        2.0 * (dc.alpha_q * R * R + 1.0) / (R * R);
        double worst = 0.0;
        for (int k = 1; k < grid_n; ++k) {
            double r = 5.0 * R * k / grid_n;
            if (near_any(r, {R, 2.0 * R, 4.0 * R}, 0.01 * R) || r < 0.01 * R) continue;
            double q3 = central_fd([&](double x) { return ly.q2(x); }, r, step_r);
            worst = std::max(worst, (std::abs(q3) - q3_cap) / q3_cap);
        }
        acc.add("q", "q3_magnitude_fd", worst, kTolQuad);
    }

    // ---- vector-level properties of g and f on random points ----
    RngStream rng(seed, 0, 0, substream::kProbe);
    const int dim = 3;
    double worst_g_sand = 0, worst_grad_g = 0, worst_f_lo = 0, worst_f_hi = 0;
    double worst_grad_f = 0, worst_hess_f = 0, worst_quadform = 0;
    for (int t = 0; t < 2000; ++t) {
        Vec z = rng.normal_vec(dim);
        double scale = 2.0 * R * rng.uniform();
        double zn0 = norm2(z);
        for (auto& v : z) v *= scale / std::max(zn0, 1e-12);
        double zn = norm2(z);

        double g = ly.g(z);
        worst_g_sand = std::max(worst_g_sand, range_violation(g, zn - 2.0 * eps, zn));
        worst_grad_g = std::max(worst_grad_g, std::max(0.0, norm2(ly.grad_g(z)) - 1.0));

        double f = ly.f(z);
        worst_f_lo = std::max(worst_f_lo, (0.5 * decay * (zn - 2.0 * eps) - f) / std::max(1.0, zn));
        worst_f_hi = std::max(worst_f_hi, (f - zn) / std::max(1.0, zn));
        worst_grad_f = std::max(worst_grad_f, std::max(0.0, norm2(ly.grad_f(z)) - 1.0));

        SymMatrix hess = ly.hess_f(z);
        EigenDecomposition e = eigen_sym(hess);
        double op = std::max(std::abs(e.values.front()), std::abs(e.values.back()));
        worst_hess_f = std::max(worst_hess_f, (op - 2.0 / eps) * eps / 2.0);

        if (zn >= 2.0 * eps) {
            Vec v = rng.normal_vec(dim);
            double vn = dot(v, v);
            double quad = 0.0;
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j) quad += v[i] * hess.at(i, j) * v[j];
            double cap = ly.q1(g) / zn * vn;
            worst_quadform = std::max(worst_quadform, (quad - cap) / std::max(1.0, std::abs(cap)));
        }
    }
    acc.add("g", "g_sandwich", worst_g_sand, kTolClosed);
    acc.add("g", "grad_g_norm", worst_grad_g, kTolClosed);
    acc.add("f", "f_sandwich", std::max(worst_f_lo, worst_f_hi), kTolQuad);
    acc.add("f", "grad_f_norm", worst_grad_f, kTolQuad);
    acc.add("f", "hess_f_norm", worst_hess_f, kTolQuad);
    acc.add("f", "hess_quadform", worst_quadform, kTolQuad);

    // gradient and Hessian of f against central differences
    double fd_grad_f = 0, fd_hess_f = 0;
    const double step_f = 1e-4 * R;
    for (int t = 0; t < 100; ++t) {
        Vec z = rng.normal_vec(dim);
        double radius = 3.0 * eps + (2.0 * R - 3.0 * eps) * rng.uniform();
        double zn0 = norm2(z);
        for (auto& v : z) v *= radius / std::max(zn0, 1e-12);
        double r = norm2(z);
        if (near_any(r, {2.0 * eps, R, 2.0 * R, 4.0 * R}, 0.02 * R)) continue;

        Vec grad = ly.grad_f(z);
        SymMatrix hess = ly.hess_f(z);
        for (int j = 0; j < dim; ++j) {
            Vec zp = z, zm = z;
            zp[j] += step_f;
            zm[j] -= step_f;
            double fd = (ly.f(zp) - ly.f(zm)) / (2.0 * step_f);
            fd_grad_f = std::max(fd_grad_f, rel_err(fd, grad[j], 1e-2));
            Vec gp = ly.grad_f(zp), gm = ly.grad_f(zm);
            for (int i = 0; i < dim; ++i) {
                double fd2 = (gp[i] - gm[i]) / (2.0 * step_f);
                fd_hess_f = std::max(fd_hess_f, rel_err(fd2, hess.at(i, j), 1e-1 / eps));
            }
        }
    }
    acc.add("f", "grad_f_fd", fd_grad_f, kTolFd);
    acc.add("f", "hess_f_fd", fd_hess_f, kTolFd);

    // ---- budget monotonicity in the target accuracy ----
    {
        double cap = (16.0 * (params.L + dc.L_N * dc.L_N) / dc.lambda) *
                     std::exp(7.0 * dc.alpha_q * dc.R_q / 3.0) * dc.R_q /
                     (dc.alpha_q * dc.R_q * dc.R_q + 1.0);
        double prev = 0.0;
        double worst = 0.0;
        for (int k = 1; k <= 20; ++k) {
            double eh = cap * std::pow(10.0, -4.0 + 4.0 * k / 20.0) / 10.0;
            Budget b = gaussian_budget(eh, dc, params);
            if (b.delta_max < prev) worst = std::max(worst, (prev - b.delta_max) / prev);
            prev = b.delta_max;
        }
        acc.add("budget", "delta_monotone_in_eps_hat", worst, kTolClosed);
    }

    // ---- (1/c) log x <= x above the x-log-x threshold ----
    {
        double worst = 0.0;
        for (int t = 0; t < 100000; ++t) {
            double c = std::pow(10.0, -3.0 + 6.0 * rng.uniform());
            double thr = 3.0 * std::max(std::log(1.0 / c) / c, 0.0);
            double x = (thr + 1e-9) * (1.0 + 10.0 * rng.uniform()) + 1e-9;
            if (!xlogx_bound_holds(c, x)) {
                double lhs = std::log(x) / c;
                worst = std::max(worst, (lhs - x) / std::max(1.0, x));
            }
        }
        acc.add("xlogx", "xlogx_above_threshold", worst, kTolClosed);
    }

    // ---- square-root trace inequality on random SPD pairs ----
    {
        double worst = 0.0;
        for (int t = 0; t < 1000; ++t) {
            int d = 1 + static_cast<int>(rng.uniform_below(6));
            auto random_spd = [&]() {
                SymMatrix s(d);
                std::vector<double> b(static_cast<std::size_t>(d) * d);
                for (auto& v : b) v = rng.normal();
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j <= i; ++j) {
                        double acc2 = 0.0;
                        for (int k = 0; k < d; ++k)
                            acc2 += b[static_cast<std::size_t>(i) * d + k] * b[static_cast<std::size_t>(j) * d + k];
                        s.at(i, j) = acc2 + (i == j ? 0.05 : 0.0);
                    }
                return s;
            };
            SqrtTraceCheck chk = check_sqrt_trace_inequality(random_spd(), random_spd());
            worst = std::max(worst, (chk.lhs - chk.rhs) / (1.0 + std::abs(chk.rhs)));
        }
        acc.add("sqrt_trace", "sqrt_trace_inequality", worst, kTolClosed);
    }

    return rows;
}

}  // namespace langsim
