#include "langsim/problems.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace langsim {

void RegularityParams::validate() const {
    auto need_pos = [](double v, const char* name) {
        if (!(v > 0.0)) throw ConstraintViolation(std::string("RegularityParams: ") + name + " must be > 0");
    };
    need_pos(m, "m");
    need_pos(L, "L");
    need_pos(L_R, "L_R");
    need_pos(R, "R");
    need_pos(beta, "beta");
    need_pos(c_m, "c_m");
    if (L_xi < 0.0) throw ConstraintViolation("RegularityParams: L_xi must be >= 0");
}

namespace {

// Norm-truncated standard normal: redraw until ||theta|| <= 4*sqrt(d), so the
// M(x)*theta noise keeps an almost-sure bound while staying mean zero.
Vec truncated_normal(int dim, RngStream& rng) {
    const double cap = 4.0 * std::sqrt(static_cast<double>(dim));
    for (;;) {
        Vec t = rng.normal_vec(dim);
        if (norm2(t) <= cap) return t;
    }
}

std::function<Vec(const Vec&, RngStream&)> matrix_noise(std::function<SymMatrix(const Vec&)> m_field) {
    return [m_field = std::move(m_field)](const Vec& x, RngStream& rng) {
        Vec t = truncated_normal(static_cast<int>(x.size()), rng);
        return m_field(x).apply(t);
    };
}

}  // namespace

ProblemSpec builtin_1d_example(double m_floor) {
    ProblemSpec spec;
    spec.dim = 1;
    spec.name = "example_1d";
    spec.value_U = [](const Vec& xv) {
        double x = xv[0];
        if (x <= -1.0) return 0.5 * (x + 2.0) * (x + 2.0) - 1.0;
        if (x >= 4.0) return 0.5 * (x - 8.0) * (x - 8.0) - 16.0;
        return -0.5 * x * x;
    };
    spec.grad_U = [](const Vec& xv) {
        double x = xv[0];
        double g;
        if (x <= -1.0)
            g = x + 2.0;
        else if (x >= 4.0)
            g = x - 8.0;
        else
            g = -x;
        return Vec{g};
    };
    auto m_scalar = [m_floor](double x) {
        double m;
        if (x <= -2.0)
            m = 1.0;
        else if (x >= 8.0)
            m = 6.0;
        else
            m = 0.5 * (x + 2.0);
        return std::max(m, m_floor);
    };
    spec.diffusion_M = [m_scalar](const Vec& xv) {
        SymMatrix m(1);
        m.at(0, 0) = m_scalar(xv[0]);
        return m;
    };
    spec.noise_xi = matrix_noise(spec.diffusion_M);
    spec.params = {0.5, 1.0, 1.0, 20.0, 24.0, 2.0, 0.5 * m_floor * (1.0 - 1e-9)};
    return spec;
}

ProblemSpec builtin_double_well_1d() {
    ProblemSpec spec;
    spec.dim = 1;
    spec.name = "double_well_1d";
    spec.value_U = [](const Vec& xv) {
        double x = xv[0];
        // log cosh written to avoid overflow for large |x|
        double bx = 10.0 * x;
        double lc = std::abs(bx) + std::log1p(std::exp(-2.0 * std::abs(bx))) - std::log(2.0);
        return 0.5 * x * x - 0.02 * lc;
    };
    spec.grad_U = [](const Vec& xv) {
        double x = xv[0];
        return Vec{x - 0.2 * std::tanh(10.0 * x)};
    };
    spec.diffusion_M = [](const Vec&) { return SymMatrix::identity(1); };
    spec.noise_xi = matrix_noise(spec.diffusion_M);
    spec.params = {0.5, 1.0, 1.0, 0.8, 4.0, 0.0, 0.45};
    return spec;
}

ProblemSpec builtin_sine_2d() {
    ProblemSpec spec;
    spec.dim = 2;
    spec.name = "sine_2d";
    spec.value_U = [](const Vec& x) { return 0.5 * dot(x, x); };
    spec.grad_U = [](const Vec& x) { return x; };
    spec.diffusion_M = [](const Vec& x) {
        SymMatrix m(2);
        m.at(0, 0) = 1.0 + 0.25 * std::sin(x[0]);
        m.at(1, 1) = 1.0 + 0.25 * std::cos(x[1]);
        m.at(1, 0) = 0.1 * std::cos(x[0] + x[1]);
        return m;
    };
    spec.noise_xi = matrix_noise(spec.diffusion_M);
    spec.params = {1.0, 1.0, 1.0, 0.1, 8.0, 2.1, 0.3};
    return spec;
}

ProblemSpec builtin_quadratic(int dim) {
    ProblemSpec spec;
    spec.dim = dim;
    spec.name = "quadratic_" + std::to_string(dim) + "d";
    spec.value_U = [](const Vec& x) { return 0.5 * dot(x, x); };
    spec.grad_U = [](const Vec& x) { return x; };
    spec.diffusion_M = [dim](const Vec&) { return SymMatrix::identity(dim); };
    spec.noise_xi = matrix_noise(spec.diffusion_M);
    spec.params = {1.0, 1.0, 1.0, 1.0, 4.0 * std::sqrt(static_cast<double>(dim)), 0.0, 0.45};
    return spec;
}

ProblemSpec builtin_rademacher_1d() {
    ProblemSpec spec;
    spec.dim = 1;
    spec.name = "rademacher_1d";
    spec.value_U = [](const Vec& x) { return 0.5 * x[0] * x[0]; };
    spec.grad_U = [](const Vec& x) { return x; };
    spec.diffusion_M = [](const Vec&) { return SymMatrix::identity(1); };
    spec.noise_xi = [](const Vec&, RngStream& rng) {
        return Vec{rng.uniform() < 0.5 ? -1.0 : 1.0};
    };
    spec.params = {1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.45};
    return spec;
}

double FiniteSumObjective::value(const Vec& w) const {
    Vec ws = shift.empty() ? w : add(w, shift);
    double s = 0.0;
    for (const auto& c : components) s += c.value(ws);
    return s / n() + barrier_value(w);
}

Vec FiniteSumObjective::component_grad(int i, const Vec& w) const {
    Vec ws = shift.empty() ? w : add(w, shift);
    return components[i].grad(ws);
}

double FiniteSumObjective::barrier_value(const Vec& w) const {
    Vec ws = shift.empty() ? w : add(w, shift);
    double r = norm2(ws);
    double e = r - 0.5 * barrier.R;
    return e > 0.0 ? barrier.m * e * e : 0.0;
}

Vec FiniteSumObjective::barrier_grad(const Vec& w) const {
    Vec ws = shift.empty() ? w : add(w, shift);
    double r = norm2(ws);
    double e = r - 0.5 * barrier.R;
    Vec g(static_cast<std::size_t>(dim), 0.0);
    if (e > 0.0 && r > 0.0) {
        double c = 2.0 * barrier.m * e / r;
        for (int j = 0; j < dim; ++j) g[j] = c * ws[j];
    }
    return g;
}

Vec FiniteSumObjective::grad(const Vec& w) const {
    Vec ws = shift.empty() ? w : add(w, shift);
    Vec g(static_cast<std::size_t>(dim), 0.0);
    for (const auto& c : components) axpy(1.0, c.grad(ws), g);
    for (int j = 0; j < dim; ++j) g[j] /= n();
    axpy(1.0, barrier_grad(w), g);
    return g;
}

Vec FiniteSumObjective::zeta(const Vec& w, const std::vector<int>& batch) const {
    Vec ws = shift.empty() ? w : add(w, shift);
    Vec mean(static_cast<std::size_t>(dim), 0.0);
    for (const auto& c : components) axpy(1.0, c.grad(ws), mean);
    for (int j = 0; j < dim; ++j) mean[j] /= n();
    Vec batch_mean(static_cast<std::size_t>(dim), 0.0);
    for (int i : batch) axpy(1.0, components[i].grad(ws), batch_mean);
    for (int j = 0; j < dim; ++j) batch_mean[j] /= static_cast<double>(batch.size());
    return sub(mean, batch_mean);
}

std::vector<int> FiniteSumObjective::sample_batch(int b, RngStream& rng) const {
    std::vector<int> batch(static_cast<std::size_t>(b));
    for (int k = 0; k < b; ++k) batch[k] = static_cast<int>(rng.uniform_below(static_cast<uint32_t>(n())));
    return batch;
}

void center_objective(FiniteSumObjective& obj, int max_iters, double step) {
    obj.shift.clear();
    Vec w(static_cast<std::size_t>(obj.dim), 0.0);
    for (int it = 0; it < max_iters; ++it) {
        Vec g = obj.grad(w);
        double gn = norm2(g);
        if (gn < 1e-13) break;
        axpy(-step, g, w);
    }
    obj.shift = w;
}

FiniteSumObjective make_linear_objective(int dim, int n, Barrier barrier, uint64_t seed) {
    FiniteSumObjective obj;
    obj.dim = dim;
    obj.barrier = barrier;
    RngStream rng(seed, 0, 0, substream::kInit);
    double max_norm = 0.0;
    for (int i = 0; i < n; ++i) {
        Vec g = rng.normal_vec(dim);
        for (auto& v : g) v *= 0.5;
        max_norm = std::max(max_norm, norm2(g));
        obj.components.push_back({[g](const Vec& w) { return dot(g, w); },
                                  [g](const Vec&) { return g; }});
    }
    obj.comp_grad_bound = max_norm;
    obj.comp_lip_bound = 1e-6;  // linear components have constant gradients
    return obj;
}

FiniteSumObjective make_logistic_objective(int dim, int n, Barrier barrier, uint64_t seed) {
    FiniteSumObjective obj;
    obj.dim = dim;
    obj.barrier = barrier;
    RngStream rng(seed, 0, 0, substream::kInit);
    Vec w_true = rng.normal_vec(dim);
    double max_norm = 0.0;
    auto data = std::make_shared<std::vector<Vec>>();
    for (int i = 0; i < n; ++i) {
        Vec x = rng.normal_vec(dim);
        double xn = norm2(x);
        if (xn > 1.0)
            for (auto& v : x) v /= xn;  // keep ||x_i|| <= 1
        double margin = dot(x, w_true);
        double lab = (rng.uniform() < 1.0 / (1.0 + std::exp(-4.0 * margin))) ? 1.0 : -1.0;
        Vec gx = scaled(x, lab);
        max_norm = std::max(max_norm, norm2(gx));
        data->push_back(gx);
        obj.components.push_back(
            {[gx](const Vec& w) {
                 double z = -dot(gx, w);
                 return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
             },
             [gx, dim](const Vec& w) {
                 double s = 1.0 / (1.0 + std::exp(dot(gx, w)));
                 Vec g(static_cast<std::size_t>(dim));
                 for (int j = 0; j < dim; ++j) g[j] = -s * gx[j];
                 return g;
             }});
    }
    obj.comp_grad_bound = max_norm;
    obj.comp_lip_bound = 0.25 * max_norm * max_norm;
    obj.fused_mean_and_h = [data, dim, n](const Vec& ws, Vec& mean, SymMatrix& h) {
        std::vector<double> grads(static_cast<std::size_t>(n) * dim);
        mean.assign(static_cast<std::size_t>(dim), 0.0);
        for (int i = 0; i < n; ++i) {
            const Vec& gx = (*data)[i];
            double s = 1.0 / (1.0 + std::exp(dot(gx, ws)));
            for (int j = 0; j < dim; ++j) {
                double gij = -s * gx[j];
                grads[static_cast<std::size_t>(i) * dim + j] = gij;
                mean[j] += gij / n;
            }
        }
        h = SymMatrix(dim);
        for (int i = 0; i < n; ++i)
            for (int r = 0; r < dim; ++r)
                for (int c = 0; c <= r; ++c)
                    h.at(r, c) += (mean[r] - grads[static_cast<std::size_t>(i) * dim + r]) *
                                  (mean[c] - grads[static_cast<std::size_t>(i) * dim + c]) / n;
    };
    return obj;
}

FiniteSumObjective make_quartic_objective(int dim, int n, Barrier barrier, uint64_t seed) {
    FiniteSumObjective obj;
    obj.dim = dim;
    obj.barrier = barrier;
    RngStream rng(seed, 0, 0, substream::kInit);
    // gradient 0.25*(a^T w)^3 * a is only Lipschitz on a ball; the bound below
    // uses |a^T w| <= ||w|| <= barrier.R as the working region.
    double lip = 0.0;
    for (int i = 0; i < n; ++i) {
        Vec a = rng.normal_vec(dim);
        double an = norm2(a);
        if (an > 1.0)
            for (auto& v : a) v /= an;
        lip = std::max(lip, 0.75 * barrier.R * barrier.R);
        obj.components.push_back({[a](const Vec& w) {
                                      double z = dot(a, w);
                                      return 0.0625 * z * z * z * z;
                                  },
                                  [a, dim](const Vec& w) {
                                      double z = dot(a, w);
                                      Vec g(static_cast<std::size_t>(dim));
                                      for (int j = 0; j < dim; ++j) g[j] = 0.25 * z * z * z * a[j];
                                      return g;
                                  }});
    }
    obj.comp_grad_bound = 0.25 * barrier.R * barrier.R * barrier.R;
    obj.comp_lip_bound = lip;
    return obj;
}

ProblemSpec finite_sum_problem(const FiniteSumObjective& obj, double delta, int b) {
    if (obj.barrier.m < 4.0 * obj.comp_lip_bound)
        throw ConstraintViolation("finite_sum_problem: barrier m=" + std::to_string(obj.barrier.m) +
                                  " violates m >= 4*L_R with L_R=" + std::to_string(obj.comp_lip_bound));
    if (!(delta > 0.0) || b < 1) throw ConstraintViolation("finite_sum_problem: need delta > 0 and b >= 1");

    ProblemSpec spec;
    spec.dim = obj.dim;
    spec.name = "finite_sum";
    auto shared = std::make_shared<FiniteSumObjective>(obj);
    spec.value_U = [shared](const Vec& w) { return shared->value(w); };
    spec.grad_U = [shared](const Vec& w) { return shared->grad(w); };
    double sqrt_delta = std::sqrt(delta);
    spec.noise_xi = [shared, sqrt_delta, b](const Vec& w, RngStream& rng) {
        std::vector<int> batch = shared->sample_batch(b, rng);
        return scaled(shared->zeta(w, batch), sqrt_delta);
    };
    double scale = delta / static_cast<double>(b);
    auto mean_and_h = [shared](const Vec& w, Vec& mean, SymMatrix& h) {
        // Exact H(w) by enumerating single-element minibatches.
        Vec ws = shared->shift.empty() ? w : add(w, shared->shift);
        if (shared->fused_mean_and_h) {
            shared->fused_mean_and_h(ws, mean, h);
            return;
        }
        const int d = shared->dim;
        const int n = shared->n();
        mean.assign(static_cast<std::size_t>(d), 0.0);
        std::vector<Vec> grads(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            grads[i] = shared->components[i].grad(ws);
            axpy(1.0, grads[i], mean);
        }
        for (int j = 0; j < d; ++j) mean[j] /= n;
        h = SymMatrix(d);
        for (int i = 0; i < n; ++i) {
            Vec z = sub(mean, grads[i]);
            for (int r = 0; r < d; ++r)
                for (int c = 0; c <= r; ++c) h.at(r, c) += z[r] * z[c] / n;
        }
    };
    spec.diffusion_M = [mean_and_h, scale, dim = obj.dim](const Vec& w) {
        Vec mean;
        SymMatrix h(dim);
        mean_and_h(w, mean, h);
        return psd_sqrt(h * scale);
    };
    spec.drift_diffusion = [shared, mean_and_h, scale](const Vec& w, Vec& drift, SymMatrix& m_out) {
        SymMatrix h(shared->dim);
        mean_and_h(w, drift, h);
        axpy(1.0, shared->barrier_grad(w), drift);
        m_out = psd_sqrt(h * scale);
    };

    RegularityParams p;
    p.m = obj.barrier.m;
    p.L_R = std::max(obj.comp_lip_bound, 1e-12);
    p.L = p.m + p.L_R;
    p.R = obj.barrier.R;
    p.beta = sqrt_delta * 2.0 * obj.comp_grad_bound;
    p.L_xi = sqrt_delta * 2.0 * obj.comp_lip_bound;
    // Probe the smallest observed diffusion eigenvalue near the origin for a
    // usable c_m claim; it is audited like every other constant.
    double min_ev = 1e300;
    RngStream rng(12345, 0, 0, substream::kProbe);
    for (int t = 0; t < 16; ++t) {
        Vec w = rng.normal_vec(obj.dim);
        for (auto& v : w) v *= 0.25 * obj.barrier.R;
        EigenDecomposition e = eigen_sym(spec.diffusion_M(w));
        min_ev = std::min(min_ev, e.values.front());
    }
    p.c_m = std::max(0.25 * min_ev, 1e-12);
    spec.params = p;
    return spec;
}

AuditReport audit_assumptions(const ProblemSpec& spec, int probes, double radius, uint64_t rng_seed) {
    if (probes < 2) throw ConstraintViolation("audit_assumptions: probes must be >= 2");
    const RegularityParams& p = spec.params;
    AuditReport rep;

    Vec origin(static_cast<std::size_t>(spec.dim), 0.0);
    rep.grad0_norm = norm2(spec.grad_U(origin));
    rep.grad0_warning = rep.grad0_norm > 1e-8;

    RngStream rng(rng_seed, 0, 0, substream::kProbe);
    auto random_point = [&](double r) {
        Vec x = rng.normal_vec(spec.dim);
        double s = r * std::pow(rng.uniform(), 1.0 / spec.dim) / std::max(norm2(x), 1e-300);
        for (auto& v : x) v *= s;
        return x;
    };

    double worst_lip = 0.0;
    double worst_inner = 1e300;
    bool saw_far_pair = false;
    double worst_eig = 1e300;
    double worst_noise = 0.0;

    for (int t = 0; t < probes; ++t) {
        Vec x = random_point(radius);
        // Alternate nearby pairs with pairs separated by at least R, so the
        // outside-ball condition is actually exercised.
        Vec y;
        if (t % 2 == 0) {
            y = random_point(radius);
        } else {
            Vec dir = rng.normal_vec(spec.dim);
            double dn = std::max(norm2(dir), 1e-300);
            double sep = p.R * (1.0 + rng.uniform());
            y = x;
            for (int j = 0; j < spec.dim; ++j) y[j] += sep * dir[j] / dn;
        }
        Vec gx = spec.grad_U(x);
        Vec gy = spec.grad_U(y);
        Vec dxy = sub(x, y);
        double sep = norm2(dxy);
        if (sep > 1e-12) {
            Vec dg = sub(gx, gy);
            worst_lip = std::max(worst_lip, norm2(dg) / sep);
            if (sep >= p.R) {
                saw_far_pair = true;
                worst_inner = std::min(worst_inner, dot(dg, dxy) / (sep * sep));
            }
        }
        EigenDecomposition e = eigen_sym(spec.diffusion_M(x));
        worst_eig = std::min(worst_eig, e.values.front());
        worst_noise = std::max(worst_noise, norm2(spec.noise_xi(x, rng)));
    }

    double slack = 1.0 + 1e-9;
    rep.checks.push_back({"grad_lipschitz", worst_lip, p.L, worst_lip <= p.L * slack});
    rep.checks.push_back({"convexity_outside_ball", saw_far_pair ? worst_inner : p.m, p.m,
                          !saw_far_pair || worst_inner >= p.m / slack});
    rep.checks.push_back({"diffusion_floor", worst_eig, 2.0 * p.c_m, worst_eig >= 2.0 * p.c_m / slack});
    rep.checks.push_back({"noise_bound", worst_noise, p.beta, worst_noise <= p.beta * slack});
    return rep;
}

}  // namespace langsim
