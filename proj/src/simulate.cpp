#include "langsim/simulate.hpp"

#include <cmath>

#include "langsim/threading.hpp"

namespace langsim {

const char* to_string(ProcessKind k) {
    switch (k) {
        case ProcessKind::EmGaussian: return "em_gaussian";
        case ProcessKind::DiscreteXi: return "discrete_xi";
        case ProcessKind::FineReference: return "fine_reference";
        case ProcessKind::FrozenV: return "frozen_v";
    }
    return "unknown";
}

Ensemble make_ensemble(ProcessKind kind, const Vec& x0, int n_traj, double delta, uint64_t seed) {
    Ensemble e;
    e.kind = kind;
    e.states = StateMatrix(n_traj, static_cast<int>(x0.size()));
    e.states.fill_rows(x0);
    e.delta = delta;
    e.seed = seed;
    return e;
}

bool all_finite(const StateMatrix& m) {
    for (double v : m.data)
        if (!std::isfinite(v)) return false;
    return true;
}

namespace {

void em_substeps(double* x, int dim, const ProblemSpec& spec, double dt, int substeps, RngStream& rng) {
    double sdt = std::sqrt(dt);
    Vec xv(x, x + dim);
    Vec theta(static_cast<std::size_t>(dim));
    Vec gu(static_cast<std::size_t>(dim));
    Vec noise(static_cast<std::size_t>(dim));
    SymMatrix m(dim);
    for (int s = 0; s < substeps; ++s) {
        if (spec.drift_diffusion) {
            spec.drift_diffusion(xv, gu, m);
        } else {
            gu = spec.grad_U(xv);
            m = spec.diffusion_M(xv);
        }
        rng.fill_normal(theta.data(), dim);
        m.apply(theta.data(), noise.data());
        for (int j = 0; j < dim; ++j) xv[j] += -dt * gu[j] + sdt * noise[j];
    }
    for (int j = 0; j < dim; ++j) x[j] = xv[j];
}

}  // namespace

void step_em(Ensemble& ens, const ProblemSpec& spec, int threads) {
    const int dim = ens.states.dim;
    const long k = ens.step_index;
    parallel_for(ens.states.n_traj, threads, [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            RngStream rng(ens.seed, static_cast<uint32_t>(i), static_cast<uint32_t>(k), substream::kEmNoise);
            em_substeps(ens.states.row(i), dim, spec, ens.delta, 1, rng);
        }
    });
    ++ens.step_index;
}

void step_discrete_xi(Ensemble& ens, const ProblemSpec& spec, int threads) {
    const int dim = ens.states.dim;
    const long k = ens.step_index;
    const double sdelta = std::sqrt(ens.delta);
    const double beta_cap = spec.params.beta * (1.0 + 1e-9);
    parallel_for(ens.states.n_traj, threads, [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            RngStream rng(ens.seed, static_cast<uint32_t>(i), static_cast<uint32_t>(k), substream::kXiNoise);
            double* x = ens.states.row(i);
            Vec xv(x, x + dim);
            Vec gu = spec.grad_U(xv);
            Vec xi = spec.noise_xi(xv, rng);
            double xn = norm2(xi);
            if (xn > beta_cap)
                throw NoiseBoundViolated("step_discrete_xi: ||xi|| = " + std::to_string(xn) +
                                         " exceeds beta = " + std::to_string(spec.params.beta));
            for (int j = 0; j < dim; ++j) x[j] += -ens.delta * gu[j] + sdelta * xi[j];
        }
    });
    ++ens.step_index;
}

Ensemble simulate_reference(const Vec& x0, int n_traj, const ProblemSpec& spec, double delta,
                            int n_steps, int refine, uint64_t seed, int threads) {
    if (refine < 1) throw ConstraintViolation("simulate_reference: refine must be >= 1");
    Ensemble ens = make_ensemble(ProcessKind::FineReference, x0, n_traj, delta, seed);
    const int dim = ens.states.dim;
    const double dt = delta / refine;
    for (int k = 0; k < n_steps; ++k) {
        parallel_for(n_traj, threads, [&](int begin, int end) {
            for (int i = begin; i < end; ++i) {
                RngStream rng(seed, static_cast<uint32_t>(i), static_cast<uint32_t>(k), substream::kEmNoise);
                em_substeps(ens.states.row(i), dim, spec, dt, refine, rng);
            }
        });
        ++ens.step_index;
    }
    return ens;
}

PairedEnsemble make_paired(PairingKind kind, const Vec& x0, const Vec& y0, int n_pairs, double delta,
                           uint64_t seed) {
    PairedEnsemble p;
    p.kind = kind;
    p.first = StateMatrix(n_pairs, static_cast<int>(x0.size()));
    p.second = StateMatrix(n_pairs, static_cast<int>(y0.size()));
    p.first.fill_rows(x0);
    p.second.fill_rows(y0);
    if (kind == PairingKind::FrozenSharedEta) p.anchor = p.second;
    p.delta = delta;
    p.seed = seed;
    return p;
}

void step_reflection_coupled(PairedEnsemble& pair, const ProblemSpec& spec, const LyapunovFn& lyap,
                             int inner, int threads) {
    if (pair.kind != PairingKind::Reflection)
        throw ConstraintViolation("step_reflection_coupled: pairing_kind must be REFLECTION");
    if (inner < 1) throw ConstraintViolation("step_reflection_coupled: inner must be >= 1");
    const int dim = pair.first.dim;
    const long k = pair.step_index;
    const double dt = pair.delta / inner;
    const double sdt = std::sqrt(dt);
    const double c_m = spec.params.c_m;
    const double two_eps = 2.0 * lyap.epsilon();
    const double r_q = lyap.constants().R_q;

    parallel_for(pair.first.n_traj, threads, [&](int begin, int end) {
        Vec dv(static_cast<std::size_t>(dim)), dw(static_cast<std::size_t>(dim));
        for (int i = begin; i < end; ++i) {
            RngStream rng_v(pair.seed, static_cast<uint32_t>(i), static_cast<uint32_t>(k), substream::kCoupleV);
            RngStream rng_w(pair.seed, static_cast<uint32_t>(i), static_cast<uint32_t>(k), substream::kCoupleW);
            Vec x = pair.first.row_vec(i);
            Vec y = pair.second.row_vec(i);
            // y's drift and diffusion stay frozen at the block start
            Vec gy0 = spec.grad_U(y);
            SymMatrix n_y0 = diffusion_remainder(spec.diffusion_M(y), c_m);
            for (int s = 0; s < inner; ++s) {
                rng_v.fill_normal(dv.data(), dim);
                rng_w.fill_normal(dw.data(), dim);
                for (int j = 0; j < dim; ++j) {
                    dv[j] *= sdt;
                    dw[j] *= sdt;
                }
                Vec z = sub(x, y);
                double r = norm2(z);
                bool reflect = (r >= two_eps && r < r_q);

                Vec gx = spec.grad_U(x);
                SymMatrix n_x = diffusion_remainder(spec.diffusion_M(x), c_m);
                Vec nx_dw = n_x.apply(dw);
                Vec ny0_dw = n_y0.apply(dw);

                double gdv = 0.0;
                if (reflect) {
                    for (int j = 0; j < dim; ++j) gdv += z[j] / r * dv[j];
                }
                for (int j = 0; j < dim; ++j) {
                    x[j] += -dt * gx[j] + c_m * dv[j] + nx_dw[j];
                    double reflected = dv[j] - (reflect ? 2.0 * gdv * z[j] / r : 0.0);
                    y[j] += -dt * gy0[j] + c_m * reflected + ny0_dw[j];
                }
            }
            pair.first.set_row(i, x);
            pair.second.set_row(i, y);
        }
    });
    ++pair.step_index;
}

void step_frozen_pair(PairedEnsemble& pair, const ProblemSpec& spec, int threads) {
    if (pair.kind != PairingKind::FrozenSharedEta)
        throw ConstraintViolation("step_frozen_pair: pairing_kind must be FROZEN_SHARED_ETA");
    const int dim = pair.first.dim;
    const long k = pair.step_index;
    const double sdelta = std::sqrt(pair.delta);
    const double beta_cap = spec.params.beta * (1.0 + 1e-9);
    parallel_for(pair.first.n_traj, threads, [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            // Two streams with the same key replay identical bits, so both
            // oracles see the same eta realization.
            RngStream rng_v(pair.seed, static_cast<uint32_t>(i), static_cast<uint32_t>(k), substream::kXiNoise);
            RngStream rng_w(pair.seed, static_cast<uint32_t>(i), static_cast<uint32_t>(k), substream::kXiNoise);
            Vec w0 = pair.anchor.row_vec(i);
            Vec v = pair.first.row_vec(i);
            Vec w = pair.second.row_vec(i);
            Vec g_w0 = spec.grad_U(w0);
            Vec g_w = spec.grad_U(w);
            Vec xi_v = spec.noise_xi(w0, rng_v);
            Vec xi_w = spec.noise_xi(w, rng_w);
            if (norm2(xi_v) > beta_cap || norm2(xi_w) > beta_cap)
                throw NoiseBoundViolated("step_frozen_pair: noise draw exceeds beta");
            for (int j = 0; j < dim; ++j) {
                v[j] += -pair.delta * g_w0[j] + sdelta * xi_v[j];
                w[j] += -pair.delta * g_w[j] + sdelta * xi_w[j];
            }
            pair.first.set_row(i, v);
            pair.second.set_row(i, w);
        }
    });
    ++pair.step_index;
}

Vec clt_aggregate_noise(const Vec& x, const ProblemSpec& spec, int n_samples, RngStream& rng) {
    if (n_samples < 1) throw ConstraintViolation("clt_aggregate_noise: n_samples must be >= 1");
    Vec s(x.size(), 0.0);
    for (int i = 0; i < n_samples; ++i) axpy(1.0, spec.noise_xi(x, rng), s);
    double inv = 1.0 / std::sqrt(static_cast<double>(n_samples));
    for (auto& v : s) v *= inv;
    return s;
}

SyncEndpoints simulate_synchronous_pair(const Vec& x0, int n_traj, const ProblemSpec& spec,
                                        double delta, int n_steps, int refine, uint64_t seed,
                                        int threads) {
    if (refine < 1) throw ConstraintViolation("simulate_synchronous_pair: refine must be >= 1");
    const int dim = static_cast<int>(x0.size());
    SyncEndpoints out;
    out.coarse = StateMatrix(n_traj, dim);
    out.fine = StateMatrix(n_traj, dim);
    out.coarse.fill_rows(x0);
    out.fine.fill_rows(x0);
    const double dt = delta / refine;
    const double sdt = std::sqrt(dt);
    const double sdelta = std::sqrt(delta);
    const double inv_sqrt_refine = 1.0 / std::sqrt(static_cast<double>(refine));

    parallel_for(n_traj, threads, [&](int begin, int end) {
        Vec theta(static_cast<std::size_t>(dim));
        Vec theta_sum(static_cast<std::size_t>(dim));
        for (int i = begin; i < end; ++i) {
            Vec xc = out.coarse.row_vec(i);
            Vec xf = out.fine.row_vec(i);
            for (int k = 0; k < n_steps; ++k) {
                RngStream rng(seed, static_cast<uint32_t>(i), static_cast<uint32_t>(k), substream::kEmNoise);
                std::fill(theta_sum.begin(), theta_sum.end(), 0.0);
                for (int s = 0; s < refine; ++s) {
                    rng.fill_normal(theta.data(), dim);
                    Vec gu = spec.grad_U(xf);
                    Vec noise = spec.diffusion_M(xf).apply(theta);
                    for (int j = 0; j < dim; ++j) {
                        xf[j] += -dt * gu[j] + sdt * noise[j];
                        theta_sum[j] += theta[j];
                    }
                }
                // the coarse chain consumes the aggregated driver of the block
                Vec gu = spec.grad_U(xc);
                for (int j = 0; j < dim; ++j) theta[j] = theta_sum[j] * inv_sqrt_refine;
                Vec noise = spec.diffusion_M(xc).apply(theta);
                for (int j = 0; j < dim; ++j) xc[j] += -delta * gu[j] + sdelta * noise[j];
            }
            out.coarse.set_row(i, xc);
            out.fine.set_row(i, xf);
        }
    });
    return out;
}

}  // namespace langsim
