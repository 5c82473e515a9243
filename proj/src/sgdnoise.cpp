#include "langsim/sgdnoise.hpp"

#include <cmath>

#include "langsim/simulate.hpp"

namespace langsim {

Vec sgd_step(const Vec& w, const FiniteSumObjective& obj, const SGDConfig& cfg, RngStream& rng) {
    std::vector<int> batch = obj.sample_batch(cfg.b, rng);
    Vec g(w.size(), 0.0);
    for (int i : batch) axpy(1.0, obj.component_grad(i, w), g);
    for (auto& v : g) v /= cfg.b;
    axpy(1.0, obj.barrier_grad(w), g);
    Vec out = w;
    axpy(-cfg.delta, g, out);
    return out;
}

Vec large_noise_sgd_step(const Vec& w, const FiniteSumObjective& obj, const LargeNoiseConfig& cfg,
                         RngStream& rng) {
    std::vector<int> eta = obj.sample_batch(cfg.b1, rng);
    std::vector<int> eta1 = obj.sample_batch(cfg.b2, rng);
    std::vector<int> eta2 = obj.sample_batch(cfg.b2, rng);

    auto batch_sum = [&](const std::vector<int>& batch) {
        Vec s(w.size(), 0.0);
        for (int i : batch) axpy(1.0, obj.component_grad(i, w), s);
        return s;
    };

    // definition form: gradient estimate on eta plus a scaled difference of
    // two independent estimates on eta', eta''
    Vec sum_eta = batch_sum(eta);
    Vec sum_p = batch_sum(eta1);
    Vec sum_pp = batch_sum(eta2);
    double c = cfg.sigma * std::sqrt(cfg.s) / cfg.b2;
    Vec def_form = w;
    axpy(-cfg.s / cfg.b1, sum_eta, def_form);
    axpy(-cfg.s, obj.barrier_grad(w), def_form);
    axpy(c, sum_p, def_form);
    axpy(-c, sum_pp, def_form);

    // zeta form: w - s*grad U + s*zeta(eta) + sigma*sqrt(s)*(zeta(eta'') - zeta(eta'))
    Vec zeta_form = w;
    axpy(-cfg.s, obj.grad(w), zeta_form);
    axpy(cfg.s, obj.zeta(w, eta), zeta_form);
    Vec dz = sub(obj.zeta(w, eta2), obj.zeta(w, eta1));
    axpy(cfg.sigma * std::sqrt(cfg.s), dz, zeta_form);

    double gap = norm2(sub(def_form, zeta_form));
    double scale = 1.0 + norm2(def_form);
    if (gap > 1e-12 * scale)
        throw ConstraintViolation("large_noise_sgd_step: the two update forms disagree by " +
                                  std::to_string(gap));
    return def_form;
}

SymMatrix estimate_H(const Vec& w, const FiniteSumObjective& obj, int n_draws, RngStream& rng) {
    if (n_draws < obj.dim + 1)
        throw ConstraintViolation("estimate_H: n_draws must be at least dim + 1");
    const int d = obj.dim;
    SymMatrix h(d);
    for (int t = 0; t < n_draws; ++t) {
        std::vector<int> batch = obj.sample_batch(1, rng);
        Vec z = obj.zeta(w, batch);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c <= r; ++c) h.at(r, c) += z[r] * z[c] / n_draws;
    }
    return h;
}

SymMatrix exact_H(const Vec& w, const FiniteSumObjective& obj) {
    const int d = obj.dim;
    const int n = obj.n();
    Vec mean(static_cast<std::size_t>(d), 0.0);
    std::vector<Vec> grads(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        grads[i] = obj.component_grad(i, w);
        axpy(1.0, grads[i], mean);
    }
    for (auto& v : mean) v /= n;
    SymMatrix h(d);
    for (int i = 0; i < n; ++i) {
        Vec z = sub(mean, grads[i]);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c <= r; ++c) h.at(r, c) += z[r] * z[c] / n;
    }
    return h;
}

double match_noise(const SGDConfig& target, double s, int b1, int b2) {
    double want = target.covariance_scalar();
    double have = s / b1;
    if (want < have)
        throw Unmatchable("match_noise: target covariance " + std::to_string(want) +
                          " below the base SGD term " + std::to_string(have));
    return std::sqrt(0.5 * b2 * (want - have));
}

TrainingResult run_training(const FiniteSumObjective& obj, const AlgorithmConfig& cfg, int steps,
                            uint64_t seed) {
    TrainingResult res;
    res.loss_trace.reserve(static_cast<std::size_t>(steps));
    int tail_len = std::max(1, steps / 10);
    res.tail = StateMatrix(tail_len, obj.dim);

    Vec w(static_cast<std::size_t>(obj.dim), 0.0);
    for (int k = 0; k < steps; ++k) {
        RngStream rng(seed, 0, static_cast<uint32_t>(k), substream::kMinibatch);
        w = cfg.large_noise ? large_noise_sgd_step(w, obj, cfg.ln, rng)
                            : sgd_step(w, obj, cfg.sgd, rng);
        for (double v : w)
            if (!std::isfinite(v)) throw NonFinite("run_training: iterate left the float range at step " +
                                                   std::to_string(k));
        res.loss_trace.push_back(obj.value(w));
        int tail_start = steps - tail_len;
        if (k >= tail_start) res.tail.set_row(k - tail_start, w);
    }
    return res;
}

}  // namespace langsim
