#include "langsim/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace langsim {

SymMatrix SymMatrix::square() const {
    SymMatrix r(dim_);
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j <= i; ++j) {
            double s = 0.0;
            for (int k = 0; k < dim_; ++k) s += at(i, k) * at(k, j);
            r.at(i, j) = s;
        }
    return r;
}

EigenDecomposition eigen_sym(const SymMatrix& g) {
    const int n = g.dim();
    EigenDecomposition e;
    e.dim = n;
    e.values.assign(static_cast<std::size_t>(n), 0.0);
    e.vectors.assign(static_cast<std::size_t>(n) * n, 0.0);

    // Work on a full copy; a[i*n+j].
    std::vector<double> a(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i) * n + j] = g.at(i, j);
    std::vector<double>& v = e.vectors;
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;

    auto off = [&]() {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += a[static_cast<std::size_t>(i) * n + j] * a[static_cast<std::size_t>(i) * n + j];
        return s;
    };

    double scale = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(a[static_cast<std::size_t>(i) * n + j]));
    if (scale == 0.0) scale = 1.0;

    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (std::sqrt(off()) <= 1e-15 * scale * n) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = a[static_cast<std::size_t>(p) * n + q];
                if (std::abs(apq) <= 1e-18 * scale) continue;
                double app = a[static_cast<std::size_t>(p) * n + p];
                double aqq = a[static_cast<std::size_t>(q) * n + q];
                double theta = 0.5 * (aqq - app) / apq;
                double t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                if (theta < 0.0) t = -t;
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = t * c;
                double tau = s / (1.0 + c);

                a[static_cast<std::size_t>(p) * n + p] = app - t * apq;
                a[static_cast<std::size_t>(q) * n + q] = aqq + t * apq;
                a[static_cast<std::size_t>(p) * n + q] = 0.0;
                a[static_cast<std::size_t>(q) * n + p] = 0.0;
                for (int k = 0; k < n; ++k) {
                    if (k == p || k == q) continue;
                    double akp = a[static_cast<std::size_t>(k) * n + p];
                    double akq = a[static_cast<std::size_t>(k) * n + q];
                    a[static_cast<std::size_t>(k) * n + p] = akp - s * (akq + tau * akp);
                    a[static_cast<std::size_t>(k) * n + q] = akq + s * (akp - tau * akq);
                    a[static_cast<std::size_t>(p) * n + k] = a[static_cast<std::size_t>(k) * n + p];
                    a[static_cast<std::size_t>(q) * n + k] = a[static_cast<std::size_t>(k) * n + q];
                }
                for (int k = 0; k < n; ++k) {
                    double vkp = v[static_cast<std::size_t>(k) * n + p];
                    double vkq = v[static_cast<std::size_t>(k) * n + q];
                    v[static_cast<std::size_t>(k) * n + p] = vkp - s * (vkq + tau * vkp);
                    v[static_cast<std::size_t>(k) * n + q] = vkq + s * (vkp - tau * vkq);
                }
            }
        }
    }

    for (int i = 0; i < n; ++i) e.values[i] = a[static_cast<std::size_t>(i) * n + i];

    // Sort ascending, permuting eigenvector columns along.
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) { return e.values[x] < e.values[y]; });
    Vec vals(static_cast<std::size_t>(n));
    std::vector<double> vecs(static_cast<std::size_t>(n) * n);
    for (int k = 0; k < n; ++k) {
        vals[k] = e.values[order[k]];
        for (int i = 0; i < n; ++i) vecs[static_cast<std::size_t>(i) * n + k] = e.vec(i, order[k]);
    }
    e.values = std::move(vals);
    e.vectors = std::move(vecs);
    return e;
}

SymMatrix eigen_rebuild(const EigenDecomposition& e, const Vec& mapped_values) {
    const int n = e.dim;
    SymMatrix r(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += mapped_values[k] * e.vec(i, k) * e.vec(j, k);
            r.at(i, j) = s;
        }
    return r;
}

double default_psd_tol(const SymMatrix& g) {
    // 1e-10 * ||G||_2, with the operator norm bounded by the Frobenius norm.
    return 1e-10 * std::max(g.frob_norm(), 1e-300);
}

namespace {

// closed-form spectral square root for the 2x2 case (hot path in simulation)
SymMatrix psd_sqrt_2x2(const SymMatrix& g, double tol) {
    double a = g.at(0, 0), b = g.at(1, 1), c = g.at(0, 1);
    double disc = std::sqrt(std::max(0.0, (a - b) * (a - b) + 4.0 * c * c));
    double lo = 0.5 * (a + b - disc), hi = 0.5 * (a + b + disc);
    if (lo < -tol)
        throw NotPSD("psd_sqrt: eigenvalue " + std::to_string(lo) + " below -tol=" + std::to_string(-tol));
    double s_lo = lo > 0.0 ? std::sqrt(lo) : 0.0;
    double s_hi = hi > 0.0 ? std::sqrt(hi) : 0.0;
    SymMatrix r(2);
    if (disc <= 1e-300 * std::max(1.0, std::abs(a) + std::abs(b))) {
        r.at(0, 0) = r.at(1, 1) = s_hi;
        return r;
    }
    double v0, v1;  // unit eigenvector of the larger eigenvalue
    if (std::abs(c) > 0.0) {
        v0 = c;
        v1 = hi - a;
    } else if (a >= b) {
        v0 = 1.0;
        v1 = 0.0;
    } else {
        v0 = 0.0;
        v1 = 1.0;
    }
    double n = std::sqrt(v0 * v0 + v1 * v1);
    v0 /= n;
    v1 /= n;
    r.at(0, 0) = s_lo + (s_hi - s_lo) * v0 * v0;
    r.at(1, 1) = s_lo + (s_hi - s_lo) * v1 * v1;
    r.at(1, 0) = (s_hi - s_lo) * v0 * v1;
    return r;
}

}  // namespace

SymMatrix psd_sqrt(const SymMatrix& g, double tol) {
    if (g.dim() == 1) {
        double a = g.at(0, 0);
        if (a < -tol)
            throw NotPSD("psd_sqrt: eigenvalue " + std::to_string(a) + " below -tol=" + std::to_string(-tol));
        SymMatrix r(1);
        r.at(0, 0) = a > 0.0 ? std::sqrt(a) : 0.0;
        return r;
    }
    if (g.dim() == 2) return psd_sqrt_2x2(g, tol);
    EigenDecomposition e = eigen_sym(g);
    Vec roots(e.values.size());
    for (std::size_t k = 0; k < e.values.size(); ++k) {
        double ev = e.values[k];
        if (ev < -tol)
            throw NotPSD("psd_sqrt: eigenvalue " + std::to_string(ev) + " below -tol=" + std::to_string(-tol));
        roots[k] = ev > 0.0 ? std::sqrt(ev) : 0.0;
    }
    return eigen_rebuild(e, roots);
}

SymMatrix diffusion_remainder(const SymMatrix& m, double c_m) {
    EigenDecomposition e = eigen_sym(m);
    double min_ev = e.values.empty() ? 0.0 : e.values.front();
    if (min_ev < 2.0 * c_m - 1e-12 * std::max(1.0, std::abs(2.0 * c_m)))
        throw FloorViolated("diffusion_remainder: min eigenvalue " + std::to_string(min_ev) +
                            " of M below 2*c_m=" + std::to_string(2.0 * c_m));
    Vec mapped(e.values.size());
    for (std::size_t k = 0; k < e.values.size(); ++k) {
        double d = e.values[k] * e.values[k] - c_m * c_m;
        mapped[k] = d > 0.0 ? std::sqrt(d) : 0.0;
    }
    return eigen_rebuild(e, mapped);
}

SqrtTraceCheck check_sqrt_trace_inequality(const SymMatrix& a, const SymMatrix& b) {
    SymMatrix ra = psd_sqrt(a);
    SymMatrix rb = psd_sqrt(b);
    SymMatrix d = ra - rb;
    SqrtTraceCheck out;
    out.lhs = d.square().trace();

    EigenDecomposition ea = eigen_sym(a);
    Vec inv(ea.values.size());
    for (std::size_t k = 0; k < ea.values.size(); ++k) {
        if (ea.values[k] <= 0.0) throw NotPSD("check_sqrt_trace_inequality: A is not positive definite");
        inv[k] = 1.0 / ea.values[k];
    }
    SymMatrix ainv = eigen_rebuild(ea, inv);
    SymMatrix diff = a - b;
    // tr(D^2 A^{-1}) with D symmetric.
    double rhs = 0.0;
    int n = a.dim();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) rhs += diff.at(i, j) * diff.at(j, k) * ainv.at(k, i);
    out.rhs = rhs;
    out.holds = out.lhs <= out.rhs + 1e-8 * (1.0 + std::abs(out.rhs));
    return out;
}

}  // namespace langsim
