#include "langsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "langsim/rng.hpp"

namespace langsim {

EmpiricalMeasure::EmpiricalMeasure(StateMatrix points) : points_(std::move(points)) {
    if (points_.n_traj < 1) throw SizeMismatch("EmpiricalMeasure: need at least one point");
    weights_.assign(static_cast<std::size_t>(points_.n_traj), 1.0 / points_.n_traj);
    uniform_ = true;
}

EmpiricalMeasure::EmpiricalMeasure(StateMatrix points, Vec weights)
    : points_(std::move(points)), weights_(std::move(weights)), uniform_(false) {
    if (points_.n_traj < 1) throw SizeMismatch("EmpiricalMeasure: need at least one point");
    if (static_cast<int>(weights_.size()) != points_.n_traj)
        throw SizeMismatch("EmpiricalMeasure: weight count does not match point count");
    double s = pairwise_sum(weights_);
    if (std::abs(s - 1.0) > 1e-12) throw SizeMismatch("EmpiricalMeasure: weights must sum to 1 within 1e-12");
    for (double w : weights_)
        if (w < 0.0) throw SizeMismatch("EmpiricalMeasure: negative weight");
}

EmpiricalMeasure EmpiricalMeasure::from_scalars(const Vec& values) {
    StateMatrix m(static_cast<int>(values.size()), 1);
    for (std::size_t i = 0; i < values.size(); ++i) m.data[i] = values[i];
    return EmpiricalMeasure(std::move(m));
}

namespace {

struct SortedScalars {
    std::vector<double> x;
    std::vector<double> w;
};

SortedScalars sorted_1d(const EmpiricalMeasure& m) {
    if (m.dim() != 1) throw DimMismatch("expected a 1D measure");
    std::vector<int> idx(static_cast<std::size_t>(m.n()));
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int i, int j) { return m.scalar(i) < m.scalar(j); });
    SortedScalars s;
    s.x.reserve(idx.size());
    s.w.reserve(idx.size());
    for (int i : idx) {
        s.x.push_back(m.scalar(i));
        s.w.push_back(m.weights()[i]);
    }
    return s;
}

// Integrates |Fa^{-1}(u) - Fb^{-1}(u)|^p du over the merged quantile segments.
double quantile_cost(const EmpiricalMeasure& a, const EmpiricalMeasure& b, int p) {
    const double inf = std::numeric_limits<double>::infinity();
    SortedScalars sa = sorted_1d(a);
    SortedScalars sb = sorted_1d(b);
    std::size_t i = 0, j = 0;
    double ca = sa.w[0], cb = sb.w[0];  // cumulative weight through the current atom
    double pos = 0.0, total = 0.0;
    while (pos < 1.0 - 1e-15) {
        double t = std::min({ca, cb, 1.0});
        double seg = t - pos;
        if (seg > 0.0) {
            double d = std::abs(sa.x[i] - sb.x[j]);
            total += seg * (p == 1 ? d : d * d);
            pos = t;
        }
        if (ca <= t + 1e-18) {
            if (i + 1 < sa.x.size()) ca += sa.w[++i];
            else ca = inf;
        }
        if (cb <= t + 1e-18) {
            if (j + 1 < sb.x.size()) cb += sb.w[++j];
            else cb = inf;
        }
        if (ca == inf && cb == inf) break;
    }
    return total;
}

}  // namespace

double w1_exact_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    return quantile_cost(a, b, 1);
}

double w2_exact_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    return std::sqrt(quantile_cost(a, b, 2));
}

namespace {

// Dense min-cost perfect matching (Hungarian, O(n^3)) on cost(i,j).
double assignment_cost(int n, const std::vector<double>& cost) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> p(static_cast<std::size_t>(n) + 1, 0), way(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
        std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = -1;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost[static_cast<std::size_t>(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    double total = 0.0;
    for (int j = 1; j <= n; ++j) total += cost[static_cast<std::size_t>(p[j] - 1) * n + (j - 1)];
    return total;
}

}  // namespace

double w1_assignment(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    if (a.dim() != b.dim()) throw DimMismatch("w1_assignment: dimension mismatch");
    if (a.n() != b.n()) throw SizeMismatch("w1_assignment: sample sizes differ");
    if (!a.uniform() || !b.uniform()) throw SizeMismatch("w1_assignment: uniform weights required");
    if (a.n() > 4096) throw TooLarge("w1_assignment: n > 4096");
    const int n = a.n();
    const int d = a.dim();
    std::vector<double> cost(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        const double* pa = a.points().row(i);
        for (int j = 0; j < n; ++j) {
            const double* pb = b.points().row(j);
            double s = 0.0;
            for (int k = 0; k < d; ++k) {
                double dk = pa[k] - pb[k];
                s += dk * dk;
            }
            cost[static_cast<std::size_t>(i) * n + j] = std::sqrt(s);
        }
    }
    return assignment_cost(n, cost) / n;
}

double w1_sliced(const EmpiricalMeasure& a, const EmpiricalMeasure& b, int n_proj, uint64_t seed) {
    if (a.dim() != b.dim()) throw DimMismatch("w1_sliced: dimension mismatch");
    if (n_proj < 1) throw SizeMismatch("w1_sliced: n_proj must be >= 1");
    const int d = a.dim();
    RngStream rng(seed, 0, 0, substream::kProjection);
    std::vector<double> per_proj(static_cast<std::size_t>(n_proj));
    for (int t = 0; t < n_proj; ++t) {
        Vec dir = rng.normal_vec(d);
        double dn = norm2(dir);
        if (dn < 1e-300) dir[0] = dn = 1.0;
        for (auto& v : dir) v /= dn;
        Vec pa(static_cast<std::size_t>(a.n())), pb(static_cast<std::size_t>(b.n()));
        for (int i = 0; i < a.n(); ++i) {
            const double* r = a.points().row(i);
            double s = 0.0;
            for (int k = 0; k < d; ++k) s += dir[k] * r[k];
            pa[i] = s;
        }
        for (int i = 0; i < b.n(); ++i) {
            const double* r = b.points().row(i);
            double s = 0.0;
            for (int k = 0; k < d; ++k) s += dir[k] * r[k];
            pb[i] = s;
        }
        StateMatrix ma(a.n(), 1), mb(b.n(), 1);
        ma.data = pa;
        mb.data = pb;
        per_proj[t] = w1_exact_1d(EmpiricalMeasure(std::move(ma), a.weights()),
                                  EmpiricalMeasure(std::move(mb), b.weights()));
    }
    return pairwise_sum(per_proj) / n_proj;
}

double second_moment(const EmpiricalMeasure& a) {
    std::vector<double> terms(static_cast<std::size_t>(a.n()));
    for (int i = 0; i < a.n(); ++i) {
        const double* r = a.points().row(i);
        double s = 0.0;
        for (int k = 0; k < a.dim(); ++k) s += r[k] * r[k];
        terms[i] = a.weights()[i] * s;
    }
    return pairwise_sum(terms);
}

double mean_norm(const EmpiricalMeasure& a) {
    std::vector<double> terms(static_cast<std::size_t>(a.n()));
    for (int i = 0; i < a.n(); ++i) {
        const double* r = a.points().row(i);
        double s = 0.0;
        for (int k = 0; k < a.dim(); ++k) s += r[k] * r[k];
        terms[i] = a.weights()[i] * std::sqrt(s);
    }
    return pairwise_sum(terms);
}

}  // namespace langsim
