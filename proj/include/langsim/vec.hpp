#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace langsim {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

// y += alpha * x
inline void axpy(double alpha, const Vec& x, Vec& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline Vec scaled(const Vec& x, double alpha) {
    Vec r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = alpha * x[i];
    return r;
}

inline Vec sub(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec add(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

// Summation by recursive halving. The result depends only on element order,
// never on how work was split across threads.
inline double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& x) {
    return pairwise_sum(x.data(), x.size());
}

// Dense row-major trajectory storage: n_traj rows of dim entries.
struct StateMatrix {
    int n_traj = 0;
    int dim = 0;
    std::vector<double> data;

    StateMatrix() = default;
    StateMatrix(int n, int d) : n_traj(n), dim(d), data(static_cast<std::size_t>(n) * d, 0.0) {}

    double* row(int i) { return data.data() + static_cast<std::size_t>(i) * dim; }
    const double* row(int i) const { return data.data() + static_cast<std::size_t>(i) * dim; }

    Vec row_vec(int i) const {
        const double* p = row(i);
        return Vec(p, p + dim);
    }
    void set_row(int i, const Vec& v) {
        double* p = row(i);
        for (int j = 0; j < dim; ++j) p[j] = v[j];
    }
    void fill_rows(const Vec& v) {
        for (int i = 0; i < n_traj; ++i) set_row(i, v);
    }
};

}  // namespace langsim
