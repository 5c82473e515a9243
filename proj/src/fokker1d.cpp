#include "langsim/fokker1d.hpp"

#include <algorithm>
#include <cmath>

namespace langsim {

namespace {

template <class F>
double simpson_rec(F&& f, double a, double fa, double b, double fb, double m, double fm, double whole,
                   double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol || depth <= 0) return left + right + delta / 15.0;
    return simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

template <class F>
double simpson(F&& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    double sign = 1.0;
    if (b < a) {
        std::swap(a, b);
        sign = -1.0;
    }
    double m = 0.5 * (a + b);
    double fa = f(a), fb = f(b), fm = f(m);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return sign * simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, 32);
}

}  // namespace

Vec default_grid() {
    const int n = 4096;
    Vec g(n);
    for (int i = 0; i < n; ++i) g[i] = -10.0 + 24.0 * i / (n - 1);
    return g;
}

double Density1D::argmax() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < dens.size(); ++i)
        if (dens[i] > dens[best]) best = i;
    return grid[best];
}

Vec potential_V(const ProblemSpec& spec, const Vec& grid, double m_floor) {
    if (spec.dim != 1) throw DimMismatch("potential_V: 1D problems only");
    auto d_of = [&](double x) {
        double m = spec.diffusion_M(Vec{x}).at(0, 0);
        return m * m;
    };
    auto drift_over_d = [&](double x) { return spec.grad_U(Vec{x})[0] / d_of(x); };

    const double d_min = m_floor * m_floor;
    for (double x : grid)
        if (d_of(x) < d_min * (1.0 - 1e-9))
            throw DegenerateDiffusion("potential_V: D(x) below m_floor^2 at x=" + std::to_string(x));

    const std::size_t n = grid.size();
    // integral of grad U / D from grid.front() to each node
    Vec acc(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        double seg = grid[i] - grid[i - 1];
        acc[i] = acc[i - 1] + simpson(drift_over_d, grid[i - 1], grid[i], 1e-8 * std::max(seg, 1e-12));
    }
    // re-anchor at x = 0
    double at0 = simpson(drift_over_d, grid.front(), 0.0, 1e-8);
    double log_d0 = std::log(d_of(0.0));
    Vec v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = (acc[i] - at0) + std::log(d_of(grid[i])) - log_d0;
    return v;
}

Density1D invariant_density(const ProblemSpec& spec, const Vec& grid, double m_floor) {
    Vec v = potential_V(spec, grid, m_floor);
    double vmin = *std::min_element(v.begin(), v.end());
    Density1D d;
    d.grid = grid;
    d.dens.resize(grid.size());
    d.logdens.resize(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) d.dens[i] = std::exp(-(v[i] - vmin));
    double z = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i)
        z += 0.5 * (d.dens[i] + d.dens[i - 1]) * (grid[i] - grid[i - 1]);
    d.norm = z;
    for (std::size_t i = 0; i < v.size(); ++i) {
        d.dens[i] /= z;
        d.logdens[i] = -(v[i] - vmin) - std::log(z);
    }
    return d;
}

namespace {

Vec cumulative(const Density1D& d) {
    Vec c(d.grid.size(), 0.0);
    for (std::size_t i = 1; i < d.grid.size(); ++i)
        c[i] = c[i - 1] + 0.5 * (d.dens[i] + d.dens[i - 1]) * (d.grid[i] - d.grid[i - 1]);
    double total = c.back();
    for (auto& v : c) v /= total;
    return c;
}

double invert_cdf(const Density1D& d, const Vec& cdf, double u) {
    auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.begin()) return d.grid.front();
    if (it == cdf.end()) return d.grid.back();
    std::size_t i = static_cast<std::size_t>(it - cdf.begin());
    double c0 = cdf[i - 1], c1 = cdf[i];
    double t = (c1 > c0) ? (u - c0) / (c1 - c0) : 0.5;
    return d.grid[i - 1] + t * (d.grid[i] - d.grid[i - 1]);
}

}  // namespace

Vec density_quantiles(const Density1D& density, int n) {
    Vec cdf = cumulative(density);
    Vec atoms(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) atoms[k] = invert_cdf(density, cdf, (k + 0.5) / n);
    return atoms;
}

Vec sample_from_density(const Density1D& density, int n, RngStream& rng) {
    Vec cdf = cumulative(density);
    Vec out(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) out[k] = invert_cdf(density, cdf, rng.uniform());
    return out;
}

SampleComparison compare_to_samples(const Density1D& density, const Vec& samples) {
    SampleComparison out;
    Vec atoms = density_quantiles(density, 2048);
    out.w1 = w1_exact_1d(EmpiricalMeasure::from_scalars(samples), EmpiricalMeasure::from_scalars(atoms));

    double lo = density.grid.front(), hi = density.grid.back();
    const int nbins = 120;
    double width = (hi - lo) / nbins;
    std::vector<int> counts(nbins, 0);
    std::vector<double> sums(nbins, 0.0);
    for (double s : samples) {
        int b = static_cast<int>((s - lo) / width);
        b = std::clamp(b, 0, nbins - 1);
        ++counts[b];
        sums[b] += s;
    }
    int best = 0;
    for (int b = 1; b < nbins; ++b)
        if (counts[b] > counts[best]) best = b;
    // the in-bin sample mean locates the mode below bin resolution
    out.hist_mode = counts[best] > 0 ? sums[best] / counts[best] : lo + (best + 0.5) * width;
    out.density_argmax = density.argmax();
    out.mode_gap = std::abs(out.hist_mode - out.density_argmax);
    return out;
}

StationarityResidual stationarity_residual(const Density1D& density, const ProblemSpec& spec) {
    const Vec& x = density.grid;
    const std::size_t n = x.size();
    Vec d(n), gu(n), p = density.dens;
    for (std::size_t i = 0; i < n; ++i) {
        double m = spec.diffusion_M(Vec{x[i]}).at(0, 0);
        d[i] = m * m;
        gu[i] = spec.grad_U(Vec{x[i]})[0];
    }

    // mask out a window around jumps in D
    std::vector<char> skip(n, 0);
    for (std::size_t i = 1; i < n; ++i) {
        if (std::abs(d[i] - d[i - 1]) > 0.05 * (std::abs(d[i]) + std::abs(d[i - 1]) + 1e-3)) {
            for (std::size_t k = (i >= 6 ? i - 6 : 0); k < std::min(n, i + 6); ++k) skip[k] = 1;
        }
    }

    StationarityResidual out;
    auto flux = [&](std::size_t i) {
        double h = x[i + 1] - x[i - 1];
        double ddp = (d[i + 1] * p[i + 1] - d[i - 1] * p[i - 1]) / h;
        return p[i] * gu[i] + ddp;
    };
    for (std::size_t i = 2; i + 2 < n; ++i) {
        if (skip[i - 1] || skip[i] || skip[i + 1]) continue;
        double r = (flux(i + 1) - flux(i - 1)) / (x[i + 1] - x[i - 1]);
        out.max_residual = std::max(out.max_residual, std::abs(r));
        out.flux_scale = std::max(out.flux_scale, std::abs(p[i] * gu[i]));
    }
    return out;
}

}  // namespace langsim
