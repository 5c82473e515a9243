#pragma once

#include <stdexcept>
#include <string>

#include "langsim/metrics.hpp"
#include "langsim/problems.hpp"
#include "langsim/rng.hpp"
#include "langsim/vec.hpp"

namespace langsim {

struct DegenerateDiffusion : std::runtime_error {
    explicit DegenerateDiffusion(const std::string& what) : std::runtime_error(what) {}
};

// Normalized stationary density on a grid, p* proportional to exp(-V).
struct Density1D {
    Vec grid;
    Vec logdens;
    Vec dens;
    double norm = 0.0;  // trapezoid normalization of exp(-(V - Vmin))

    double argmax() const;
};

Vec default_grid();  // [-10, 14] with 4096 nodes, sized for the worked 1D example

// V(x) = int_0^x grad U / D + log D(x) - log D(0), with D = M^2 and the
// integral accumulated along the grid by adaptive Simpson (rel. tol 1e-8).
// Raises DegenerateDiffusion if D falls below m_floor^2 anywhere on the grid.
Vec potential_V(const ProblemSpec& spec, const Vec& grid, double m_floor = 0.05);

Density1D invariant_density(const ProblemSpec& spec, const Vec& grid, double m_floor = 0.05);

// Equal-mass atoms at the (k+1/2)/n quantiles of the density.
Vec density_quantiles(const Density1D& density, int n);

// Inverse-CDF draws, for self-consistency tests.
Vec sample_from_density(const Density1D& density, int n, RngStream& rng);

struct SampleComparison {
    double w1 = 0.0;
    double mode_gap = 0.0;
    double density_argmax = 0.0;
    double hist_mode = 0.0;
};

// W1 between the samples and a 2048-atom quantile discretization of the
// density, plus the gap between histogram mode and density argmax.
SampleComparison compare_to_samples(const Density1D& density, const Vec& samples);

struct StationarityResidual {
    double max_residual = 0.0;
    double flux_scale = 0.0;  // max |p* grad U| over the checked nodes
};

// Finite-difference residual of d/dx[p U' + d/dx(D p)] over interior nodes.
// Nodes within a few cells of a detected jump in D are skipped; the density
// solves the equation only distributionally across those jumps.
StationarityResidual stationarity_residual(const Density1D& density, const ProblemSpec& spec);

}  // namespace langsim
