#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "langsim/vec.hpp"

namespace langsim {

struct DimMismatch : std::runtime_error {
    explicit DimMismatch(const std::string& what) : std::runtime_error(what) {}
};
struct SizeMismatch : std::runtime_error {
    explicit SizeMismatch(const std::string& what) : std::runtime_error(what) {}
};
struct TooLarge : std::runtime_error {
    explicit TooLarge(const std::string& what) : std::runtime_error(what) {}
};

// A weighted sample set. Weights default to uniform and must sum to 1.
class EmpiricalMeasure {
   public:
    explicit EmpiricalMeasure(StateMatrix points);
    EmpiricalMeasure(StateMatrix points, Vec weights);

    static EmpiricalMeasure from_scalars(const Vec& values);

    int n() const { return points_.n_traj; }
    int dim() const { return points_.dim; }
    const StateMatrix& points() const { return points_; }
    const Vec& weights() const { return weights_; }
    bool uniform() const { return uniform_; }

    double scalar(int i) const { return points_.row(i)[0]; }

   private:
    StateMatrix points_;
    Vec weights_;
    bool uniform_ = true;
};

// Exact 1D W1 by quantile-function integration; handles unequal sizes and
// nonuniform weights via piecewise-constant quantile functions.
double w1_exact_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

// Exact 1D W2 (squared-difference quantile integration, square root at end).
double w2_exact_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

// Exact W1 in any dimension by minimum-cost perfect matching on the Euclidean
// cost matrix. Cubic time; equal sizes, uniform weights, n <= 4096.
double w1_assignment(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

// Average of w1_exact_1d over random unit-vector projections; deterministic
// given the seed.
double w1_sliced(const EmpiricalMeasure& a, const EmpiricalMeasure& b, int n_proj, uint64_t seed);

double second_moment(const EmpiricalMeasure& a);  // weighted E||X||^2
double mean_norm(const EmpiricalMeasure& a);      // weighted E||X||

}  // namespace langsim
