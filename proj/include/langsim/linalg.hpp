#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "langsim/vec.hpp"

namespace langsim {

struct NotPSD : std::runtime_error {
    explicit NotPSD(const std::string& what) : std::runtime_error(what) {}
};
struct FloorViolated : std::runtime_error {
    explicit FloorViolated(const std::string& what) : std::runtime_error(what) {}
};

// Dense symmetric matrix, single stored triangle (row-major lower part), so
// entries[i][j] == entries[j][i] holds exactly by construction.
class SymMatrix {
   public:
    SymMatrix() = default;
    explicit SymMatrix(int dim) : dim_(dim), tri_(static_cast<std::size_t>(dim) * (dim + 1) / 2, 0.0) {}

    static SymMatrix identity(int dim) {
        SymMatrix m(dim);
        for (int i = 0; i < dim; ++i) m.at(i, i) = 1.0;
        return m;
    }
    static SymMatrix diagonal(const Vec& d) {
        SymMatrix m(static_cast<int>(d.size()));
        for (int i = 0; i < m.dim(); ++i) m.at(i, i) = d[i];
        return m;
    }
    // Builds the symmetric part (A + A^T)/2 of a dense row-major square array.
    static SymMatrix from_dense(const std::vector<double>& a, int dim) {
        SymMatrix m(dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j <= i; ++j)
                m.at(i, j) = 0.5 * (a[static_cast<std::size_t>(i) * dim + j] +
                                    a[static_cast<std::size_t>(j) * dim + i]);
        return m;
    }

    int dim() const { return dim_; }

    double& at(int i, int j) {
        if (i < j) std::swap(i, j);
        return tri_[static_cast<std::size_t>(i) * (i + 1) / 2 + j];
    }
    double at(int i, int j) const {
        if (i < j) std::swap(i, j);
        return tri_[static_cast<std::size_t>(i) * (i + 1) / 2 + j];
    }
    double operator()(int i, int j) const { return at(i, j); }

    Vec apply(const Vec& x) const {
        Vec y(static_cast<std::size_t>(dim_), 0.0);
        for (int i = 0; i < dim_; ++i) {
            double s = 0.0;
            for (int j = 0; j < dim_; ++j) s += at(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }
    void apply(const double* x, double* y) const {
        for (int i = 0; i < dim_; ++i) {
            double s = 0.0;
            for (int j = 0; j < dim_; ++j) s += at(i, j) * x[j];
            y[i] = s;
        }
    }

    double trace() const {
        double t = 0.0;
        for (int i = 0; i < dim_; ++i) t += at(i, i);
        return t;
    }
    double frob_norm() const {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) s += at(i, j) * at(i, j);
        return std::sqrt(s);
    }

    SymMatrix operator+(const SymMatrix& o) const {
        SymMatrix r(dim_);
        for (std::size_t k = 0; k < tri_.size(); ++k) r.tri_[k] = tri_[k] + o.tri_[k];
        return r;
    }
    SymMatrix operator-(const SymMatrix& o) const {
        SymMatrix r(dim_);
        for (std::size_t k = 0; k < tri_.size(); ++k) r.tri_[k] = tri_[k] - o.tri_[k];
        return r;
    }
    SymMatrix operator*(double c) const {
        SymMatrix r(dim_);
        for (std::size_t k = 0; k < tri_.size(); ++k) r.tri_[k] = tri_[k] * c;
        return r;
    }
    // Symmetrized product: (AB + BA)/2 is not needed anywhere; square() covers
    // the A*A case exactly.
    SymMatrix square() const;

   private:
    int dim_ = 0;
    std::vector<double> tri_;
};

struct EigenDecomposition {
    Vec values;                   // ascending
    std::vector<double> vectors;  // column k = eigenvector of values[k], row-major dim x dim
    int dim = 0;

    double vec(int i, int k) const { return vectors[static_cast<std::size_t>(i) * dim + k]; }
};

// Cyclic Jacobi rotations; fine for the small dense matrices used here.
EigenDecomposition eigen_sym(const SymMatrix& g);

// Rebuild V * diag(f(values)) * V^T as a SymMatrix.
SymMatrix eigen_rebuild(const EigenDecomposition& e, const Vec& mapped_values);

// Unique PSD square root via eigendecomposition. Eigenvalues in [-tol, 0)
// are clamped to zero; anything below -tol raises NotPSD.
SymMatrix psd_sqrt(const SymMatrix& g, double tol);

// Default clamping threshold, scaled to the matrix.
double default_psd_tol(const SymMatrix& g);
inline SymMatrix psd_sqrt(const SymMatrix& g) { return psd_sqrt(g, default_psd_tol(g)); }

// N = sqrt(M^2 - c_m^2 I). Requires min eigenvalue of M >= 2*c_m.
SymMatrix diffusion_remainder(const SymMatrix& m, double c_m);

struct SqrtTraceCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

// lhs = tr((sqrt(A)-sqrt(B))^2), rhs = tr((A-B)^2 A^{-1}); requires A,B SPD.
SqrtTraceCheck check_sqrt_trace_inequality(const SymMatrix& a, const SymMatrix& b);

}  // namespace langsim
