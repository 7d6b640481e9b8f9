#pragma once

#include <cstddef>
#include <memory>
#include <optional>

#include <Eigen/Dense>

#include "gldual/grid.hpp"

namespace gldual {

/// Symmetric linear operator on Fields: a base part (finite-difference
/// stencil or dense matrix) plus a pointwise diagonal shift.
class SymOp {
public:
    /// Zero operator of the given size.
    explicit SymOp(std::size_t n = 0);

    static SymOp diagonal(Field d);
    static SymOp scalar(std::size_t n, double c);
    /// Symmetric part of `m` is kept.
    static SymOp dense(const Eigen::MatrixXd& m);

    std::size_t size() const noexcept { return n_; }
    bool has_stencil() const noexcept { return stencil_grid_.has_value(); }
    bool has_dense() const noexcept { return static_cast<bool>(dense_); }

    Field apply(const Field& x) const;
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd to_dense() const;
    Field diagonal_entries() const;
    const Field& shift() const noexcept { return shift_; }

    /// Upper bound on the spectral radius (Gershgorin).
    double spectral_bound() const;

    SymOp scaled(double s) const;
    SymOp plus(const SymOp& other) const;

private:
    friend SymOp assemble_neg_laplacian(const Grid& grid, double gamma);

    std::size_t n_ = 0;
    std::optional<Grid> stencil_grid_;
    double stencil_coeff_ = 0.0;  // gamma / h^2
    std::shared_ptr<const Eigen::MatrixXd> dense_;
    Field shift_;
};

/// -gamma * discrete Laplacian: (2d+1)-point stencil with diagonal 2d*gamma/h^2,
/// -gamma/h^2 to each interior neighbour, Dirichlet truncation at the boundary.
SymOp assemble_neg_laplacian(const Grid& grid, double gamma);

Field apply(const SymOp& a, const Field& x);
SymOp add_diag(const SymOp& a, const Field& w);
SymOp add_diag(const SymOp& a, double w);

struct SolveOptions {
    /// Systems up to this size are solved by dense Cholesky; larger ones by CG.
    std::size_t dense_threshold = 2000;
    int max_iterations = 10000;
};

/// Solve A x = b for symmetric positive-definite A with relative residual <= tol.
Field solve_spd(const SymOp& a, const Field& b, double tol, const SolveOptions& opts = {});

/// Plain conjugate gradient. Throws NotPositiveDefinite on non-positive curvature.
Field conjugate_gradient(const SymOp& a, const Field& b, double tol, int max_iterations);

struct EigOptions {
    std::size_t dense_threshold = 2000;
    int max_lanczos_steps = 1000;
};

double min_eig(const SymOp& a, double tol = 1e-10, const EigOptions& opts = {});
double max_eig(const SymOp& a, double tol = 1e-10, const EigOptions& opts = {});

struct Extremes {
    double min;
    double max;
};

/// Both extremal eigenvalues via one dense decomposition (or two Lanczos runs).
Extremes extremal_eigs(const SymOp& a, double tol = 1e-10, const EigOptions& opts = {});

/// Lanczos with full reorthogonalisation; `largest` selects the end of the spectrum.
double lanczos_extremal(const SymOp& a, bool largest, double tol, int max_steps);

inline constexpr double kMatrixMargin = 1e-10;

/// Operator inequality A > c: min_eig(A) > c + margin.
bool matrix_gt(const SymOp& a, double c, double margin = kMatrixMargin);

/// Principal square root through a dense symmetric eigendecomposition.
/// Eigenvalues down to -1e-12 * scale are clamped to zero.
SymOp sqrt_spd(const SymOp& a);

inline Eigen::VectorXd to_eigen(const Field& f) {
    return Eigen::Map<const Eigen::VectorXd>(f.values().data(), static_cast<Eigen::Index>(f.size()));
}

inline Field to_field(const Eigen::VectorXd& v) {
    return Field(std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace gldual
