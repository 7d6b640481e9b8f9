#pragma once

#include <string_view>
#include <vector>

#include "gldual/model.hpp"

namespace gldual {

enum class Classification { LocalMin, LocalMax, Saddle, Degenerate };

std::string_view to_string(Classification c);

struct CriticalPoint {
    Field u0;
    double residual_norm = 0.0;  // Euclidean norm of grad_J(u0)
    Classification classification = Classification::Degenerate;
    double min_eig_hess = 0.0;
    double max_eig_hess = 0.0;
    int iterations = 0;
};

/// Relative margin separating definite from degenerate second variations.
inline constexpr double kDegeneracyMargin = 1e-8;

/// Damped Newton on grad_J(u) = 0 with backtracking on ||grad_J|| (factor 0.5,
/// at most 30 halvings). When the Newton direction cannot reduce the residual
/// the step falls back to steepest descent on 1/2 ||grad_J||^2.
/// Throws NoConvergence carrying the best iterate.
CriticalPoint newton(const ModelParams& params, const Grid& grid, const Field& u_init, double tol,
                     int maxit);

/// argmin_u Jhat(u, p) by Newton with Armijo backtracking on the strictly
/// convex subproblem. Throws NotConvex if the Hessian hess_J(u) + K is not
/// positive definite at the result.
Field prox_step(const ModelParams& params, const Grid& grid, const Field& p, double tol);

struct ProxResult {
    CriticalPoint point;
    std::vector<double> energy_trace;  // J(u_0), J(u_1), ...
};

/// Fixed-point iteration u_{k+1} = prox_step(u_k) until ||u_{k+1} - u_k|| <= tol.
ProxResult prox_iterate(const ModelParams& params, const Grid& grid, const Field& p0, double tol,
                        int maxit);

/// Sign pattern of hess_J(u) under the degeneracy margin.
Classification classify(const ModelParams& params, const Grid& grid, const Field& u);

/// Smallest K >= 0 with hess_J(u) + K I positive semidefinite.
double convexity_K(const ModelParams& params, const Grid& grid, const Field& u);

/// Classification from extremal eigenvalues.
Classification classify_spectrum(double min_eig, double max_eig);

/// Fill residual, eigenvalues and classification for an already-computed u0.
CriticalPoint describe_point(const ModelParams& params, const Grid& grid, Field u0, int iterations);

}  // namespace gldual
