#pragma once

#include "gldual/grid.hpp"
#include "gldual/linalg.hpp"

namespace gldual {

/// Coefficients of the Ginzburg-Landau energy
///   J(u) = gamma/2 |grad u|^2 + alpha/2 (u^2 - beta)^2 - <u, f>
/// plus the proximal weight K, the dual shift eps and the off-diagonal
/// coupling K12 used by the tensor dual.
struct ModelParams {
    double gamma = 1.0;
    double alpha = 1.0;
    double beta = 1.0;
    double K = 10.0;
    double eps = 0.1;
    double K12 = 10.0;
    Field f;
};

/// Throws InvalidArgument unless every coefficient is positive and f is finite
/// and lives on `grid`.
void validate(const ModelParams& params, const Grid& grid);

/// The stencil operator L = -gamma * Laplacian for these parameters.
SymOp neg_laplacian(const ModelParams& params, const Grid& grid);

/// The gradient term is the stencil quadratic form 1/2 <L u, u>, so grad_J and
/// hess_J are its exact derivatives.
double energy_J(const ModelParams& params, const Grid& grid, const Field& u);

/// J(u) + K/2 * int (u - p)^2; equals energy_J when p == u.
double energy_Jhat(const ModelParams& params, const Grid& grid, const Field& u, const Field& p);

/// L2 gradient: L u + 2 alpha (u^2 - beta) u - f.
Field grad_J(const ModelParams& params, const Grid& grid, const Field& u);

/// Second variation L + diag(6 alpha u^2 - 2 alpha beta).
SymOp hess_J(const ModelParams& params, const Grid& grid, const Field& u);

}  // namespace gldual
