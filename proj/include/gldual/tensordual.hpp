#pragma once

#include <cstdint>
#include <optional>

#include "gldual/primal.hpp"

namespace gldual {

/// Dual variables with a 2-vector v* = (v1, v2) and a symmetric 2x2 field
/// v0* = [[s11, s12], [s12, s22]] per node.
struct TensorDual {
    Field v1;
    Field v2;
    Field s11;
    Field s12;
    Field s22;

    static TensorDual zeros(std::size_t n);
};

/// K11 = K22 = K and K12 = K21.
struct KMat {
    double K = 100.0;
    double K12 = 10.0;

    double sum() const noexcept { return 2.0 * K + 2.0 * K12; }
    /// K >= ratio * K12 and K12 >= floor: the working meaning of K >> K12 >> 1.
    bool dominant(double ratio = 10.0, double floor = 10.0) const noexcept {
        return K >= ratio * K12 && K12 >= floor;
    }
};

/// Per-node entries of M^{-1} with M = [[2 s11 - K, 2 s12 - K12], [2 s12 - K12, 2 s22 - K]].
struct NodeInverse {
    Field m11;
    Field m12;
    Field m22;
};

/// Throws SingularNode when |det M| < 1e-10 K^2 at some node.
NodeInverse nodewise_inverse(const KMat& km, const TensorDual& t);

/// L + (2K + 2K12) I.
SymOp tensor_primal_operator(const ModelParams& params, const Grid& grid, const KMat& km);

/// -1/2 int v^T M^{-1} v - (2/alpha) sum_ij int s_ij^2 - beta sum_ij int s_ij,
/// the sums running over all four index pairs (s12 counted twice).
double eval_Gstar_t(const ModelParams& params, const Grid& grid, const KMat& km, const TensorDual& t);

/// 1/2 <(L + sum K)^{-1} w, w> with w = v1 + v2 + f.
double eval_Fstar_t(const ModelParams& params, const Grid& grid, const KMat& km, const TensorDual& t);

/// -F* + G*.
double eval_Jstar_t(const ModelParams& params, const Grid& grid, const KMat& km, const TensorDual& t);

/// |s_ij| <= K12 / 4 everywhere.
bool in_Bstar_t(const TensorDual& t, const KMat& km);
/// -128 ||v_i||_inf^2 / (K/2)^3 + 1/alpha > 0 for both components.
bool in_Dstar(const TensorDual& t, const KMat& km, double alpha);
/// ||u||_{1,inf} < K^{1/4}.
bool in_Uhat(const Grid& grid, const Field& u, const KMat& km);

/// Smallest eigenvalue of the quadratic form -P - S on (v1, v2), where P pulls
/// back (L + sum K)^{-1} through v1 + v2 and S is the nodewise M^{-1} form.
double cstar_min_eig(const ModelParams& params, const Grid& grid, const KMat& km, const TensorDual& t);

/// C* membership: t in B* and cstar_min_eig > 1e-10.
bool in_Cstar(const ModelParams& params, const Grid& grid, const KMat& km, const TensorDual& t);

/// (L + sum K)^{-1} (v1 + v2 + f).
Field reconstruct_u(const ModelParams& params, const Grid& grid, const KMat& km, const TensorDual& t);

/// Euclidean norm of the stacked residuals v_i - sum_j (K_ij - 2 s_ij) u and
/// s_ij - alpha/4 (u^2 - beta), with u = reconstruct_u(t).
double stationarity_residual_t(const ModelParams& params, const Grid& grid, const KMat& km,
                               const TensorDual& t);

/// Euclidean norm of the discrete gradient of J*_t over all five components.
double grad_Jstar_t_norm(const ModelParams& params, const Grid& grid, const KMat& km, const TensorDual& t);

/// The exact stationary point associated with a primal field u0.
TensorDual tensor_dual_from_primal(const ModelParams& params, const KMat& km, const Field& u0);

struct SaddleResult {
    TensorDual t;
    Field u0;
    double residual = 0.0;
    int iterations = 0;
    bool used_fallback = false;
    bool in_bstar = false;
    bool in_cstar = false;
    bool in_dstar = false;
    bool in_uhat = false;
};

/// Damped Newton on the stationarity system with an alternating relaxed
/// fallback. Throws SingularNode for a non-invertible start and
/// NoConvergence with the best residual.
SaddleResult saddle_solve(const ModelParams& params, const Grid& grid, const KMat& km,
                          const TensorDual& init, double tol = 1e-10, int maxit = 100);

struct Thm4Options {
    double tol = 1e-10;
    int maxit = 100;
    int ndirs = 10;
    int nstarts = 10;
    std::uint64_t seed = 42;
};

struct Thm4Result {
    SaddleResult saddle;
    double J = 0.0;
    double Jstar = 0.0;
    double gap = 0.0;
    double grad_norm = 0.0;
    double cstar_min_eig = 0.0;
    double diag_equality_error = 0.0;  // max |s_ii - alpha/4 (u0^2 - beta)|
    bool k_dominant = false;
    double best_in_uhat = 0.0;
    int uhat_minima_found = 0;
    double min_vstar_curvature = 0.0;  // sampled second differences, should be >= 0
    double max_v0_curvature = 0.0;     // sampled second differences, should be <= 0
    std::optional<double> hint_distance;
};

Thm4Result verify_thm4(const ModelParams& params, const Grid& grid, const KMat& km,
                       const std::optional<Field>& u0_hint, const Thm4Options& opts = {});

}  // namespace gldual
