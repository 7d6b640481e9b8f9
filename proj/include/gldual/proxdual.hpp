#pragma once

#include <cstdint>
#include <vector>

#include "gldual/primal.hpp"

namespace gldual {

/// Dual variables of the proximal duality principle: v* (shifted momentum),
/// v0* (the well multiplier) and the proximal centre p.
struct DualTriple {
    Field vstar;
    Field v0star;
    Field p;
};

struct BallSpec {
    Field center;
    double radius = 0.0;
};

/// Default ball radius around a centre: 0.25 * (1 + ||center||).
double default_radius(const Field& center);

/// v0* = alpha (u0^2 - beta), v* = eps u0 + f, p = u0.
DualTriple build_dual_triple(const ModelParams& params, const Grid& grid, const Field& u0);

/// A(v0*) = L + diag(2 v0*) + (K + eps) I.
SymOp dual_operator(const ModelParams& params, const Grid& grid, const Field& v0star);

/// min_eig(A(v0*)) - K/2; positive inside B*.
double bstar_margin(const ModelParams& params, const Grid& grid, const Field& v0star);

/// B* membership: A(v0*) > K/2 in the matrix sense.
bool in_Bstar(const ModelParams& params, const Grid& grid, const Field& v0star);

/// 1/2 <A^{-1} w, w> + 1/(2 alpha) int v0*^2 + beta int v0*, with w = v* + K p.
double eval_Gstar(const ModelParams& params, const Grid& grid, const DualTriple& t);

/// 1/(2 eps) int (v* - f)^2.
double eval_Fstar(const ModelParams& params, const Grid& grid, const Field& vstar);

/// K/2 int p^2.
double eval_H(const ModelParams& params, const Grid& grid, const Field& p);

/// -G* + F* + H.
double eval_Jstar(const ModelParams& params, const Grid& grid, const DualTriple& t);

struct DualGradient {
    Field d_vstar;
    Field d_v0star;
    Field d_p;

    /// Euclidean norm of the three stacked parts.
    double norm() const;
};

/// L2 gradient of J* with z = A^{-1}(v* + K p):
///   d/dv* = (v* - f)/eps - z,  d/dv0* = z^2 - v0*/alpha - beta,  d/dp = K p - K z.
DualGradient grad_Jstar(const ModelParams& params, const Grid& grid, const DualTriple& t);

struct SupV0Result {
    Field v0star;
    Field z;  // A(v0*)^{-1} (v* + K p) at the maximiser
    double value = 0.0;  // J8*(v*, p)
    int iterations = 0;
};

struct NestedOptions {
    double tol = 1e-12;
    int maxit = 100;
};

/// J8*(v*, p) = sup over v0* in B* of J*(v*, v0*, p). J* is strictly concave in
/// v0* on B*; the maximiser solves z^2 - v0*/alpha - beta = 0. Newton with
/// step halving that never leaves B*; above the dense threshold a damped
/// fixed point v0* <- alpha (z^2 - beta) is used instead.
SupV0Result sup_v0(const ModelParams& params, const Grid& grid, const Field& vstar, const Field& p,
                   const NestedOptions& opts = {});

/// Same, starting from a caller-supplied point inside B*.
SupV0Result sup_v0_from(const ModelParams& params, const Grid& grid, const Field& vstar,
                        const Field& p, const Field& v0_start, const NestedOptions& opts = {});

struct NestedResult {
    double value = 0.0;
    Field p;
    Field v0star;
    bool interior = true;
    int iterations = 0;
};

/// J3*(v*) = inf over p in the ball of J8*(v*, p).
NestedResult eval_J3(const ModelParams& params, const Grid& grid, const Field& vstar,
                     const BallSpec& ball, const NestedOptions& opts = {});

/// J5*(v*) = sup over p in the ball of J8*(v*, p).
NestedResult eval_J5(const ModelParams& params, const Grid& grid, const Field& vstar,
                     const BallSpec& ball, const NestedOptions& opts = {});

struct CurvatureRow {
    int direction = 0;
    double finite_difference = 0.0;
    double predicted = 0.0;
    double rel_mismatch = 0.0;
    double slope = 0.0;  // central first difference; ~0 at a stationary point
};

/// Second central differences of J3* (or J5* when `use_sup`) at v* = eps u0 + f
/// against the predicted form <(1/eps - (hess_J(u0) + eps)^{-1}) d, d>.
std::vector<CurvatureRow> d2_J3_check(const ModelParams& params, const Grid& grid, const Field& u0,
                                      int ndirs, std::uint64_t seed = 42, bool use_sup = false,
                                      double radius = 0.0);

/// Second central differences of p -> J8*(v*, p) at (v*, p) built from u0
/// against <K (H + eps)(H + K + eps)^{-1} d, d> with H = hess_J(u0).
std::vector<CurvatureRow> d2_J8_p_check(const ModelParams& params, const Grid& grid,
                                        const Field& u0, int ndirs, std::uint64_t seed = 42);

enum class Definiteness { PositiveDefinite, NegativeDefinite, Indefinite, Degenerate };

std::string_view to_string(Definiteness d);

struct NaiveDualDiagnosis {
    double min_eig = 0.0;
    double max_eig = 0.0;
    Definiteness definiteness = Definiteness::Degenerate;
};

/// Spectrum of L + diag(2 v0*) - eps I with v0* = alpha (u^2 - beta): the
/// denominator operator of the dual without the proximal term.
NaiveDualDiagnosis naive_dual_curvature(const ModelParams& params, const Grid& grid, const Field& u);

struct Thm1Options {
    int ndirs = 5;
    std::uint64_t seed = 42;
    double radius = 0.0;  // 0 selects default_radius
    double precondition_tol = 1e-8;
};

struct Thm1Result {
    CriticalPoint point;
    DualTriple triple;
    double J = 0.0;
    double Jstar = 0.0;
    double gap = 0.0;
    double dual_grad_norm = 0.0;
    bool in_bstar = false;
    double bstar_margin = 0.0;
    /// J3* (LocalMin) or J5* (LocalMax) at v-hat, and whether its p-optimum is interior.
    double nested_value = 0.0;
    bool nested_interior = false;
    std::vector<CurvatureRow> nested_rows;
    std::vector<CurvatureRow> j8_pp_rows;
};

/// Runs every finite check attached to a critical point of J. Curvature rows
/// are produced only for LocalMin (J3*) and LocalMax (J5*) points in B*.
Thm1Result verify_thm1(const ModelParams& params, const Grid& grid, const Field& u0,
                       const Thm1Options& opts = {});

}  // namespace gldual
