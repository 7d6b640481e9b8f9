#pragma once

#include <cstdint>
#include <vector>

#include "gldual/proxdual.hpp"

namespace gldual {

struct MembershipReport {
    bool in_Aplus = false;
    bool in_Bplus = false;
    double min_eig_hess = 0.0;
    int sign_violations = 0;  // nodes with u f < 0
};

/// Flip u wherever u f < 0, which puts it in A+ without raising J.
/// Throws MixedSignF when f has strictly positive and strictly negative entries.
Field sign_align(const Grid& grid, const Field& u, const Field& f);

bool in_Aplus(const Grid& grid, const Field& u, const Field& f);
bool in_Bplus(const ModelParams& params, const Grid& grid, const Field& u);
MembershipReport membership(const ModelParams& params, const Grid& grid, const Field& u);

/// Hypothesis margin 2 alpha beta - max_eig(L); non-negative when -L - 2ab <= 0.
double laplacian_hypothesis_margin(const ModelParams& params, const Grid& grid);

/// sqrt(6 alpha) diag(|u|) - sqrt(2 alpha beta I - L). Throws HypothesisViolated
/// when max_eig(L) > 2 alpha beta.
SymOp H_operator(const ModelParams& params, const Grid& grid, const Field& u);

struct ConvexityCounterexample {
    Field u1;
    Field u2;
    double lambda = 0.0;
    double min_eig_hess = 0.0;
};

struct ConvexityProbeReport {
    int pairs = 0;
    int combinations = 0;
    int passes = 0;
    int rejected_samples = 0;
    /// Sampled fields where B+ membership and H(u) >= 0 disagree.
    int h_equivalence_mismatches = 0;
    int h_equivalence_checked = 0;
    std::vector<ConvexityCounterexample> counterexamples;
};

/// Samples pairs in A+ and B+ and tests lambda in {0.1, ..., 0.9} for
/// membership of the convex combination. Reports; never asserts.
ConvexityProbeReport convexity_probe(const ModelParams& params, const Grid& grid, int npairs,
                                     std::uint64_t seed);

struct ConjugateResult {
    double value = 0.0;
    Field maximiser;
    int iterations = 0;
};

/// sup_u { <u, w> - 1/2 <L u, u> - alpha/2 int (u^2 - beta)^2 - (K + eps)/2 int u^2 }
/// by Newton on the strictly concave problem. Requires K + eps > 2 alpha beta
/// (else NotConcave).
ConjugateResult numeric_Gstar_thm3(const ModelParams& params, const Grid& grid, const Field& w,
                                   double tol = 1e-12);

/// -G*(v* + K p) + F*(v*) + H(p).
double eval_Jstar_thm3(const ModelParams& params, const Grid& grid, const Field& vstar, const Field& p);

/// Lowest energy among critical points reached by Newton from `nstarts` random
/// smooth starts (plus any extra starts supplied).
struct PrimalSearch {
    Field best;
    double best_value = 0.0;
    int converged = 0;
};
PrimalSearch best_primal(const ModelParams& params, const Grid& grid, int nstarts, std::uint64_t seed,
                         const std::vector<Field>& extra_starts = {});

struct Thm2Result {
    double hypothesis_margin = 0.0;
    bool f_uniform_sign = false;
    int sign_align_samples = 0;
    double max_sign_align_increase = 0.0;  // max of J(sign_align(u)) - J(u)
    double best_over_U = 0.0;
    double best_over_Aplus = 0.0;
    ConvexityProbeReport probe;
};

Thm2Result verify_thm2(const ModelParams& params, const Grid& grid, int nsamples, int npairs,
                       std::uint64_t seed);

struct Thm3Result {
    double J = 0.0;
    double Jstar = 0.0;
    double gap = 0.0;
    MembershipReport membership;
    bool v0_in_bstar = false;
    double best_primal = 0.0;
    int weak_duality_samples = 0;
    double min_weak_duality_margin = 0.0;  // min over samples of J*(v*,p) - best_primal
    int sign_align_samples = 0;
    double max_sign_align_increase = 0.0;
};

/// Preconditions: u0 critical, u0 in A+ and B+, K + eps > 2 alpha beta and
/// max_eig(L) <= 2 alpha beta. Violations throw PreconditionViolated.
Thm3Result verify_thm3(const ModelParams& params, const Grid& grid, const Field& u0, int nsamples,
                       std::uint64_t seed);

}  // namespace gldual
