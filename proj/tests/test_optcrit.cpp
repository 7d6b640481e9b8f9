#include <gtest/gtest.h>

#include <cmath>

#include "gldual/optcrit.hpp"
#include "gldual/sampling.hpp"
#include "oracles.hpp"

using namespace gldual;

namespace {

Grid r1() { return build_grid({1, 1.0, 3}); }

ModelParams r1_params(double f = 0.0) {
    ModelParams p;
    p.f = r1().constant(f);
    return p;
}

// Weak diffusion keeps max_eig(L) below 2 alpha beta.
ModelParams weak(const Grid& g, double K = 70.0) {
    ModelParams p;
    p.gamma = 0.001;
    p.beta = 30.0;
    p.K = K;
    p.f = g.constant(0.5);
    return p;
}

template <typename Fn>
ErrorKind kind_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected an error";
    return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(SignAlign, Examples) {
    const Field f{1, 1, 1};
    EXPECT_EQ(sign_align(r1(), Field{-2, 3, -4}, f), (Field{2, 3, 4}));
    EXPECT_EQ(sign_align(r1(), Field{0.5, 0, 2}, f), (Field{0.5, 0, 2}));
    EXPECT_EQ(sign_align(r1(), Field{1, -1, 1}, Field{-1, -1, 0}), (Field{-1, -1, 1}));
    EXPECT_EQ(kind_of([&] { sign_align(r1(), Field{1, 1, 1}, Field{1, -1, 1}); }), ErrorKind::MixedSignF);
}

TEST(SignAlign, NeverRaisesEnergy) {
    const Grid g = build_grid({2, 1.0, 5});
    ModelParams p;
    p.f = g.constant(0.5);
    Rng rng(31);
    for (int k = 0; k < 200; ++k) {
        const Field u = random_normal_field(g, rng, 2.0);
        const Field s = sign_align(g, u, p.f);
        EXPECT_TRUE(in_Aplus(g, s, p.f));
        EXPECT_LE(energy_J(p, g, s), energy_J(p, g, u) + 1e-12);
    }
}

TEST(Membership, Examples) {
    EXPECT_TRUE(in_Aplus(r1(), Field{1, 0, 2}, r1().constant(0.5)));
    EXPECT_FALSE(in_Aplus(r1(), Field{1, -0.1, 2}, r1().constant(0.5)));

    const MembershipReport ok = membership(r1_params(), r1(), r1().zeros());
    EXPECT_TRUE(ok.in_Bplus);
    EXPECT_NEAR(ok.min_eig_hess, 32.0 - 16.0 * std::sqrt(2.0) - 2.0, 1e-9);

    ModelParams b10 = r1_params();
    b10.beta = 10.0;
    const MembershipReport bad = membership(b10, r1(), r1().zeros());
    EXPECT_FALSE(bad.in_Bplus);
    EXPECT_NEAR(bad.min_eig_hess, 32.0 - 16.0 * std::sqrt(2.0) - 20.0, 1e-9);
    EXPECT_EQ(in_Bplus(b10, r1(), r1().zeros()), false);
}

TEST(HOperator, WeakDiffusionAtZero) {
    const ModelParams p = weak(r1());
    const std::vector<double> lam = oracle::laplacian_1d_eigs(3, p.gamma);
    const SymOp h = H_operator(p, r1(), r1().zeros());
    // H(0) = -sqrt(60 - L): its spectrum is -sqrt(60 - lambda_k).
    EXPECT_NEAR(max_eig(h), -std::sqrt(60.0 - lam.back()), 1e-9);
    EXPECT_NEAR(min_eig(h), -std::sqrt(60.0 - lam.front()), 1e-9);
    EXPECT_GT(laplacian_hypothesis_margin(p, r1()), 0.0);
}

TEST(HOperator, RejectsStrongDiffusion) {
    EXPECT_LT(laplacian_hypothesis_margin(r1_params(), r1()), 0.0);
    EXPECT_EQ(kind_of([] { H_operator(r1_params(), r1(), r1().zeros()); }), ErrorKind::HypothesisViolated);
}

TEST(HOperator, ShiftIsLinearInAbsU) {
    const ModelParams p = weak(r1());
    Rng rng(32);
    const Field u = random_normal_field(r1(), rng, 1.0);
    for (double t : {0.0, 0.5, 2.0}) {
        const SymOp h1 = H_operator(p, r1(), u);
        const SymOp ht = H_operator(p, r1(), t * u);
        const Field x = random_normal_field(r1(), rng, 1.0);
        const Field diff = apply(ht, x) - apply(h1, x);
        for (std::size_t i = 0; i < x.size(); ++i) {
            EXPECT_NEAR(diff[i], std::sqrt(6.0 * p.alpha) * (t - 1.0) * std::abs(u[i]) * x[i], 1e-12);
        }
    }
}

TEST(ConvexityProbe, TallyIsConsistent) {
    const Grid g = build_grid({1, 1.0, 7});
    const ConvexityProbeReport r = convexity_probe(weak(g), g, 200, 33);
    EXPECT_EQ(r.pairs, 200);
    EXPECT_EQ(r.combinations, 200 * 9);
    EXPECT_EQ(r.passes + static_cast<int>(r.counterexamples.size()), r.combinations);
    EXPECT_EQ(r.h_equivalence_mismatches, 0);
    for (const ConvexityCounterexample& c : r.counterexamples) {
        EXPECT_GT(c.lambda, 0.0);
        EXPECT_LT(c.lambda, 1.0);
    }
}

TEST(ConvexityProbe, SameSeedSameReport) {
    const Grid g = build_grid({1, 1.0, 7});
    const ConvexityProbeReport a = convexity_probe(weak(g), g, 20, 34);
    const ConvexityProbeReport b = convexity_probe(weak(g), g, 20, 34);
    EXPECT_EQ(a.passes, b.passes);
    EXPECT_EQ(a.rejected_samples, b.rejected_samples);
}

TEST(NumericGstar, ZeroLoad) {
    const ConjugateResult r = numeric_Gstar_thm3(r1_params(), r1(), r1().zeros());
    EXPECT_NEAR(r.value, -0.375, 1e-12);
    EXPECT_LT(r.maximiser.norm_inf(), 1e-12);
}

TEST(NumericGstar, MatchesBruteForceSupremum) {
    const ModelParams p = r1_params();
    const Eigen::MatrixXd L = oracle::laplacian_1d(3, p.gamma);
    const double W = r1().quadrature_weight();
    Rng rng(35);
    for (int k = 0; k < 10; ++k) {
        const Field w = random_normal_field(r1(), rng, 3.0);
        auto phi = [&](const Eigen::VectorXd& u) {
            double val = to_eigen(w).dot(u) - 0.5 * u.dot(L * u) - 0.5 * (p.K + p.eps) * u.squaredNorm();
            for (Eigen::Index i = 0; i < u.size(); ++i) {
                val -= 0.5 * p.alpha * std::pow(u[i] * u[i] - p.beta, 2);
            }
            return W * val;
        };
        EXPECT_NEAR(numeric_Gstar_thm3(p, r1(), w).value, oracle::concave_sup(phi, Eigen::VectorXd::Zero(3)),
                    1e-9);
    }
}

TEST(NumericGstar, ConvexAndFenchelYoung) {
    const ModelParams p = r1_params();
    Rng rng(36);
    auto G = [&](const Field& u) {
        const Field q = hadamard(u, u) - r1().constant(p.beta);
        return 0.5 * inner(r1(), apply(neg_laplacian(p, r1()), u), u) + 0.5 * p.alpha * inner(r1(), q, q) +
               0.5 * (p.K + p.eps) * inner(r1(), u, u);
    };
    for (int k = 0; k < 50; ++k) {
        const Field a = random_normal_field(r1(), rng, 3.0);
        const Field b = random_normal_field(r1(), rng, 3.0);
        const double mid = numeric_Gstar_thm3(p, r1(), 0.5 * (a + b)).value;
        const double ga = numeric_Gstar_thm3(p, r1(), a).value;
        const double gb = numeric_Gstar_thm3(p, r1(), b).value;
        EXPECT_LE(mid, 0.5 * (ga + gb) + 1e-12);
    }
    for (int k = 0; k < 100; ++k) {
        const Field w = random_normal_field(r1(), rng, 3.0);
        const Field u = random_normal_field(r1(), rng, 1.5);
        EXPECT_GE(numeric_Gstar_thm3(p, r1(), w).value, inner(r1(), u, w) - G(u) - 1e-12);
    }
}

TEST(NumericGstar, RequiresConcavity) {
    ModelParams p = r1_params();
    p.beta = 10.0;
    EXPECT_EQ(kind_of([&] { numeric_Gstar_thm3(p, r1(), r1().zeros()); }), ErrorKind::NotConcave);
}

TEST(JstarThm3, Examples) {
    const ModelParams p = r1_params();
    EXPECT_NEAR(eval_Jstar_thm3(p, r1(), p.f, r1().zeros()), 0.375, 1e-12);

    const Grid g = build_grid({1, 1.0, 15});
    const ModelParams q = weak(g);
    const CriticalPoint cp = newton(q, g, g.constant(std::sqrt(30.0)), 1e-12, 100);
    const Field vhat = q.eps * cp.u0 + q.f;
    EXPECT_NEAR(eval_Jstar_thm3(q, g, vhat, cp.u0), energy_J(q, g, cp.u0), 1e-8);
}

TEST(VerifyThm3, CompliantInstance) {
    const Grid g = build_grid({1, 1.0, 31});
    const ModelParams p = weak(g);
    const CriticalPoint cp = newton(p, g, g.constant(std::sqrt(30.0)), 1e-12, 100);
    const Thm3Result r = verify_thm3(p, g, cp.u0, 50, 37);
    EXPECT_LE(r.gap, 1e-7);
    EXPECT_TRUE(r.membership.in_Aplus);
    EXPECT_TRUE(r.membership.in_Bplus);
    EXPECT_EQ(r.weak_duality_samples, 50);
    EXPECT_GE(r.min_weak_duality_margin, -1e-8);
    EXPECT_LE(r.J, r.best_primal + 1e-10);
    EXPECT_LE(r.max_sign_align_increase, 1e-12);
}

TEST(VerifyThm3, Preconditions) {
    const Grid g = build_grid({1, 1.0, 7});
    const ModelParams p = weak(g);
    const CriticalPoint cp = newton(p, g, g.constant(-std::sqrt(30.0)), 1e-12, 100);
    ASSERT_FALSE(in_Aplus(g, cp.u0, p.f));
    EXPECT_EQ(kind_of([&] { verify_thm3(p, g, cp.u0, 10, 1); }), ErrorKind::PreconditionViolated);

    const CriticalPoint good = newton(p, g, g.constant(std::sqrt(30.0)), 1e-12, 100);
    const Thm3Result r = verify_thm3(p, g, good.u0, 0, 1);
    EXPECT_EQ(r.weak_duality_samples, 0);
    EXPECT_LE(r.gap, 1e-7);
}
