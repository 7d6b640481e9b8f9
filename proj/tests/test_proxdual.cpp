#include <gtest/gtest.h>

#include "gldual/proxdual.hpp"
#include "gldual/sampling.hpp"
#include "oracles.hpp"

using namespace gldual;

namespace {

Grid r1() { return build_grid({1, 1.0, 3}); }

ModelParams params(double f, double beta = 1.0) {
    ModelParams p;
    p.beta = beta;
    p.f = r1().constant(f);
    return p;
}

double W() { return r1().quadrature_weight(); }

}  // namespace

TEST(Triple, Examples) {
    const DualTriple t = build_dual_triple(params(0.0), r1(), r1().zeros());
    EXPECT_EQ(t.v0star, (Field{-1, -1, -1}));
    EXPECT_EQ(t.vstar, r1().zeros());
    EXPECT_EQ(t.p, r1().zeros());
    EXPECT_EQ(build_dual_triple(params(0.5), r1(), r1().zeros()).vstar, r1().constant(0.5));

    ModelParams p = params(0.0);
    p.alpha = 2.0;
    p.beta = 3.0;
    EXPECT_EQ(build_dual_triple(p, r1(), Field{1, 2, 0}).v0star, (Field{-4, 2, -6}));
}

TEST(Bstar, Examples) {
    const ModelParams p = params(0.0);
    EXPECT_TRUE(in_Bstar(p, r1(), Field{-1, -1, -1}));
    EXPECT_NEAR(bstar_margin(p, r1(), Field{-1, -1, -1}), 32.0 - 16.0 * std::sqrt(2.0) + 8.1 - 5.0, 1e-10);
    EXPECT_TRUE(in_Bstar(p, r1(), r1().constant(-5.0)));
    EXPECT_FALSE(in_Bstar(p, r1(), r1().constant(-10.0)));
}

TEST(Gstar, Examples) {
    const ModelParams p = params(0.0);
    EXPECT_NEAR(eval_Gstar(p, r1(), build_dual_triple(p, r1(), r1().zeros())), -0.375, 1e-14);
    const Field pp{0.3, -0.2, 0.7};
    EXPECT_NEAR(eval_Gstar(p, r1(), {-p.K * pp, r1().zeros(), pp}), 0.0, 1e-14);

    // beta only enters through the linear term.
    const DualTriple t{Field{0.2, 0.1, -0.3}, Field{0.5, -0.5, 1.0}, Field{0.1, 0.2, 0.3}};
    ModelParams b0 = p;
    b0.beta = 1e-300;
    EXPECT_NEAR(eval_Gstar(p, r1(), t) - eval_Gstar(b0, r1(), t), p.beta * integrate(r1(), t.v0star), 1e-14);
}

TEST(Gstar, RefusesOutsideBstar) {
    const ModelParams p = params(0.0);
    try {
        eval_Gstar(p, r1(), {r1().zeros(), r1().constant(-10.0), r1().zeros()});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotInBstar);
    }
}

TEST(Gstar, SmallGridConjugacy) {
    // sup over (u, y) of <w,u> - 1/2 <(L + K + eps) u, u> + <v0*, y - u^2> - alpha/2 int (y - beta)^2
    Rng rng(21);
    for (int n : {1, 2, 4}) {
        const Grid g = build_grid({1, 1.0, n});
        ModelParams p;
        p.f = g.constant(0.5);
        const Eigen::MatrixXd L = oracle::laplacian_1d(n, p.gamma);
        for (int k = 0; k < 3; ++k) {
            const DualTriple t{random_normal_field(g, rng, 1.0), random_normal_field(g, rng, 0.5),
                               random_normal_field(g, rng, 0.3)};
            ASSERT_TRUE(in_Bstar(p, g, t.v0star));
            const Eigen::VectorXd w = to_eigen(t.vstar + p.K * t.p);
            const Eigen::VectorXd v0 = to_eigen(t.v0star);
            auto phi = [&](const Eigen::VectorXd& x) {
                const Eigen::VectorXd u = x.head(n);
                const Eigen::VectorXd y = x.tail(n);
                const double val = w.dot(u) - 0.5 * u.dot(L * u) - 0.5 * (p.K + p.eps) * u.squaredNorm() +
                                   v0.dot(y - u.cwiseProduct(u)) -
                                   0.5 * p.alpha * (y.array() - p.beta).square().sum();
                return g.quadrature_weight() * val;
            };
            const double brute = oracle::concave_sup(phi, Eigen::VectorXd::Zero(2 * n));
            EXPECT_NEAR(eval_Gstar(p, g, t), brute, 1e-7);
        }
    }
}

TEST(Fstar, Examples) {
    ModelParams p = params(0.0);
    EXPECT_DOUBLE_EQ(eval_Fstar(p, r1(), p.f), 0.0);
    EXPECT_NEAR(eval_Fstar(p, r1(), Field{0.1, 0, 0}), 0.0125, 1e-15);
    p.f = Field{0.3, -0.1, 0.2};
    const Field v{1.0, 2.0, -1.0};
    EXPECT_NEAR(eval_Fstar(p, r1(), p.f + 2.0 * (v - p.f)), 4.0 * eval_Fstar(p, r1(), v), 1e-12);
}

TEST(Fstar, FenchelYoung) {
    // F(u) = eps/2 int u^2 + <u, f>; F*(v) + F(u) >= <u, v>, tight at v = eps u + f.
    ModelParams p = params(0.0);
    p.f = Field{0.3, -0.1, 0.2};
    Rng rng(22);
    auto F = [&](const Field& u) { return 0.5 * p.eps * inner(r1(), u, u) + inner(r1(), u, p.f); };
    for (int k = 0; k < 100; ++k) {
        const Field u = random_normal_field(r1(), rng, 2.0);
        const Field v = random_normal_field(r1(), rng, 2.0);
        EXPECT_GE(eval_Fstar(p, r1(), v) + F(u) - inner(r1(), u, v), -1e-12);
        const Field vt = p.eps * u + p.f;
        EXPECT_NEAR(eval_Fstar(p, r1(), vt) + F(u), inner(r1(), u, vt), 1e-12);
    }
}

TEST(Jstar, Examples) {
    const ModelParams p0 = params(0.0);
    EXPECT_NEAR(eval_Jstar(p0, r1(), build_dual_triple(p0, r1(), r1().zeros())), 0.375, 1e-14);
    EXPECT_NEAR(eval_Jstar(p0, r1(), {r1().zeros(), r1().zeros(), r1().zeros()}), 0.0, 1e-14);

    const ModelParams p = params(0.5);
    const CriticalPoint cp = newton(p, r1(), r1().zeros(), 1e-12, 50);
    EXPECT_NEAR(eval_Jstar(p, r1(), build_dual_triple(p, r1(), cp.u0)), energy_J(p, r1(), cp.u0), 1e-10);
}

TEST(DualGradient, VanishesAtCriticalTriples) {
    for (double f : {0.0, 0.5}) {
        const ModelParams p = params(f);
        const CriticalPoint cp = newton(p, r1(), r1().constant(1.0), 1e-12, 50);
        EXPECT_LE(grad_Jstar(p, r1(), build_dual_triple(p, r1(), cp.u0)).norm(), 1e-9);
    }
    const DualGradient g = grad_Jstar(params(0.0), r1(), {r1().zeros(), r1().constant(-1.0), r1().zeros()});
    EXPECT_EQ(g.d_v0star, r1().zeros());
}

TEST(DualGradient, MatchesCentralDifferences) {
    const ModelParams p = params(0.5);
    Rng rng(23);
    int checked = 0;
    while (checked < 30) {
        const DualTriple t{random_normal_field(r1(), rng, 1.0), random_normal_field(r1(), rng, 2.0),
                           random_normal_field(r1(), rng, 0.5)};
        if (!in_Bstar(p, r1(), t.v0star)) continue;
        ++checked;
        const DualGradient g = grad_Jstar(p, r1(), t);
        const Field d = random_normal_field(r1(), rng, 1.0);
        auto along = [&](int which) {
            return [&, which](double s) {
                DualTriple q = t;
                (which == 0 ? q.vstar : which == 1 ? q.v0star : q.p) += s * d;
                return eval_Jstar(p, r1(), q);
            };
        };
        const Field* parts[] = {&g.d_vstar, &g.d_v0star, &g.d_p};
        for (int which = 0; which < 3; ++which) {
            const double fd = oracle::central_first(along(which), 1e-6);
            const double pred = W() * dot(*parts[which], d);
            EXPECT_NEAR(fd, pred, 1e-6 * std::max(1.0, std::abs(pred)));
        }
    }
}

TEST(SupV0, Examples) {
    const ModelParams p = params(0.0);
    const SupV0Result r = sup_v0(p, r1(), r1().zeros(), r1().zeros());
    EXPECT_LT((r.v0star - r1().constant(-1.0)).norm_inf(), 1e-12);
    EXPECT_NEAR(r.value, 0.375, 1e-12);
}

TEST(SupV0, RecoversTripleAndIsLocalMax) {
    const ModelParams p = params(0.5);
    const CriticalPoint cp = newton(p, r1(), r1().constant(1.0), 1e-13, 50);
    const DualTriple t = build_dual_triple(p, r1(), cp.u0);
    const SupV0Result r = sup_v0(p, r1(), t.vstar, t.p);
    EXPECT_LT((r.v0star - t.v0star).norm_inf(), 1e-8);
    EXPECT_NEAR(r.value, eval_Jstar(p, r1(), t), 1e-12);

    Rng rng(24);
    for (int k = 0; k < 10; ++k) {
        const Field d = random_normal_field(r1(), rng, 0.1);
        DualTriple q = t;
        q.v0star = r.v0star + d;
        ASSERT_TRUE(in_Bstar(p, r1(), q.v0star));
        EXPECT_LT(eval_Jstar(p, r1(), q), r.value);
    }
}

TEST(Nested, Examples) {
    const ModelParams p = params(0.0);
    const BallSpec ball{r1().zeros(), 0.5};
    const NestedResult j3 = eval_J3(p, r1(), r1().zeros(), ball);
    EXPECT_NEAR(j3.value, 0.375, 1e-12);
    EXPECT_TRUE(j3.interior);
    EXPECT_LT(j3.p.norm_inf(), 1e-10);
}

TEST(Nested, OrderingOfInfAndSup) {
    const ModelParams p = params(0.5);
    Rng rng(25);
    for (int k = 0; k < 5; ++k) {
        const Field v = random_normal_field(r1(), rng, 0.5);
        const BallSpec ball{random_normal_field(r1(), rng, 0.5), 0.3};
        const double j8 = sup_v0(p, r1(), v, ball.center).value;
        const double j3 = eval_J3(p, r1(), v, ball).value;
        const double j5 = eval_J5(p, r1(), v, ball).value;
        EXPECT_LE(j3, j8 + 1e-12);
        EXPECT_GE(j5, j3 - 1e-12);
    }
}

TEST(Curvature, J3AlongCentralModeMatchesSpectralOracle) {
    // At u0 = 0 on the three-node grid, H = L - 2 has eigenpairs from the
    // analytic sine modes; the J3* form along e2 is W (1/eps - [(H+eps)^{-1}]_22).
    const ModelParams p = params(0.0);
    const std::vector<double> lam = oracle::laplacian_1d_eigs(3, 1.0);
    double inv22 = 0.0;
    for (int k = 1; k <= 3; ++k) {
        const double phi = oracle::laplacian_1d_mode(3, k)[1];
        inv22 += phi * phi / (lam[k - 1] - 2.0 + p.eps);
    }
    const double exact = W() * (1.0 / p.eps - inv22);
    const BallSpec ball{r1().zeros(), default_radius(r1().zeros())};
    const Field e2{0, 1, 0};
    const double h = 1e-4;
    const double fd = oracle::central_second(
        [&](double s) { return eval_J3(p, r1(), s * e2, ball).value; }, h);
    EXPECT_NEAR(fd, exact, 5e-3 * exact);
}

TEST(Curvature, CheckRowsAgreeAndArePositive) {
    const ModelParams p = params(0.0);
    const std::vector<double> lam = oracle::laplacian_1d_eigs(3, 1.0);
    const double lo = W() * (1.0 / p.eps - 1.0 / (lam.front() - 2.0 + p.eps));
    const double hi = W() * (1.0 / p.eps - 1.0 / (lam.back() - 2.0 + p.eps));
    for (const CurvatureRow& row : d2_J3_check(p, r1(), r1().zeros(), 5)) {
        EXPECT_GT(row.predicted, 0.0);
        EXPECT_GE(row.predicted, lo - 1e-12);
        EXPECT_LE(row.predicted, hi + 1e-12);
        EXPECT_LE(row.rel_mismatch, 5e-3);
    }
    for (const CurvatureRow& row : d2_J8_p_check(params(0.5), r1(), newton(params(0.5), r1(), r1().constant(1.0), 1e-13, 50).u0, 5)) {
        EXPECT_GE(row.finite_difference, -1e-8);
        EXPECT_LE(row.rel_mismatch, 1e-3);
    }
}

TEST(NaiveDual, Examples) {
    const double lmin = 32.0 - 16.0 * std::sqrt(2.0);
    const double lmax = 32.0 + 16.0 * std::sqrt(2.0);
    const NaiveDualDiagnosis ok = naive_dual_curvature(params(0.0), r1(), r1().zeros());
    EXPECT_NEAR(ok.min_eig, lmin - 2.1, 1e-9);
    EXPECT_NEAR(ok.max_eig, lmax - 2.1, 1e-9);
    EXPECT_EQ(ok.definiteness, Definiteness::PositiveDefinite);

    const NaiveDualDiagnosis bad = naive_dual_curvature(params(0.0, 10.0), r1(), r1().zeros());
    EXPECT_NEAR(bad.min_eig, lmin - 20.1, 1e-9);
    EXPECT_EQ(bad.definiteness, Definiteness::Indefinite);

    // Cancel the smallest eigenvalue exactly with eps = 0: 2 alpha (u^2 - beta) = -lmin.
    ModelParams p = params(0.0);
    p.eps = 1e-300;
    p.beta = lmin / 2.0;
    EXPECT_EQ(naive_dual_curvature(p, r1(), r1().zeros()).definiteness, Definiteness::Degenerate);
}

TEST(VerifyThm1, ThreeNodeExamples) {
    const Thm1Result r = verify_thm1(params(0.0), r1(), r1().zeros());
    EXPECT_EQ(r.point.classification, Classification::LocalMin);
    EXPECT_TRUE(r.in_bstar);
    EXPECT_LE(r.gap, 1e-12);
    EXPECT_LE(r.dual_grad_norm, 1e-12);
    EXPECT_EQ(r.nested_rows.size(), 5u);
    for (const CurvatureRow& row : r.nested_rows) EXPECT_LE(row.rel_mismatch, 5e-3);
    for (const CurvatureRow& row : r.j8_pp_rows) EXPECT_LE(row.rel_mismatch, 1e-3);

    const ModelParams p = params(0.5);
    const Thm1Result r2 = verify_thm1(p, r1(), newton(p, r1(), r1().zeros(), 1e-13, 50).u0);
    EXPECT_LE(r2.gap, 1e-10);
}

TEST(VerifyThm1, RejectsNonCriticalPoint) {
    try {
        verify_thm1(params(0.5), r1(), r1().constant(1e-2 / std::sqrt(3.0) * 2.0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::PreconditionViolated);
    }
}

TEST(VerifyThm1, LocalMaxUsesSupBranch) {
    const ModelParams p = [] {
        ModelParams q = params(0.0, 40.0);
        q.K = 200.0;
        return q;
    }();
    const Thm1Result r = verify_thm1(p, r1(), r1().zeros());
    EXPECT_EQ(r.point.classification, Classification::LocalMax);
    EXPECT_TRUE(r.in_bstar);
    EXPECT_LE(r.gap, 1e-9 * (1.0 + std::abs(r.J)));
    for (const CurvatureRow& row : r.nested_rows) EXPECT_LE(row.rel_mismatch, 5e-3);
}

TEST(VerifyThm1, OutsideBstarIsReported) {
    ModelParams p = params(0.0, 10.0);
    p.K = 10.0;
    const Thm1Result r = verify_thm1(p, r1(), r1().zeros());
    EXPECT_FALSE(r.in_bstar);
    EXPECT_LT(r.bstar_margin, 0.0);
}
