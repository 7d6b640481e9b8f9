#include <gtest/gtest.h>

#include <random>

#include "gldual/linalg.hpp"
#include "gldual/sampling.hpp"
#include "oracles.hpp"

using namespace gldual;

namespace {

Grid r1() { return build_grid({1, 1.0, 3}); }
SymOp lap_r1() { return assemble_neg_laplacian(r1(), 1.0); }

void expect_field_near(const Field& a, const Field& b, double tol) {
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "node " << i;
}

}  // namespace

TEST(Laplacian, StencilExamples) {
    const SymOp L = lap_r1();
    expect_field_near(L.apply(Field{1, 1, 1}), Field{16, 0, 16}, 1e-12);
    expect_field_near(add_diag(L, 8.1).apply(Field{0, 0, 0}), Field{0, 0, 0}, 0.0);
    expect_field_near(add_diag(L, 2.0).apply(Field{0, 1, 0}), Field{-16, 34, -16}, 1e-12);
    const Eigen::MatrixXd d = L.to_dense();
    EXPECT_DOUBLE_EQ(d(0, 0), 32.0);
    EXPECT_DOUBLE_EQ(d(0, 1), -16.0);
    EXPECT_DOUBLE_EQ(d(0, 2), 0.0);
}

TEST(Laplacian, MatchesIndependentAssembly) {
    const Grid g1 = build_grid({1, 2.0, 9});
    EXPECT_LT((assemble_neg_laplacian(g1, 0.3).to_dense() - oracle::laplacian_1d(9, 0.3, 2.0)).norm(), 1e-9);
    const Grid g2 = build_grid({2, 1.0, 5});
    EXPECT_LT((assemble_neg_laplacian(g2, 0.7).to_dense() - oracle::laplacian_2d(5, 0.7)).norm(), 1e-9);
}

TEST(Laplacian, SymmetricOnRandomPairs) {
    const Grid g = build_grid({2, 1.0, 8});
    const SymOp L = assemble_neg_laplacian(g, 0.4);
    Rng rng(3);
    for (int k = 0; k < 100; ++k) {
        const Field a = random_normal_field(g, rng, 1.0);
        const Field b = random_normal_field(g, rng, 1.0);
        const double lhs = inner(g, L.apply(a), b);
        const double rhs = inner(g, a, L.apply(b));
        EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(lhs)));
    }
}

TEST(Laplacian, RejectsNonPositiveGamma) {
    EXPECT_THROW(assemble_neg_laplacian(r1(), 0.0), Error);
}

TEST(AddDiag, Examples) {
    const SymOp L = lap_r1();
    expect_field_near(add_diag(L, 8.1).diagonal_entries(), Field{40.1, 40.1, 40.1}, 1e-12);
    expect_field_near(add_diag(L, Field{1, 2, 3}).diagonal_entries(), Field{33, 34, 35}, 1e-12);
    Rng rng(4);
    for (int k = 0; k < 10; ++k) {
        const Field x = random_normal_field(r1(), rng, 1.0);
        EXPECT_EQ(add_diag(L, 0.0).apply(x), L.apply(x));
    }
}

TEST(SolveSpd, Examples) {
    const SymOp L = lap_r1();
    expect_field_near(solve_spd(add_diag(L, 8.1), Field{0, 0, 0}, 1e-12), Field{0, 0, 0}, 0.0);
    expect_field_near(solve_spd(L, Field{16, 0, 16}, 1e-12), Field{1, 1, 1}, 1e-12);
    try {
        solve_spd(add_diag(L, -40.0), Field{1, 0, 0}, 1e-12);
        FAIL() << "expected NotPositiveDefinite";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotPositiveDefinite);
    }
}

TEST(SolveSpd, RoundTripsOnRandomShifts) {
    const Grid g = build_grid({1, 1.0, 40});
    const SymOp L = assemble_neg_laplacian(g, 0.05);
    Rng rng(5);
    std::uniform_real_distribution<double> shift(0.01, 50.0);
    for (int k = 0; k < 100; ++k) {
        const SymOp a = add_diag(L, random_normal_field(g, rng, 0.1) + g.constant(shift(rng)));
        const Field b = random_normal_field(g, rng, 1.0);
        const Field x = solve_spd(a, b, 1e-12);
        EXPECT_LE((a.apply(x) - b).norm2(), 1e-12 * b.norm2());
    }
}

TEST(SolveSpd, ConjugateGradientPathAgreesWithDense) {
    const Grid g = build_grid({2, 1.0, 12});
    const SymOp a = add_diag(assemble_neg_laplacian(g, 1.0), 3.0);
    Rng rng(6);
    const Field b = random_normal_field(g, rng, 1.0);
    SolveOptions cg;
    cg.dense_threshold = 0;
    const Field x_cg = solve_spd(a, b, 1e-13, cg);
    const Eigen::VectorXd x_dense = a.to_dense().ldlt().solve(to_eigen(b));
    EXPECT_LT((to_eigen(x_cg) - x_dense).norm(), 1e-10 * x_dense.norm());
}

TEST(ConjugateGradient, DetectsIndefinite) {
    try {
        conjugate_gradient(add_diag(lap_r1(), -40.0), Field{1, 1, 1}, 1e-12, 100);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotPositiveDefinite);
    }
}

TEST(Eigen, LaplacianSpectrumMatchesAnalytic) {
    const SymOp L = lap_r1();
    EXPECT_NEAR(min_eig(L), 32.0 - 16.0 * std::sqrt(2.0), 1e-10);
    EXPECT_NEAR(max_eig(L), 32.0 + 16.0 * std::sqrt(2.0), 1e-10);
    EXPECT_NEAR(min_eig(add_diag(L, -2.0)), 7.3726, 1e-4);
    EXPECT_DOUBLE_EQ(min_eig(SymOp::scalar(4, 5.0)), 5.0);
    EXPECT_DOUBLE_EQ(max_eig(SymOp::scalar(4, 5.0)), 5.0);

    const std::vector<double> eigs = oracle::laplacian_1d_eigs(31, 0.05);
    const SymOp L31 = assemble_neg_laplacian(build_grid({1, 1.0, 31}), 0.05);
    EXPECT_NEAR(min_eig(L31), eigs.front(), 1e-9 * eigs.back());
    EXPECT_NEAR(max_eig(L31), eigs.back(), 1e-9 * eigs.back());
}

TEST(Eigen, LanczosAgreesWithAnalyticSpectrum) {
    const int n = 300;
    const SymOp L = assemble_neg_laplacian(build_grid({1, 1.0, n}), 1.0);
    const std::vector<double> eigs = oracle::laplacian_1d_eigs(n, 1.0);
    EigOptions lanczos;
    lanczos.dense_threshold = 0;
    lanczos.max_lanczos_steps = n;
    const Extremes e = extremal_eigs(L, 1e-10, lanczos);
    EXPECT_NEAR(e.max, eigs.back(), 1e-8 * eigs.back());
    EXPECT_NEAR(e.min, eigs.front(), 1e-6 * eigs.back());
}

TEST(Eigen, BracketsRayleighQuotients) {
    const Grid g = build_grid({2, 1.0, 6});
    Rng rng(7);
    const SymOp a = add_diag(assemble_neg_laplacian(g, 0.2), random_normal_field(g, rng, 3.0));
    const Extremes e = extremal_eigs(a);
    for (int k = 0; k < 100; ++k) {
        const Field x = random_normal_field(g, rng, 1.0);
        const double q = dot(a.apply(x), x) / dot(x, x);
        EXPECT_GE(q, e.min - 1e-10 * std::abs(e.max));
        EXPECT_LE(q, e.max + 1e-10 * std::abs(e.max));
    }
}

TEST(MatrixGt, Examples) {
    const SymOp L = lap_r1();
    EXPECT_TRUE(matrix_gt(add_diag(L, 8.1), 5.0));
    EXPECT_FALSE(matrix_gt(SymOp::scalar(3, 1.0), 2.0));
    EXPECT_TRUE(matrix_gt(L, 0.0));
    // The margin makes the inequality strict.
    EXPECT_FALSE(matrix_gt(SymOp::scalar(3, 2.0), 2.0));
}

TEST(MatrixGt, AgreesWithDenseEigensolver) {
    Rng rng(8);
    std::uniform_real_distribution<double> c(-5.0, 60.0);
    for (int n : {3, 17, 64, 200}) {
        const Grid g = build_grid({1, 1.0, n});
        const SymOp a = add_diag(assemble_neg_laplacian(g, 0.01), random_normal_field(g, rng, 5.0));
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.to_dense());
        for (int k = 0; k < 5; ++k) {
            const double cc = c(rng);
            EXPECT_EQ(matrix_gt(a, cc), es.eigenvalues().minCoeff() > cc + kMatrixMargin);
        }
    }
}

TEST(SqrtSpd, Examples) {
    const SymOp r = sqrt_spd(SymOp::scalar(3, 4.0));
    EXPECT_LT((r.to_dense() - 2.0 * Eigen::MatrixXd::Identity(3, 3)).norm(), 1e-12);

    const SymOp L = lap_r1();
    const SymOp s = sqrt_spd(L);
    Rng rng(9);
    for (int k = 0; k < 10; ++k) {
        const Field x = random_normal_field(r1(), rng, 1.0);
        EXPECT_LT((s.apply(s.apply(x)) - L.apply(x)).norm2(), 1e-9 * L.apply(x).norm2());
    }
    try {
        sqrt_spd(SymOp::scalar(3, -1.0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotPositiveSemidefinite);
    }
}
