#include <gtest/gtest.h>

#include <random>

#include "gldual/grid.hpp"
#include "oracles.hpp"

using namespace gldual;

namespace {

Grid r1() { return build_grid({1, 1.0, 3}); }

}  // namespace

TEST(Grid, BuildOneDimensional) {
    const Grid g = r1();
    EXPECT_DOUBLE_EQ(g.spacing(), 0.25);
    EXPECT_EQ(g.node_count(), 3u);
    EXPECT_DOUBLE_EQ(g.quadrature_weight(), 0.25);
    EXPECT_DOUBLE_EQ(g.coordinate(0, 0), 0.25);
    EXPECT_DOUBLE_EQ(g.coordinate(2, 0), 0.75);
}

TEST(Grid, BuildTwoDimensional) {
    const Grid g = build_grid({2, 1.0, 3});
    EXPECT_DOUBLE_EQ(g.spacing(), 0.25);
    EXPECT_EQ(g.node_count(), 9u);
    EXPECT_DOUBLE_EQ(g.quadrature_weight(), 0.0625);
    // axis 0 varies fastest
    EXPECT_EQ(g.axis_position(4, 0), 1u);
    EXPECT_EQ(g.axis_position(5, 1), 1u);
    EXPECT_EQ(g.stride(1), 3u);
}

TEST(Grid, RejectsBadSpecs) {
    EXPECT_THROW(build_grid({1, 1.0, 0}), Error);
    EXPECT_THROW(build_grid({4, 1.0, 3}), Error);
    EXPECT_THROW(build_grid({1, -1.0, 3}), Error);
}

TEST(Grid, CheckRejectsWrongSize) {
    try {
        r1().check(Field(4));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
    }
}

TEST(Quadrature, Integrate) {
    const Grid g = r1();
    EXPECT_DOUBLE_EQ(integrate(g, Field{1, 1, 1}), 0.75);
    EXPECT_DOUBLE_EQ(integrate(g, Field{0, 0, 0}), 0.0);
    EXPECT_DOUBLE_EQ(integrate(g, Field{2, -1, 3}), 1.0);
}

TEST(Quadrature, Inner) {
    const Grid g = r1();
    EXPECT_DOUBLE_EQ(inner(g, Field{1, 1, 1}, Field{1, 1, 1}), 0.75);
    EXPECT_DOUBLE_EQ(inner(g, Field{1, 0, 0}, Field{0, 1, 0}), 0.0);
    EXPECT_DOUBLE_EQ(inner(g, Field{2, 2, 2}, Field{1, 1, 1}), 1.5);
    EXPECT_DOUBLE_EQ(l2_norm(g, Field{2, 2, 2}), std::sqrt(3.0));
}

TEST(Quadrature, LinearAndSymmetricOnRandomFields) {
    const Grid g = build_grid({2, 1.0, 7});
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> small(-8, 8);
    for (int k = 0; k < 50; ++k) {
        // Dyadic values keep every sum exact, so linearity must hold bit for bit.
        Field a(g.node_count()), b(g.node_count());
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = small(rng) / 4.0;
            b[i] = small(rng) / 8.0;
        }
        EXPECT_EQ(integrate(g, a + b), integrate(g, a) + integrate(g, b));
        EXPECT_EQ(inner(g, a, b), inner(g, b, a));
    }
}

TEST(W1Inf, Examples) {
    const Grid g = r1();
    EXPECT_DOUBLE_EQ(w1inf_norm(g, Field{0, 0, 0}), 0.0);
    EXPECT_DOUBLE_EQ(w1inf_norm(g, Field{1, 1, 1}), 4.0);
    EXPECT_DOUBLE_EQ(w1inf_norm(g, Field{0.5, 0.25, 0}), 2.0);
}

TEST(W1Inf, CountsBothBoundaries) {
    // Only the right ghost edge is steep.
    EXPECT_DOUBLE_EQ(w1inf_norm(r1(), Field{0, 0, 0.5}), 2.0);
    // Value term dominates when the field is flat and small.
    const Grid wide = build_grid({1, 100.0, 3});
    EXPECT_DOUBLE_EQ(w1inf_norm(wide, Field{1, 1, 1}), 1.0);
}

TEST(FieldOps, Arithmetic) {
    Field a{1, 2, 3};
    const Field b{0.5, 0.5, 0.5};
    EXPECT_EQ(a + b, (Field{1.5, 2.5, 3.5}));
    EXPECT_EQ(a - b, (Field{0.5, 1.5, 2.5}));
    EXPECT_EQ(2.0 * a, (Field{2, 4, 6}));
    EXPECT_EQ(hadamard(a, a), (Field{1, 4, 9}));
    EXPECT_DOUBLE_EQ(dot(a, b), 3.0);
    EXPECT_DOUBLE_EQ(a.norm_inf(), 3.0);
    a[1] = std::nan("");
    EXPECT_FALSE(a.all_finite());
    EXPECT_THROW(Field{1.0} + Field(2), Error);
}
