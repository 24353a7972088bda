#include <gtest/gtest.h>

#include <random>

#include "horocat/forms.hpp"
#include "test_support.hpp"

using namespace horocat;

TEST(Signature, Diagonal) {
    EXPECT_EQ(signature(IntMatrix{{1, 0, 0}, {0, -1, 0}, {0, 0, -1}}), (Signature{1, 0, 2}));
    EXPECT_EQ(signature(IntMatrix::identity(3)), (Signature{3, 0, 0}));
}

TEST(Signature, UniversalCoxeterGram) {
    // 2I - J has eigenvalue 2 - 4 once and 2 three times.
    IntMatrix g(4, 4, Integer(-1));
    for (int i = 0; i < 4; ++i) g(i, i) = 1;
    EXPECT_EQ(signature(g), (Signature{3, 0, 1}));
    QuadraticForm form(g);
    EXPECT_TRUE(form.negated());
    EXPECT_EQ(signature(form.gram()), (Signature{1, 0, 3}));
}

TEST(Signature, ZeroDiagonalNeedsCongruence) {
    EXPECT_EQ(signature(IntMatrix{{0, 0, 1}, {0, -2, 0}, {1, 0, 0}}), (Signature{1, 0, 2}));
    EXPECT_EQ(signature(IntMatrix{{0, 1}, {1, 0}}), (Signature{1, 0, 1}));
    EXPECT_EQ(signature(IntMatrix{{1, -1}, {-1, 1}}), (Signature{1, 1, 0}));
}

TEST(Signature, RejectsNonSymmetric) {
    try {
        signature(IntMatrix{{1, 2}, {0, 1}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NonSymmetric);
    }
}

TEST(Signature, CongruenceInvariance) {
    std::mt19937_64 rng(7);
    const IntMatrix q{{1, 0, 0, 0}, {0, -1, 0, 0}, {0, 0, -1, 0}, {0, 0, 0, -3}};
    for (int trial = 0; trial < 50; ++trial) {
        const IntMatrix p = test::random_unimodular(4, rng);
        EXPECT_EQ(signature(p.transpose() * q * p), (Signature{1, 0, 3}));
    }
}

TEST(QuadraticFormTest, RejectsWrongSignature) {
    EXPECT_THROW(QuadraticForm(IntMatrix::identity(3)), Error);
    EXPECT_THROW(QuadraticForm(IntMatrix{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, -1, 0}, {0, 0, 0, -1}}), Error);
    EXPECT_THROW(QuadraticForm(IntMatrix{{1, 0, 0}, {0, -1, 0}, {0, 0, 0}}), Error);
}

TEST(QuadraticFormTest, NegatedOnIngestion) {
    QuadraticForm form(IntMatrix{{-1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    EXPECT_TRUE(form.negated());
    EXPECT_EQ(form.gram(), (IntMatrix{{1, 0, 0}, {0, -1, 0}, {0, 0, -1}}));
    EXPECT_GT(form.q(form.witness()), 0);
}

TEST(InnerProduct, Examples) {
    QuadraticForm form(IntMatrix{{1, 0, 0}, {0, -1, 0}, {0, 0, -1}});
    const RatVector e0{1, 0, 0};
    const RatVector e1{0, 1, 0};
    EXPECT_EQ(inner_product(e0, e0, form), 1);
    EXPECT_EQ(inner_product(e1, e1, form), -1);
    EXPECT_EQ(inner_product(e0, RatVector{3, 2, 2}, form), 3);
    EXPECT_THROW(inner_product(e0, RatVector{1, 0}, form), Error);
}

TEST(IsIsometry, Examples) {
    QuadraticForm form(IntMatrix{{1, 0, 0}, {0, -1, 0}, {0, 0, -1}});
    EXPECT_TRUE(is_isometry(IntMatrix::identity(3), form));
    EXPECT_TRUE(is_isometry(IntMatrix{{1, 0, 0}, {0, -1, 0}, {0, 0, 1}}, form));
    // Swaps the sheets.
    EXPECT_FALSE(is_isometry(IntMatrix{{-1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, form));
    EXPECT_FALSE(is_isometry(IntMatrix{{2, 0, 0}, {0, 1, 0}, {0, 0, 1}}, form));
    EXPECT_THROW(is_isometry(IntMatrix::identity(2), form), Error);
}

TEST(IsIsometry, SymmetricSquareOfHyperbolicMatrix) {
    QuadraticForm form = test::binary_forms();
    const IntMatrix g = test::induced_action(2, 1, 1, 1);
    EXPECT_EQ(g, (IntMatrix{{4, 4, 1}, {2, 3, 1}, {1, 2, 1}}));
    EXPECT_TRUE(is_isometry(g, form));
    EXPECT_EQ(isometry_inverse(g, form) * g, IntMatrix::identity(3));
}

TEST(IsIsometry, PreservesInnerProductsAndComposes) {
    QuadraticForm form = test::binary_forms();
    std::mt19937_64 rng(11);
    const std::vector<IntMatrix> gens{test::induced_action(2, 1, 1, 1), test::induced_action(1, 1, 0, 1),
                                      test::induced_action(0, -1, 1, 0)};
    std::uniform_int_distribution<int> pick(0, 2);
    std::uniform_int_distribution<int> coord(-9, 9);
    for (int trial = 0; trial < 100; ++trial) {
        IntMatrix g = IntMatrix::identity(3);
        for (int k = 0; k < 5; ++k) g = g * gens[pick(rng)];
        ASSERT_TRUE(is_isometry(g, form));
        RatVector u{coord(rng), coord(rng), coord(rng)};
        RatVector v{coord(rng), coord(rng), coord(rng)};
        const RatMatrix gq = to_rational(g);
        EXPECT_EQ(form.inner(gq * u, gq * v), form.inner(u, v));
    }
}

TEST(Cone, Membership) {
    QuadraticForm form(IntMatrix{{1, 0, 0}, {0, -1, 0}, {0, 0, -1}});
    const auto full = RationalCone::full();
    EXPECT_TRUE(cone_contains(full, RatVector{1, 0, 0}, form));
    EXPECT_FALSE(cone_contains(full, RatVector{0, 1, 0}, form));
    const auto cone = RationalCone::from_functionals({RatVector{1, 0, 0}, RatVector{1, -1, 0}});
    EXPECT_TRUE(cone_contains(cone, RatVector{2, 1, 0}, form));
    EXPECT_FALSE(cone_contains(cone, RatVector{1, 2, 0}, form));
    const auto fractional = RationalCone::from_functionals({RatVector{Rational(1, 2), Rational(-1, 3), 0}});
    EXPECT_EQ(fractional.halfspaces.front(), (IntVector{3, -2, 0}));
}

TEST(ParseRational, Forms) {
    EXPECT_EQ(parse_rational("3/6"), Rational(1, 2));
    EXPECT_EQ(parse_rational("-7"), Rational(-7));
    EXPECT_THROW(parse_rational("1/0"), Error);
    EXPECT_THROW(parse_rational("abc"), Error);
}
