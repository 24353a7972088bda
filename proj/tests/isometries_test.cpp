#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "horocat/isometries.hpp"
#include "test_support.hpp"

using namespace horocat;

namespace {

const double kGoldenLog = std::log((3.0 + std::sqrt(5.0)) / 2.0);

FormIsometry sym2(long a, long b, long c, long d) {
    return FormIsometry::make(test::induced_action(a, b, c, d), test::binary_forms());
}

struct Sl2 {
    long a, b, c, d;
    Sl2 operator*(const Sl2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
};

ModelPoint random_point(std::mt19937_64& rng, double radius) {
    std::uniform_real_distribution<double> angle(0.0, 2 * M_PI);
    std::uniform_real_distribution<double> r(0.0, radius);
    const double t = angle(rng);
    const double s = r(rng);
    Eigen::VectorXd x(3);
    x << std::cosh(s), std::sinh(s) * std::cos(t), std::sinh(s) * std::sin(t);
    return hyperboloid_point(x);
}

} // namespace

TEST(Classify, Identity) {
    const auto c = classify(FormIsometry{IntMatrix::identity(3), ""}, test::binary_forms());
    EXPECT_EQ(c.kind, IsometryClass::Elliptic);
    EXPECT_EQ(c.order, 1u);
    const auto tl = translation_length(c);
    EXPECT_EQ(tl.value, 0.0);
    EXPECT_TRUE(tl.attained);
}

TEST(Classify, UnipotentIsParabolic) {
    const auto form = test::binary_forms();
    const auto c = classify(sym2(1, 1, 0, 1), form);
    EXPECT_EQ(c.kind, IsometryClass::Parabolic);
    ASSERT_EQ(c.fixed_boundary.size(), 1u);
    ASSERT_TRUE(c.fixed_boundary[0].exact.has_value());
    // The cusp at infinity is the form x^2, coordinates (1, 0, 0).
    EXPECT_EQ(*c.fixed_boundary[0].exact, (IntVector{1, 0, 0}));
    EXPECT_FALSE(translation_length(c).attained);
    // Displacement is positive everywhere but tends to 0 along the orbit of the cusp.
    const Frame frame(form);
    double last = 1e9;
    for (int k = 1; k <= 6; ++k) {
        const ModelPoint p = frame.point(upper_half_plane_point(Rational(0), Rational(1UL << k)));
        const double d = displacement(c.base, frame, p);
        EXPECT_GT(d, 0.0);
        EXPECT_LT(d, last);
        last = d;
    }
    EXPECT_LT(last, 0.02);
}

TEST(Classify, HyperbolicMatrixIsLoxodromic) {
    const auto form = test::binary_forms();
    const auto c = classify(sym2(2, 1, 1, 1), form);
    ASSERT_EQ(c.kind, IsometryClass::Loxodromic);
    EXPECT_NEAR(translation_length(c).value, 2 * kGoldenLog, 1e-12);
    EXPECT_NEAR(translation_length(c).value, 1.9248, 1e-4);
    EXPECT_LE(c.spectral_radius.lo.get_d(), std::exp(2 * kGoldenLog));
    EXPECT_GE(c.spectral_radius.hi.get_d(), std::exp(2 * kGoldenLog));
    EXPECT_EQ(c.fixed_boundary.size(), 2u);
}

TEST(Classify, FixedPointsAreProjectivizedEigenvectors) {
    // Fixed points of z -> (2z + 1)/(z + 1) are (1 +- sqrt5)/2 on the real line.
    const auto form = test::binary_forms();
    const Frame frame(form);
    const auto c = classify(sym2(2, 1, 1, 1), form);
    for (double x : {(1 + std::sqrt(5.0)) / 2, (1 - std::sqrt(5.0)) / 2}) {
        Eigen::VectorXd lattice(3);
        lattice << x * x, x, 1.0;  // the degenerate form (X - xY)^2
        const auto expected = BoundaryPoint::from_null(frame.to_standard(lattice));
        const double gap = std::min(expected.angle_to(c.fixed_boundary[0]), expected.angle_to(c.fixed_boundary[1]));
        EXPECT_LT(gap, 1e-9);
    }
    // The attractive point is the larger root for the expanding direction.
    Eigen::VectorXd attr(3);
    const double phi = (1 + std::sqrt(5.0)) / 2;
    attr << phi * phi, phi, 1.0;
    EXPECT_LT(BoundaryPoint::from_null(frame.to_standard(attr)).angle_to(c.fixed_boundary[0]), 1e-9);
}

TEST(Classify, EllipticOrders) {
    const auto form = test::binary_forms();
    const auto s = classify(sym2(0, -1, 1, 0), form);
    EXPECT_EQ(s.kind, IsometryClass::Elliptic);
    EXPECT_EQ(s.order, 2u);
    EXPECT_EQ(*s.fixed_interior, (IntVector{1, 0, 1}));
    const auto st = classify(sym2(0, -1, 1, 1), form);
    EXPECT_EQ(st.kind, IsometryClass::Elliptic);
    EXPECT_EQ(st.order, 3u);
    // z -> -1/(z + 1) fixes the corner (-1 + i sqrt3)/2, lattice direction (1, -1/2, 1).
    EXPECT_EQ(*st.fixed_interior, (IntVector{2, -1, 2}));
}

TEST(Classify, RejectsNonIsometry) {
    try {
        classify(FormIsometry{IntMatrix{{2, 0, 0}, {0, 1, 0}, {0, 0, 1}}, ""}, test::binary_forms());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotAnIsometry);
    }
}

TEST(Classify, AgreesWithTraceOracle) {
    const auto form = test::binary_forms();
    const std::vector<Sl2> gens{{1, 1, 0, 1}, {1, -1, 0, 1}, {0, -1, 1, 0}, {1, 0, 2, 1}, {1, 0, -2, 1}};
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(gens.size()) - 1);
    std::uniform_int_distribution<int> len(1, 7);
    for (int trial = 0; trial < 300; ++trial) {
        Sl2 g{1, 0, 0, 1};
        const int n = len(rng);
        for (int k = 0; k < n; ++k) g = g * gens[pick(rng)];
        const long tr = std::abs(g.a + g.d);
        const bool identity = g.b == 0 && g.c == 0 && std::abs(g.a) == 1;
        IsometryClass expected = tr > 2 ? IsometryClass::Loxodromic
                                 : tr < 2 || identity ? IsometryClass::Elliptic
                                                      : IsometryClass::Parabolic;
        const auto c = classify(sym2(g.a, g.b, g.c, g.d), form);
        EXPECT_EQ(c.kind, expected) << g.a << " " << g.b << " " << g.c << " " << g.d;
        if (expected == IsometryClass::Loxodromic) {
            const double t = static_cast<double>(tr);
            EXPECT_NEAR(translation_length(c).value, 2 * std::acosh(t / 2), 1e-9);
        }
    }
}

TEST(Classify, ConjugationInvariance) {
    const auto form = test::binary_forms();
    const IntMatrix g = test::induced_action(2, 1, 1, 1);
    const IntMatrix h = test::induced_action(3, 2, 1, 1);
    const IntMatrix conj = h * g * isometry_inverse(h, form);
    const auto a = classify(FormIsometry{g, ""}, form);
    const auto b = classify(FormIsometry{conj, ""}, form);
    EXPECT_EQ(a.kind, b.kind);
    EXPECT_EQ(a.charpoly, b.charpoly);
    EXPECT_EQ(a.spectral_radius.lo, b.spectral_radius.lo);
    EXPECT_EQ(a.spectral_radius.hi, b.spectral_radius.hi);
}

TEST(Classify, HigherDimensionalParabolic) {
    // Unipotent isometry of x0^2 - x1^2 - x2^2 - x3^2 in light-cone coordinates.
    const QuadraticForm form(IntMatrix{{0, 1, 0, 0}, {1, 0, 0, 0}, {0, 0, -1, 0}, {0, 0, 0, -1}}, RatVector{1, 1, 0, 0});
    // Translation by u = (2, 0): (x0, x1, y) -> (x0 + u.y + |u|^2 x1 / 2, x1, y + x1 u).
    const IntMatrix g{{1, 2, 2, 0}, {0, 1, 0, 0}, {0, 2, 1, 0}, {0, 0, 0, 1}};
    ASSERT_TRUE(is_isometry(g, form));
    const auto c = classify(FormIsometry{g, ""}, form);
    EXPECT_EQ(c.kind, IsometryClass::Parabolic);
    EXPECT_EQ(*c.fixed_boundary[0].exact, (IntVector{1, 0, 0, 0}));
}

TEST(Displacement, AxisAndLowerBound) {
    const auto form = test::binary_forms();
    const Frame frame(form);
    const auto c = classify(sym2(2, 1, 1, 1), form);
    const double len = translation_length(c).value;
    for (int k = -10; k < 10; ++k) {
        const ModelPoint p = axis_point(c, 0.37 * k);
        EXPECT_NEAR(displacement(c.base, frame, p), len, 1e-8);
        const ModelPoint image = apply(frame.to_standard(c.base.matrix), p);
        EXPECT_LT(dist(image, axis_point(c, 0.37 * k + len)), 1e-8);
    }
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) EXPECT_GE(displacement(c.base, frame, random_point(rng, 4.0)), len - 1e-9);
    EXPECT_NEAR(displacement(FormIsometry{IntMatrix::identity(3), ""}, frame, random_point(rng, 2.0)), 0.0, 1e-14);
}

TEST(Displacement, AxisRequiresLoxodromic) {
    const auto c = classify(sym2(1, 1, 0, 1), test::binary_forms());
    EXPECT_THROW(axis_point(c, 0.0), Error);
}

TEST(Displacement, AttractivePointAbsorbsOrbits) {
    const auto form = test::binary_forms();
    const Frame frame(form);
    const auto c = classify(sym2(2, 1, 1, 1), form);
    const Eigen::MatrixXd g = frame.to_standard(c.base.matrix);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) {
        Eigen::VectorXd x = to_hyperboloid_coords(random_point(rng, 3.0));
        for (int k = 0; k < 12; ++k) x = g * x / (g * x)(0);
        EXPECT_LT(BoundaryPoint::from_null(x).angle_to(c.fixed_boundary[0]), 1e-6);
    }
}

TEST(Displacement, NumericalMinimumMatchesSpectralRadius) {
    const auto form = test::binary_forms();
    const Frame frame(form);
    for (const auto& g : {sym2(2, 1, 1, 1), sym2(3, 2, 1, 1), sym2(1, 2, 2, 5)}) {
        const auto c = classify(g, form);
        const auto m = minimize_displacement(g, frame, frame.origin());
        EXPECT_NEAR(m.value, translation_length(c).value, 1e-6);
    }
}

TEST(Displacement, PowersAreAdditive) {
    const auto form = test::binary_forms();
    const auto g = sym2(2, 1, 1, 1);
    const double len = translation_length(classify(g, form)).value;
    for (unsigned n = 1; n <= 20; ++n) {
        const auto c = classify(FormIsometry{power(g.matrix, n), ""}, form);
        EXPECT_NEAR(translation_length(c).value, n * len, 1e-8 * n);
    }
}

TEST(SymmetricSquare, MatchesIndependentConstruction) {
    EXPECT_EQ(symmetric_square(2, 1, 1, 1), test::induced_action(2, 1, 1, 1));
    EXPECT_EQ(symmetric_square(0, -1, 1, 1), test::induced_action(0, -1, 1, 1));
    EXPECT_THROW(symmetric_square(2, 0, 0, 2), Error);
}
