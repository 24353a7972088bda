#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "horocat/presets.hpp"
#include "horocat/truncation.hpp"

using namespace horocat;

namespace {

struct ModularSetup {
    Preset preset = make_preset("modular");
    WordBall ball{preset.group, 8};
    DirichletDomain domain = dirichlet_domain(preset.group, ball, *preset.basepoint);
    std::vector<CuspOrbit> cusps = detect_cusps(preset.group, ball, domain);
};

const ModularSetup& modular() {
    static const ModularSetup setup;
    return setup;
}

/// Standard coordinates of z = x + iy in the binary-form model.
Eigen::VectorXd upper(const Frame& frame, double x, double y) {
    Eigen::VectorXd lat(3);
    lat << (x * x + y * y) / y, x / y, 1 / y;
    return normalize_timelike(frame.to_standard(lat));
}

Horoball horoball_at_infinity(double height) {
    Horoball b;
    Eigen::VectorXd d(3);
    d << 1, 0, 1;
    b.base = BoundaryPoint::from_null(d);
    b.alpha = 1.0 / height;
    b.level = height;
    return b;
}

Eigen::VectorXd halfspace(double u, double t) {
    Eigen::VectorXd p(2);
    p << u, t;
    return to_hyperboloid_coords({Model::HalfSpace, p});
}

} // namespace

TEST(Cusps, ModularHasOneFullRankCusp) {
    const auto& m = modular();
    ASSERT_EQ(m.cusps.size(), 1u);
    EXPECT_EQ(m.cusps[0].rank, 1u);
    EXPECT_TRUE(m.cusps[0].full_rank);
    EXPECT_EQ(m.cusps[0].representative, (IntVector{1, 0, 0}));
    // Every ideal vertex of the domain is parabolic-fixed and ball-equivalent to the cusp.
    std::size_t members = 0;
    for (const auto& c : m.cusps) members += c.members.size();
    EXPECT_EQ(members, m.domain.ideal_vertices.size());
}

TEST(Cusps, LoxodromicGroupHasNone) {
    const auto preset = make_preset("cyclic-lox");
    const WordBall ball(preset.group, 4);
    const auto d = dirichlet_domain(preset.group, ball, *preset.basepoint);
    EXPECT_TRUE(detect_cusps(preset.group, ball, d).empty());
}

TEST(Cusps, ParabolicPairHasTwoOrbits) {
    const auto preset = make_preset("parabolic-pair");
    const WordBall ball(preset.group, 4);
    const auto d = dirichlet_domain(preset.group, ball, *preset.basepoint);
    const auto cusps = detect_cusps(preset.group, ball, d);
    ASSERT_EQ(cusps.size(), 2u);
    for (const auto& c : cusps) EXPECT_EQ(c.rank, 1u);
}

TEST(Family, ModularCriticalLevelIsOne) {
    const auto& m = modular();
    const auto family = build_horoball_family(m.preset.group, m.ball, m.cusps);
    EXPECT_NEAR(family.critical_level, 1.0, 1e-12);
    EXPECT_GT(family.level, 1.0);
    EXPECT_LE(family.level, 1.0 + 1.1e-6);
    EXPECT_TRUE(family.disjoint_certified);
    EXPECT_TRUE(family.equivariant);
    EXPECT_GT(family.translates.size(), 10u);
    // Ford circles: the translate at p/q is the disc of diameter 1/(q^2 h) tangent at p/q.
    const Frame& frame = m.preset.group.frame();
    for (const auto& b : family.translates) {
        const Integer& a = b.null[0];
        const Integer& c = b.null[2];
        if (c == 0) {
            EXPECT_NEAR(b.value(upper(frame, 0.3, family.level)) / b.alpha, 1.0, 1e-9);
            continue;
        }
        // null = (p^2, pq, q^2) up to sign conventions of the model.
        const double q2 = c.get_d();
        const double x = b.null[1].get_d() / q2;
        EXPECT_NEAR(a.get_d() * q2, b.null[1].get_d() * b.null[1].get_d(), 1e-9);
        const double top = 1.0 / (q2 * family.level);
        EXPECT_NEAR(b.value(upper(frame, x, top)) / b.alpha, 1.0, 1e-9);
    }
}

TEST(Family, ShrinkingPreservesCertificates) {
    const auto& m = modular();
    const auto family = build_horoball_family(m.preset.group, m.ball, m.cusps);
    const auto shrunk = rescale_family(m.preset.group.form(), m.preset.group.frame(), family, Rational(3, 2));
    EXPECT_TRUE(shrunk.disjoint_certified);
    EXPECT_NEAR(shrunk.level, 1.5 * family.level, 1e-12);
    EXPECT_THROW(rescale_family(m.preset.group.form(), m.preset.group.frame(), family, Rational(1, 2)), Error);
}

TEST(Family, AntipodalPointsInHull) {
    const auto& m = modular();
    const KleinHull hull = limit_hull(m.preset.group, WordBall(m.preset.group, 6), 5);
    FamilyOptions options;
    options.hull = &hull;
    const auto family = build_horoball_family(m.preset.group, m.ball, m.cusps, options);
    EXPECT_TRUE(family.antipodal_checked);
    EXPECT_TRUE(family.antipodal_in_hull);
    EXPECT_EQ(family.shrinks, 0u);
}

TEST(Family, EmptyAndRankDeficient) {
    const auto& m = modular();
    EXPECT_TRUE(build_horoball_family(m.preset.group, m.ball, {}).translates.empty());
    auto cusps = m.cusps;
    cusps[0].full_rank = false;
    cusps[0].rank = 0;
    try {
        build_horoball_family(m.preset.group, m.ball, cusps);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::RankDeficientCusp);
    }
}

TEST(KleinHullTest, Membership) {
    std::vector<Eigen::VectorXd> square;
    for (double x : {-0.5, 0.5})
        for (double y : {-0.5, 0.5}) square.push_back(Eigen::Vector2d(x, y));
    const KleinHull hull(square);
    EXPECT_TRUE(hull.contains(Eigen::Vector2d(0.0, 0.0)));
    EXPECT_TRUE(hull.contains(Eigen::Vector2d(0.5, -0.2)));
    EXPECT_TRUE(hull.contains(Eigen::Vector2d(-0.49, 0.49)));
    EXPECT_FALSE(hull.contains(Eigen::Vector2d(0.51, 0.0)));
    EXPECT_FALSE(hull.contains(Eigen::Vector2d(-0.3, -0.7)));
}

TEST(Geodesic, UnobstructedIsASingleArc) {
    const TruncatedSpace space(2, {horoball_at_infinity(10.0)});
    const auto x = halfspace(0.0, 1.0), y = halfspace(1.0, 2.0);
    const auto g = space.geodesic(x, y);
    ASSERT_EQ(g.arcs.size(), 1u);
    EXPECT_EQ(g.arcs[0].kind, ArcKind::Hyperbolic);
    EXPECT_NEAR(g.total_length, hyperboloid_distance(x, y), 1e-12);
}

TEST(Geodesic, SymmetricHorospherePoints) {
    for (double h : {0.5, 1.0, 3.0})
        for (double a : {0.2, 1.0, 4.0}) {
            const TruncatedSpace space(2, {horoball_at_infinity(h)});
            const auto x = halfspace(-a, h), y = halfspace(a, h);
            const auto g = space.geodesic(x, y);
            ASSERT_EQ(g.arcs.size(), 1u);
            EXPECT_EQ(g.arcs[0].kind, ArcKind::Horospherical);
            EXPECT_NEAR(g.total_length, 2 * a / h, 1e-8);
            EXPECT_GT(g.total_length, hyperboloid_distance(x, y));
            EXPECT_TRUE(space.check(g).ok());
        }
}

TEST(Geodesic, AroundOneHoroball) {
    // Below the horosphere: hyperbolic, horospherical, hyperbolic.
    const TruncatedSpace space(2, {horoball_at_infinity(1.0)});
    const auto x = halfspace(-3.0, 0.5), y = halfspace(2.0, 0.25);
    const auto g = space.geodesic(x, y);
    ASSERT_EQ(g.arcs.size(), 3u);
    EXPECT_EQ(g.arcs[1].kind, ArcKind::Horospherical);
    EXPECT_TRUE(space.check(g).ok());
    // Closed form: tangency points at u = -3 + sqrt(1 - 0.25) and u = 2 - sqrt(1 - 0.0625).
    const double e = -3.0 + std::sqrt(0.75), f = 2.0 - std::sqrt(1 - 0.0625);
    const double expected = hyperboloid_distance(x, halfspace(e, 1.0)) + (f - e) + hyperboloid_distance(halfspace(f, 1.0), y);
    EXPECT_NEAR(g.total_length, expected, 1e-10);
}

TEST(Geodesic, RejectsPointsInsideHoroballs) {
    const TruncatedSpace space(2, {horoball_at_infinity(1.0)});
    try {
        space.geodesic(halfspace(0.0, 2.0), halfspace(1.0, 0.5));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InsideHoroball);
    }
}

TEST(Geodesic, MetricAxiomsOnModularFamily) {
    const auto& m = modular();
    const auto family = build_horoball_family(m.preset.group, m.ball, m.cusps);
    const TruncatedSpace space(family, 2);
    const Frame& frame = m.preset.group.frame();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ux(-2.0, 2.0), uy(0.05, 1.0);
    auto sample = [&] {
        for (;;) {
            const auto p = upper(frame, ux(rng), uy(rng));
            if (!space.inside(p)) return p;
        }
    };
    for (int trial = 0; trial < 40; ++trial) {
        const auto x = sample(), y = sample(), z = sample();
        const auto xy = space.geodesic(x, y), yx = space.geodesic(y, x);
        const auto yz = space.geodesic(y, z), xz = space.geodesic(x, z);
        EXPECT_NEAR(xy.total_length, yx.total_length, 1e-8);
        EXPECT_GE(xy.total_length, xy.ambient_length - 1e-12);
        EXPECT_LE(xz.total_length, xy.total_length + yz.total_length + 2 * (xy.residual + yz.residual) + 1e-9);
        for (const auto* g : {&xy, &yx, &yz, &xz}) {
            const auto inv = space.check(*g);
            EXPECT_TRUE(inv.ok()) << inv.max_penetration;
            EXPECT_TRUE(g->locally_optimal);
        }
    }
}

TEST(Geodesic, Equivariance) {
    const auto& m = modular();
    const auto family = build_horoball_family(m.preset.group, m.ball, m.cusps);
    const TruncatedSpace space(family, 2);
    const Frame& frame = m.preset.group.frame();
    const Eigen::MatrixXd t = frame.to_standard(m.preset.group.evaluate("T"));
    const auto x = upper(frame, 0.5, 0.3), y = upper(frame, -1.5, 0.3);
    const auto g = space.geodesic(x, y);
    const auto h = space.geodesic(normalize_timelike(t * x), normalize_timelike(t * y));
    EXPECT_GT(g.arcs.size(), 1u);
    EXPECT_NEAR(g.total_length, h.total_length, 1e-8);
}

TEST(Cat0, DegenerateAndPureTriangles) {
    const TruncatedSpace empty(2, {});
    const auto x = halfspace(0.0, 1.0), y = halfspace(0.0, 4.0);
    const auto mid = TruncatedSpace::segment_point(x, y, 0.5 * hyperboloid_distance(x, y));
    EXPECT_LE(cat0_check(empty, x, y, mid).max_excess, 1e-6);
    const auto r = cat0_check(empty, x, y, halfspace(2.0, 1.5));
    EXPECT_TRUE(r.pure_hyperbolic);
    EXPECT_LT(r.max_excess, -1e-4);
}

TEST(Cat0, ModularSuite) {
    const auto& m = modular();
    const auto family = build_horoball_family(m.preset.group, m.ball, m.cusps);
    const TruncatedSpace space(family, 2);
    const auto xi = to_hyperboloid_coords(m.preset.group.frame().point(to_rational(*m.preset.basepoint)));
    const auto suite = cat0_suite(space, xi, 4.0, 20, 42);
    EXPECT_TRUE(suite.passes) << suite.worst_margin << " " << suite.subtriangle_max_excess;
    EXPECT_GT(suite.subtriangles, 0u);
    EXPECT_GT(suite.crossing_triangles, 0u);
}

TEST(Compactness, ModularBeforeAndAfterTruncation) {
    const auto& m = modular();
    const KleinHull hull = limit_hull(m.preset.group, WordBall(m.preset.group, 6), 5);
    const auto before = compactness_check(m.preset.group, m.domain, &hull, {});
    EXPECT_TRUE(before.exceeds_threshold);
    EXPECT_FALSE(before.bounded_at_scale);
    const auto family = build_horoball_family(m.preset.group, m.ball, m.cusps);
    const auto after = compactness_check(m.preset.group, m.domain, &hull, family.translates);
    EXPECT_TRUE(after.bounded_at_scale) << after.supremum;
    // The farthest points from 2i are the finite vertices 1/2 + i sqrt(3)/2 and its mirror.
    const Frame& frame = m.preset.group.frame();
    const double corner = hyperboloid_distance(upper(frame, 0.5, std::sqrt(3.0) / 2), upper(frame, 0.0, 2.0));
    EXPECT_NEAR(after.supremum, corner, 1e-2);
}
