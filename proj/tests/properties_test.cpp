#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "horocat/presets.hpp"
#include "horocat/properties.hpp"

using namespace horocat;

namespace {

GeneratedGroup single(const QuadraticForm& form, IntMatrix g) { return GeneratedGroup(form, {std::move(g)}); }

QuadraticForm lorentz4() { return QuadraticForm(IntMatrix{{1, 0, 0, 0}, {0, -1, 0, 0}, {0, 0, -1, 0}, {0, 0, 0, -1}}); }

/// Every reduced word of length 1..L in the pair and its inverses.
bool all_reduced_words_nontrivial(const std::array<IntMatrix, 4>& letters, std::size_t max_length) {
    struct Node {
        IntMatrix m;
        std::size_t last;
    };
    std::vector<Node> layer{{IntMatrix::identity(letters[0].rows()), 4}};
    for (std::size_t len = 1; len <= max_length; ++len) {
        std::vector<Node> next;
        for (const auto& node : layer)
            for (std::size_t k = 0; k < 4; ++k) {
                if (node.last < 4 && k == (node.last ^ 1)) continue;
                IntMatrix m = node.m * letters[k];
                if (m.is_identity()) return false;
                next.push_back({std::move(m), k});
            }
        layer = std::move(next);
    }
    return true;
}

std::string key(const IntMatrix& m) {
    std::string out;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out += m(i, j).get_str() + " ";
    return out;
}

} // namespace

TEST(Tits, CyclicLoxodromicIsVirtuallyCyclic) {
    const auto v = tits_classify(make_preset("cyclic-lox").group, 6);
    EXPECT_EQ(v.kind, TitsKind::VirtuallyAbelian);
    EXPECT_EQ(v.rank, 1u);
    ASSERT_EQ(v.witness.size(), 1u);
    EXPECT_EQ(v.witness[0].size(), 1u);
    EXPECT_EQ(v.radius, 6u);
}

TEST(Tits, FiniteGroupsHaveRankZero) {
    EXPECT_EQ(tits_classify(make_preset("torsion6").group, 4).kind, TitsKind::VirtuallyAbelian);
    const auto s = single(binary_quadratic_form(), symmetric_square(0, -1, 1, 0));
    const auto v = tits_classify(s, 4);
    EXPECT_EQ(v.kind, TitsKind::VirtuallyAbelian);
    EXPECT_EQ(v.rank, 0u);
}

TEST(Tits, ParabolicCyclicGroupHasRankOne) {
    const auto v = tits_classify(single(binary_quadratic_form(), symmetric_square(1, 1, 0, 1)), 5);
    EXPECT_EQ(v.kind, TitsKind::VirtuallyAbelian);
    EXPECT_EQ(v.rank, 1u);
}

TEST(Tits, TransverseLoxodromicsContainFreeGroup) {
    const auto preset = make_preset("transverse-lox");
    const auto v = tits_classify(preset.group, 4);
    ASSERT_EQ(v.kind, TitsKind::ContainsFreeGroup);
    ASSERT_TRUE(v.certificate);
    const auto& cert = *v.certificate;
    EXPECT_TRUE(cert.verified);
    EXPECT_LE(cert.first_power, 3u);
    EXPECT_TRUE(cert.fixed_points_checked);
    EXPECT_EQ(cert.words_checked, 200u);
    EXPECT_GT(cert.margin, 0.0);
    ASSERT_EQ(cert.table.size(), 4u);
    for (const auto& row : cert.table) EXPECT_GE(row.checks, 100u);

    // Caps are pairwise disjoint.
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j)
            EXPECT_GT(cert.caps[i].center.angle_to(cert.caps[j].center), cert.caps[i].aperture + cert.caps[j].aperture);

    // Ping-pong implies that no reduced word in the powered pair is trivial.
    const QuadraticForm& form = preset.group.form();
    const IntMatrix a = power(preset.group.evaluate(cert.first), cert.first_power);
    const IntMatrix b = power(preset.group.evaluate(cert.second), cert.second_power);
    EXPECT_TRUE(all_reduced_words_nontrivial({a, isometry_inverse(a, form), b, isometry_inverse(b, form)}, 6));
}

TEST(Tits, ModularContainsFreeGroup) {
    const auto v = tits_classify(make_preset("modular").group, 6);
    EXPECT_EQ(v.kind, TitsKind::ContainsFreeGroup);
}

TEST(PingPong, FreeGeneratorsCertifiedWithoutPowers) {
    const auto free2 = make_preset("free2").group;
    EXPECT_TRUE(certified_free_basis(free2));
    // The images of [[2,1],[1,1]] and [[2,-1],[-1,1]] need squaring first.
    const GeneratedGroup roots(binary_quadratic_form(), {symmetric_square(2, 1, 1, 1), symmetric_square(2, -1, -1, 1)});
    EXPECT_FALSE(certified_free_basis(roots));
}

TEST(PingPong, RejectsSharedFixedPoints) {
    const auto g = make_preset("cyclic-lox").group;
    EXPECT_FALSE(ping_pong_certificate(g, g.element("a"), g.element("aa")));
    const auto m = make_preset("modular").group;
    EXPECT_FALSE(ping_pong_certificate(m, m.element("S"), m.element("T")));
}

TEST(Census, TorsionFreeGroupHasOnlyTrivialClass) {
    const auto c = finite_subgroup_census(make_preset("free2").group, 4);
    EXPECT_EQ(c.torsion_elements, 0u);
    ASSERT_EQ(c.classes.size(), 1u);
    EXPECT_EQ(c.classes[0].order, 1u);
    EXPECT_EQ(c.bound, 1u);
}

TEST(Census, ModularHasOrdersOneTwoThree) {
    const auto modular = make_preset("modular").group;
    const auto c = finite_subgroup_census(modular, 6);
    EXPECT_EQ(c.orders(), (std::vector<std::size_t>{1, 2, 3}));
    EXPECT_EQ(c.classes.size(), 3u);
    EXPECT_EQ(c.bound, 3u);

    // Trace 0 and trace 1 matrices in SL2(Z) have orders 2 and 3 in PSL2(Z).
    const IntMatrix s = symmetric_square(0, -1, 1, 0);
    const IntMatrix st = symmetric_square(0, -1, 1, 1);
    EXPECT_TRUE((s * s).is_identity());
    EXPECT_TRUE((st * st * st).is_identity());
    for (const auto& cls : c.classes) {
        if (cls.order == 1) continue;
        ASSERT_EQ(cls.generators.size(), 1u);
        EXPECT_TRUE(power(modular.evaluate(cls.generators[0]), cls.order).is_identity());
    }
}

TEST(Census, SubgroupsAreClosedAndClassesConjugationStable) {
    const auto modular = make_preset("modular").group;
    const auto c = finite_subgroup_census(modular, 5);
    for (const auto& h : c.subgroups) {
        EXPECT_EQ(h.elements.size(), h.order);
        for (const auto& x : h.elements)
            for (const auto& y : h.elements)
                EXPECT_NE(std::find(h.elements.begin(), h.elements.end(), x * y), h.elements.end());
    }
    // Conjugating by a generator either leaves the list or stays in the same class.
    for (const auto& gen : modular.generators()) {
        const IntMatrix inv = isometry_inverse(gen, modular.form());
        for (const auto& h : c.subgroups) {
            std::set<std::string> conj;
            for (const auto& x : h.elements) conj.insert(key(gen * x * inv));
            for (const auto& k : c.subgroups) {
                std::set<std::string> ks;
                for (const auto& x : k.elements) ks.insert(key(x));
                if (ks == conj) EXPECT_EQ(k.class_id, h.class_id);
            }
        }
    }
}

TEST(Census, ConjugateGroupHasSameCensus) {
    const auto modular = make_preset("modular").group;
    const auto moved = modular.conjugated(symmetric_square(2, 1, 1, 1));
    const auto a = finite_subgroup_census(modular, 5);
    const auto b = finite_subgroup_census(moved, 5);
    EXPECT_EQ(a.classes.size(), b.classes.size());
    EXPECT_EQ(a.orders(), b.orders());
    EXPECT_EQ(a.subgroups.size(), b.subgroups.size());
}

TEST(Census, ParallelScanMatchesSerial) {
    const auto modular = make_preset("modular").group;
    const auto a = finite_subgroup_census(modular, 6, 1);
    const auto b = finite_subgroup_census(modular, 6, 4);
    ASSERT_EQ(a.subgroups.size(), b.subgroups.size());
    for (std::size_t i = 0; i < a.subgroups.size(); ++i) {
        EXPECT_EQ(a.subgroups[i].generators, b.subgroups[i].generators);
        EXPECT_EQ(a.subgroups[i].class_id, b.subgroups[i].class_id);
    }
}

TEST(Burnside, CommutingEllipticsCloseAtSix) {
    const auto r = burnside_check(make_preset("torsion6").group, 3, 40, 5);
    EXPECT_TRUE(r.passes);
    EXPECT_EQ(r.max_closure, 6u);
    EXPECT_EQ(r.finite_closures, 40u);
}

TEST(Burnside, EmptyTorsionSetPasses) {
    const auto r = burnside_check(make_preset("free2").group, 3, 40);
    EXPECT_TRUE(r.passes);
    EXPECT_EQ(r.torsion_elements, 0u);
    EXPECT_TRUE(r.trials.empty());
}

TEST(Burnside, OrderFourRotation) {
    const auto g = single(lorentz4(), IntMatrix{{1, 0, 0, 0}, {0, 0, -1, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}});
    const auto r = burnside_check(g, 4, 20);
    EXPECT_TRUE(r.passes);
    EXPECT_EQ(r.max_closure, 4u);
}

TEST(Burnside, ModularInvolutionPairsAreNotTorsion) {
    const auto r = burnside_check(make_preset("modular").group, 5, 60, 2);
    EXPECT_TRUE(r.passes);
    EXPECT_LE(r.max_closure, 3u);
    EXPECT_GT(r.not_torsion, 0u);
}

TEST(Distortion, FreeGeneratorHasRatioOne) {
    const auto preset = make_preset("free2");
    const auto x = preset.group.frame().point(to_rational(*preset.basepoint));
    const auto p = distortion_profile(preset.group, "a", 12, x);
    EXPECT_TRUE(p.free_basis);
    ASSERT_EQ(p.entries.size(), 12u);
    for (const auto& e : p.entries) EXPECT_EQ(e.length, e.n);
    EXPECT_TRUE(p.passes());
}

TEST(Distortion, ProductOfGeneratorsHasRatioTwo) {
    const auto preset = make_preset("free2");
    const auto x = preset.group.frame().point(to_rational(*preset.basepoint));
    const auto p = distortion_profile(preset.group, "ab", 10, x);
    for (const auto& e : p.entries) EXPECT_DOUBLE_EQ(e.ratio, 2.0);
    EXPECT_GT(p.lower_bound, 0.0);
    EXPECT_TRUE(p.passes());
}

TEST(Distortion, BallLengthsAgreeWithFreeReduction) {
    const auto preset = make_preset("free2");
    const auto x = preset.group.frame().point(to_rational(*preset.basepoint));
    DistortionOptions ball_only;
    ball_only.try_free_basis = false;
    const auto a = distortion_profile(preset.group, "aB", 3, x);
    const auto b = distortion_profile(preset.group, "aB", 3, x, ball_only);
    EXPECT_FALSE(b.free_basis);
    ASSERT_EQ(a.entries.size(), b.entries.size());
    for (std::size_t i = 0; i < a.entries.size(); ++i) EXPECT_EQ(a.entries[i].length, b.entries[i].length);
}

TEST(Distortion, IdentityIsFlagged) {
    const auto preset = make_preset("free2");
    const auto x = preset.group.frame().point(to_rational(*preset.basepoint));
    const auto p = distortion_profile(preset.group, "aA", 5, x);
    EXPECT_FALSE(p.infinite_order);
    for (const auto& e : p.entries) EXPECT_EQ(e.length, 0u);
}

TEST(Distortion, BudgetTruncatesProfile) {
    const auto preset = make_preset("free2");
    const auto x = preset.group.frame().point(to_rational(*preset.basepoint));
    DistortionOptions o;
    o.try_free_basis = false;
    o.element_cap = 200;
    const auto p = distortion_profile(preset.group, "ab", 10, x, o);
    EXPECT_TRUE(p.truncated);
    EXPECT_LT(p.entries.size(), 10u);
}

TEST(Additivity, GoldenPowerMatches) {
    const auto g = make_preset("cyclic-lox").group;
    const auto r = translation_additivity_check(g, g.element("a"), 5);
    const double golden = (3 + std::sqrt(5.0)) / 2;
    EXPECT_NEAR(r.translation_length, 2 * std::log(golden), 1e-10);
    EXPECT_TRUE(r.exact);
    EXPECT_NEAR(r.entries[4].spectral, 5 * 2 * std::log(golden), 1e-10);
    EXPECT_NEAR(r.entries[4].min_displacement, 5 * 2 * std::log(golden), 1e-6);
    EXPECT_TRUE(r.passes());
}

TEST(Additivity, HoldsToTwentyPowers) {
    const auto g = make_preset("free2").group;
    const auto r = translation_additivity_check(g, g.element("aB"), 20);
    EXPECT_TRUE(r.exact);
    EXPECT_LE(r.max_error, 1e-6);
}

TEST(Additivity, RejectsNonLoxodromic) {
    const auto m = make_preset("modular").group;
    try {
        translation_additivity_check(m, m.element("T"), 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotLoxodromic);
    }
}

TEST(Additivity, ConjugationInvariant) {
    const auto g = make_preset("cyclic-lox").group;
    const auto h = g.conjugated(symmetric_square(1, 1, 0, 1));
    const auto a = translation_additivity_check(g, g.element("a"), 6);
    const auto b = translation_additivity_check(h, h.element("a"), 6);
    EXPECT_EQ(a.exact, b.exact);
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        EXPECT_NEAR(a.entries[i].spectral, b.entries[i].spectral, 1e-12);
        EXPECT_NEAR(a.entries[i].min_displacement, b.entries[i].min_displacement, 1e-6);
    }
}
