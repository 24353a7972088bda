#include <gtest/gtest.h>

#include "horocat/dirichlet.hpp"
#include "horocat/presets.hpp"

using namespace horocat;

namespace {

/// Lattice vector over z = x + iy for the binary-form model, as doubles.
Eigen::VectorXd over(double x, double y) {
    Eigen::VectorXd v(3);
    v << (x * x + y * y) / y, x / y, 1 / y;
    return v;
}

} // namespace

TEST(Dirichlet, TrivialGroupHasNoFacets) {
    const GeneratedGroup group(binary_quadratic_form(), {});
    const WordBall ball(group, 3);
    const auto d = dirichlet_domain(group, ball, IntVector{1, 0, 1});
    EXPECT_TRUE(d.facets.empty());
    EXPECT_TRUE(d.certified_locally_finite);
}

TEST(Dirichlet, ModularDomain) {
    const auto preset = make_preset("modular");
    const WordBall ball(preset.group, 8);
    const auto d = dirichlet_domain(preset.group, ball, *preset.basepoint);
    ASSERT_EQ(d.facets.size(), 3u);
    std::vector<std::string> words;
    for (const auto& f : d.facets) {
        words.push_back(f.word);
        EXPECT_TRUE(f.paired_with.has_value());
        EXPECT_TRUE(f.pairing_exact);
    }
    std::sort(words.begin(), words.end());
    EXPECT_EQ(words, (std::vector<std::string>{"S", "T", "t"}));
    EXPECT_TRUE(d.certified_locally_finite);
    EXPECT_EQ(d.ideal_vertices, (std::vector<IntVector>{{1, 0, 0}}));
    EXPECT_EQ(d.finite_vertices, (std::vector<IntVector>{{2, -1, 2}, {2, 1, 2}}));
    // |Re z| <= 1/2 and |z| >= 1.
    EXPECT_TRUE(d.contains(over(0.0, 2.0)));
    EXPECT_TRUE(d.contains(over(0.49, 0.9)));
    EXPECT_TRUE(d.contains(over(-0.3, 50.0)));
    EXPECT_FALSE(d.contains(over(0.51, 2.0)));
    EXPECT_FALSE(d.contains(over(-0.6, 5.0)));
    EXPECT_FALSE(d.contains(over(0.0, 0.99)));
    EXPECT_FALSE(d.contains(over(0.3, 0.9)));
}

TEST(Dirichlet, ModularTiling) {
    const auto preset = make_preset("modular");
    const WordBall ball(preset.group, 8);
    const auto d = dirichlet_domain(preset.group, ball, *preset.basepoint);
    const auto t = check_tiling(preset.group, ball, d, 2.0, 2000, 11);
    EXPECT_TRUE(t.disjoint_interiors);
    EXPECT_TRUE(t.covers);
    EXPECT_EQ(t.pairs_separated, t.pairs_checked);
    EXPECT_GT(t.translates, 3u);
}

TEST(Dirichlet, CyclicLoxodromicIsASlab) {
    const auto preset = make_preset("cyclic-lox");
    const WordBall ball(preset.group, 4);
    const auto d = dirichlet_domain(preset.group, ball, *preset.basepoint);
    ASSERT_EQ(d.facets.size(), 2u);
    EXPECT_EQ(d.facets[0].paired_with, std::optional<std::size_t>(1));
    EXPECT_TRUE(d.certified_locally_finite);
    // Two disjoint walls: no finite vertices; endpoints on the boundary circle are irrational.
    EXPECT_TRUE(d.finite_vertices.empty());
}

TEST(Dirichlet, RejectsFixedBasepoint) {
    const auto preset = make_preset("modular");
    const WordBall ball(preset.group, 4);
    try {
        dirichlet_domain(preset.group, ball, IntVector{1, 0, 1});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::StabilizerNontrivial);
    }
}

TEST(Dirichlet, CoxeterDomainIsTheChamber) {
    for (std::size_t rank : {3u, 4u}) {
        const auto rep = build_rep(rank - 1);
        const auto group = coxeter_group(rep);
        const WordBall ball(group, 3);
        const auto d = dirichlet_domain(group, ball, IntVector(rank, Integer(1)));
        ASSERT_EQ(d.facets.size(), rank);
        const auto chamber = fundamental_chamber(rep);
        std::vector<IntVector> expected = chamber.halfspaces;
        std::vector<IntVector> got;
        for (const auto& f : d.facets) got.push_back(primitive(f.functional));
        std::sort(expected.begin(), expected.end());
        std::sort(got.begin(), got.end());
        EXPECT_EQ(got, expected);
    }
}
