#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "horocat/groups.hpp"
#include "horocat/polyhedral.hpp"

namespace horocat {

struct Facet {
    /// Ball index of the element g whose bisector {<x, g xi - xi> >= 0} supports the facet.
    std::size_t element = 0;
    std::string word;
    IntVector functional;
    /// Facet vertices inside the closed positive cone (finite and ideal).
    std::vector<IntVector> vertices;
    std::optional<std::size_t> paired_with;
    bool pairing_exact = false;
};

struct DirichletDomain {
    IntVector basepoint;
    std::size_t radius = 0;
    std::vector<Facet> facets;
    std::vector<IntVector> finite_vertices;
    std::vector<IntVector> ideal_vertices;
    bool certified_locally_finite = false;
    /// Exact cone including the bounding simplex; its section by the positive cone is the domain.
    PolyhedralCone cone;

    /// Membership of a lattice-coordinate point, with tolerance relative to |x|.
    bool contains(const Eigen::VectorXd& lattice, double tol = 1e-9) const {
        for (const auto& f : facets) {
            double v = 0;
            double scale = 0;
            for (std::size_t i = 0; i < f.functional.size(); ++i) {
                v += f.functional[i].get_d() * lattice(static_cast<Eigen::Index>(i));
                scale += std::abs(f.functional[i].get_d() * lattice(static_cast<Eigen::Index>(i)));
            }
            if (v < -tol * std::max(1.0, scale)) return false;
        }
        return true;
    }

    bool contains(const RatVector& x) const {
        for (const auto& f : facets)
            if (dot(f.functional, x) < 0) return false;
        return true;
    }
};

namespace detail {

/// Rays of a simplex in the slice <x, xi> = 1 containing the closed section of the
/// positive cone, as primitive integer vectors.
inline std::vector<IntVector> bounding_simplex(const QuadraticForm& form, const RatVector& xi) {
    const std::size_t dim = form.dim();
    const Rational qxi = form.q(xi);
    std::vector<RatVector> basis{xi};
    std::vector<RatVector> perp;
    for (std::size_t j = 0; j < dim && perp.size() + 1 < dim; ++j) {
        RatVector u(dim, Rational(0));
        u[j] = 1;
        for (const auto& b : basis) {
            const Rational c = form.inner(u, b) / form.q(b);
            for (std::size_t k = 0; k < dim; ++k) u[k] -= c * b[k];
        }
        if (is_zero(u)) continue;
        basis.push_back(u);
        perp.push_back(u);
    }
    // Section: x = xi / q(xi) + sum t_i u_i with sum (-q(u_i)) t_i^2 < 1 / q(xi).
    const std::size_t n = perp.size();
    std::vector<Integer> bound(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Rational limit = 1 / (qxi * -form.q(perp[i]));
        Integer b = static_cast<long>(std::ceil(std::sqrt(limit.get_d()))) + 1;
        while (Rational(b * b) <= limit) b *= 2;
        bound[i] = b;
    }
    auto point = [&](const std::vector<Rational>& s) {
        RatVector x(dim);
        for (std::size_t k = 0; k < dim; ++k) x[k] = xi[k] / qxi;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < dim; ++k) x[k] += s[i] * Rational(bound[i]) * perp[i][k];
        return primitive(x);
    };
    std::vector<IntVector> rays;
    rays.push_back(point(std::vector<Rational>(n, Rational(-1))));
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<Rational> s(n, Rational(-1));
        s[i] = Rational(static_cast<long>(2 * n - 1));
        rays.push_back(point(s));
    }
    return rays;
}

inline IntVector future_primitive(const IntVector& v, const QuadraticForm& form, const RatVector& xi) {
    IntVector p = primitive(v);
    if (form.inner(to_rational(p), xi) < 0)
        for (auto& x : p) x = -x;
    return p;
}

} // namespace detail

inline IntVector bisector_functional(const QuadraticForm& form, const IntVector& xi, const IntMatrix& g) {
    const IntVector gxi = g * xi;
    IntVector diff(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) diff[i] = gxi[i] - xi[i];
    IntVector l(xi.size(), Integer(0));
    for (std::size_t i = 0; i < xi.size(); ++i)
        for (std::size_t j = 0; j < xi.size(); ++j) l[i] += form.gram()(i, j) * diff[j];
    return l;
}

// dirichlet_domain
// ~~~~~~~~~~~~~~~~
/// Exact Dirichlet domain {x : <x, xi> <= <x, g xi> for g in the ball}. Bisectors are
/// added nearest first to a bounding simplex cone; facets are the bisectors whose
/// face is (n-1)-dimensional and meets the open positive cone.
inline DirichletDomain dirichlet_domain(const GeneratedGroup& group, const WordBall& ball, const IntVector& basepoint) {
    const QuadraticForm& form = group.form();
    const RatVector xi = to_rational(basepoint);
    if (!form.in_positive_cone(xi)) fail(ErrorKind::InvalidPoint, "basepoint must be timelike on the witness sheet");
    if (has_nontrivial_stabilizer(ball, basepoint))
        fail(ErrorKind::StabilizerNontrivial, "basepoint has a nontrivial stabilizer in the word ball");

    DirichletDomain out;
    out.basepoint = basepoint;
    out.radius = ball.radius();
    out.cone = PolyhedralCone::simplicial(detail::bounding_simplex(form, xi));

    std::vector<std::pair<Rational, std::size_t>> order;
    for (std::size_t i = 1; i < ball.size(); ++i)
        order.emplace_back(form.inner(xi, to_rational(ball[i].matrix * basepoint)), i);
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [_, i] : order) out.cone.add(bisector_functional(form, basepoint, ball[i].matrix), static_cast<long>(i));

    const std::size_t dim = form.dim();
    const auto faces = out.cone.faces();
    std::vector<std::size_t> facet_constraints;
    for (std::size_t c = 0; c < out.cone.constraints().size(); ++c) {
        if (out.cone.tag(c) == PolyhedralCone::kArtificial) continue;
        if (out.cone.face_dimension(c) + 1 != dim) continue;
        const auto on = out.cone.rays_on(c);
        if (!face_meets_interior(form, out.cone, subfaces(faces, on), xi)) continue;
        facet_constraints.push_back(c);
    }
    std::set<std::vector<Integer>> finite, ideal;
    for (auto c : facet_constraints) {
        Facet f;
        f.element = static_cast<std::size_t>(out.cone.tag(c));
        f.word = ball[f.element].word;
        f.functional = out.cone.constraints()[c];
        for (auto r : out.cone.rays_on(c)) {
            const IntVector& v = out.cone.rays()[r];
            const Rational qv = form.q(to_rational(v));
            if (qv < 0) continue;
            f.vertices.push_back(v);
            (qv > 0 ? finite : ideal).insert(v);
        }
        std::sort(f.vertices.begin(), f.vertices.end());
        out.facets.push_back(std::move(f));
    }
    out.finite_vertices.assign(finite.begin(), finite.end());
    out.ideal_vertices.assign(ideal.begin(), ideal.end());

    // Side pairings: the facet of g is the image under g of the facet of g^-1.
    bool all_paired = true;
    for (std::size_t a = 0; a < out.facets.size(); ++a) {
        const IntMatrix& g = ball[out.facets[a].element].matrix;
        const IntMatrix ginv = isometry_inverse(g, form);
        for (std::size_t b = 0; b < out.facets.size(); ++b) {
            if (ball[out.facets[b].element].matrix != ginv) continue;
            out.facets[a].paired_with = b;
            std::vector<IntVector> image;
            for (const auto& v : out.facets[b].vertices) image.push_back(detail::future_primitive(g * v, form, xi));
            std::sort(image.begin(), image.end());
            out.facets[a].pairing_exact = image == out.facets[a].vertices;
        }
        if (!out.facets[a].paired_with || !out.facets[a].pairing_exact) all_paired = false;
    }
    out.certified_locally_finite = all_paired;
    return out;
}

// Tiling check
// ~~~~~~~~~~~~
struct TilingReport {
    double cover_radius = 0.0;
    std::size_t translates = 0;
    std::size_t pairs_checked = 0;
    std::size_t pairs_separated = 0;
    std::size_t samples = 0;
    std::size_t samples_covered = 0;
    bool disjoint_interiors = false;
    bool covers = false;
};

/// Whether D lies in {l >= 0} inside the positive cone: exact, via the face-center
/// test on D cut by {l <= 0}.
inline bool domain_within_halfspace(const QuadraticForm& form, const DirichletDomain& domain, const IntVector& l) {
    bool violated = false;
    for (const auto& r : domain.cone.rays())
        if (dot(l, r) < 0) violated = true;
    if (!violated) return true;
    PolyhedralCone cut = domain.cone;
    IntVector neg(l.size());
    for (std::size_t i = 0; i < l.size(); ++i) neg[i] = -l[i];
    if (!cut.add(neg, PolyhedralCone::kArtificial)) return false;
    // Any point of the positive cone in a full-dimensional cut has interior points of
    // the cut, where l < 0, arbitrarily close by.
    if (rank(cut.rays()) < cut.dim()) return true;
    return !face_meets_interior(form, cut, cut.faces(), to_rational(domain.basepoint));
}

/// Translates gamma D for ball elements with d(xi, gamma xi) <= 2r (the only ones
/// that can meet B(xi, r)) have pairwise disjoint interiors, checked exactly; sampled
/// points of B(xi, r) each lie in some translate.
inline TilingReport check_tiling(const GeneratedGroup& group, const WordBall& ball, const DirichletDomain& domain,
                                 double r, std::size_t samples, std::uint64_t seed) {
    TilingReport out;
    out.cover_radius = r;
    const QuadraticForm& form = group.form();
    const Frame& frame = group.frame();
    const ModelPoint xi = frame.point(to_rational(domain.basepoint));
    std::vector<std::size_t> near;
    for (std::size_t i = 0; i < ball.size(); ++i)
        if (dist(frame.point(to_rational(ball[i].matrix * domain.basepoint)), xi) <= 2 * r + 1e-9) near.push_back(i);
    out.translates = near.size();

    out.disjoint_interiors = true;
    for (std::size_t a = 0; a < near.size(); ++a) {
        const IntMatrix inv = isometry_inverse(ball[near[a]].matrix, form);
        for (std::size_t b = a + 1; b < near.size(); ++b) {
            ++out.pairs_checked;
            // gamma_a D and gamma_b D are separated by the bisector of gamma_a xi and
            // gamma_b xi iff D lies on the xi side of the bisector of g = gamma_a^-1 gamma_b.
            const IntMatrix g = inv * ball[near[b]].matrix;
            const IntVector l = bisector_functional(form, domain.basepoint, g);
            if (domain_within_halfspace(form, domain, l)) ++out.pairs_separated;
            else out.disjoint_interiors = false;
        }
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::size_t n = form.hyperbolic_dim();
    std::vector<Eigen::MatrixXd> inverses;
    for (auto i : near) inverses.push_back(to_eigen(isometry_inverse(ball[i].matrix, form)));
    const Eigen::MatrixXd boost = boost_to(xi.coords);
    for (std::size_t s = 0; s < samples; ++s) {
        Eigen::VectorXd dir(n);
        for (std::size_t k = 0; k < n; ++k) dir(static_cast<Eigen::Index>(k)) = normal(rng);
        dir.normalize();
        const double t = r * unif(rng);
        Eigen::VectorXd p(n + 1);
        p(0) = std::cosh(t);
        p.tail(n) = std::sinh(t) * dir;
        const Eigen::VectorXd lattice = frame.to_lattice(boost * p);
        ++out.samples;
        for (const auto& inv : inverses)
            if (domain.contains(Eigen::VectorXd(inv * lattice))) {
                ++out.samples_covered;
                break;
            }
    }
    out.covers = out.samples_covered == out.samples;
    return out;
}

} // namespace horocat
