#pragma once

#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "horocat/forms.hpp"
#include "horocat/models.hpp"
#include "horocat/poly.hpp"

namespace horocat {

enum class IsometryClass { Elliptic, Parabolic, Loxodromic };

inline const char* to_string(IsometryClass c) {
    switch (c) {
    case IsometryClass::Elliptic: return "elliptic";
    case IsometryClass::Parabolic: return "parabolic";
    case IsometryClass::Loxodromic: return "loxodromic";
    }
    return "unknown";
}

/// Null vectors spanning the axis of a loxodromic, scaled so that <a, b> = 1/2 and
/// t = 0 is the axis point closest to the frame origin.
struct Axis {
    Eigen::VectorXd attractive;
    Eigen::VectorXd repulsive;
};

struct ClassifiedIsometry {
    FormIsometry base;
    IsometryClass kind = IsometryClass::Elliptic;
    Polynomial charpoly;
    /// Isolating interval for the spectral radius; [1, 1] unless loxodromic.
    RootInterval spectral_radius{Rational(1), Rational(1), 1.0};
    /// Order of an elliptic element, 0 for infinite order.
    std::size_t order = 0;
    std::vector<BoundaryPoint> fixed_boundary;
    /// Exact fixed interior point (lattice coordinates) of an elliptic element.
    std::optional<IntVector> fixed_interior;
    std::optional<Axis> axis;

    bool loxodromic() const noexcept { return kind == IsometryClass::Loxodromic; }
};

struct TranslationLength {
    double value = 0.0;
    bool attained = true;
};

// Symmetric square
// ~~~~~~~~~~~~~~~~
/// SL2 acts on binary quadratic forms (symmetric matrices S, coordinates
/// (S11, S12, S22)) by S -> g S g^T, preserving 2 det S.
inline QuadraticForm binary_quadratic_form() {
    return QuadraticForm(IntMatrix{{0, 0, 1}, {0, -2, 0}, {1, 0, 0}}, RatVector{1, 0, 1});
}

inline IntMatrix symmetric_square(long a, long b, long c, long d) {
    if (a * d - b * c != 1) fail(ErrorKind::InvalidGenerator, "symmetric_square needs a determinant-one matrix");
    return IntMatrix{{a * a, 2 * a * b, b * b}, {a * c, a * d + b * c, b * d}, {c * c, 2 * c * d, d * d}};
}

/// Lattice point of the binary-form model lying over x + iy, up to scale: (|z|^2, x, 1) / y.
inline RatVector upper_half_plane_point(const Rational& x, const Rational& y) {
    return RatVector{(x * x + y * y) / y, x / y, 1 / y};
}

namespace detail {

inline std::size_t euler_phi(std::size_t k) {
    std::size_t result = k;
    for (std::size_t p = 2; p * p <= k; ++p) {
        if (k % p) continue;
        while (k % p == 0) k /= p;
        result -= result / p;
    }
    if (k > 1) result -= result / k;
    return result;
}

/// Order of a finite-order integral matrix from the cyclotomic factors of its
/// characteristic polynomial; 0 if the factors do not account for every root.
inline std::size_t cyclotomic_order(Polynomial p) {
    std::size_t order = 1;
    const std::size_t degree = static_cast<std::size_t>(p.degree());
    for (std::size_t k = 1; p.degree() > 0 && k <= 64 * degree + 2; ++k) {
        if (euler_phi(k) > degree) continue;
        const Polynomial phi = cyclotomic(k);
        bool divides = false;
        while (p.degree() >= phi.degree() && (p % phi).is_zero()) {
            p = p / phi;
            divides = true;
        }
        if (divides) order = std::lcm(order, k);
    }
    return p.degree() == 0 ? order : 0;
}

inline IntVector future_pointing(IntVector v, const QuadraticForm& form) {
    v = primitive(v);
    if (form.inner(to_rational(v), form.witness()) < 0)
        for (auto& x : v) x = -x;
    return v;
}

/// Dominant eigenvector of g by normalized repeated squaring, started from x.
inline Eigen::VectorXd dominant_direction(const Eigen::MatrixXd& g, const Eigen::VectorXd& x) {
    Eigen::MatrixXd m = g / g.norm();
    Eigen::VectorXd v = (m * x).normalized();
    for (int k = 0; k < 64; ++k) {
        m = m * m;
        m /= m.norm();
        const Eigen::VectorXd next = (m * x).normalized();
        const double change = std::min((next - v).norm(), (next + v).norm());
        v = next;
        if (change < 1e-15) break;
    }
    return v;
}

} // namespace detail

// classify
// ~~~~~~~~
/// Exact trichotomy from the characteristic polynomial: loxodromic iff a real root
/// exceeds 1; otherwise elliptic iff the matrix is semisimple.
inline ClassifiedIsometry classify(const FormIsometry& g, const QuadraticForm& form) {
    if (!is_isometry(g.matrix, form)) fail(ErrorKind::NotAnIsometry, "matrix does not preserve the form and sheet");
    const std::size_t dim = form.dim();
    ClassifiedIsometry out;
    out.base = g;
    out.charpoly = characteristic_polynomial(g.matrix);
    const Polynomial sf = squarefree_part(out.charpoly);
    const RatMatrix gq = to_rational(g.matrix);
    const Frame frame(form);

    RootInterval root;
    if (isolate_largest_root(sf, Rational(1), Rational(1, 1UL << 40), root)) {
        out.kind = IsometryClass::Loxodromic;
        out.spectral_radius = root;
        const Eigen::MatrixXd gs = frame.to_standard(g.matrix);
        const Eigen::MatrixXd j = minkowski_gram(dim);
        const Eigen::VectorXd origin = Eigen::VectorXd::Unit(static_cast<Eigen::Index>(dim), 0);
        Eigen::VectorXd a = detail::dominant_direction(gs, origin);
        Eigen::VectorXd b = detail::dominant_direction(j * gs.transpose() * j, origin);
        if (a(0) < 0) a = -a;
        if (b(0) < 0) b = -b;
        a /= a(0);
        b /= b(0);
        out.fixed_boundary = {BoundaryPoint::from_null(a), BoundaryPoint::from_null(b)};
        a = out.fixed_boundary[0].direction;
        b = out.fixed_boundary[1].direction;
        const double ab = minkowski(a, b);
        a /= std::sqrt(2.0 * ab);
        b /= std::sqrt(2.0 * ab);
        const double shift = std::exp(0.5 * std::log(b(0) / a(0)));
        out.axis = Axis{a * shift, b / shift};
        return out;
    }

    if (sf(gq) == RatMatrix(dim, dim)) {
        out.kind = IsometryClass::Elliptic;
        out.order = detail::cyclotomic_order(out.charpoly);
        if (out.order == 0 || !power(g.matrix, out.order).is_identity())
            fail(ErrorKind::NotAnIsometry, "elliptic element of infinite order is not integral");
        RatVector sum(dim, Rational(0));
        RatVector x = form.witness();
        for (std::size_t k = 0; k < out.order; ++k) {
            for (std::size_t i = 0; i < dim; ++i) sum[i] += x[i];
            x = gq * x;
        }
        out.fixed_interior = primitive(sum);
        return out;
    }

    out.kind = IsometryClass::Parabolic;
    // p = (x - 1)^k r with r(1) != 0; (g - 1)^2 r(g) maps onto the fixed null line.
    Polynomial r = out.charpoly;
    const Polynomial linear{-1, 1};
    while ((r % linear).is_zero()) r = r / linear;
    const RatMatrix shift = gq - RatMatrix::identity(dim);
    const RatMatrix m = shift * shift * r(gq);
    for (std::size_t j = 0; j < dim; ++j) {
        RatVector col = m.column(j);
        if (is_zero(col)) continue;
        const IntVector v = detail::future_pointing(primitive(col), form);
        out.fixed_boundary = {frame.boundary(v)};
        break;
    }
    if (out.fixed_boundary.empty()) fail(ErrorKind::NotAnIsometry, "parabolic element without a fixed null vector");
    return out;
}

inline TranslationLength translation_length(const ClassifiedIsometry& c) {
    switch (c.kind) {
    case IsometryClass::Elliptic: return {0.0, true};
    case IsometryClass::Parabolic: return {0.0, false};
    case IsometryClass::Loxodromic: return {std::log(c.spectral_radius.approx), true};
    }
    return {};
}

/// d_g(x) = dist(g x, x).
inline double displacement(const FormIsometry& g, const Frame& frame, const ModelPoint& x) {
    validate(x);
    return dist(apply(frame.to_standard(g.matrix), x), x);
}

inline ModelPoint axis_point(const ClassifiedIsometry& c, double t) {
    if (!c.axis) fail(ErrorKind::NotLoxodromic, "axis requested for a non-loxodromic element");
    const Eigen::VectorXd x = std::exp(t) * c.axis->attractive + std::exp(-t) * c.axis->repulsive;
    return hyperboloid_point(normalize_timelike(x));
}

struct DisplacementMinimum {
    ModelPoint point;
    double value = 0.0;
    std::size_t iterations = 0;
};

/// Numerical minimum of d_g by the iteration x -> mid(g^-1 x, g x). Points on the axis
/// of a loxodromic are fixed by the map and the distance to the axis contracts; for a
/// parabolic the iterates drift towards the fixed point and the value tends to 0.
inline DisplacementMinimum minimize_displacement(const FormIsometry& g, const Frame& frame, ModelPoint start,
                                                 std::size_t max_iterations = 10000) {
    const Eigen::MatrixXd gs = frame.to_standard(g.matrix);
    const Eigen::MatrixXd inv = minkowski_gram(frame.dim()) * gs.transpose() * minkowski_gram(frame.dim());
    ModelPoint x = convert(start, Model::Hyperboloid);
    double d = dist(apply(gs, x), x);
    std::size_t it = 0;
    for (; it < max_iterations && d > 1e-12; ++it) {
        const ModelPoint ahead = apply(gs, x);
        const ModelPoint behind = apply(inv, x);
        const ModelPoint mid = geodesic_point(behind, ahead, 0.5);
        const double moved = dist(mid, x);
        x = mid;
        d = dist(apply(gs, x), x);
        if (moved < 1e-14) break;
    }
    return {x, d, it};
}

} // namespace horocat
