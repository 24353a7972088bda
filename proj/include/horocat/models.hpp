#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "horocat/errors.hpp"
#include "horocat/forms.hpp"

namespace horocat {

/// Residual tolerance for point invariants.
inline constexpr double kModelTolerance = 1e-9;

enum class Model { Hyperboloid, Ball, HalfSpace, Klein };

inline const char* to_string(Model m) {
    switch (m) {
    case Model::Hyperboloid: return "hyperboloid";
    case Model::Ball: return "ball";
    case Model::HalfSpace: return "halfspace";
    case Model::Klein: return "klein";
    }
    return "unknown";
}

inline Model parse_model(const std::string& name) {
    if (name == "hyperboloid") return Model::Hyperboloid;
    if (name == "ball") return Model::Ball;
    if (name == "halfspace") return Model::HalfSpace;
    if (name == "klein") return Model::Klein;
    fail(ErrorKind::ConfigError, "unknown model '" + name + "'");
}

// Standard Minkowski space: q = x0^2 - x1^2 - ... - xn^2.

inline double minkowski(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    return u(0) * v(0) - u.tail(u.size() - 1).dot(v.tail(v.size() - 1));
}

inline Eigen::MatrixXd minkowski_gram(std::size_t dim) {
    Eigen::MatrixXd j = -Eigen::MatrixXd::Identity(dim, dim);
    j(0, 0) = 1.0;
    return j;
}

/// Hyperbolic distance between hyperboloid points, arcosh<u,v> evaluated in the
/// cancellation-free form 2 asinh(|u - v| / 2).
inline double hyperboloid_distance(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    const Eigen::VectorXd d = u - v;
    const double chord2 = std::max(0.0, -minkowski(d, d));
    return 2.0 * std::asinh(0.5 * std::sqrt(chord2));
}

/// Lorentz boost taking the origin (1, 0, ..., 0) to the hyperboloid point c.
inline Eigen::MatrixXd boost_to(const Eigen::VectorXd& c) {
    const Eigen::Index dim = c.size();
    Eigen::MatrixXd b = Eigen::MatrixXd::Identity(dim, dim);
    const Eigen::VectorXd s = c.tail(dim - 1);
    b(0, 0) = c(0);
    b.block(0, 1, 1, dim - 1) = s.transpose();
    b.block(1, 0, dim - 1, 1) = s;
    b.block(1, 1, dim - 1, dim - 1) += s * s.transpose() / (1.0 + c(0));
    return b;
}

/// Normalizes a timelike vector onto the upper sheet.
inline Eigen::VectorXd normalize_timelike(const Eigen::VectorXd& v) {
    const double q = minkowski(v, v);
    if (!(q > 0)) fail(ErrorKind::InvalidPoint, "vector is not timelike");
    Eigen::VectorXd x = v / std::sqrt(q);
    if (x(0) < 0) x = -x;
    return x;
}

// ModelPoint
// ~~~~~~~~~~
struct ModelPoint {
    Model model = Model::Hyperboloid;
    Eigen::VectorXd coords;

    /// Hyperbolic dimension n.
    std::size_t dim() const {
        return model == Model::Hyperboloid ? static_cast<std::size_t>(coords.size()) - 1
                                           : static_cast<std::size_t>(coords.size());
    }
};

inline void validate(const ModelPoint& p) {
    const auto& x = p.coords;
    switch (p.model) {
    case Model::Hyperboloid: {
        if (x.size() < 2) fail(ErrorKind::InvalidPoint, "hyperboloid point needs n+1 >= 2 coordinates");
        const double scale = std::max(1.0, x(0) * x(0));
        if (!(x(0) > 0) || std::abs(minkowski(x, x) - 1.0) > kModelTolerance * scale)
            fail(ErrorKind::InvalidPoint, "point is not on the upper hyperboloid sheet");
        break;
    }
    case Model::Ball:
    case Model::Klein:
        if (!(x.norm() < 1.0)) fail(ErrorKind::InvalidPoint, "point is not inside the unit ball");
        break;
    case Model::HalfSpace:
        if (x.size() < 1 || !(x(x.size() - 1) > 0)) fail(ErrorKind::InvalidPoint, "half-space point needs last coordinate > 0");
        break;
    }
    if (!x.allFinite()) fail(ErrorKind::InvalidPoint, "non-finite coordinates");
}

inline Eigen::VectorXd to_hyperboloid_coords(const ModelPoint& p) {
    validate(p);
    const auto& x = p.coords;
    const Eigen::Index n = static_cast<Eigen::Index>(p.dim());
    Eigen::VectorXd h(n + 1);
    switch (p.model) {
    case Model::Hyperboloid: return x;
    case Model::Ball: {
        const double r2 = x.squaredNorm();
        h(0) = (1.0 + r2) / (1.0 - r2);
        h.tail(n) = 2.0 * x / (1.0 - r2);
        return h;
    }
    case Model::Klein: {
        const double s = 1.0 / std::sqrt(1.0 - x.squaredNorm());
        h(0) = s;
        h.tail(n) = s * x;
        return h;
    }
    case Model::HalfSpace: {
        const double t = x(n - 1);
        const double u2 = x.head(n - 1).squaredNorm();
        h(0) = (1.0 + u2 + t * t) / (2.0 * t);
        h.segment(1, n - 1) = x.head(n - 1) / t;
        h(n) = (u2 + t * t - 1.0) / (2.0 * t);
        return h;
    }
    }
    return h;
}

inline ModelPoint hyperboloid_point(Eigen::VectorXd x) { return {Model::Hyperboloid, std::move(x)}; }

/// Chart changes: stereographic projection from (-1, 0, ..., 0) for the ball, the
/// Cayley-type map for the half-space (infinity at the null ray (1, 0, ..., 0, 1)),
/// and central projection for the Klein chart.
inline ModelPoint convert(const ModelPoint& p, Model target) {
    const Eigen::VectorXd h = to_hyperboloid_coords(p);
    const Eigen::Index n = h.size() - 1;
    switch (target) {
    case Model::Hyperboloid: return {target, h};
    case Model::Ball: return {target, h.tail(n) / (1.0 + h(0))};
    case Model::Klein: return {target, h.tail(n) / h(0)};
    case Model::HalfSpace: {
        const double w = h(0) - h(n);
        Eigen::VectorXd out(n);
        out.head(n - 1) = h.segment(1, n - 1) / w;
        out(n - 1) = 1.0 / w;
        return {target, out};
    }
    }
    return {target, h};
}

inline double dist(const ModelPoint& u, const ModelPoint& v) {
    const Eigen::VectorXd a = to_hyperboloid_coords(u);
    const Eigen::VectorXd b = to_hyperboloid_coords(v);
    if (a.size() != b.size()) fail(ErrorKind::DimensionMismatch, "points of different dimension");
    return hyperboloid_distance(a, b);
}

/// Point at arc-length fraction t along [u, v], in the model of u.
inline ModelPoint geodesic_point(const ModelPoint& u, const ModelPoint& v, double t) {
    const Eigen::VectorXd a = to_hyperboloid_coords(u);
    const Eigen::VectorXd b = to_hyperboloid_coords(v);
    if (a.size() != b.size()) fail(ErrorKind::DimensionMismatch, "points of different dimension");
    const double length = hyperboloid_distance(a, b);
    if (length < 1e-14) fail(ErrorKind::DegenerateSegment, "segment endpoints coincide");
    const Eigen::VectorXd x = (std::sinh((1.0 - t) * length) * a + std::sinh(t * length) * b) / std::sinh(length);
    return convert(hyperboloid_point(normalize_timelike(x)), u.model);
}

// BoundaryPoint
// ~~~~~~~~~~~~~
/// Ideal point, stored as the null direction (1, s) with |s| = 1 in standard
/// coordinates. When the point came from exact lattice data the primitive integer
/// null vector is kept as well.
struct BoundaryPoint {
    Eigen::VectorXd direction;
    std::optional<IntVector> exact;

    static BoundaryPoint from_null(const Eigen::VectorXd& v) {
        const Eigen::Index n = v.size() - 1;
        Eigen::VectorXd s = v.tail(n);
        const double norm = s.norm();
        if (!(norm > 0)) fail(ErrorKind::InvalidPoint, "zero null vector");
        if (v(0) < 0) s = -s;
        Eigen::VectorXd d(n + 1);
        d(0) = 1.0;
        d.tail(n) = s / norm;
        return {d, std::nullopt};
    }

    /// Unit vector on the boundary sphere of the ball model.
    Eigen::VectorXd sphere() const { return direction.tail(direction.size() - 1); }

    /// Half-space coordinates (u, 0); nullopt encodes the point at infinity.
    std::optional<Eigen::VectorXd> halfspace() const {
        const Eigen::Index n = direction.size() - 1;
        const double w = 1.0 - direction(n);
        if (w < 1e-14) return std::nullopt;
        return Eigen::VectorXd(direction.segment(1, n - 1) / w);
    }

    double angle_to(const BoundaryPoint& other) const {
        const double c = std::clamp(sphere().dot(other.sphere()), -1.0, 1.0);
        return std::acos(c);
    }
};

// Frame
// ~~~~~
/// Orthonormal basis for the lattice form: columns f_0..f_n with f_0 along the witness,
/// so that basis^T Q basis = diag(1, -1, ..., -1). Lattice coordinates x relate to
/// standard coordinates y by x = basis * y.
class Frame {
public:
    explicit Frame(const QuadraticForm& form) {
        const std::size_t dim = form.dim();
        q_ = to_eigen(form.gram());
        basis_ = Eigen::MatrixXd::Zero(dim, dim);
        const Eigen::VectorXd w = to_eigen(form.witness());
        basis_.col(0) = w / std::sqrt(w.dot(q_ * w));
        std::size_t filled = 1;
        for (std::size_t j = 0; j < dim && filled < dim; ++j) {
            Eigen::VectorXd v = Eigen::VectorXd::Unit(dim, j);
            for (int pass = 0; pass < 2; ++pass)
                for (std::size_t k = 0; k < filled; ++k) {
                    const double eps = k == 0 ? 1.0 : -1.0;
                    v -= eps * v.dot(q_ * basis_.col(k)) * basis_.col(k);
                }
            const double qv = v.dot(q_ * v);
            if (std::abs(qv) < 1e-10) continue;
            basis_.col(filled++) = v / std::sqrt(std::abs(qv));
        }
        inverse_ = minkowski_gram(dim) * basis_.transpose() * q_;
    }

    const Eigen::MatrixXd& basis() const noexcept { return basis_; }
    const Eigen::MatrixXd& inverse() const noexcept { return inverse_; }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(basis_.rows()); }

    Eigen::VectorXd to_standard(const Eigen::VectorXd& lattice) const { return inverse_ * lattice; }
    Eigen::VectorXd to_lattice(const Eigen::VectorXd& standard) const { return basis_ * standard; }
    Eigen::VectorXd to_standard(const RatVector& lattice) const { return inverse_ * to_eigen(lattice); }
    Eigen::VectorXd to_standard(const IntVector& lattice) const { return inverse_ * to_eigen(lattice); }

    /// The isometry g in standard coordinates.
    Eigen::MatrixXd to_standard(const IntMatrix& g) const { return inverse_ * to_eigen(g) * basis_; }

    /// Hyperboloid point of a timelike lattice vector (any positive scale).
    ModelPoint point(const RatVector& lattice) const { return hyperboloid_point(normalize_timelike(to_standard(lattice))); }

    BoundaryPoint boundary(const IntVector& null_lattice) const {
        BoundaryPoint b = BoundaryPoint::from_null(to_standard(null_lattice));
        b.exact = primitive(null_lattice);
        return b;
    }

    ModelPoint origin() const {
        Eigen::VectorXd o = Eigen::VectorXd::Zero(dim());
        o(0) = 1.0;
        return hyperboloid_point(o);
    }

private:
    Eigen::MatrixXd q_;
    Eigen::MatrixXd basis_;
    Eigen::MatrixXd inverse_;
};

/// Applies a standard-coordinate isometry to a point, renormalizing against drift.
inline ModelPoint apply(const Eigen::MatrixXd& g, const ModelPoint& p) {
    const Eigen::VectorXd x = g * to_hyperboloid_coords(p);
    return convert(hyperboloid_point(normalize_timelike(x)), p.model);
}

struct ConeProjection {
    bool member = false;
    ModelPoint representative;
};

/// Whether the ray through p meets the cone C, i.e. p lies in pr(C ∩ H^n).
inline ConeProjection project_cone(const QuadraticForm& form, const Frame& frame, const RationalCone& cone,
                                   const ModelPoint& p) {
    const Eigen::VectorXd h = normalize_timelike(to_hyperboloid_coords(p));
    const Eigen::VectorXd lattice = frame.to_lattice(h);
    return {cone_contains(cone, lattice, form, 1e-12), hyperboloid_point(h)};
}

} // namespace horocat
