#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "horocat/dirichlet.hpp"
#include "horocat/groups.hpp"
#include "horocat/models.hpp"

namespace horocat {

// Cusps
// ~~~~~
struct CuspOrbit {
    /// Primitive future null lattice vector of the representative.
    IntVector representative;
    BoundaryPoint base;
    /// Ideal vertices of the domain in this orbit.
    std::vector<IntVector> members;
    std::size_t rank = 0;
    bool full_rank = false;
    std::vector<std::string> parabolic_words;
    std::size_t stabilizer_size = 0;
};

/// Ideal vertices of the domain fixed by an enumerated parabolic, grouped into orbits
/// under the ball.
inline std::vector<CuspOrbit> detect_cusps(const GeneratedGroup& group, const WordBall& ball,
                                           const DirichletDomain& domain) {
    const QuadraticForm& form = group.form();
    const RatVector xi = to_rational(domain.basepoint);
    std::vector<CuspOrbit> out;
    for (const auto& v : domain.ideal_vertices) {
        const BoundaryPoint p = group.frame().boundary(v);
        const auto st = boundary_stabilizer(group, ball, p);
        if (st.parabolic.empty()) continue;
        bool merged = false;
        for (auto& orbit : out) {
            for (const auto& e : ball.elements())
                if (detail::future_primitive(e.matrix * orbit.representative, form, xi) == v) {
                    orbit.members.push_back(v);
                    merged = true;
                    break;
                }
            if (merged) break;
        }
        if (merged) continue;
        CuspOrbit orbit;
        orbit.representative = v;
        orbit.base = p;
        orbit.members.push_back(v);
        orbit.rank = st.bieberbach_rank;
        orbit.full_rank = st.bieberbach_rank + 1 == form.hyperbolic_dim();
        orbit.stabilizer_size = st.elements.size();
        for (auto i : st.parabolic) orbit.parabolic_words.push_back(ball[i].word);
        out.push_back(std::move(orbit));
    }
    return out;
}

// KleinHull
// ~~~~~~~~~
/// Convex hull of finitely many points of the Klein chart; membership is an LP
/// feasibility problem solved by a dense phase-one simplex.
class KleinHull {
public:
    KleinHull() = default;
    explicit KleinHull(std::vector<Eigen::VectorXd> points) : points_(std::move(points)) {}

    const std::vector<Eigen::VectorXd>& points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }

    bool contains(const Eigen::VectorXd& y, double tol = 1e-9) const {
        if (points_.empty()) return false;
        const std::size_t rows = static_cast<std::size_t>(y.size()) + 1;
        const std::size_t m = points_.size();
        const std::size_t cols = m + rows;
        // Tableau: rows x (cols + 1), last column the right-hand side.
        std::vector<double> t(rows * (cols + 1), 0.0);
        auto at = [&](std::size_t r, std::size_t c) -> double& { return t[r * (cols + 1) + c]; };
        for (std::size_t r = 0; r < rows; ++r) {
            double rhs = r + 1 < rows ? y(static_cast<Eigen::Index>(r)) : 1.0;
            const double sign = rhs < 0 ? -1.0 : 1.0;
            for (std::size_t j = 0; j < m; ++j)
                at(r, j) = sign * (r + 1 < rows ? points_[j](static_cast<Eigen::Index>(r)) : 1.0);
            at(r, m + r) = 1.0;
            at(r, cols) = sign * rhs;
        }
        std::vector<std::size_t> basis(rows);
        for (std::size_t r = 0; r < rows; ++r) basis[r] = m + r;
        std::vector<double> cost(cols + 1, 0.0);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c <= cols; ++c)
                if (c < m || c == cols) cost[c] -= at(r, c);
        for (int iter = 0; iter < 10000; ++iter) {
            std::size_t enter = cols;
            for (std::size_t c = 0; c < cols; ++c)
                if (cost[c] < -1e-12) {
                    enter = c;
                    break;
                }
            if (enter == cols) break;
            std::size_t leave = rows;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < rows; ++r) {
                const double a = at(r, enter);
                if (a <= 1e-12) continue;
                const double ratio = at(r, cols) / a;
                if (ratio < best - 1e-15 || (ratio <= best + 1e-15 && leave < rows && basis[r] < basis[leave])) {
                    best = ratio;
                    leave = r;
                }
            }
            if (leave == rows) break;
            const double pivot = at(leave, enter);
            for (std::size_t c = 0; c <= cols; ++c) at(leave, c) /= pivot;
            for (std::size_t r = 0; r < rows; ++r) {
                if (r == leave) continue;
                const double f = at(r, enter);
                if (f == 0.0) continue;
                for (std::size_t c = 0; c <= cols; ++c) at(r, c) -= f * at(leave, c);
            }
            const double f = cost[enter];
            for (std::size_t c = 0; c <= cols; ++c) cost[c] -= f * at(leave, c);
            basis[leave] = enter;
        }
        return -cost[cols] <= tol;
    }

private:
    std::vector<Eigen::VectorXd> points_;
};

/// Hull of a limit-set sample together with the fixed points of enumerated
/// loxodromic and parabolic elements.
inline KleinHull limit_hull(const GeneratedGroup& group, const WordBall& ball, std::size_t depth) {
    std::vector<Eigen::VectorXd> pts;
    auto add = [&](const BoundaryPoint& b) {
        for (const auto& q : pts)
            if ((q - b.sphere()).norm() < 1e-12) return;
        pts.push_back(b.sphere());
    };
    if (depth > 0)
        for (const auto& p : limit_sample(group, depth, group.frame().origin()).points) add(p.point);
    for (std::size_t i = 1; i < ball.size(); ++i) {
        const auto c = classify(FormIsometry{ball[i].matrix, ball[i].word}, group.form());
        if (c.kind == IsometryClass::Elliptic) continue;
        for (const auto& v : c.fixed_boundary) add(v);
    }
    return KleinHull(std::move(pts));
}

// Horoballs
// ~~~~~~~~~
/// Open horoball {x : q(x) = 1, <x, p> < beta} at the null lattice vector p. In
/// standard coordinates it is {<y, d> < alpha} with d = (1, s) the unit-normalized base;
/// level = 1/alpha is the height of the horosphere in the half-space chart sending the
/// base to infinity by a rotation.
struct Horoball {
    BoundaryPoint base;
    IntVector null;
    Rational beta_squared;
    double alpha = 1.0;
    double level = 1.0;
    bool open = true;
    std::size_t orbit = 0;

    double value(const Eigen::VectorXd& y) const { return minkowski(y, base.direction); }
    bool contains(const Eigen::VectorXd& y) const { return value(y) < alpha * (1.0 - 1e-12); }
    /// Busemann depth of y inside the horoball (negative outside).
    double depth(const Eigen::VectorXd& y) const { return std::log(alpha / value(y)); }
};

struct EquivarianceEntry {
    std::size_t element = 0;
    std::size_t representative = 0;
    std::size_t translate = 0;
};

struct HoroballFamily {
    std::vector<Horoball> representatives;
    /// Distinct images of the representatives under the ball, representatives first.
    std::vector<Horoball> translates;
    std::size_t radius = 0;
    /// Common level of the representatives, and its square as an exact rational.
    double level = 0.0;
    Rational level_squared;
    /// Smallest level with pairwise disjoint closures across the enumerated translates.
    double critical_level = 0.0;
    bool disjoint_certified = false;
    bool antipodal_checked = false;
    bool antipodal_in_hull = true;
    std::size_t shrinks = 0;
    std::vector<EquivarianceEntry> equivariance;
    bool equivariant = false;
};

struct FamilyOptions {
    double level_scale = 1.0;
    double slack = 1e-6;
    const KleinHull* hull = nullptr;
    std::size_t max_shrinks = 60;
};

namespace detail {

inline Rational exact_from_double(double x) { return Rational(x); }

inline Horoball make_horoball(const QuadraticForm& form, const Frame& frame, const IntVector& null,
                              const Rational& beta_squared, std::size_t orbit) {
    Horoball b;
    b.base = frame.boundary(null);
    b.null = primitive(null);
    b.beta_squared = beta_squared;
    b.orbit = orbit;
    // c = <p, w> / sqrt(q(w)) is the first standard coordinate of p.
    const Rational pw = form.inner(to_rational(b.null), form.witness());
    const double c = pw.get_d() / std::sqrt(form.q(form.witness()).get_d());
    b.alpha = std::sqrt(beta_squared.get_d()) / c;
    b.level = 1.0 / b.alpha;
    return b;
}

inline Eigen::VectorXd antipodal_klein(const Horoball& b) {
    // The point of the horosphere on the ray from the base through the origin sits at
    // signed distance log(alpha) beyond the origin.
    const double t = std::log(b.alpha);
    return -std::tanh(t) * b.base.sphere();
}

} // namespace detail

/// Exact disjointness of closures: beta_i beta_j < <p_i, p_j> / 2 for distinct bases.
inline bool closures_disjoint(const QuadraticForm& form, const Horoball& a, const Horoball& b) {
    const Rational ip = form.inner(to_rational(a.null), to_rational(b.null));
    if (ip <= 0) return false;
    return a.beta_squared * b.beta_squared * 4 < ip * ip;
}

inline bool certify_disjoint(const QuadraticForm& form, const std::vector<Horoball>& balls) {
    for (std::size_t i = 0; i < balls.size(); ++i)
        for (std::size_t j = i + 1; j < balls.size(); ++j)
            if (!closures_disjoint(form, balls[i], balls[j])) return false;
    return true;
}

// build_horoball_family
// ~~~~~~~~~~~~~~~~~~~~~
/// One horoball per cusp orbit at a common level, chosen just above the critical level
/// for the enumerated translates and raised until the antipodal points lie in the hull.
inline HoroballFamily build_horoball_family(const GeneratedGroup& group, const WordBall& ball,
                                            const std::vector<CuspOrbit>& cusps, const FamilyOptions& options = {}) {
    const QuadraticForm& form = group.form();
    HoroballFamily out;
    out.radius = ball.radius();
    if (cusps.empty()) {
        out.disjoint_certified = true;
        out.equivariant = true;
        return out;
    }
    for (const auto& c : cusps)
        if (!c.full_rank)
            fail(ErrorKind::RankDeficientCusp, "cusp of Bieberbach rank " + std::to_string(c.rank) +
                                                    " is below n-1; horoball truncation needs full-rank cusps");
    if (!(options.level_scale >= 1.0)) fail(ErrorKind::ConfigError, "level scale must be at least 1");

    const RatVector w = form.witness();
    const Rational qw = form.q(w);
    // Translates as (null vector, orbit) with duplicates removed.
    std::vector<IntVector> nulls;
    std::vector<std::size_t> orbit_of;
    std::map<std::vector<Integer>, std::size_t> index;
    for (std::size_t i = 0; i < cusps.size(); ++i) {
        index.emplace(cusps[i].representative, nulls.size());
        nulls.push_back(cusps[i].representative);
        orbit_of.push_back(i);
    }
    for (std::size_t e = 0; e < ball.size(); ++e)
        for (std::size_t i = 0; i < cusps.size(); ++i) {
            IntVector p = primitive(ball[e].matrix * cusps[i].representative);
            if (form.inner(to_rational(p), w) < 0)
                for (auto& x : p) x = -x;
            auto [it, fresh] = index.emplace(p, nulls.size());
            if (fresh) {
                nulls.push_back(p);
                orbit_of.push_back(i);
            } else if (orbit_of[it->second] != i) {
                fail(ErrorKind::ConfigError, "cusp orbits were not separated consistently");
            }
            out.equivariance.push_back({e, i, it->second});
        }
    out.equivariant = true;

    // beta_i^2 = c_i^2 / (q(w) L^2) with c_i = <p_i, w>; disjointness of translates t1, t2
    // reads L^2 > 2 c_i c_j / (q(w) <t1, t2>).
    std::vector<Rational> c(nulls.size());
    for (std::size_t k = 0; k < nulls.size(); ++k) c[k] = form.inner(to_rational(cusps[orbit_of[k]].representative), w);
    Rational critical = 0;
    for (std::size_t a = 0; a < nulls.size(); ++a)
        for (std::size_t b = a + 1; b < nulls.size(); ++b) {
            const Rational ip = form.inner(to_rational(nulls[a]), to_rational(nulls[b]));
            if (ip <= 0) fail(ErrorKind::NoDisjointLevel, "distinct cusp translates with non-positive pairing");
            const Rational need = 2 * c[a] * c[b] / (qw * ip);
            if (need > critical) critical = need;
        }
    if (critical == 0) critical = 1;
    out.critical_level = std::sqrt(critical.get_d());
    const double factor = (1.0 + options.slack) * options.level_scale;
    Rational level_sq = critical * detail::exact_from_double(factor) * detail::exact_from_double(factor);

    auto assemble = [&](const Rational& lsq) {
        out.representatives.clear();
        out.translates.clear();
        for (std::size_t k = 0; k < nulls.size(); ++k) {
            const Rational beta_sq = c[k] * c[k] / (qw * lsq);
            out.translates.push_back(detail::make_horoball(form, group.frame(), nulls[k], beta_sq, orbit_of[k]));
            if (k < cusps.size()) out.representatives.push_back(out.translates.back());
        }
    };
    assemble(level_sq);
    if (options.hull && !options.hull->empty()) {
        out.antipodal_checked = true;
        auto inside = [&] {
            for (const auto& r : out.representatives)
                if (!options.hull->contains(detail::antipodal_klein(r))) return false;
            return true;
        };
        while (!inside()) {
            if (++out.shrinks > options.max_shrinks)
                fail(ErrorKind::NoDisjointLevel, "antipodal points never entered the limit hull");
            level_sq *= 4;
            assemble(level_sq);
        }
        out.antipodal_in_hull = true;
    }
    out.level_squared = level_sq;
    out.level = std::sqrt(level_sq.get_d());
    out.disjoint_certified = certify_disjoint(form, out.translates);
    if (!out.disjoint_certified) fail(ErrorKind::NoDisjointLevel, "translates overlap at the chosen level");
    return out;
}

/// The same family with every horoball shrunk: the level is multiplied by factor >= 1.
inline HoroballFamily rescale_family(const QuadraticForm& form, const Frame& frame, const HoroballFamily& family,
                                     const Rational& factor) {
    if (factor < 1) fail(ErrorKind::ConfigError, "horoballs can only be shrunk");
    HoroballFamily out = family;
    const Rational f2 = factor * factor;
    out.level_squared = family.level_squared * f2;
    out.level = std::sqrt(out.level_squared.get_d());
    auto shrink = [&](std::vector<Horoball>& v) {
        for (auto& b : v) b = detail::make_horoball(form, frame, b.null, b.beta_squared / f2, b.orbit);
    };
    shrink(out.representatives);
    shrink(out.translates);
    out.disjoint_certified = certify_disjoint(form, out.translates);
    return out;
}

// Truncated geodesics
// ~~~~~~~~~~~~~~~~~~~
enum class ArcKind { Hyperbolic, Horospherical };

inline const char* to_string(ArcKind k) { return k == ArcKind::Hyperbolic ? "hyperbolic" : "horospherical"; }

struct Arc {
    ArcKind kind = ArcKind::Hyperbolic;
    /// Endpoints in standard hyperboloid coordinates.
    Eigen::VectorXd start;
    Eigen::VectorXd end;
    double length = 0.0;
    std::optional<std::size_t> horoball;
};

struct TruncatedGeodesic {
    std::vector<Arc> arcs;
    double total_length = 0.0;
    double ambient_length = 0.0;
    double residual = 0.0;
    std::size_t iterations = 0;
    std::size_t reseeds = 0;
    bool locally_optimal = false;
};

struct GeodesicOptions {
    double tolerance = 1e-10;
    std::size_t max_iterations = 10000;
    std::size_t max_reseeds = 64;
};

struct GeodesicInvariants {
    bool alternates = true;
    bool connected = true;
    bool on_horospheres = true;
    double max_penetration = 0.0;
    bool avoids = true;
    bool ok() const { return alternates && connected && on_horospheres && avoids; }
};

// TruncatedSpace
// ~~~~~~~~~~~~~~
/// Hyperbolic space minus a finite set of disjoint open horoballs, with the induced
/// length metric. Works in standard coordinates; each horoball has a half-space chart
/// (a reflection of the spatial part) sending its base to infinity.
class TruncatedSpace {
public:
    TruncatedSpace(std::size_t dim, std::vector<Horoball> horoballs) : dim_(dim), balls_(std::move(horoballs)) {
        const Eigen::Index n = static_cast<Eigen::Index>(dim_);
        for (const auto& b : balls_) {
            Eigen::MatrixXd k = Eigen::MatrixXd::Identity(n + 1, n + 1);
            Eigen::VectorXd s = b.base.sphere();
            Eigen::VectorXd target = Eigen::VectorXd::Zero(n);
            target(n - 1) = 1.0;
            const Eigen::VectorXd v = s - target;
            if (v.norm() > 1e-15) k.block(1, 1, n, n) -= 2.0 * v * v.transpose() / v.squaredNorm();
            charts_.push_back(k);
        }
    }

    explicit TruncatedSpace(const HoroballFamily& family, std::size_t dim) : TruncatedSpace(dim, family.translates) {}

    std::size_t dim() const noexcept { return dim_; }
    const std::vector<Horoball>& horoballs() const noexcept { return balls_; }

    /// Index of an open horoball containing y.
    std::optional<std::size_t> inside(const Eigen::VectorXd& y) const {
        for (std::size_t k = 0; k < balls_.size(); ++k)
            if (balls_[k].value(y) < balls_[k].alpha * (1.0 - 1e-9)) return k;
        return std::nullopt;
    }

    /// Half-space chart of horoball k: (u, t), horosphere at t = level.
    Eigen::VectorXd chart(std::size_t k, const Eigen::VectorXd& y) const {
        const Eigen::VectorXd z = charts_[k] * y;
        const Eigen::Index n = static_cast<Eigen::Index>(dim_);
        const double w = z(0) - z(n);
        Eigen::VectorXd out(n);
        out.head(n - 1) = z.segment(1, n - 1) / w;
        out(n - 1) = 1.0 / w;
        return out;
    }

    Eigen::VectorXd unchart(std::size_t k, const Eigen::VectorXd& ut) const {
        return normalize_timelike(charts_[k] * to_hyperboloid_coords({Model::HalfSpace, ut}));
    }

    /// Minimum of <., d_k> along [p, q] and the arc-length parameters where the
    /// segment enters and leaves the open horoball.
    struct SegmentHit {
        double minimum = 0.0;
        bool hit = false;
        double entry = 0.0;
        double exit = 0.0;
    };

    SegmentHit segment_hit(const Eigen::VectorXd& p, const Eigen::VectorXd& q, std::size_t k) const {
        SegmentHit h;
        const double fp = balls_[k].value(p);
        const double fq = balls_[k].value(q);
        const double len = hyperboloid_distance(p, q);
        const double alpha = balls_[k].alpha;
        h.minimum = std::min(fp, fq);
        if (len < 1e-12) {
            h.hit = h.minimum < alpha * (1.0 - 1e-12);
            h.exit = len;
            return h;
        }
        // <gamma(s), d> = A e^s + B e^-s.
        const double sh = 2.0 * std::sinh(len);
        const double a = (fq - fp * std::exp(-len)) / sh;
        const double b = (fp * std::exp(len) - fq) / sh;
        if (a > 0 && b > 0) {
            const double s = std::clamp(0.5 * std::log(b / a), 0.0, len);
            h.minimum = std::min(h.minimum, a * std::exp(s) + b * std::exp(-s));
        }
        if (!(h.minimum < alpha * (1.0 - 1e-12))) return h;
        h.hit = true;
        // The value is convex in s, so {value < alpha} meets [0, len] in an interval.
        const double inf = std::numeric_limits<double>::infinity();
        const double disc = std::sqrt(std::max(0.0, alpha * alpha - 4.0 * a * b));
        double s1 = -inf, s2 = inf;
        if (std::abs(a) < 1e-300) {
            s1 = std::log(b / alpha);
        } else if (a > 0) {
            const double x1 = (alpha - disc) / (2.0 * a);
            s1 = x1 > 0 ? std::log(x1) : -inf;
            s2 = std::log((alpha + disc) / (2.0 * a));
        } else {
            s1 = std::log((alpha - disc) / (2.0 * a));
        }
        h.entry = std::clamp(s1, 0.0, len);
        h.exit = std::clamp(s2, 0.0, len);
        return h;
    }

    static Eigen::VectorXd segment_point(const Eigen::VectorXd& p, const Eigen::VectorXd& q, double s) {
        const double len = hyperboloid_distance(p, q);
        if (len < 1e-14) return p;
        const Eigen::VectorXd x = (std::sinh(len - s) * p + std::sinh(s) * q) / std::sinh(len);
        return normalize_timelike(x);
    }

    /// Deepest Busemann penetration of [p, q] into horoballs other than those listed.
    double penetration(const Eigen::VectorXd& p, const Eigen::VectorXd& q, std::optional<std::size_t>* worst = nullptr,
                       std::vector<std::size_t> skip = {}) const {
        double deepest = 0.0;
        for (std::size_t k = 0; k < balls_.size(); ++k) {
            if (std::find(skip.begin(), skip.end(), k) != skip.end()) continue;
            const auto h = segment_hit(p, q, k);
            if (!h.hit) continue;
            const double d = std::log(balls_[k].alpha / h.minimum);
            if (d > deepest) {
                deepest = d;
                if (worst) *worst = k;
            }
        }
        return deepest;
    }

    TruncatedGeodesic geodesic(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const GeodesicOptions& options = {}) const {
        if (auto k = inside(x)) fail(ErrorKind::InsideHoroball, "start point lies in open horoball " + std::to_string(*k));
        if (auto k = inside(y)) fail(ErrorKind::InsideHoroball, "end point lies in open horoball " + std::to_string(*k));
        TruncatedGeodesic out;
        out.ambient_length = hyperboloid_distance(x, y);

        std::vector<Crossing> path;
        {
            std::vector<std::pair<double, Crossing>> seeds;
            for (std::size_t k = 0; k < balls_.size(); ++k) {
                const auto h = segment_hit(x, y, k);
                if (!h.hit) continue;
                seeds.push_back({h.entry, {k, segment_point(x, y, h.entry), segment_point(x, y, h.exit)}});
            }
            std::sort(seeds.begin(), seeds.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
            for (auto& s : seeds) path.push_back(std::move(s.second));
        }

        double length = path_length(x, y, path);
        bool converged = false;
        for (;;) {
            converged = false;
            double improvement = 0.0;
            for (; out.iterations < options.max_iterations; ++out.iterations) {
                const bool forward = out.iterations % 2 == 0;
                for (std::size_t step = 0; step < path.size();) {
                    const std::size_t i = forward ? step : path.size() - 1 - step;
                    const Eigen::VectorXd& a = i == 0 ? x : path[i - 1].exit;
                    const Eigen::VectorXd& b = i + 1 == path.size() ? y : path[i + 1].entry;
                    if (!relax(path[i], a, b)) {
                        path.erase(path.begin() + static_cast<std::ptrdiff_t>(i));
                        if (!forward && step > 0) --step;
                        continue;
                    }
                    ++step;
                }
                const double next = path_length(x, y, path);
                improvement = length - next;
                length = next;
                if (std::abs(improvement) < options.tolerance) {
                    converged = true;
                    ++out.iterations;
                    break;
                }
            }
            out.residual = std::abs(improvement);
            if (!converged) break;
            // Re-seed when a hyperbolic arc penetrates a horoball not on the path.
            bool reseeded = false;
            for (std::size_t i = 0; i <= path.size() && !reseeded; ++i) {
                const Eigen::VectorXd& a = i == 0 ? x : path[i - 1].exit;
                const Eigen::VectorXd& b = i == path.size() ? y : path[i].entry;
                std::vector<std::size_t> skip;
                if (i > 0) skip.push_back(path[i - 1].ball);
                if (i < path.size()) skip.push_back(path[i].ball);
                std::optional<std::size_t> worst;
                if (penetration(a, b, &worst, skip) > 1e-12 && worst) {
                    const auto h = segment_hit(a, b, *worst);
                    path.insert(path.begin() + static_cast<std::ptrdiff_t>(i),
                                Crossing{*worst, segment_point(a, b, h.entry), segment_point(a, b, h.exit)});
                    reseeded = true;
                }
            }
            if (!reseeded) break;
            if (++out.reseeds > options.max_reseeds) {
                converged = false;
                break;
            }
            length = path_length(x, y, path);
        }
        out.locally_optimal = converged;
        out.total_length = length;
        // Arcs, dropping empty ones.
        auto push = [&](ArcKind kind, const Eigen::VectorXd& a, const Eigen::VectorXd& b, double len,
                        std::optional<std::size_t> ball) {
            if (len <= 1e-15) return;
            out.arcs.push_back({kind, a, b, len, ball});
        };
        Eigen::VectorXd cur = x;
        for (const auto& c : path) {
            push(ArcKind::Hyperbolic, cur, c.entry, hyperboloid_distance(cur, c.entry), std::nullopt);
            push(ArcKind::Horospherical, c.entry, c.exit, horo_length(c), c.ball);
            cur = c.exit;
        }
        push(ArcKind::Hyperbolic, cur, y, hyperboloid_distance(cur, y), std::nullopt);
        if (!converged)
            out.residual = std::max(out.residual, options.tolerance);
        return out;
    }

    /// Point at arc-length s along the path.
    Eigen::VectorXd point_at(const TruncatedGeodesic& g, double s) const {
        if (g.arcs.empty()) fail(ErrorKind::DegenerateSegment, "empty path");
        for (const auto& arc : g.arcs) {
            if (s > arc.length && &arc != &g.arcs.back()) {
                s -= arc.length;
                continue;
            }
            s = std::clamp(s, 0.0, arc.length);
            if (arc.kind == ArcKind::Hyperbolic) return segment_point(arc.start, arc.end, s);
            const std::size_t k = *arc.horoball;
            const Eigen::VectorXd u0 = chart(k, arc.start);
            const Eigen::VectorXd u1 = chart(k, arc.end);
            Eigen::VectorXd u = u0 + (u1 - u0) * (s / arc.length);
            u(u.size() - 1) = balls_[k].level;
            return unchart(k, u);
        }
        return g.arcs.back().end;
    }

    GeodesicInvariants check(const TruncatedGeodesic& g, std::size_t samples = 64) const {
        GeodesicInvariants inv;
        for (std::size_t i = 0; i < g.arcs.size(); ++i) {
            const auto& a = g.arcs[i];
            if (i > 0) {
                if (a.kind == g.arcs[i - 1].kind) inv.alternates = false;
                if ((a.start - g.arcs[i - 1].end).norm() > 1e-9 * std::max(1.0, a.start.norm())) inv.connected = false;
            }
            if (a.kind == ArcKind::Horospherical) {
                const auto& b = balls_[*a.horoball];
                for (std::size_t s = 0; s <= samples; ++s) {
                    TruncatedGeodesic one;
                    one.arcs.push_back(a);
                    const Eigen::VectorXd p = point_at(one, a.length * static_cast<double>(s) / static_cast<double>(samples));
                    if (std::abs(b.value(p) / b.alpha - 1.0) > 1e-8) inv.on_horospheres = false;
                    for (std::size_t k = 0; k < balls_.size(); ++k)
                        if (k != *a.horoball && balls_[k].value(p) < balls_[k].alpha)
                            inv.max_penetration = std::max(inv.max_penetration, balls_[k].depth(p));
                }
            } else {
                for (std::size_t s = 0; s <= samples; ++s) {
                    const Eigen::VectorXd p =
                        segment_point(a.start, a.end, a.length * static_cast<double>(s) / static_cast<double>(samples));
                    for (std::size_t k = 0; k < balls_.size(); ++k)
                        if (balls_[k].value(p) < balls_[k].alpha)
                            inv.max_penetration = std::max(inv.max_penetration, balls_[k].depth(p));
                }
            }
        }
        inv.avoids = inv.max_penetration < 1e-8;
        return inv;
    }

private:
    struct Crossing {
        std::size_t ball;
        Eigen::VectorXd entry;
        Eigen::VectorXd exit;
    };

    double horo_length(const Crossing& c) const {
        // Intrinsic flat distance on a horosphere: 2 sinh(d / 2).
        return 2.0 * std::sinh(0.5 * hyperboloid_distance(c.entry, c.exit));
    }

    double path_length(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const std::vector<Crossing>& path) const {
        double total = 0.0;
        Eigen::VectorXd cur = x;
        for (const auto& c : path) {
            total += hyperboloid_distance(cur, c.entry) + horo_length(c);
            cur = c.exit;
        }
        return total + hyperboloid_distance(cur, y);
    }

    /// Optimal entry and exit on the horosphere of c.ball between the anchors a and b:
    /// the tangency points of the geodesics from a and b, in the vertical plane through
    /// both. Returns false when the segment [a, b] need not touch the horoball.
    bool relax(Crossing& c, const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
        const std::size_t k = c.ball;
        const double h = balls_[k].level;
        const Eigen::VectorXd ca = chart(k, a);
        const Eigen::VectorXd cb = chart(k, b);
        const Eigen::Index n = static_cast<Eigen::Index>(dim_);
        const Eigen::VectorXd delta = cb.head(n - 1) - ca.head(n - 1);
        const double span = delta.norm();
        if (span < 1e-15) return false;
        const Eigen::VectorXd dir = delta / span;
        // Anchors on the horosphere (up to rounding) are their own tangency points.
        auto reach = [&](double t) { return t >= h * (1.0 - 1e-12) ? 0.0 : std::sqrt(h * h - t * t); };
        const double ra = reach(ca(n - 1));
        const double rb = reach(cb(n - 1));
        const double from = ra;
        const double to = span - rb;
        if (from >= to) return false;
        Eigen::VectorXd e(n), f(n);
        e.head(n - 1) = ca.head(n - 1) + from * dir;
        f.head(n - 1) = ca.head(n - 1) + to * dir;
        e(n - 1) = h;
        f(n - 1) = h;
        c.entry = ra == 0.0 ? a : unchart(k, e);
        c.exit = rb == 0.0 ? b : unchart(k, f);
        return true;
    }

    std::size_t dim_;
    std::vector<Horoball> balls_;
    std::vector<Eigen::MatrixXd> charts_;
};

inline TruncatedGeodesic truncated_geodesic(const ModelPoint& x, const ModelPoint& y, const TruncatedSpace& space,
                                            const GeodesicOptions& options = {}) {
    return space.geodesic(to_hyperboloid_coords(x), to_hyperboloid_coords(y), options);
}

// CAT(0) comparison
// ~~~~~~~~~~~~~~~~~
struct Comparison {
    std::array<double, 3> sides{};
    double max_excess = -std::numeric_limits<double>::infinity();
    double residual = 0.0;
    std::size_t samples = 0;
    /// Every side and every sampled chord is a single hyperbolic arc.
    bool pure_hyperbolic = true;
    bool invariants_ok = true;
    std::array<TruncatedGeodesic, 3> paths;
};

/// Compares the geodesic triangle on v[0], v[1], v[2] with its Euclidean comparison
/// triangle at the fractions 1/4, 1/2, 3/4 of each side, over pairs of points on
/// different sides. Side i joins v[i] to v[i + 1].
inline Comparison compare_triangle(const TruncatedSpace& space, const std::array<Eigen::VectorXd, 3>& v,
                                   const GeodesicOptions& options) {
    Comparison out;
    for (std::size_t i = 0; i < 3; ++i) {
        out.paths[i] = space.geodesic(v[i], v[(i + 1) % 3], options);
        out.sides[i] = out.paths[i].total_length;
        out.residual = std::max(out.residual, out.paths[i].residual);
        if (out.paths[i].arcs.size() > 1) out.pure_hyperbolic = false;
        if (!space.check(out.paths[i], 16).ok()) out.invariants_ok = false;
    }
    const double c = out.sides[0], a = out.sides[1], b = out.sides[2];
    std::array<Eigen::Vector2d, 3> vbar;
    vbar[0] = {0.0, 0.0};
    vbar[1] = {c, 0.0};
    const double px = c > 0 ? (b * b + c * c - a * a) / (2.0 * c) : 0.0;
    vbar[2] = {px, std::sqrt(std::max(0.0, b * b - px * px))};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j)
            for (double s : {0.25, 0.5, 0.75})
                for (double t : {0.25, 0.5, 0.75}) {
                    if (out.sides[i] <= 0 || out.sides[j] <= 0) continue;
                    const Eigen::VectorXd p = space.point_at(out.paths[i], s * out.sides[i]);
                    const Eigen::VectorXd q = space.point_at(out.paths[j], t * out.sides[j]);
                    const Eigen::Vector2d pbar = vbar[i] + s * (vbar[(i + 1) % 3] - vbar[i]);
                    const Eigen::Vector2d qbar = vbar[j] + t * (vbar[(j + 1) % 3] - vbar[j]);
                    const auto chord = space.geodesic(p, q, options);
                    out.residual = std::max(out.residual, chord.residual);
                    if (chord.arcs.size() > 1) out.pure_hyperbolic = false;
                    out.max_excess = std::max(out.max_excess, chord.total_length - (pbar - qbar).norm());
                    ++out.samples;
                }
    return out;
}

struct Cat0Report {
    std::array<double, 3> sides{};
    double max_excess = -std::numeric_limits<double>::infinity();
    double residual = 0.0;
    std::size_t samples = 0;
    bool pure_hyperbolic = true;
    bool invariants_ok = true;
    /// Corner triangles (vertex, point on each adjacent side) whose three sides are
    /// single hyperbolic arcs, and the largest excess among them.
    std::size_t subtriangles = 0;
    double subtriangle_max_excess = -std::numeric_limits<double>::infinity();
    std::size_t large_subtriangles = 0;
    double large_subtriangle_max_excess = -std::numeric_limits<double>::infinity();
};

inline Cat0Report cat0_check(const TruncatedSpace& space, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& z, const GeodesicOptions& options = {}) {
    const auto main = compare_triangle(space, {x, y, z}, options);
    Cat0Report out;
    out.sides = main.sides;
    out.max_excess = main.max_excess;
    out.residual = main.residual;
    out.samples = main.samples;
    out.pure_hyperbolic = main.pure_hyperbolic;
    out.invariants_ok = main.invariants_ok;
    const std::array<Eigen::VectorXd, 3> v{x, y, z};
    const TruncatedSpace plain(space.dim(), {});
    for (std::size_t i = 0; i < 3; ++i) {
        // Sides leaving and entering v[i].
        const auto& out_path = main.paths[i];
        const auto& in_path = main.paths[(i + 2) % 3];
        if (out_path.arcs.empty() || in_path.arcs.empty()) continue;
        const Arc& first = out_path.arcs.front();
        const Arc& last = in_path.arcs.back();
        if (first.kind != ArcKind::Hyperbolic || last.kind != ArcKind::Hyperbolic) continue;
        for (double s : {0.5, 1.0})
            for (double t : {0.5, 1.0}) {
                const Eigen::VectorXd p = TruncatedSpace::segment_point(first.start, first.end, s * first.length);
                const Eigen::VectorXd q = TruncatedSpace::segment_point(last.end, last.start, t * last.length);
                if (hyperboloid_distance(p, q) < 1e-9) continue;
                const auto chord = space.geodesic(p, q, options);
                if (chord.arcs.size() != 1) continue;
                const auto sub = compare_triangle(plain, {v[i], p, q}, options);
                // Sides leaving a vertex along a common tangent arc give collinear corners.
                const auto& l = sub.sides;
                const double slack = std::min({l[0] + l[1] - l[2], l[1] + l[2] - l[0], l[2] + l[0] - l[1]});
                if (slack <= 1e-6 * (l[0] + l[1] + l[2])) continue;
                ++out.subtriangles;
                out.subtriangle_max_excess = std::max(out.subtriangle_max_excess, sub.max_excess);
                if (*std::min_element(sub.sides.begin(), sub.sides.end()) >= 0.5) {
                    ++out.large_subtriangles;
                    out.large_subtriangle_max_excess = std::max(out.large_subtriangle_max_excess, sub.max_excess);
                }
            }
    }
    return out;
}

struct Cat0Suite {
    std::size_t triangles = 0;
    std::size_t crossing_triangles = 0;
    std::size_t pure_triangles = 0;
    double max_excess = -std::numeric_limits<double>::infinity();
    /// Largest excess minus (1e-6 + residual); CAT(0) predicts <= 0.
    double worst_margin = -std::numeric_limits<double>::infinity();
    double max_residual = 0.0;
    /// Pure-hyperbolic triangles and corner subtriangles.
    std::size_t subtriangles = 0;
    double subtriangle_max_excess = -std::numeric_limits<double>::infinity();
    /// Those with every side at least 0.5.
    std::size_t large_subtriangles = 0;
    double large_subtriangle_max_excess = -std::numeric_limits<double>::infinity();
    std::vector<double> excesses;
    bool invariants_ok = true;
    bool passes = false;
};

/// Random triangles with vertices in B(center, radius) outside the open horoballs.
inline Cat0Suite cat0_suite(const TruncatedSpace& space, const Eigen::VectorXd& center, double radius,
                            std::size_t count, std::uint64_t seed, const GeodesicOptions& options = {}) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::size_t n = space.dim();
    const Eigen::MatrixXd boost = boost_to(center);
    auto sample = [&]() {
        for (int attempt = 0; attempt < 100000; ++attempt) {
            Eigen::VectorXd dir(n);
            for (std::size_t k = 0; k < n; ++k) dir(static_cast<Eigen::Index>(k)) = normal(rng);
            dir.normalize();
            const double t = radius * unif(rng);
            Eigen::VectorXd p(n + 1);
            p(0) = std::cosh(t);
            p.tail(n) = std::sinh(t) * dir;
            const Eigen::VectorXd y = normalize_timelike(boost * p);
            bool free = true;
            for (const auto& b : space.horoballs())
                if (b.value(y) < b.alpha) {
                    free = false;
                    break;
                }
            if (free) return y;
        }
        fail(ErrorKind::BudgetExceeded, "could not sample a point outside the horoballs");
    };
    Cat0Suite out;
    auto pure = [&](double excess, const std::array<double, 3>& sides) {
        ++out.subtriangles;
        out.subtriangle_max_excess = std::max(out.subtriangle_max_excess, excess);
        if (*std::min_element(sides.begin(), sides.end()) >= 0.5) {
            ++out.large_subtriangles;
            out.large_subtriangle_max_excess = std::max(out.large_subtriangle_max_excess, excess);
        }
    };
    for (std::size_t i = 0; i < count; ++i) {
        const Eigen::VectorXd x = sample(), y = sample(), z = sample();
        const auto r = cat0_check(space, x, y, z, options);
        ++out.triangles;
        out.max_excess = std::max(out.max_excess, r.max_excess);
        out.excesses.push_back(r.max_excess);
        out.worst_margin = std::max(out.worst_margin, r.max_excess - (1e-6 + r.residual));
        out.max_residual = std::max(out.max_residual, r.residual);
        if (!r.invariants_ok) out.invariants_ok = false;
        if (r.pure_hyperbolic) {
            ++out.pure_triangles;
            pure(r.max_excess, r.sides);
        } else {
            ++out.crossing_triangles;
        }
        out.subtriangles += r.subtriangles;
        out.large_subtriangles += r.large_subtriangles;
        out.subtriangle_max_excess = std::max(out.subtriangle_max_excess, r.subtriangle_max_excess);
        out.large_subtriangle_max_excess = std::max(out.large_subtriangle_max_excess, r.large_subtriangle_max_excess);
    }
    out.passes = out.worst_margin <= 0 && out.subtriangle_max_excess < 0 &&
                 out.large_subtriangle_max_excess <= -1e-4 && out.invariants_ok;
    return out;
}

// Compactness
// ~~~~~~~~~~~
struct CompactnessOptions {
    std::size_t base_grid = 64;
    std::size_t refinements = 2;
    std::size_t facet_samples = 1000;
    double ray_length = 40.0;
    double ray_step = 0.05;
    double threshold = 20.0;
    double stability = 1e-2;
};

struct CompactnessLevel {
    std::size_t grid = 0;
    std::size_t samples = 0;
    double supremum = 0.0;
};

struct CompactnessReport {
    std::vector<CompactnessLevel> levels;
    double supremum = 0.0;
    double threshold = 20.0;
    bool exceeds_threshold = false;
    bool stable = false;
    /// Sampled witness only: the supremum stays below the threshold and stabilizes.
    bool bounded_at_scale = false;
};

/// Samples the domain cut by the hull minus the horoballs: a Klein grid, points along
/// the facets, and geodesic rays from the basepoint to the ideal vertices; reports the
/// largest distance from the basepoint at successive refinements.
inline CompactnessReport compactness_check(const GeneratedGroup& group, const DirichletDomain& domain,
                                           const KleinHull* hull, const std::vector<Horoball>& horoballs,
                                           const CompactnessOptions& options = {}) {
    const Frame& frame = group.frame();
    const QuadraticForm& form = group.form();
    const std::size_t n = form.hyperbolic_dim();
    const RatVector xi_lattice = to_rational(domain.basepoint);
    const Eigen::VectorXd xi = to_hyperboloid_coords(frame.point(xi_lattice));
    CompactnessReport out;
    out.threshold = options.threshold;

    auto accept = [&](const Eigen::VectorXd& y) {
        if (!domain.contains(frame.to_lattice(y))) return false;
        for (const auto& b : horoballs)
            if (b.value(y) < b.alpha) return false;
        if (hull && !hull->empty()) {
            const Eigen::VectorXd k = y.tail(static_cast<Eigen::Index>(n)) / y(0);
            if (!hull->contains(k, 1e-9)) return false;
        }
        return true;
    };

    std::vector<std::vector<RatVector>> facet_vertex_sets;
    for (const auto& f : domain.facets) {
        std::vector<RatVector> vs;
        for (std::size_t c = 0; c < domain.cone.constraints().size(); ++c) {
            if (domain.cone.constraints()[c] != f.functional) continue;
            for (auto r : domain.cone.rays_on(c)) {
                RatVector v = to_rational(domain.cone.rays()[r]);
                const Rational s = form.inner(v, xi_lattice);
                for (auto& x : v) x /= s;
                vs.push_back(v);
            }
        }
        facet_vertex_sets.push_back(std::move(vs));
    }
    std::vector<Eigen::VectorXd> ideal_dirs;
    for (const auto& v : domain.ideal_vertices) ideal_dirs.push_back(frame.to_standard(v));

    for (std::size_t level = 0; level <= options.refinements; ++level) {
        const std::size_t scale = std::size_t{1} << level;
        CompactnessLevel lv;
        std::size_t grid = options.base_grid * scale;
        if (n >= 3) grid = std::max<std::size_t>(8, grid / 4);
        lv.grid = grid;
        double sup = 0.0;
        auto consider = [&](const Eigen::VectorXd& y) {
            if (!accept(y)) return;
            ++lv.samples;
            sup = std::max(sup, hyperboloid_distance(y, xi));
        };
        // Klein grid.
        std::vector<std::size_t> idx(n, 0);
        for (;;) {
            Eigen::VectorXd k(n);
            for (std::size_t i = 0; i < n; ++i)
                k(static_cast<Eigen::Index>(i)) = -1.0 + 2.0 * (static_cast<double>(idx[i]) + 0.5) / static_cast<double>(grid);
            if (k.squaredNorm() < 1.0) consider(to_hyperboloid_coords({Model::Klein, k}));
            std::size_t d = 0;
            while (d < n && ++idx[d] == grid) idx[d++] = 0;
            if (d == n) break;
        }
        // Facets: segments between pairs of facet vertices in the slice.
        const std::size_t m = options.facet_samples * scale;
        for (const auto& vs : facet_vertex_sets)
            for (std::size_t a = 0; a < vs.size(); ++a)
                for (std::size_t b = a + 1; b < vs.size(); ++b) {
                    const Eigen::VectorXd va = to_eigen(vs[a]);
                    const Eigen::VectorXd vb = to_eigen(vs[b]);
                    for (std::size_t s = 0; s <= m; ++s) {
                        const double t = static_cast<double>(s) / static_cast<double>(m);
                        const Eigen::VectorXd lat = (1.0 - t) * va + t * vb;
                        const Eigen::VectorXd stdv = frame.to_standard(lat);
                        if (!(minkowski(stdv, stdv) > 0) || stdv(0) <= 0) continue;
                        consider(normalize_timelike(stdv));
                    }
                }
        // Rays from the basepoint towards the ideal vertices. The ray stays in the closed
        // domain by convexity; along it <y, d> = A e^s + B e^-s, evaluated in that form
        // because the hyperboloid coordinates overflow in precision long before the cusp.
        const double step = options.ray_step / static_cast<double>(scale);
        for (std::size_t v = 0; v < ideal_dirs.size(); ++v) {
            const Eigen::VectorXd& p = ideal_dirs[v];
            const Eigen::VectorXd u = p / minkowski(p, xi) - xi;
            std::vector<std::pair<double, double>> coeffs;
            for (const auto& b : horoballs) {
                const bool own = b.null == primitive(domain.ideal_vertices[v]);
                const double a = own ? 0.0 : 0.5 * minkowski(xi + u, b.base.direction) / b.alpha;
                coeffs.emplace_back(a, 0.5 * minkowski(xi - u, b.base.direction) / b.alpha);
            }
            for (double s = step; s <= options.ray_length; s += step) {
                bool free = true;
                for (const auto& [a, b] : coeffs)
                    if (a * std::exp(s) + b * std::exp(-s) < 1.0) {
                        free = false;
                        break;
                    }
                if (!free) continue;
                ++lv.samples;
                sup = std::max(sup, s);
            }
        }
        lv.supremum = sup;
        out.levels.push_back(lv);
    }
    out.supremum = out.levels.back().supremum;
    out.exceeds_threshold = false;
    for (const auto& lv : out.levels)
        if (lv.supremum > options.threshold) out.exceeds_threshold = true;
    out.stable = out.levels.size() >= 3;
    for (std::size_t i = out.levels.size() >= 3 ? out.levels.size() - 2 : 1; i < out.levels.size(); ++i)
        if (std::abs(out.levels[i].supremum - out.levels[i - 1].supremum) > options.stability) out.stable = false;
    out.bounded_at_scale = !out.exceeds_threshold && out.stable;
    return out;
}

} // namespace horocat
