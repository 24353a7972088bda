#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "horocat/groups.hpp"
#include "horocat/isometries.hpp"

namespace horocat {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

namespace detail {

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Each index is handled by
/// exactly one thread, so results written per index are deterministic.
template <class Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, n));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += jobs) fn(i);
        });
    for (auto& th : pool) th.join();
}

inline Integer trace(const IntMatrix& m) {
    Integer t = 0;
    for (std::size_t i = 0; i < m.rows(); ++i) t += m(i, i);
    return t;
}

/// Eigenvalues of a finite-order element lie on the unit circle, so |trace| <= dim.
inline bool may_have_finite_order(const IntMatrix& m) {
    const Integer t = trace(m);
    return abs(t) <= Integer(static_cast<long>(m.rows()));
}

inline bool has_finite_order(const IntMatrix& m, const QuadraticForm& form) {
    if (!may_have_finite_order(m)) return false;
    return classify(FormIsometry{m, ""}, form).kind == IsometryClass::Elliptic;
}

inline std::string matrix_key(const IntMatrix& m) {
    std::string out;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out += m(i, j).get_str();
            out += ',';
        }
    return out;
}

inline BoundaryPoint sphere_point(const Eigen::VectorXd& s) {
    Eigen::VectorXd d(s.size() + 1);
    d(0) = 1.0;
    d.tail(s.size()) = s.normalized();
    return {d, std::nullopt};
}

inline Eigen::VectorXd gaussian(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
    return v;
}

/// Unit vectors orthogonal to c. On a circle these are the two normals.
inline std::vector<Eigen::VectorXd> rim_directions(const Eigen::VectorXd& c, std::size_t count, std::mt19937_64& rng) {
    std::vector<Eigen::VectorXd> out;
    if (c.size() == 2) {
        const Eigen::Vector2d n(-c(1), c(0));
        out.emplace_back(n);
        out.emplace_back(-n);
        return out;
    }
    while (out.size() < count) {
        Eigen::VectorXd u = gaussian(static_cast<std::size_t>(c.size()), rng);
        u -= u.dot(c) * c;
        if (u.norm() > 1e-6) out.push_back(u.normalized());
    }
    return out;
}

inline double angle(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return std::acos(std::clamp(a.dot(b), -1.0, 1.0));
}

inline Eigen::VectorXd act_on_sphere(const Eigen::MatrixXd& g, const Eigen::VectorXd& s) {
    Eigen::VectorXd d(s.size() + 1);
    d(0) = 1.0;
    d.tail(s.size()) = s;
    return BoundaryPoint::from_null(g * d).sphere();
}

/// Largest angle from `target` of the images of the rim of the cap of aperture theta
/// about `center`, minus theta. Non-positive iff the rim lands in the target cap.
inline double rim_excess(const Eigen::MatrixXd& g, const Eigen::VectorXd& center, const Eigen::VectorXd& target,
                         const std::vector<Eigen::VectorXd>& rim, double theta) {
    double worst = -kInfinity;
    for (const auto& u : rim) {
        const Eigen::VectorXd s = std::cos(theta) * center + std::sin(theta) * u;
        worst = std::max(worst, angle(act_on_sphere(g, s), target));
    }
    return worst - theta;
}

} // namespace detail

// Ping-pong certificates
// ~~~~~~~~~~~~~~~~~~~~~~
struct PingPongCap {
    BoundaryPoint center;
    double aperture = 0.0;
};

/// One row of the table: the letter maps the complement of cap `excluded` into cap `target`.
struct PingPongMove {
    std::string letter;
    std::size_t excluded = 0;
    std::size_t target = 0;
    std::size_t checks = 0;
    double margin = 0.0;
};

struct PingPongCertificate {
    std::string first;
    std::string second;
    std::size_t first_power = 1;
    std::size_t second_power = 1;
    /// Caps about the attracting and repelling points of the first, then the second element.
    std::array<PingPongCap, 4> caps;
    std::vector<PingPongMove> table;
    std::size_t rim_samples = 0;
    std::size_t interior_samples = 0;
    bool fixed_points_checked = false;
    double margin = 0.0;
    std::size_t words_checked = 0;
    bool words_nontrivial = false;
    bool verified = false;
};

struct PingPongOptions {
    std::size_t max_power = 3;
    std::size_t rim_samples = 1000;
    std::size_t interior_samples = 1000;
    std::size_t words = 200;
    std::size_t word_length = 8;
    std::uint64_t seed = 1;
};

namespace detail {

struct PowerData {
    IntMatrix exact;
    Eigen::MatrixXd forward;
    Eigen::MatrixXd backward;
};

inline PowerData power_data(const IntMatrix& g, std::size_t p, const QuadraticForm& form, const Frame& frame) {
    PowerData d;
    d.exact = power(g, p);
    d.forward = frame.to_standard(d.exact);
    d.backward = frame.to_standard(isometry_inverse(d.exact, form));
    return d;
}

/// Smallest aperture (up to bisection accuracy) for which both the element and its
/// inverse move the rims into the opposite caps; nullopt if even the largest
/// admissible aperture fails.
inline std::optional<double> minimal_aperture(const PowerData& g, const Eigen::VectorXd& plus, const Eigen::VectorXd& minus,
                                              const std::vector<Eigen::VectorXd>& rim_plus,
                                              const std::vector<Eigen::VectorXd>& rim_minus, double upper) {
    auto ok = [&](double theta) {
        return rim_excess(g.forward, minus, plus, rim_minus, theta) <= 0 &&
               rim_excess(g.backward, plus, minus, rim_plus, theta) <= 0;
    };
    if (!ok(upper)) return std::nullopt;
    double lo = 0.0;
    double hi = upper;
    for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

} // namespace detail

/// Tries to certify that a^p and b^q (p, q <= max_power) generate a free group by
/// ping-pong on caps about their fixed points. Both elements must be loxodromic.
inline std::optional<PingPongCertificate> ping_pong_certificate(const GeneratedGroup& group, const FormIsometry& a,
                                                                const FormIsometry& b,
                                                                const PingPongOptions& options = {}) {
    const QuadraticForm& form = group.form();
    const Frame& frame = group.frame();
    const auto ca = classify(a, form);
    const auto cb = classify(b, form);
    if (!ca.loxodromic() || !cb.loxodromic()) return std::nullopt;
    const std::array<Eigen::VectorXd, 4> pts{ca.fixed_boundary[0].sphere(), ca.fixed_boundary[1].sphere(),
                                             cb.fixed_boundary[0].sphere(), cb.fixed_boundary[1].sphere()};
    const double sep_a = detail::angle(pts[0], pts[1]);
    const double sep_b = detail::angle(pts[2], pts[3]);
    double cross = kInfinity;
    for (int i = 0; i < 2; ++i)
        for (int j = 2; j < 4; ++j) cross = std::min(cross, detail::angle(pts[i], pts[j]));
    if (cross < 1e-6) return std::nullopt;

    std::mt19937_64 rng(options.seed);
    std::array<std::vector<Eigen::VectorXd>, 4> rims;
    for (int i = 0; i < 4; ++i) rims[i] = detail::rim_directions(pts[i], options.rim_samples, rng);

    for (std::size_t p = 1; p <= options.max_power; ++p) {
        const auto da = detail::power_data(a.matrix, p, form, frame);
        const auto db = detail::power_data(b.matrix, p, form, frame);
        const double upper_a = std::min(0.5 * sep_a, cross) * (1 - 1e-9);
        const double upper_b = std::min(0.5 * sep_b, cross) * (1 - 1e-9);
        const auto ta = detail::minimal_aperture(da, pts[0], pts[1], rims[0], rims[1], upper_a);
        const auto tb = detail::minimal_aperture(db, pts[2], pts[3], rims[2], rims[3], upper_b);
        if (!ta || !tb) continue;
        const double gap = std::min({cross - *ta - *tb, sep_a - 2 * *ta, sep_b - 2 * *tb});
        if (gap <= 0) continue;
        const double theta_a = *ta + gap / 4;
        const double theta_b = *tb + gap / 4;

        PingPongCertificate cert;
        cert.first = a.word;
        cert.second = b.word;
        cert.first_power = cert.second_power = p;
        cert.caps = {PingPongCap{ca.fixed_boundary[0], theta_a}, PingPongCap{ca.fixed_boundary[1], theta_a},
                     PingPongCap{cb.fixed_boundary[0], theta_b}, PingPongCap{cb.fixed_boundary[1], theta_b}};
        cert.rim_samples = rims[0].size();
        cert.margin = kInfinity;
        bool ok = true;

        struct Letter {
            std::string name;
            const Eigen::MatrixXd* m;
            std::size_t excluded;
            std::size_t target;
        };
        const std::string pa = p > 1 ? "^" + std::to_string(p) : "";
        const std::string inv = p > 1 ? "^-" + std::to_string(p) : "^-1";
        const std::array<Letter, 4> letters{Letter{"(" + a.word + ")" + pa, &da.forward, 1, 0},
                                            Letter{"(" + a.word + ")" + inv, &da.backward, 0, 1},
                                            Letter{"(" + b.word + ")" + pa, &db.forward, 3, 2},
                                            Letter{"(" + b.word + ")" + inv, &db.backward, 2, 3}};
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (const auto& l : letters) {
            PingPongMove move{l.name, l.excluded, l.target, 0, kInfinity};
            const double src = cert.caps[l.excluded].aperture;
            const double dst = cert.caps[l.target].aperture;
            auto check = [&](const Eigen::VectorXd& s) {
                const double slack = dst - detail::angle(detail::act_on_sphere(*l.m, s), pts[l.target]);
                move.margin = std::min(move.margin, slack);
                ++move.checks;
            };
            for (const auto& u : rims[l.excluded]) check(std::cos(src) * pts[l.excluded] + std::sin(src) * u);
            std::size_t interior = 0;
            while (interior < options.interior_samples) {
                const Eigen::VectorXd s = detail::gaussian(static_cast<std::size_t>(pts[0].size()), rng).normalized();
                if (detail::angle(s, pts[l.excluded]) <= src) continue;
                check(s);
                ++interior;
            }
            cert.interior_samples = interior;
            for (std::size_t k = 0; k < 4; ++k)
                if (k != l.excluded) check(pts[k]);
            cert.margin = std::min(cert.margin, move.margin);
            if (move.margin < 0) ok = false;
            cert.table.push_back(move);
        }
        cert.fixed_points_checked = true;
        if (!ok) continue;

        // Reduced words in the certified pair must be non-trivial.
        const std::array<IntMatrix, 4> gens{da.exact, isometry_inverse(da.exact, form), db.exact,
                                            isometry_inverse(db.exact, form)};
        std::uniform_int_distribution<std::size_t> length(1, options.word_length);
        std::uniform_int_distribution<std::size_t> pick(0, 3);
        cert.words_nontrivial = true;
        for (std::size_t w = 0; w < options.words; ++w) {
            const std::size_t len = length(rng);
            IntMatrix m = IntMatrix::identity(form.dim());
            std::size_t last = 4;
            for (std::size_t k = 0; k < len; ++k) {
                std::size_t letter = pick(rng);
                while (last < 4 && letter == (last ^ 1)) letter = pick(rng);
                m = m * gens[letter];
                last = letter;
            }
            ++cert.words_checked;
            if (m.is_identity()) cert.words_nontrivial = false;
        }
        cert.verified = cert.words_nontrivial;
        if (cert.verified) return cert;
    }
    return std::nullopt;
}

// Tits alternative
// ~~~~~~~~~~~~~~~~
enum class TitsKind { VirtuallyAbelian, ContainsFreeGroup, Inconclusive };

inline const char* to_string(TitsKind k) {
    switch (k) {
    case TitsKind::VirtuallyAbelian: return "VirtuallyAbelian";
    case TitsKind::ContainsFreeGroup: return "ContainsFreeGroup";
    case TitsKind::Inconclusive: return "Inconclusive";
    }
    return "?";
}

struct TitsVerdict {
    TitsKind kind = TitsKind::Inconclusive;
    std::size_t radius = 0;
    std::size_t rank = 0;
    /// Words generating the free abelian subgroup of finite index.
    std::vector<std::string> witness;
    std::optional<PingPongCertificate> certificate;
    std::string reason;
    std::size_t commutators_checked = 0;
};

struct TitsOptions {
    PingPongOptions ping_pong;
    std::size_t max_candidates = 40;
    std::size_t max_pairs = 200;
};

namespace detail {

/// Translation vector (g^k - 1) w of the unipotent power of a parabolic.
inline RatVector parabolic_translation(const ClassifiedIsometry& c, const QuadraticForm& form) {
    Polynomial rest = c.charpoly;
    const Polynomial linear{-1, 1};
    while ((rest % linear).is_zero()) rest = rest / linear;
    std::size_t k = cyclotomic_order(rest);
    if (k == 0) k = 1;
    const IntMatrix u = power(c.base.matrix, k);
    const RatVector w = form.witness();
    const RatVector t = to_rational(u) * w;
    RatVector diff(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) diff[j] = t[j] - w[j];
    return diff;
}

inline bool same_point(const BoundaryPoint& a, const BoundaryPoint& b) { return a.angle_to(b) < 1e-7; }

inline bool same_pair(const ClassifiedIsometry& a, const ClassifiedIsometry& b) {
    const auto& p = a.fixed_boundary;
    const auto& q = b.fixed_boundary;
    return (same_point(p[0], q[0]) && same_point(p[1], q[1])) || (same_point(p[0], q[1]) && same_point(p[1], q[0]));
}

/// Checks whether every infinite-order ball element fixes one common axis or one
/// common boundary point, and reads off the rank. nullopt means the configuration is
/// not elementary; a verdict with kind Inconclusive means it is, but the rank failed.
inline std::optional<TitsVerdict> elementary_verdict(const GeneratedGroup& group, const WordBall& ball) {
    const QuadraticForm& form = group.form();
    std::vector<ClassifiedIsometry> infinite;
    std::vector<std::size_t> index;
    for (std::size_t i = 1; i < ball.size(); ++i) {
        auto c = classify(FormIsometry{ball[i].matrix, ball[i].word}, form);
        if (c.kind == IsometryClass::Elliptic) continue;
        if (!infinite.empty()) {
            const auto& ref = infinite.front();
            if (c.kind != ref.kind) return std::nullopt;
            if (c.loxodromic() ? !same_pair(c, ref) : !same_point(c.fixed_boundary[0], ref.fixed_boundary[0]))
                return std::nullopt;
        }
        infinite.push_back(std::move(c));
        index.push_back(i);
    }
    TitsVerdict v;
    v.radius = ball.radius();
    if (infinite.empty()) {
        v.reason = "the enumerated ball contains only elements of finite order";
        return v;
    }
    // Commutators among the infinite-order elements must have finite order.
    const std::size_t limit = std::min<std::size_t>(infinite.size(), 24);
    for (std::size_t i = 0; i < limit; ++i)
        for (std::size_t j = i + 1; j < limit; ++j) {
            const IntMatrix& g = infinite[i].base.matrix;
            const IntMatrix& h = infinite[j].base.matrix;
            const IntMatrix comm = g * h * isometry_inverse(g, form) * isometry_inverse(h, form);
            ++v.commutators_checked;
            if (!comm.is_identity() && !has_finite_order(comm, form)) return std::nullopt;
        }
    if (infinite.front().loxodromic()) {
        std::size_t shortest = 0;
        for (std::size_t i = 1; i < infinite.size(); ++i)
            if (translation_length(infinite[i]).value < translation_length(infinite[shortest]).value) shortest = i;
        const double base = translation_length(infinite[shortest]).value;
        for (const auto& c : infinite) {
            const double ratio = translation_length(c).value / base;
            if (std::abs(ratio - std::round(ratio)) > 1e-6) {
                v.reason = "translation lengths along the common axis are incommensurable";
                return v;
            }
        }
        v.kind = TitsKind::VirtuallyAbelian;
        v.rank = 1;
        v.witness = {ball[index[shortest]].word};
        return v;
    }
    std::vector<RatVector> basis{to_rational(*infinite.front().fixed_boundary[0].exact)};
    for (std::size_t i = 0; i < infinite.size(); ++i) {
        auto trial = basis;
        trial.push_back(parabolic_translation(infinite[i], form));
        if (rank(trial) > basis.size()) {
            basis = std::move(trial);
            v.witness.push_back(ball[index[i]].word);
        }
    }
    v.kind = TitsKind::VirtuallyAbelian;
    v.rank = v.witness.size();
    return v;
}

} // namespace detail

/// Tits alternative on the word ball of radius R: a finite or elementary ball gives
/// VirtuallyAbelian, a certified ping-pong pair gives ContainsFreeGroup.
inline TitsVerdict tits_classify(const GeneratedGroup& group, std::size_t radius, const TitsOptions& options = {}) {
    const WordBall ball(group, radius);
    TitsVerdict out;
    out.radius = radius;
    if (ball.closed()) {
        out.kind = TitsKind::VirtuallyAbelian;
        out.rank = 0;
        out.reason = "the group is finite, of order " + std::to_string(ball.size());
        return out;
    }
    if (auto v = detail::elementary_verdict(group, ball)) {
        v->radius = radius;
        return *v;
    }

    const QuadraticForm& form = group.form();
    std::vector<ClassifiedIsometry> candidates;
    for (std::size_t i = 1; i < ball.size() && candidates.size() < options.max_candidates; ++i) {
        auto c = classify(FormIsometry{ball[i].matrix, ball[i].word}, form);
        if (!c.loxodromic()) continue;
        // Inverses and powers share the fixed pair and add nothing.
        bool seen = false;
        for (const auto& d : candidates) seen = seen || detail::same_pair(c, d);
        if (!seen) candidates.push_back(std::move(c));
    }
    std::size_t tried = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i)
        for (std::size_t j = i + 1; j < candidates.size() && tried < options.max_pairs; ++j, ++tried) {
            auto cert = ping_pong_certificate(group, candidates[i].base, candidates[j].base, options.ping_pong);
            if (!cert) continue;
            out.kind = TitsKind::ContainsFreeGroup;
            out.certificate = std::move(cert);
            return out;
        }
    out.reason = "no ping-pong certificate among " + std::to_string(tried) + " pairs of " +
                 std::to_string(candidates.size()) + " loxodromic candidates";
    return out;
}

// Finite subgroups
// ~~~~~~~~~~~~~~~~
struct FiniteSubgroup {
    std::vector<std::string> generators;
    std::vector<IntMatrix> elements;
    std::size_t order = 0;
    std::size_t class_id = 0;
};

struct CensusClass {
    std::size_t id = 0;
    std::size_t order = 0;
    std::vector<std::string> generators;
    std::size_t members = 0;
};

struct SubgroupCensus {
    std::size_t radius = 0;
    std::size_t torsion_elements = 0;
    std::vector<FiniteSubgroup> subgroups;
    std::vector<CensusClass> classes;
    std::size_t bound = 1;

    std::vector<std::size_t> orders() const {
        std::vector<std::size_t> out;
        for (const auto& c : classes) out.push_back(c.order);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }
};

namespace detail {

struct Closure {
    std::vector<IntMatrix> elements;
    bool finite = false;
    bool infinite_order = false;
};

/// Closes a set of generators under multiplication. Stops when an element of infinite
/// order appears or the closure exceeds the cap.
inline Closure close_subgroup(const std::vector<IntMatrix>& gens, const QuadraticForm& form, std::size_t cap) {
    Closure out;
    std::unordered_map<IntMatrix, std::size_t, ExactHash> seen;
    out.elements.push_back(IntMatrix::identity(form.dim()));
    seen.emplace(out.elements.back(), 0);
    for (std::size_t head = 0; head < out.elements.size(); ++head) {
        for (const auto& g : gens) {
            IntMatrix m = out.elements[head] * g;
            if (seen.count(m)) continue;
            if (!has_finite_order(m, form)) {
                out.infinite_order = true;
                return out;
            }
            if (out.elements.size() >= cap) return out;
            seen.emplace(m, out.elements.size());
            out.elements.push_back(std::move(m));
        }
    }
    out.finite = true;
    return out;
}

inline std::string subgroup_key(std::vector<IntMatrix> elements) {
    std::vector<std::string> keys;
    for (const auto& m : elements) keys.push_back(matrix_key(m));
    std::sort(keys.begin(), keys.end());
    std::string out;
    for (const auto& k : keys) out += k + ';';
    return out;
}

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

/// Indices of the finite-order non-identity ball elements.
inline std::vector<std::size_t> torsion_indices(const GeneratedGroup& group, const WordBall& ball, std::size_t jobs) {
    std::vector<char> flag(ball.size(), 0);
    parallel_for(ball.size() - 1, jobs,
                 [&](std::size_t k) { flag[k + 1] = has_finite_order(ball[k + 1].matrix, group.form()) ? 1 : 0; });
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i < ball.size(); ++i)
        if (flag[i]) out.push_back(i);
    return out;
}

} // namespace detail

/// Finite subgroups generated by torsion elements of the ball, closed under products
/// and kept when every element lies in the ball, then merged into conjugacy classes
/// by conjugating with ball elements.
inline SubgroupCensus finite_subgroup_census(const GeneratedGroup& group, std::size_t radius, std::size_t jobs = 1,
                                             std::size_t closure_cap = 512) {
    const WordBall ball(group, radius);
    const QuadraticForm& form = group.form();
    SubgroupCensus out;
    out.radius = radius;
    const auto torsion = detail::torsion_indices(group, ball, jobs);
    out.torsion_elements = torsion.size();

    std::map<std::string, std::size_t> known;
    auto consider = [&](std::vector<std::string> words, const std::vector<IntMatrix>& gens) {
        const auto closure = detail::close_subgroup(gens, form, closure_cap);
        if (!closure.finite) return;
        for (const auto& m : closure.elements)
            if (!ball.find(m)) return;
        const std::string key = detail::subgroup_key(closure.elements);
        if (known.count(key)) return;
        known.emplace(key, out.subgroups.size());
        FiniteSubgroup h;
        h.generators = std::move(words);
        h.order = closure.elements.size();
        h.elements = closure.elements;
        out.subgroups.push_back(std::move(h));
    };
    consider({}, {});
    for (auto i : torsion) consider({ball[i].word}, {ball[i].matrix});
    // Enlarge each subgroup by one more torsion element while the result stays finite.
    for (std::size_t s = 1; s < out.subgroups.size(); ++s) {
        for (auto i : torsion) {
            const IntMatrix& g = ball[i].matrix;
            const auto& h = out.subgroups[s];
            if (std::find(h.elements.begin(), h.elements.end(), g) != h.elements.end()) continue;
            bool plausible = true;
            for (const auto& e : h.elements) plausible = plausible && detail::has_finite_order(e * g, form);
            if (!plausible) continue;
            std::vector<IntMatrix> gens;
            for (const auto& w : h.generators) gens.push_back(group.evaluate(w));
            gens.push_back(g);
            auto words = h.generators;
            words.push_back(ball[i].word);
            consider(std::move(words), gens);
        }
    }
    std::stable_sort(out.subgroups.begin(), out.subgroups.end(),
                     [](const FiniteSubgroup& a, const FiniteSubgroup& b) { return a.order < b.order; });
    known.clear();
    for (std::size_t s = 0; s < out.subgroups.size(); ++s) known.emplace(detail::subgroup_key(out.subgroups[s].elements), s);

    detail::UnionFind classes(out.subgroups.size());
    std::vector<IntMatrix> inverses(ball.size());
    for (std::size_t k = 0; k < ball.size(); ++k) inverses[k] = isometry_inverse(ball[k].matrix, form);
    for (std::size_t s = 0; s < out.subgroups.size(); ++s) {
        for (std::size_t k = 1; k < ball.size(); ++k) {
            std::vector<IntMatrix> conj;
            for (const auto& e : out.subgroups[s].elements) conj.push_back(ball[k].matrix * e * inverses[k]);
            auto it = known.find(detail::subgroup_key(std::move(conj)));
            if (it != known.end()) classes.unite(s, it->second);
        }
    }
    std::map<std::size_t, std::size_t> id_of_root;
    for (std::size_t s = 0; s < out.subgroups.size(); ++s) {
        const std::size_t root = classes.find(s);
        auto [it, fresh] = id_of_root.emplace(root, out.classes.size());
        if (fresh)
            out.classes.push_back({out.classes.size(), out.subgroups[s].order, out.subgroups[s].generators, 0});
        out.subgroups[s].class_id = it->second;
        ++out.classes[it->second].members;
        out.bound = std::max(out.bound, out.subgroups[s].order);
    }
    return out;
}

// Burnside property
// ~~~~~~~~~~~~~~~~~
struct BurnsideTrial {
    std::vector<std::string> subset;
    std::size_t closure_size = 0;
    bool finite = false;
    bool infinite_order = false;
};

struct BurnsideReport {
    std::size_t radius = 0;
    std::size_t torsion_elements = 0;
    std::vector<BurnsideTrial> trials;
    std::size_t finite_closures = 0;
    /// Subsets whose closure produced an element of infinite order (not torsion subgroups).
    std::size_t not_torsion = 0;
    /// Closures that outgrew the cap without an infinite-order element.
    std::size_t candidates = 0;
    std::size_t max_closure = 0;
    bool passes = true;
};

/// Random subsets of one to three torsion elements of the ball are closed under
/// products. A closure that keeps growing while all its elements have finite order
/// would contradict the Burnside property.
inline BurnsideReport burnside_check(const GeneratedGroup& group, std::size_t radius, std::size_t trials,
                                     std::uint64_t seed = 1, std::size_t cap = 2048) {
    const WordBall ball(group, radius);
    BurnsideReport out;
    out.radius = radius;
    const auto torsion = detail::torsion_indices(group, ball, 1);
    out.torsion_elements = torsion.size();
    if (torsion.empty()) return out;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> size(1, std::min<std::size_t>(3, torsion.size()));
    std::uniform_int_distribution<std::size_t> pick(0, torsion.size() - 1);
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t k = size(rng);
        std::vector<std::size_t> chosen;
        while (chosen.size() < k) {
            const std::size_t i = torsion[pick(rng)];
            if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) chosen.push_back(i);
        }
        BurnsideTrial trial;
        std::vector<IntMatrix> gens;
        for (auto i : chosen) {
            trial.subset.push_back(ball[i].word);
            gens.push_back(ball[i].matrix);
        }
        const auto closure = detail::close_subgroup(gens, group.form(), cap);
        trial.closure_size = closure.elements.size();
        trial.finite = closure.finite;
        trial.infinite_order = closure.infinite_order;
        if (closure.finite) {
            ++out.finite_closures;
            out.max_closure = std::max(out.max_closure, trial.closure_size);
        } else if (closure.infinite_order) {
            ++out.not_torsion;
        } else {
            ++out.candidates;
        }
        out.trials.push_back(std::move(trial));
    }
    out.passes = out.candidates == 0;
    return out;
}

// Distortion
// ~~~~~~~~~~
struct DistortionEntry {
    std::size_t n = 0;
    std::size_t length = 0;
    double ratio = 0.0;
};

struct DistortionProfile {
    std::string word;
    std::vector<DistortionEntry> entries;
    bool infinite_order = false;
    double translation_length = 0.0;
    double generator_displacement = 0.0;
    double lower_bound = 0.0;
    double min_ratio = 0.0;
    /// Lengths come from free reduction, justified by a ping-pong certificate on the generators.
    bool free_basis = false;
    bool truncated = false;
    std::size_t ball_radius = 0;

    bool passes() const { return !infinite_order || min_ratio >= lower_bound - 1e-9; }
};

struct DistortionOptions {
    std::size_t element_cap = 200000;
    bool try_free_basis = true;
};

/// Whether two loxodromic generators satisfy ping-pong as they stand (power 1), so
/// that reduced words are geodesic.
inline bool certified_free_basis(const GeneratedGroup& group) {
    if (group.rank() != 2) return false;
    PingPongOptions o;
    o.max_power = 1;
    const auto cert = ping_pong_certificate(group, group.element(group.names()[0]), group.element(group.names()[1]), o);
    return cert.has_value();
}

/// Word lengths |g^n| for n = 1..N with the lower bound
/// (translation length of g) / (largest generator displacement at x).
inline DistortionProfile distortion_profile(const GeneratedGroup& group, const std::string& word, std::size_t n_max,
                                            const ModelPoint& x, const DistortionOptions& options = {}) {
    DistortionProfile out;
    const FormIsometry g = group.element(word);
    out.word = g.word;
    const auto c = classify(g, group.form());
    out.infinite_order = c.kind != IsometryClass::Elliptic;
    out.translation_length = translation_length(c).value;
    for (const auto& s : group.generators())
        out.generator_displacement = std::max(out.generator_displacement, displacement(FormIsometry{s, ""}, group.frame(), x));
    if (out.generator_displacement > 0) out.lower_bound = out.translation_length / out.generator_displacement;

    out.free_basis = options.try_free_basis && certified_free_basis(group);
    std::optional<WordBall> ball;
    std::size_t radius = 0;
    IntMatrix gn = IntMatrix::identity(group.dim());
    std::string wn;
    for (std::size_t n = 1; n <= n_max; ++n) {
        gn = gn * g.matrix;
        wn += g.word;
        std::size_t length = 0;
        if (out.free_basis) {
            length = group.free_reduction(wn).size();
        } else {
            for (;;) {
                if (ball) {
                    if (auto i = ball->find(gn)) {
                        length = (*ball)[*i].length;
                        break;
                    }
                    if (ball->closed()) fail(ErrorKind::NotInBall, "power missing from a finite group");
                }
                radius = std::max<std::size_t>(2, 2 * radius);
                try {
                    ball.emplace(group, radius, options.element_cap);
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::BudgetExceeded) throw;
                    out.truncated = true;
                    break;
                }
            }
            if (out.truncated) break;
            out.ball_radius = ball->radius();
        }
        out.entries.push_back({n, length, static_cast<double>(length) / static_cast<double>(n)});
    }
    out.min_ratio = out.entries.empty() ? 0.0 : kInfinity;
    for (const auto& e : out.entries) out.min_ratio = std::min(out.min_ratio, e.ratio);
    return out;
}

// Translation length additivity
// ~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
struct AdditivityEntry {
    std::size_t n = 0;
    /// charpoly(g^n) equals the polynomial of n-th powers of the roots of charpoly(g).
    bool exact = false;
    double predicted = 0.0;
    double spectral = 0.0;
    double min_displacement = 0.0;
    double error = 0.0;
};

struct AdditivityReport {
    std::string word;
    double translation_length = 0.0;
    std::vector<AdditivityEntry> entries;
    bool exact = true;
    double max_error = 0.0;
    double tolerance = 1e-6;

    bool passes() const { return exact && max_error <= tolerance; }
};

/// For n = 1..N: exact identity charpoly(g^n) = Res_y(charpoly(g)(y), x - y^n), so the
/// spectral radius of g^n is the n-th power of that of g, plus a numerical check that
/// the minimal displacement of g^n is n times the translation length of g.
///
/// Powers share the axis of g, so d_{g^n} is evaluated at the numerical minimizer of
/// d_g as acosh <x, g^n x>; renormalizing g^n x itself would cancel catastrophically.
inline AdditivityReport translation_additivity_check(const GeneratedGroup& group, const FormIsometry& g,
                                                     std::size_t n_max, double tolerance = 1e-6) {
    const QuadraticForm& form = group.form();
    const auto c = classify(g, form);
    if (!c.loxodromic()) fail(ErrorKind::NotLoxodromic, "translation additivity needs a loxodromic element");
    AdditivityReport out;
    out.word = g.word;
    out.tolerance = tolerance;
    out.translation_length = translation_length(c).value;
    const Polynomial p = c.charpoly;
    const auto minimum = minimize_displacement(g, group.frame(), group.frame().origin());
    const Eigen::VectorXd x = to_hyperboloid_coords(minimum.point);
    IntMatrix gn = IntMatrix::identity(form.dim());
    for (std::size_t n = 1; n <= n_max; ++n) {
        gn = gn * g.matrix;
        AdditivityEntry e;
        e.n = n;
        const auto cn = classify(FormIsometry{gn, ""}, form);
        e.exact = cn.charpoly == power_root_polynomial(p, n);
        e.predicted = static_cast<double>(n) * out.translation_length;
        e.spectral = translation_length(cn).value;
        e.min_displacement = std::acosh(std::max(1.0, minkowski(x, group.frame().to_standard(gn) * x)));
        e.error = std::abs(e.min_displacement - e.predicted);
        out.exact = out.exact && e.exact;
        out.max_error = std::max(out.max_error, e.error);
        out.entries.push_back(e);
    }
    return out;
}

} // namespace horocat
