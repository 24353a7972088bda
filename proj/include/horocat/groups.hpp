#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "horocat/forms.hpp"
#include "horocat/isometries.hpp"
#include "horocat/models.hpp"

namespace horocat {

/// Default cap on the number of elements a word ball may hold.
inline constexpr std::size_t kDefaultElementCap = 400000;

// GeneratedGroup
// ~~~~~~~~~~~~~~
/// A group given by integral generators preserving a form. Generators carry
/// single-letter names; the case-swapped letter denotes the inverse. The letter set
/// used for enumeration is symmetric, with involutions contributing one letter.
class GeneratedGroup {
public:
    struct Letter {
        IntMatrix matrix;
        char symbol;
        std::size_t generator;
        bool inverse;
    };

    GeneratedGroup(QuadraticForm form, std::vector<IntMatrix> generators, std::vector<std::string> names = {})
        : form_(std::move(form)), frame_(form_), generators_(std::move(generators)) {
        if (names.empty())
            for (std::size_t i = 0; i < generators_.size(); ++i) names.push_back(std::string(1, static_cast<char>('a' + i)));
        if (names.size() != generators_.size()) fail(ErrorKind::ConfigError, "one name per generator is required");
        if (generators_.size() > 26) fail(ErrorKind::ConfigError, "at most 26 generators are supported");
        for (std::size_t i = 0; i < generators_.size(); ++i) {
            const auto& name = names[i];
            if (name.size() != 1 || !std::isalpha(static_cast<unsigned char>(name[0])))
                fail(ErrorKind::ConfigError, "generator names must be single letters, got '" + name + "'");
            for (std::size_t j = 0; j < i; ++j)
                if (std::tolower(static_cast<unsigned char>(names[j][0])) == std::tolower(static_cast<unsigned char>(name[0])))
                    fail(ErrorKind::ConfigError, "generator names must differ up to case");
            const IntMatrix& g = generators_[i];
            if (!g.square() || g.rows() != form_.dim()) fail(ErrorKind::DimensionMismatch, "generator dimension");
            if (!is_isometry(g, form_)) fail(ErrorKind::NotAnIsometry, "generator " + name + " does not preserve the form");
            inverses_.push_back(isometry_inverse(g, form_));
        }
        names_ = std::move(names);
        for (std::size_t i = 0; i < generators_.size(); ++i) {
            const char c = names_[i][0];
            letters_.push_back({generators_[i], c, i, false});
            if (inverses_[i] != generators_[i]) letters_.push_back({inverses_[i], swap_case(c), i, true});
        }
    }

    const QuadraticForm& form() const noexcept { return form_; }
    const Frame& frame() const noexcept { return frame_; }
    std::size_t dim() const noexcept { return form_.dim(); }
    std::size_t rank() const noexcept { return generators_.size(); }
    const std::vector<IntMatrix>& generators() const noexcept { return generators_; }
    const std::vector<IntMatrix>& generator_inverses() const noexcept { return inverses_; }
    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::vector<Letter>& letters() const noexcept { return letters_; }

    /// Parses a word into (generator, inverse) pairs. Letters may be followed by an
    /// integer exponent "^k"; whitespace, '*' and '.' are ignored.
    std::vector<std::pair<std::size_t, bool>> parse(std::string_view word) const {
        std::vector<std::pair<std::size_t, bool>> out;
        std::size_t i = 0;
        while (i < word.size()) {
            const char c = word[i];
            if (std::isspace(static_cast<unsigned char>(c)) || c == '*' || c == '.') {
                ++i;
                continue;
            }
            auto [gen, inv] = lookup(c);
            ++i;
            long exponent = 1;
            if (i < word.size() && word[i] == '^') {
                std::size_t j = i + 1;
                if (j < word.size() && (word[j] == '-' || word[j] == '+')) ++j;
                const std::size_t digits = j;
                while (j < word.size() && std::isdigit(static_cast<unsigned char>(word[j]))) ++j;
                if (j == digits) fail(ErrorKind::InvalidGenerator, "malformed exponent in '" + std::string(word) + "'");
                exponent = std::stol(std::string(word.substr(i + 1, j - i - 1)));
                i = j;
            }
            if (exponent < 0) {
                inv = !inv;
                exponent = -exponent;
            }
            for (long k = 0; k < exponent; ++k) out.emplace_back(gen, inv);
        }
        return out;
    }

    IntMatrix evaluate(std::string_view word) const {
        IntMatrix m = IntMatrix::identity(dim());
        for (auto [gen, inv] : parse(word)) m = m * (inv ? inverses_[gen] : generators_[gen]);
        return m;
    }

    FormIsometry element(std::string_view word) const { return {evaluate(word), canonical_word(word)}; }

    /// The word spelled with one symbol per letter (exponents expanded).
    std::string canonical_word(std::string_view word) const {
        std::string out;
        for (auto [gen, inv] : parse(word)) out += symbol(gen, inv);
        return out;
    }

    std::string inverse_word(std::string_view word) const {
        auto letters = parse(word);
        std::string out;
        for (auto it = letters.rbegin(); it != letters.rend(); ++it) out += symbol(it->first, !it->second);
        return out;
    }

    /// Freely reduced form of a word (cancels adjacent x x^-1 and, for involutions, x x).
    std::string free_reduction(std::string_view word) const {
        std::vector<std::pair<std::size_t, bool>> stack;
        for (auto letter : parse(word)) {
            if (!stack.empty() && stack.back().first == letter.first &&
                (stack.back().second != letter.second || is_involution(letter.first))) {
                stack.pop_back();
                continue;
            }
            stack.push_back(letter);
        }
        std::string out;
        for (auto [gen, inv] : stack) out += symbol(gen, inv);
        return out;
    }

    bool is_involution(std::size_t gen) const { return inverses_[gen] == generators_[gen]; }

    char symbol(std::size_t gen, bool inverse) const {
        const char c = names_[gen][0];
        if (!inverse || is_involution(gen)) return c;
        return swap_case(c);
    }

    /// The same abstract generators conjugated by h: g -> h g h^-1.
    GeneratedGroup conjugated(const IntMatrix& h) const {
        const IntMatrix hinv = isometry_inverse(h, form_);
        std::vector<IntMatrix> gens;
        for (const auto& g : generators_) gens.push_back(h * g * hinv);
        return GeneratedGroup(form_, std::move(gens), names_);
    }

private:
    static char swap_case(char c) {
        const auto u = static_cast<unsigned char>(c);
        return static_cast<char>(std::isupper(u) ? std::tolower(u) : std::toupper(u));
    }

    std::pair<std::size_t, bool> lookup(char c) const {
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i][0] == c) return {i, false};
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (swap_case(names_[i][0]) == c) return {i, true};
        fail(ErrorKind::InvalidGenerator, std::string("unknown generator '") + c + "'");
    }

    QuadraticForm form_;
    Frame frame_;
    std::vector<IntMatrix> generators_;
    std::vector<IntMatrix> inverses_;
    std::vector<std::string> names_;
    std::vector<Letter> letters_;
};

// WordBall
// ~~~~~~~~
struct BallElement {
    IntMatrix matrix;
    std::string word;
    std::size_t length = 0;
};

/// Breadth-first enumeration of the distinct elements of word length <= radius.
/// Elements are ordered by length, then by discovery order, so each stored word is
/// geodesic and the ordering is canonical for the generator order.
class WordBall {
public:
    WordBall(const GeneratedGroup& group, std::size_t radius, std::size_t cap = kDefaultElementCap)
        : radius_(radius) {
        add(IntMatrix::identity(group.dim()), "", 0);
        sphere_offsets_.push_back(0);
        std::size_t begin = 0;
        for (std::size_t r = 1; r <= radius; ++r) {
            const std::size_t end = elements_.size();
            sphere_offsets_.push_back(end);
            for (std::size_t i = begin; i < end; ++i) {
                for (const auto& letter : group.letters()) {
                    IntMatrix m = elements_[i].matrix * letter.matrix;
                    if (index_.count(m)) continue;
                    if (elements_.size() >= cap)
                        fail(ErrorKind::BudgetExceeded, "word ball exceeds " + std::to_string(cap) + " elements");
                    add(std::move(m), elements_[i].word + letter.symbol, r);
                }
            }
            begin = end;
            if (elements_.size() == end) {
                closed_ = true;
                radius_ = r;
                break;
            }
        }
        sphere_offsets_.push_back(elements_.size());
    }

    std::size_t radius() const noexcept { return radius_; }
    std::size_t size() const noexcept { return elements_.size(); }
    const std::vector<BallElement>& elements() const noexcept { return elements_; }
    const BallElement& operator[](std::size_t i) const { return elements_[i]; }
    /// True when a sphere came out empty: the ball is the whole (finite) group.
    bool closed() const noexcept { return closed_; }

    /// Elements of word length exactly r, as an index range [first, second).
    std::pair<std::size_t, std::size_t> sphere(std::size_t r) const {
        if (r + 1 >= sphere_offsets_.size()) return {elements_.size(), elements_.size()};
        return {sphere_offsets_[r], sphere_offsets_[r + 1]};
    }

    std::optional<std::size_t> find(const IntMatrix& m) const {
        auto it = index_.find(m);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t word_length(const IntMatrix& m) const {
        auto i = find(m);
        if (!i) fail(ErrorKind::NotInBall, "element not in the word ball of radius " + std::to_string(radius_));
        return elements_[*i].length;
    }

private:
    void add(IntMatrix m, std::string word, std::size_t length) {
        index_.emplace(m, elements_.size());
        elements_.push_back({std::move(m), std::move(word), length});
    }

    std::size_t radius_;
    bool closed_ = false;
    std::vector<BallElement> elements_;
    std::vector<std::size_t> sphere_offsets_;
    std::unordered_map<IntMatrix, std::size_t, ExactHash> index_;
};

inline std::vector<BallElement> word_ball(const GeneratedGroup& group, std::size_t radius,
                                          std::size_t cap = kDefaultElementCap) {
    return WordBall(group, radius, cap).elements();
}

inline std::size_t word_length(const WordBall& ball, const IntMatrix& g) { return ball.word_length(g); }

/// Whether the group closes up within the element cap (a finite group).
inline bool is_finite_group(const GeneratedGroup& group, std::size_t cap = 20000) {
    try {
        return WordBall(group, cap, cap).closed();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::BudgetExceeded) return false;
        throw;
    }
}

// Basepoints
// ~~~~~~~~~~
/// True iff some non-identity ball element fixes the lattice vector x.
inline bool has_nontrivial_stabilizer(const WordBall& ball, const IntVector& x) {
    for (std::size_t i = 1; i < ball.size(); ++i)
        if (ball[i].matrix * x == x) return true;
    return false;
}

/// Picks a primitive timelike lattice vector near the witness with trivial stabilizer
/// among the ball elements. Deterministic for a given seed.
inline IntVector choose_basepoint(const GeneratedGroup& group, const WordBall& ball, std::uint64_t seed = 1,
                                  int attempts = 2000) {
    const QuadraticForm& form = group.form();
    std::mt19937_64 rng(seed);
    const IntVector w = primitive(form.witness());
    for (int scale = 4; attempts > 0; scale *= 2) {
        std::uniform_int_distribution<int> jitter(-3, 3);
        for (int k = 0; k < 64 && attempts > 0; ++k, --attempts) {
            IntVector x(w.size());
            for (std::size_t i = 0; i < w.size(); ++i) x[i] = w[i] * scale + jitter(rng);
            x = primitive(x);
            if (!form.in_positive_cone(to_rational(x))) continue;
            if (!has_nontrivial_stabilizer(ball, x)) return x;
        }
    }
    fail(ErrorKind::StabilizerNontrivial, "no basepoint with trivial stabilizer found");
}

// Boundary stabilizers
// ~~~~~~~~~~~~~~~~~~~~
struct BoundaryStabilizer {
    std::vector<std::size_t> elements;  // indices into the ball
    std::vector<std::size_t> parabolic;
    std::size_t bieberbach_rank = 0;
};

inline bool fixes_boundary_point(const IntMatrix& g, const BoundaryPoint& p, const Frame& frame) {
    if (p.exact) return primitive(g * *p.exact) == *p.exact;
    const Eigen::VectorXd image = frame.to_standard(g) * p.direction;
    return BoundaryPoint::from_null(image).angle_to(p) < 1e-9;
}

/// Ball elements fixing p, and the rank of the translation lattice of the parabolic
/// ones. Each parabolic h is replaced by the unipotent power h^k; (h^k - 1) w for a
/// vector w with <w, p> != 0 is its translation vector modulo p.
inline BoundaryStabilizer boundary_stabilizer(const GeneratedGroup& group, const WordBall& ball,
                                              const BoundaryPoint& p) {
    BoundaryStabilizer out;
    const QuadraticForm& form = group.form();
    std::vector<RatVector> translations;
    for (std::size_t i = 1; i < ball.size(); ++i) {
        if (!fixes_boundary_point(ball[i].matrix, p, group.frame())) continue;
        out.elements.push_back(i);
        const auto c = classify(FormIsometry{ball[i].matrix, ball[i].word}, form);
        if (c.kind != IsometryClass::Parabolic) continue;
        out.parabolic.push_back(i);
        if (!p.exact) continue;
        Polynomial rest = c.charpoly;
        const Polynomial linear{-1, 1};
        while ((rest % linear).is_zero()) rest = rest / linear;
        std::size_t k = detail::cyclotomic_order(rest);
        if (k == 0) k = 1;
        const IntMatrix u = power(ball[i].matrix, k);
        const RatVector w = form.witness();
        const RatVector t = to_rational(u) * w;
        RatVector diff(w.size());
        for (std::size_t j = 0; j < w.size(); ++j) diff[j] = t[j] - w[j];
        translations.push_back(diff);
    }
    if (out.elements.empty()) fail(ErrorKind::NotFixed, "no enumerated element fixes the boundary point");
    if (p.exact && !translations.empty()) {
        translations.push_back(to_rational(*p.exact));
        out.bieberbach_rank = rank(translations) - 1;
    }
    return out;
}

// Limit sets
// ~~~~~~~~~~
struct LimitPoint {
    BoundaryPoint point;
    std::string word;
};

struct LimitSample {
    std::vector<LimitPoint> points;
    std::size_t depth = 0;
};

/// Directions of gamma(x) for the elements of word length exactly R, deduplicated
/// within the angular tolerance. A group that closes up is finite and has no limit set.
inline LimitSample limit_sample(const GeneratedGroup& group, std::size_t depth, const ModelPoint& x,
                                double angular_tolerance = 1e-6, std::size_t cap = kDefaultElementCap) {
    if (depth < 1) fail(ErrorKind::ConfigError, "limit sample depth must be at least 1");
    LimitSample out;
    out.depth = depth;
    if (is_finite_group(group)) return out;
    const WordBall ball(group, depth, cap);
    const Eigen::VectorXd h = to_hyperboloid_coords(x);
    auto [first, last] = ball.sphere(depth);
    for (std::size_t i = first; i < last; ++i) {
        const Eigen::VectorXd y = group.frame().to_standard(ball[i].matrix) * h;
        Eigen::VectorXd null(y.size());
        null(0) = 1.0;
        null.tail(y.size() - 1) = y.tail(y.size() - 1) / y.tail(y.size() - 1).norm();
        const auto b = BoundaryPoint::from_null(null);
        bool duplicate = false;
        for (const auto& q : out.points)
            if (q.point.angle_to(b) < angular_tolerance) {
                duplicate = true;
                break;
            }
        if (!duplicate) out.points.push_back({b, ball[i].word});
    }
    return out;
}

// Conical limit points
// ~~~~~~~~~~~~~~~~~~~~
struct ConicalReport {
    bool conical = false;
    bool inconclusive = false;
    /// Largest distance along the ray reached by an orbit point inside the tube.
    double depth_reached = 0.0;
    /// Largest distance from x of any enumerated orbit point.
    double orbit_reach = 0.0;
};

/// Sampled conical-approach test. An orbit point gamma(x) counts when it lies within
/// the tube of radius r about the ray from x towards a; the point a is reported
/// conical when such points reach at least half of the orbit's reach. Points that
/// never leave a bounded part of the ray while the orbit escapes give false.
inline ConicalReport conical_limit_test(const GeneratedGroup& group, const BoundaryPoint& a, std::size_t radius,
                                        double tube, const ModelPoint& x, std::size_t cap = kDefaultElementCap) {
    ConicalReport out;
    WordBall ball = [&] {
        try {
            return WordBall(group, radius, cap);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::BudgetExceeded) throw;
            out.inconclusive = true;
            return WordBall(group, 0, cap);
        }
    }();
    if (out.inconclusive) return out;
    const Eigen::VectorXd h = to_hyperboloid_coords(x);
    // Ray from h towards a: cosh(t) h + sinh(t) v with v the unit tangent.
    const double ha = minkowski(h, a.direction);
    const Eigen::VectorXd v = a.direction / ha - h;
    for (std::size_t i = 1; i < ball.size(); ++i) {
        const Eigen::VectorXd y = group.frame().to_standard(ball[i].matrix) * h;
        out.orbit_reach = std::max(out.orbit_reach, hyperboloid_distance(h, y));
        // Nearest point of the full geodesic through h towards a.
        const double c = minkowski(y, h);
        const double s = -minkowski(y, v);
        const double t = std::atanh(std::clamp(s / c, -1.0 + 1e-16, 1.0 - 1e-16));
        if (t <= 0) continue;
        const double dist_to_line = std::acosh(std::max(1.0, std::sqrt(std::max(0.0, c * c - s * s))));
        if (dist_to_line <= tube) out.depth_reached = std::max(out.depth_reached, t);
    }
    if (ball.closed()) return out;
    out.conical = out.depth_reached >= 0.5 * out.orbit_reach && out.depth_reached > tube;
    if (!out.conical && out.orbit_reach < 4 * tube) out.inconclusive = true;
    return out;
}

} // namespace horocat
