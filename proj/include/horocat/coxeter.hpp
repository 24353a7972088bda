#pragma once

#include <cctype>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "horocat/forms.hpp"
#include "horocat/groups.hpp"
#include "horocat/isometries.hpp"

namespace horocat {

/// Geometric representation of the universal Coxeter group of rank r: all m_ij are
/// infinite, so B(e_i, e_j) = 1 on the diagonal and -1 off it, and s_i(v) = v - 2 B(e_i, v) e_i.
///
/// Sign convention: B has one negative direction for r >= 3, so the hyperbolic
/// pipelines use the negated form -B with witness (1, ..., 1). The fundamental chamber
/// {B(e_i, v) <= 0 for all i} is then {(-B v)_i >= 0}.
struct UniversalCoxeterRep {
    std::size_t rank = 0;
    IntMatrix gram;
    std::vector<IntMatrix> reflections;
    bool degenerate = false;
};

inline UniversalCoxeterRep build_rep(std::size_t n) {
    if (n < 1) fail(ErrorKind::ConfigError, "universal Coxeter rank must be at least 2");
    UniversalCoxeterRep rep;
    rep.rank = n + 1;
    rep.gram = IntMatrix(rep.rank, rep.rank, Integer(-1));
    for (std::size_t i = 0; i < rep.rank; ++i) rep.gram(i, i) = 1;
    for (std::size_t i = 0; i < rep.rank; ++i) {
        IntMatrix s = IntMatrix::identity(rep.rank);
        for (std::size_t j = 0; j < rep.rank; ++j) s(i, j) -= 2 * rep.gram(i, j);
        rep.reflections.push_back(std::move(s));
    }
    rep.degenerate = signature(rep.gram).zero > 0;
    return rep;
}

inline QuadraticForm coxeter_form(const UniversalCoxeterRep& rep) {
    if (rep.degenerate) fail(ErrorKind::InvalidSignature, "rank-2 universal Coxeter form is degenerate");
    return QuadraticForm(-rep.gram, RatVector(rep.rank, Rational(1)));
}

inline GeneratedGroup coxeter_group(const UniversalCoxeterRep& rep) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < rep.rank; ++i) names.push_back(std::string(1, static_cast<char>('a' + i)));
    return GeneratedGroup(coxeter_form(rep), rep.reflections, names);
}

/// Generator indices (0-based) of a word such as "s1s2s3", "1 2 3" or "123". With
/// rank at most 9 every digit is a generator; larger ranks need separators.
inline std::vector<std::size_t> parse_coxeter_word(const UniversalCoxeterRep& rep, std::string_view word) {
    std::vector<std::size_t> out;
    std::size_t i = 0;
    while (i < word.size()) {
        const char c = word[i];
        if (c == 's' || c == ',' || c == '*' || c == '.' || std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (!std::isdigit(static_cast<unsigned char>(c)))
            fail(ErrorKind::InvalidGenerator, std::string("unexpected character '") + c + "' in Coxeter word");
        std::size_t j = i + 1;
        if (rep.rank > 9)
            while (j < word.size() && std::isdigit(static_cast<unsigned char>(word[j]))) ++j;
        const std::size_t g = std::stoul(std::string(word.substr(i, j - i)));
        if (g < 1 || g > rep.rank)
            fail(ErrorKind::InvalidGenerator, "generator s" + std::to_string(g) + " out of range 1.." + std::to_string(rep.rank));
        out.push_back(g - 1);
        i = j;
    }
    return out;
}

inline std::string coxeter_word(const std::vector<std::size_t>& letters) {
    std::string out;
    for (auto g : letters) out += "s" + std::to_string(g + 1);
    return out;
}

inline FormIsometry word_to_matrix(const UniversalCoxeterRep& rep, std::string_view word) {
    const auto letters = parse_coxeter_word(rep, word);
    IntMatrix m = IntMatrix::identity(rep.rank);
    for (auto g : letters) m = m * rep.reflections[g];
    return {std::move(m), coxeter_word(letters)};
}

// Word statistics
// ~~~~~~~~~~~~~~~
struct CoxeterLengthCounts {
    std::size_t length = 0;
    std::size_t elliptic = 0;
    std::size_t parabolic = 0;
    std::size_t loxodromic = 0;
};

struct CoxeterStatistics {
    std::vector<CoxeterLengthCounts> by_length;
    /// Largest spectral radius met, with a word realizing it.
    double max_spectral_radius = 1.0;
    std::string max_word;
};

/// Classifies every reduced word (no letter repeated consecutively) up to length L.
inline CoxeterStatistics classify_coxeter_words(const UniversalCoxeterRep& rep, std::size_t max_length,
                                                std::size_t cap = 200000) {
    const QuadraticForm form = coxeter_form(rep);
    CoxeterStatistics out;
    std::vector<std::pair<std::vector<std::size_t>, IntMatrix>> layer{{{}, IntMatrix::identity(rep.rank)}};
    std::size_t total = 0;
    for (std::size_t len = 1; len <= max_length; ++len) {
        std::vector<std::pair<std::vector<std::size_t>, IntMatrix>> next;
        CoxeterLengthCounts counts;
        counts.length = len;
        for (const auto& [word, m] : layer) {
            for (std::size_t g = 0; g < rep.rank; ++g) {
                if (!word.empty() && word.back() == g) continue;
                if (++total > cap) fail(ErrorKind::BudgetExceeded, "too many Coxeter words to classify");
                auto w = word;
                w.push_back(g);
                IntMatrix wm = m * rep.reflections[g];
                const auto c = classify(FormIsometry{wm, coxeter_word(w)}, form);
                switch (c.kind) {
                case IsometryClass::Elliptic: ++counts.elliptic; break;
                case IsometryClass::Parabolic: ++counts.parabolic; break;
                case IsometryClass::Loxodromic:
                    ++counts.loxodromic;
                    if (c.spectral_radius.approx > out.max_spectral_radius) {
                        out.max_spectral_radius = c.spectral_radius.approx;
                        out.max_word = coxeter_word(w);
                    }
                    break;
                }
                next.emplace_back(std::move(w), std::move(wm));
            }
        }
        out.by_length.push_back(counts);
        layer = std::move(next);
    }
    return out;
}

// Tits cone
// ~~~~~~~~~
/// The fundamental chamber {B(e_i, v) <= 0}, written for the negated form.
inline RationalCone fundamental_chamber(const UniversalCoxeterRep& rep) {
    std::vector<RatVector> rows;
    for (std::size_t i = 0; i < rep.rank; ++i) {
        RatVector row(rep.rank);
        for (std::size_t j = 0; j < rep.rank; ++j) row[j] = -rep.gram(i, j);
        rows.push_back(row);
    }
    return RationalCone::from_functionals(rows);
}

inline bool in_chamber(const UniversalCoxeterRep& rep, const RatVector& v) {
    for (std::size_t i = 0; i < rep.rank; ++i) {
        Rational acc = 0;
        for (std::size_t j = 0; j < rep.rank; ++j) acc += Rational(rep.gram(i, j)) * v[j];
        if (acc > 0) return false;
    }
    return true;
}

/// Extreme rays of the chamber: the columns of -B^-1, scaled to primitive integers.
inline std::vector<IntVector> chamber_rays(const UniversalCoxeterRep& rep) {
    const RatMatrix inv = inverse(to_rational(rep.gram));
    std::vector<IntVector> out;
    for (std::size_t j = 0; j < rep.rank; ++j) {
        RatVector col = inv.column(j);
        for (auto& x : col) x = -x;
        out.push_back(primitive(col));
    }
    return out;
}

struct TitsConeResult {
    bool found = false;
    std::string word;
    std::size_t radius = 0;
};

/// Searches the word ball for w with w^-1 v in the chamber; the first hit in
/// breadth-first order has minimal length.
inline TitsConeResult tits_cone_membership(const UniversalCoxeterRep& rep, const RatVector& v, std::size_t radius) {
    if (rep.degenerate) fail(ErrorKind::InvalidSignature, "rank-2 universal Coxeter form is degenerate");
    if (v.size() != rep.rank) fail(ErrorKind::DimensionMismatch, "vector length must equal the rank");
    const GeneratedGroup group = coxeter_group(rep);
    const WordBall ball(group, radius);
    TitsConeResult out;
    out.radius = radius;
    for (const auto& e : ball.elements()) {
        // Reflections are involutions, so w^-1 is the reversed word.
        const IntMatrix inv = isometry_inverse(e.matrix, group.form());
        if (!in_chamber(rep, to_rational(inv) * v)) continue;
        out.found = true;
        for (char c : e.word) out.word += "s" + std::to_string(c - 'a' + 1);
        return out;
    }
    return out;
}

struct ChamberDisjointness {
    std::size_t checked = 0;
    bool disjoint = true;
    std::string counterexample;
};

/// Images of the open chamber under distinct ball elements are pairwise disjoint:
/// for g != 1 some wall separates the chamber from g(chamber). Checked exactly on
/// the chamber rays.
inline ChamberDisjointness check_chamber_disjointness(const UniversalCoxeterRep& rep, std::size_t radius) {
    const GeneratedGroup group = coxeter_group(rep);
    const WordBall ball(group, radius);
    const auto rays = chamber_rays(rep);
    ChamberDisjointness out;
    for (std::size_t k = 1; k < ball.size(); ++k) {
        ++out.checked;
        bool separated = false;
        for (std::size_t i = 0; i < rep.rank && !separated; ++i) {
            bool all = true;
            for (const auto& r : rays) {
                const IntVector img = ball[k].matrix * r;
                Integer acc = 0;
                for (std::size_t j = 0; j < rep.rank; ++j) acc += rep.gram(i, j) * img[j];
                if (acc < 0) {
                    all = false;
                    break;
                }
            }
            separated = all;
        }
        if (!separated) {
            out.disjoint = false;
            out.counterexample = ball[k].word;
            return out;
        }
    }
    return out;
}

} // namespace horocat
