#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "horocat/errors.hpp"
#include "horocat/rational.hpp"

namespace horocat {

struct Signature {
    std::size_t pos = 0;
    std::size_t zero = 0;
    std::size_t neg = 0;

    friend bool operator==(const Signature&, const Signature&) = default;
};

/// Congruence diagonalization: basis^T * A * basis = diag(pivots).
struct Diagonalization {
    RatMatrix basis;
    RatVector pivots;
};

inline bool is_symmetric(const IntMatrix& a) {
    if (!a.square()) return false;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j)
            if (a(i, j) != a(j, i)) return false;
    return true;
}

/// Exact symmetric elimination over the rationals. Zero diagonals are handled by the
/// congruence e_k -> e_k + e_j, which turns an off-diagonal entry into a pivot.
inline Diagonalization diagonalize(const IntMatrix& gram) {
    if (!is_symmetric(gram)) fail(ErrorKind::NonSymmetric, "Gram matrix is not symmetric");
    const std::size_t n = gram.rows();
    const RatMatrix a = to_rational(gram);
    RatMatrix p = RatMatrix::identity(n);
    auto congruent = [&] { return p.transpose() * a * p; };
    for (std::size_t k = 0; k < n; ++k) {
        RatMatrix c = congruent();
        if (c(k, k) == 0) {
            std::size_t j = k + 1;
            while (j < n && c(j, j) == 0) ++j;
            if (j < n) {
                for (std::size_t i = 0; i < n; ++i) std::swap(p(i, k), p(i, j));
            } else {
                j = k + 1;
                while (j < n && c(k, j) == 0) ++j;
                if (j == n) continue;
                for (std::size_t i = 0; i < n; ++i) p(i, k) += p(i, j);
            }
            c = congruent();
        }
        for (std::size_t j = k + 1; j < n; ++j) {
            if (c(k, j) == 0) continue;
            const Rational f = c(k, j) / c(k, k);
            for (std::size_t i = 0; i < n; ++i) p(i, j) -= f * p(i, k);
        }
    }
    const RatMatrix d = congruent();
    RatVector pivots(n);
    for (std::size_t i = 0; i < n; ++i) pivots[i] = d(i, i);
    return {std::move(p), std::move(pivots)};
}

/// Exact inertia (positive, zero, negative) of a symmetric integer matrix.
inline Signature signature(const IntMatrix& gram) {
    const auto diag = diagonalize(gram);
    Signature s;
    for (const auto& v : diag.pivots) {
        if (v > 0) ++s.pos;
        else if (v < 0) ++s.neg;
        else ++s.zero;
    }
    return s;
}

// QuadraticForm
// ~~~~~~~~~~~~~
/// Integral form of signature (1, n). A form arriving with one negative and n positive
/// directions is negated on ingestion. The witness is a rational vector with q > 0 that
/// selects the sheet H+ = {x : q(x) > 0, <x, witness> > 0}.
class QuadraticForm {
public:
    explicit QuadraticForm(IntMatrix gram, std::optional<RatVector> witness = std::nullopt) {
        if (!is_symmetric(gram)) fail(ErrorKind::NonSymmetric, "Gram matrix is not symmetric");
        const std::size_t dim = gram.rows();
        Signature s = signature(gram);
        if (s.zero == 0 && s.neg == 1 && s.pos + 1 == dim && dim >= 2 && s.pos != 1) {
            gram = -gram;
            negated_ = true;
            std::swap(s.pos, s.neg);
        }
        if (!(s.pos == 1 && s.zero == 0 && s.neg + 1 == dim) || dim < 2)
            fail(ErrorKind::InvalidSignature, "form must have signature (1,0,n) up to sign, got (" +
                                                  std::to_string(s.pos) + "," + std::to_string(s.zero) + "," +
                                                  std::to_string(s.neg) + ")");
        gram_ = std::move(gram);
        gram_q_ = to_rational(gram_);
        if (witness) {
            if (witness->size() != dim) fail(ErrorKind::DimensionMismatch, "witness dimension");
            if (q(*witness) <= 0) fail(ErrorKind::InvalidSignature, "witness must satisfy q > 0");
            witness_ = *witness;
        } else {
            const auto diag = diagonalize(gram_);
            for (std::size_t i = 0; i < dim; ++i)
                if (diag.pivots[i] > 0) witness_ = diag.basis.column(i);
            for (const auto& v : witness_)
                if (v != 0) {
                    if (v < 0)
                        for (auto& w : witness_) w = -w;
                    break;
                }
        }
    }

    const IntMatrix& gram() const noexcept { return gram_; }
    const RatMatrix& gram_rational() const noexcept { return gram_q_; }
    std::size_t dim() const noexcept { return gram_.rows(); }
    /// Dimension n of the hyperbolic space.
    std::size_t hyperbolic_dim() const noexcept { return gram_.rows() - 1; }
    bool negated() const noexcept { return negated_; }
    const RatVector& witness() const noexcept { return witness_; }

    Rational inner(const RatVector& u, const RatVector& v) const {
        if (u.size() != dim() || v.size() != dim()) fail(ErrorKind::DimensionMismatch, "inner product");
        Rational acc = 0;
        for (std::size_t i = 0; i < dim(); ++i) {
            if (u[i] == 0) continue;
            for (std::size_t j = 0; j < dim(); ++j) acc += u[i] * gram_q_(i, j) * v[j];
        }
        return acc;
    }
    Rational inner(const IntVector& u, const IntVector& v) const { return inner(to_rational(u), to_rational(v)); }
    Rational q(const RatVector& v) const { return inner(v, v); }

    /// Q v, the functional x -> <x, v>.
    RatVector dual(const RatVector& v) const { return gram_q_ * v; }

    /// True iff v lies in the open positive cone component selected by the witness.
    bool in_positive_cone(const RatVector& v) const { return q(v) > 0 && inner(v, witness_) > 0; }

    friend bool operator==(const QuadraticForm& a, const QuadraticForm& b) {
        return a.gram_ == b.gram_ && a.witness_ == b.witness_;
    }

private:
    IntMatrix gram_;
    RatMatrix gram_q_;
    RatVector witness_;
    bool negated_ = false;
};

/// Free-standing inner product u^T gram v.
inline Rational inner_product(const RatVector& u, const RatVector& v, const QuadraticForm& form) {
    return form.inner(u, v);
}

/// g^T Q g = Q exactly and g keeps the witness sheet.
inline bool is_isometry(const IntMatrix& g, const QuadraticForm& form) {
    if (!g.square() || g.rows() != form.dim()) fail(ErrorKind::DimensionMismatch, "isometry dimension");
    if (g.transpose() * form.gram() * g != form.gram()) return false;
    const RatVector gw = to_rational(g) * form.witness();
    return form.inner(gw, form.witness()) > 0;
}

// FormIsometry
// ~~~~~~~~~~~~
struct FormIsometry {
    IntMatrix matrix;
    std::string word;

    static FormIsometry make(IntMatrix m, const QuadraticForm& form, std::string word = {}) {
        if (!is_isometry(m, form)) fail(ErrorKind::NotAnIsometry, "matrix does not preserve the form and sheet");
        return {std::move(m), std::move(word)};
    }
};

/// Inverse of a lattice isometry, Q^{-1} g^T Q, which is integral for g in GL(Lambda).
inline IntMatrix isometry_inverse(const IntMatrix& g, const QuadraticForm& form) {
    const RatMatrix q = form.gram_rational();
    const RatMatrix inv = inverse(q) * to_rational(g.transpose()) * q;
    if (!is_integral(inv)) fail(ErrorKind::NotAnIsometry, "inverse is not integral; matrix is not in GL(Lambda)");
    return to_integer(inv);
}

// RationalCone
// ~~~~~~~~~~~~
/// {x : l_k(x) >= 0 for all k}, or the full positive cone of the form.
struct RationalCone {
    bool full_positive = true;
    std::vector<IntVector> halfspaces;

    static RationalCone full() { return {}; }
    static RationalCone from_functionals(const std::vector<RatVector>& functionals) {
        RationalCone c;
        c.full_positive = false;
        for (const auto& f : functionals) c.halfspaces.push_back(primitive(f));
        return c;
    }
};

inline bool cone_contains(const RationalCone& cone, const RatVector& x, const QuadraticForm& form) {
    if (x.size() != form.dim()) fail(ErrorKind::DimensionMismatch, "cone membership");
    if (cone.full_positive) return form.in_positive_cone(x);
    for (const auto& l : cone.halfspaces) {
        if (l.size() != x.size()) fail(ErrorKind::DimensionMismatch, "cone functional");
        Rational acc = 0;
        for (std::size_t i = 0; i < x.size(); ++i) acc += Rational(l[i]) * x[i];
        if (acc < 0) return false;
    }
    return true;
}

inline bool cone_contains(const RationalCone& cone, const Eigen::VectorXd& x, const QuadraticForm& form,
                          double tol = 0.0) {
    if (static_cast<std::size_t>(x.size()) != form.dim()) fail(ErrorKind::DimensionMismatch, "cone membership");
    if (cone.full_positive) {
        const Eigen::MatrixXd q = to_eigen(form.gram());
        return x.dot(q * x) > -tol && x.dot(q * to_eigen(form.witness())) > 0;
    }
    for (const auto& l : cone.halfspaces) {
        double acc = 0;
        for (std::size_t i = 0; i < l.size(); ++i) acc += l[i].get_d() * x(i);
        if (acc < -tol) return false;
    }
    return true;
}

} // namespace horocat
