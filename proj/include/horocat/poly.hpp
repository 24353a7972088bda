#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "horocat/rational.hpp"

namespace horocat {

// Polynomial
// ~~~~~~~~~~
/// Univariate polynomial over the rationals, coefficients stored lowest degree first.
/// The zero polynomial has no coefficients.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<Rational> coeffs) : c_(std::move(coeffs)) { trim(); }
    Polynomial(std::initializer_list<long> coeffs) {
        for (long v : coeffs) c_.emplace_back(v);
        trim();
    }

    static Polynomial monomial(std::size_t degree, const Rational& coeff = 1) {
        std::vector<Rational> c(degree + 1, Rational(0));
        c[degree] = coeff;
        return Polynomial(std::move(c));
    }
    static Polynomial constant(const Rational& v) { return Polynomial(std::vector<Rational>{v}); }

    bool is_zero() const noexcept { return c_.empty(); }
    /// Degree; -1 for the zero polynomial.
    long degree() const noexcept { return static_cast<long>(c_.size()) - 1; }
    const Rational& coeff(std::size_t i) const { return c_[i]; }
    Rational coeff_or_zero(std::size_t i) const { return i < c_.size() ? c_[i] : Rational(0); }
    const Rational& leading() const { return c_.back(); }
    const std::vector<Rational>& coefficients() const noexcept { return c_; }

    Polynomial monic() const {
        if (is_zero()) return *this;
        Polynomial p = *this;
        const Rational lc = leading();
        for (auto& v : p.c_) v /= lc;
        return p;
    }

    Rational operator()(const Rational& x) const {
        Rational acc = 0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
        return acc;
    }

    double eval(double x) const {
        double acc = 0.0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + it->get_d();
        return acc;
    }

    /// p(M) by Horner's rule, exact.
    RatMatrix operator()(const RatMatrix& m) const {
        RatMatrix acc(m.rows(), m.cols());
        const RatMatrix id = RatMatrix::identity(m.rows());
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * m + (*it) * id;
        return acc;
    }

    Polynomial derivative() const {
        std::vector<Rational> d;
        for (std::size_t i = 1; i < c_.size(); ++i) d.push_back(c_[i] * static_cast<long>(i));
        return Polynomial(std::move(d));
    }

    friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.c_ == b.c_; }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        std::vector<Rational> c(std::max(a.c_.size(), b.c_.size()), Rational(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
        for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] += b.c_[i];
        return Polynomial(std::move(c));
    }

    Polynomial operator-() const {
        Polynomial p = *this;
        for (auto& v : p.c_) v = -v;
        return p;
    }

    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<Rational> c(a.c_.size() + b.c_.size() - 1, Rational(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
        return Polynomial(std::move(c));
    }

    /// Euclidean division: returns (quotient, remainder).
    friend std::pair<Polynomial, Polynomial> divmod(const Polynomial& a, const Polynomial& b) {
        if (b.is_zero()) fail(ErrorKind::DimensionMismatch, "polynomial division by zero");
        std::vector<Rational> rem = a.c_;
        if (a.degree() < b.degree()) return {Polynomial(), a};
        std::vector<Rational> quo(a.c_.size() - b.c_.size() + 1, Rational(0));
        const Rational lc = b.leading();
        for (long k = static_cast<long>(quo.size()) - 1; k >= 0; --k) {
            const Rational f = rem[k + b.c_.size() - 1] / lc;
            quo[k] = f;
            if (f == 0) continue;
            for (std::size_t j = 0; j < b.c_.size(); ++j) rem[k + j] -= f * b.c_[j];
        }
        return {Polynomial(std::move(quo)), Polynomial(std::move(rem))};
    }

    friend Polynomial operator%(const Polynomial& a, const Polynomial& b) { return divmod(a, b).second; }
    friend Polynomial operator/(const Polynomial& a, const Polynomial& b) { return divmod(a, b).first; }

    std::string to_string() const {
        if (is_zero()) return "0";
        std::string s;
        for (long i = degree(); i >= 0; --i) {
            const Rational& v = c_[i];
            if (v == 0) continue;
            if (!s.empty()) s += v < 0 ? " - " : " + ";
            else if (v < 0) s += "-";
            const Rational a = abs(v);
            if (a != 1 || i == 0) s += a.get_str();
            if (i >= 1) s += "x";
            if (i >= 2) s += "^" + std::to_string(i);
        }
        return s;
    }

private:
    void trim() {
        while (!c_.empty() && c_.back() == 0) c_.pop_back();
    }

    std::vector<Rational> c_;
};

/// Monic greatest common divisor.
inline Polynomial gcd(Polynomial a, Polynomial b) {
    while (!b.is_zero()) {
        Polynomial r = a % b;
        a = std::move(b);
        b = std::move(r);
    }
    return a.monic();
}

/// Product of the distinct irreducible factors, monic.
inline Polynomial squarefree_part(const Polynomial& p) {
    if (p.degree() <= 0) return p.monic();
    return (p / gcd(p, p.derivative())).monic();
}

/// Characteristic polynomial det(xI - A) by the Faddeev-LeVerrier recurrence over the rationals.
inline Polynomial characteristic_polynomial(const RatMatrix& a) {
    if (!a.square()) fail(ErrorKind::DimensionMismatch, "characteristic polynomial of non-square matrix");
    const std::size_t n = a.rows();
    std::vector<Rational> c(n + 1, Rational(0));
    c[n] = 1;
    RatMatrix m(n, n);
    const RatMatrix id = RatMatrix::identity(n);
    for (std::size_t k = 1; k <= n; ++k) {
        m = a * m + c[n - k + 1] * id;
        const RatMatrix am = a * m;
        Rational tr = 0;
        for (std::size_t i = 0; i < n; ++i) tr += am(i, i);
        c[n - k] = -tr / static_cast<long>(k);
    }
    return Polynomial(std::move(c));
}

inline Polynomial characteristic_polynomial(const IntMatrix& a) { return characteristic_polynomial(to_rational(a)); }

/// Determinant of an integer matrix by fraction-free Bareiss elimination.
inline Integer determinant(IntMatrix a) {
    if (!a.square()) fail(ErrorKind::DimensionMismatch, "determinant of non-square matrix");
    const std::size_t n = a.rows();
    if (n == 0) return 1;
    Integer prev = 1;
    int sign = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (a(k, k) == 0) {
            std::size_t p = k + 1;
            while (p < n && a(p, k) == 0) ++p;
            if (p == n) return 0;
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j) {
                Integer t = a(i, j) * a(k, k) - a(i, k) * a(k, j);
                mpz_divexact(a(i, j).get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
            }
        prev = a(k, k);
    }
    return sign * a(n - 1, n - 1);
}

/// Resultant of two integer-coefficient polynomials via the Sylvester determinant.
inline Integer resultant(const Polynomial& p, const Polynomial& q) {
    const long m = p.degree();
    const long n = q.degree();
    if (m < 0 || n < 0) return 0;
    const std::size_t size = static_cast<std::size_t>(m + n);
    if (size == 0) return 1;
    IntMatrix s(size, size);
    auto as_int = [](const Rational& r) {
        if (r.get_den() != 1) fail(ErrorKind::DimensionMismatch, "resultant needs integer coefficients");
        return Integer(r.get_num());
    };
    for (long row = 0; row < n; ++row)
        for (long k = 0; k <= m; ++k) s(row, row + k) = as_int(p.coeff(m - k));
    for (long row = 0; row < m; ++row)
        for (long k = 0; k <= n; ++k) s(n + row, row + k) = as_int(q.coeff(n - k));
    return determinant(std::move(s));
}

/// Lagrange interpolation through (x_i, y_i) with distinct x_i.
inline Polynomial interpolate(const std::vector<Rational>& xs, const std::vector<Rational>& ys) {
    Polynomial result;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        Polynomial basis = Polynomial::constant(1);
        Rational denom = 1;
        for (std::size_t j = 0; j < xs.size(); ++j) {
            if (j == i) continue;
            basis = basis * Polynomial(std::vector<Rational>{-xs[j], Rational(1)});
            denom *= xs[i] - xs[j];
        }
        result = result + Polynomial::constant(ys[i] / denom) * basis;
    }
    return result;
}

/// The polynomial whose roots are the n-th powers of the roots of a monic integer
/// polynomial p, computed as Res_y(p(y), x - y^n) by evaluation at deg(p)+1 points.
inline Polynomial power_root_polynomial(const Polynomial& p, std::size_t n) {
    const long d = p.degree();
    std::vector<Rational> xs;
    std::vector<Rational> ys;
    for (long k = 0; k <= d; ++k) {
        xs.emplace_back(k);
        std::vector<Rational> c(n + 1, Rational(0));
        c[0] = k;
        c[n] = -1;
        ys.emplace_back(resultant(p, Polynomial(std::move(c))));
    }
    return interpolate(xs, ys);
}

// Sturm sequences
// ~~~~~~~~~~~~~~~
inline std::vector<Polynomial> sturm_sequence(const Polynomial& p) {
    std::vector<Polynomial> seq{p, p.derivative()};
    while (!seq.back().is_zero()) {
        Polynomial r = -(seq[seq.size() - 2] % seq.back());
        if (r.is_zero()) break;
        seq.push_back(std::move(r));
    }
    return seq;
}

namespace detail {
inline int sign_of(const Rational& v) { return sgn(v); }

inline std::size_t sign_changes(const std::vector<Polynomial>& seq, const Rational& x) {
    std::size_t changes = 0;
    int last = 0;
    for (const auto& q : seq) {
        const int s = sign_of(q(x));
        if (s == 0) continue;
        if (last != 0 && s != last) ++changes;
        last = s;
    }
    return changes;
}
} // namespace detail

/// Number of distinct real roots of p in the half-open interval (a, b].
inline std::size_t count_real_roots(const std::vector<Polynomial>& seq, const Rational& a, const Rational& b) {
    return detail::sign_changes(seq, a) - detail::sign_changes(seq, b);
}

/// Cauchy bound: every root has modulus below the returned value.
inline Rational root_bound(const Polynomial& p) {
    Rational m = 0;
    for (long i = 0; i < p.degree(); ++i) m = std::max(m, Rational(abs(p.coeff(i) / p.leading())));
    return m + 1;
}

/// Rational isolating interval [lo, hi] for a single real root of a square-free polynomial.
struct RootInterval {
    Rational lo;
    Rational hi;
    double approx = 0.0;
};

/// Isolates the largest real root of the square-free polynomial p in (lower, bound],
/// shrinking the interval below the requested width. Returns false if none exists.
inline bool isolate_largest_root(const Polynomial& p, const Rational& lower, const Rational& width, RootInterval& out) {
    const auto seq = sturm_sequence(p);
    Rational hi = root_bound(p);
    if (hi <= lower) return false;
    if (count_real_roots(seq, lower, hi) == 0) return false;
    Rational lo = lower;
    // Narrow until exactly one root lies in (lo, hi] and it is the largest one.
    while (count_real_roots(seq, lo, hi) > 1 || hi - lo > width) {
        const Rational mid = (lo + hi) / 2;
        if (count_real_roots(seq, mid, hi) >= 1) lo = mid;
        else hi = mid;
    }
    out.lo = lo;
    out.hi = hi;
    // Polish in floating point inside the certified bracket.
    double a = lo.get_d();
    double b = hi.get_d();
    for (int it = 0; it < 200 && b - a > 0; ++it) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        const double fa = p.eval(a);
        const double fm = p.eval(m);
        if ((fa <= 0 && fm <= 0) || (fa >= 0 && fm >= 0)) a = m;
        else b = m;
    }
    out.approx = 0.5 * (a + b);
    return true;
}

/// k-th cyclotomic polynomial over the integers.
inline Polynomial cyclotomic(std::size_t k) {
    Polynomial num = Polynomial::monomial(k) - Polynomial::constant(1);
    for (std::size_t d = 1; d < k; ++d)
        if (k % d == 0) num = num / cyclotomic(d);
    return num;
}

} // namespace horocat
